#ifndef KCACHE_SIMULATOR_HPP
#define KCACHE_SIMULATOR_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "kcache/cache.hpp"
#include "kcache/trace.hpp"

namespace kcache {

/// Replays a trace through a fresh cache, batch-by-batch grouped by
/// iteration, with row payloads elided. Runs through the same cache
/// implementation the trainer uses, so replaying a trainer-emitted trace
/// with the trainer's configuration reproduces its statistics exactly.
CacheStats replay_trace(const AccessTrace& trace, CachePolicy policy, std::size_t capacity,
                        double lambda, int workers = 1);

/// Offline-optimal (MIN) replay: every miss admits, evicting the cached
/// item whose next use lies farthest ahead, never-used-again items first.
/// Optimal over all demand (always-admit) policies; admission-controlled
/// strategies can exceed it only on adversarial loops far smaller than
/// the cache.
CacheStats belady_opt_replay(const AccessTrace& trace, std::size_t capacity);

struct StrategyResult {
    std::string policy;
    CacheStats stats;
};

/// One row per replacement strategy plus the offline optimum.
std::vector<StrategyResult> compare_strategies(const AccessTrace& trace, std::size_t capacity,
                                               double lambda, int workers = 1);

void write_comparison_csv(const std::vector<StrategyResult>& rows, std::size_t capacity,
                          std::ostream& out);

}  // namespace kcache

#endif
