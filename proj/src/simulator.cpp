#include "kcache/simulator.hpp"

#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace kcache {

CacheStats replay_trace(const AccessTrace& trace, CachePolicy policy, std::size_t capacity,
                        double lambda, int workers) {
    if (policy == CachePolicy::none)
        throw std::invalid_argument("replay_trace: policy must be lru, lfu, lat, efu or hcst");
    if (capacity < 1) throw std::invalid_argument("replay_trace: capacity must be >= 1");

    CacheConfig config;
    config.capacity = capacity;
    config.policy = policy;
    config.lambda = lambda;
    config.workers = workers;
    config.q = trace.q > 0 ? trace.q : 1;
    config.n_items = trace.n;
    config.store_rows = false;
    KernelRowCache cache(config);

    std::size_t pos = 0;
    std::vector<int> batch;
    while (pos < trace.events.size()) {
        const std::int64_t iteration = trace.events[pos].iteration;
        batch.clear();
        while (pos < trace.events.size() && trace.events[pos].iteration == iteration)
            batch.push_back(trace.events[pos++].row_index);
        auto access = cache.access_batch(batch, iteration);
        if (!access.misses.empty()) cache.insert_batch(access.misses, iteration);
        cache.maybe_checkpoint();
    }
    return cache.stats();
}

CacheStats belady_opt_replay(const AccessTrace& trace, std::size_t capacity) {
    if (capacity < 1) throw std::invalid_argument("belady_opt_replay: capacity must be >= 1");
    constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

    // next_use[pos]: position of the following access to the same item.
    const std::size_t m = trace.events.size();
    std::vector<std::int64_t> next_use(m, kNever);
    std::unordered_map<int, std::size_t> last_seen;
    last_seen.reserve(trace.n);
    for (std::size_t pos = m; pos-- > 0;) {
        int item = trace.events[pos].row_index;
        auto it = last_seen.find(item);
        if (it != last_seen.end()) next_use[pos] = static_cast<std::int64_t>(it->second);
        last_seen[item] = pos;
    }

    CacheStats stats;
    // Cached items keyed by (next use, item); rbegin is the eviction
    // victim: farthest next use (never-used-again sorts last), smallest
    // row index among ties. Every miss admits, as in classic MIN.
    struct FartherFirst {
        bool operator()(const std::pair<std::int64_t, int>& a,
                        const std::pair<std::int64_t, int>& b) const {
            if (a.first != b.first) return a.first < b.first;
            return a.second > b.second;
        }
    };
    std::set<std::pair<std::int64_t, int>, FartherFirst> cached;
    std::unordered_map<int, std::int64_t> cached_next;
    cached_next.reserve(capacity);

    std::int64_t prev_iteration = 0;
    std::int64_t batch_accesses = 0, batch_hits = 0;
    auto flush_iteration = [&](std::int64_t iteration) {
        if (batch_accesses > 0) stats.per_iteration.push_back({iteration, batch_accesses, batch_hits});
        batch_accesses = batch_hits = 0;
    };

    for (std::size_t pos = 0; pos < m; ++pos) {
        const TraceEvent& e = trace.events[pos];
        if (e.iteration != prev_iteration) {
            flush_iteration(prev_iteration);
            prev_iteration = e.iteration;
        }
        ++stats.accesses;
        ++batch_accesses;
        auto it = cached_next.find(e.row_index);
        if (it != cached_next.end()) {
            ++stats.hits;
            ++batch_hits;
            cached.erase({it->second, e.row_index});
            cached.insert({next_use[pos], e.row_index});
            it->second = next_use[pos];
            continue;
        }
        ++stats.misses;
        if (cached_next.size() >= capacity) {
            auto farthest = *cached.rbegin();
            cached.erase(farthest);
            cached_next.erase(farthest.second);
        }
        cached.insert({next_use[pos], e.row_index});
        cached_next[e.row_index] = next_use[pos];
        ++stats.admissions;
    }
    flush_iteration(prev_iteration);
    return stats;
}

std::vector<StrategyResult> compare_strategies(const AccessTrace& trace, std::size_t capacity,
                                               double lambda, int workers) {
    std::vector<StrategyResult> rows;
    for (CachePolicy policy : {CachePolicy::lru, CachePolicy::lfu, CachePolicy::lat,
                               CachePolicy::efu, CachePolicy::hcst})
        rows.push_back({to_string(policy), replay_trace(trace, policy, capacity, lambda, workers)});
    rows.push_back({"opt", belady_opt_replay(trace, capacity)});
    return rows;
}

void write_comparison_csv(const std::vector<StrategyResult>& rows, std::size_t capacity,
                          std::ostream& out) {
    char buf[32];
    out << "policy,capacity,accesses,hits,hit_ratio,switches\n";
    for (const StrategyResult& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.stats.hit_ratio());
        out << r.policy << ',' << capacity << ',' << r.stats.accesses << ',' << r.stats.hits
            << ',' << buf << ',' << r.stats.switches << '\n';
    }
}

}  // namespace kcache
