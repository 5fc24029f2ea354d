#ifndef KCACHE_TRACE_HPP
#define KCACHE_TRACE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace kcache {

/// One kernel-row request, independent of any caching strategy.
struct TraceEvent {
    std::int64_t iteration = 0;  // outer training iteration, 1-based
    int row_index = 0;           // item id (kernel matrix row)
    std::int64_t seq = 0;        // global access sequence number
};

/// Ordered record of every row request made during a run.
struct AccessTrace {
    std::vector<TraceEvent> events;
    std::int64_t n = 0;                 // item universe size
    int q = 0;                          // nominal batch size per iteration
    std::int64_t total_iterations = 0;  // last iteration number seen

    /// Throws if events are out of order, repeat a row within an
    /// iteration, or reference a row outside [0, n).
    void validate() const;
};

void write_trace(const AccessTrace& trace, std::ostream& out);
void write_trace_file(const AccessTrace& trace, const std::string& path);
AccessTrace read_trace(std::istream& in);
AccessTrace read_trace_file(const std::string& path);

/// Reuse interval bands; thresholds scale with the cache capacity s
/// (small < s, medium < 2s, large < 3s, huge otherwise).
enum class ReuseLevel { small, medium, large, huge };

constexpr std::array<const char*, 4> kReuseLevelNames = {"small", "medium", "large", "huge"};

ReuseLevel classify_reuse_interval(std::int64_t r, std::int64_t s);

/// Whether reuse intervals are measured in outer iterations (the default)
/// or in access-sequence positions.
enum class IntervalUnit { iterations, positions };

/// Cumulative reuse-interval distribution of one training stage.
struct StageCdf {
    int stage = 0;                       // 1-based
    std::array<double, 4> cumulative{};  // at small/medium/large/huge
    std::int64_t samples = 0;            // repeated accesses attributed here
};

/// Splits the run into `stages` equal iteration ranges and reports, per
/// stage, the cumulative fraction of reuse intervals at each level. First
/// accesses are excluded; an interval belongs to the stage of its second
/// access. Throws if the trace contains no repeated access at all.
std::vector<StageCdf> reuse_interval_cdf_by_stage(const AccessTrace& trace, int stages,
                                                  std::int64_t s,
                                                  IntervalUnit unit = IntervalUnit::iterations);

/// Histogram of |frequency difference| of every item between consecutive
/// stages. Total mass is n * (stages - 1).
std::map<std::int64_t, std::int64_t> frequency_difference_by_stage(const AccessTrace& trace,
                                                                   int stages);

/// Stage of an iteration: ceil(iteration * stages / total), clamped to [1, stages].
int stage_of_iteration(std::int64_t iteration, std::int64_t total_iterations, int stages);

void write_stage_cdf_csv(const std::vector<StageCdf>& cdfs, std::ostream& out);
void write_frequency_difference_csv(const std::map<std::int64_t, std::int64_t>& hist,
                                    std::ostream& out);

}  // namespace kcache

#endif
