#ifndef KCACHE_CACHE_HPP
#define KCACHE_CACHE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kcache/kernel.hpp"
#include "kcache/trace.hpp"

namespace kcache {

/// Replacement strategies. `none` disables storage but still counts
/// accesses and emits the trace, so cached and uncached runs stay
/// comparable. `hcst` switches between efu and lru at checkpoints.
enum class CachePolicy { none, lru, lfu, lat, efu, hcst };

std::string to_string(CachePolicy p);
CachePolicy cache_policy_from_string(const std::string& name);

/// The strategy HCST is currently running.
enum class HcstActive { efu, lru };

struct CacheConfig {
    std::size_t capacity = 0;   // s: max items
    CachePolicy policy = CachePolicy::none;
    double lambda = 2.0;        // checkpoint spacing factor
    int workers = 1;            // p: parallel replacement workers
    int q = 1;                  // items accessed per iteration
    std::int64_t n_items = 0;   // item universe size (dataset cardinality)
    bool store_rows = true;     // false for trace replay (payloads elided)

    /// Checkpoint interval N_c = round(lambda * s / q), floored at 1.
    std::int64_t checkpoint_interval() const;

    void validate() const;
};

/// Hit/miss counters plus a per-iteration log so hit ratios can be
/// reported per training stage after the fact.
struct CacheStats {
    std::int64_t accesses = 0;
    std::int64_t hits = 0;
    std::int64_t misses = 0;
    std::int64_t admissions = 0;
    std::int64_t rejections = 0;
    std::int64_t switches = 0;

    struct IterationStat {
        std::int64_t iteration = 0;
        std::int64_t accesses = 0;
        std::int64_t hits = 0;
    };
    std::vector<IterationStat> per_iteration;

    double hit_ratio() const { return accesses > 0 ? static_cast<double>(hits) / accesses : 0.0; }

    /// Hit ratio per stage, splitting the logged iteration range into
    /// `stages` equal parts.
    std::vector<double> stage_hit_ratios(int stages) const;

    /// Counters accumulated after `earlier` was snapshotted.
    static CacheStats delta(const CacheStats& later, const CacheStats& earlier);
};

/// Checkpoint bookkeeping for the EFU/LRU switch decision.
struct HcstCounters {
    std::int64_t hits_since_checkpoint = 0;       // H_hit
    std::int64_t small_interval_accesses = 0;     // H_s: accesses with reuse interval < s
    std::int64_t saved_efu_hits = 0;              // H_hit of the last completed EFU period
    std::int64_t iterations_since_checkpoint = 0;
};

struct CheckpointDecision {
    bool switched = false;
    HcstActive active = HcstActive::efu;
};

/// Kernel-row cache with selectable replacement strategy.
///
/// A single coordinator drives it: access_batch for the rows an iteration
/// requests, insert_batch for the rows that missed and were recomputed,
/// maybe_checkpoint at the end of the iteration. Two counters are kept per
/// item across all policies (access frequency and last access iteration),
/// so HCST can switch strategy without losing history.
class KernelRowCache {
public:
    explicit KernelRowCache(CacheConfig config);

    struct AccessResult {
        /// (row index, stored row) pairs; pointers stay valid until the
        /// next insert_batch. Null when payloads are elided.
        std::vector<std::pair<int, const KernelRow*>> hits;
        std::vector<int> misses;
    };

    /// Looks up a batch of distinct row indices. Updates both per-item
    /// counters, hit/miss statistics and the access trace. Iterations must
    /// be strictly increasing across calls.
    AccessResult access_batch(std::span<const int> indices, std::int64_t iteration);

    /// Admits freshly computed rows after a miss, filling free slots first
    /// and then replacing per the active strategy. Rows competing for
    /// admission are handled in ascending row-index order; with p > 1 the
    /// remaining rows and the slot array are split into p disjoint groups
    /// and segments, one worker each. Returns the number admitted.
    int insert_batch(std::vector<KernelRow> rows, std::int64_t iteration);

    /// Payload-elided variant for trace replay; identical decisions.
    int insert_batch(std::span<const int> row_indices, std::int64_t iteration);

    /// Victim slot in [seg_begin, seg_end) under the given strategy, or
    /// nullopt when efu denies admission (no strictly lower frequency).
    /// The segment must be fully occupied.
    std::optional<std::size_t> find_victim(CachePolicy policy, std::size_t seg_begin,
                                           std::size_t seg_end, std::int64_t incoming_freq) const;

    /// HCST checkpoint: compares the measured hits of the active strategy
    /// against the estimate for the inactive one, switches when the
    /// estimate wins, and resets the period counters. Cache contents and
    /// per-item counters are retained across switches.
    CheckpointDecision hcst_checkpoint();

    /// Fires hcst_checkpoint if N_c iterations elapsed since the last one.
    std::optional<CheckpointDecision> maybe_checkpoint();

    /// Re-arms the controller for a new solver in a multi-output run:
    /// back to EFU with zeroed checkpoint counters. Contents, per-item
    /// counters and cumulative stats are kept.
    void reset_controller();

    bool contains(int row_index) const;
    const KernelRow* peek(int row_index) const;
    std::size_t occupied() const { return filled_; }

    const CacheConfig& config() const { return config_; }
    const CacheStats& stats() const { return stats_; }
    const HcstCounters& hcst_counters() const { return hcst_; }
    HcstActive active_policy() const { return active_; }
    std::int64_t frequency(int row_index) const { return freq_.at(row_index); }
    std::int64_t last_access_iteration(int row_index) const { return last_iter_.at(row_index); }

    const AccessTrace& trace() const { return trace_; }
    AccessTrace take_trace();
    std::int64_t last_iteration() const { return last_iteration_; }

private:
    struct Incoming {
        int row;
        std::vector<double> values;  // empty when payloads are elided
    };
    int insert_internal(std::vector<Incoming> incoming, std::int64_t iteration);

    CacheConfig config_;
    std::vector<KernelRow> slots_;       // slot array; row_index < 0 marks a free slot
    std::vector<std::int32_t> slot_of_row_;
    std::vector<std::int64_t> freq_;     // per-item access counter
    std::vector<std::int64_t> last_iter_;  // per-item last access iteration (-1 if never)
    std::size_t filled_ = 0;             // slots [0, filled_) are occupied
    HcstActive active_ = HcstActive::efu;
    HcstCounters hcst_;
    CacheStats stats_;
    AccessTrace trace_;
    std::int64_t last_iteration_ = 0;
    std::int64_t next_seq_ = 0;
};

/// Analytic caching benefit per the time model: seconds of kernel
/// computation saved by h hits, seconds spent copying u replaced rows,
/// and their difference.
struct BenefitEstimate {
    double saved_seconds = 0.0;  // T_s
    double copy_seconds = 0.0;   // T_c
    double benefit_seconds = 0.0;  // T_b = T_s - T_c
};

BenefitEstimate estimate_benefit(std::int64_t hits, std::int64_t copies, std::int64_t n,
                                 std::int64_t d, double flops, double bandwidth);

}  // namespace kcache

#endif
