#include "kcache/cache.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace kcache {

std::string to_string(CachePolicy p) {
    switch (p) {
        case CachePolicy::none: return "none";
        case CachePolicy::lru: return "lru";
        case CachePolicy::lfu: return "lfu";
        case CachePolicy::lat: return "lat";
        case CachePolicy::efu: return "efu";
        case CachePolicy::hcst: return "hcst";
    }
    return "unknown";
}

CachePolicy cache_policy_from_string(const std::string& name) {
    if (name == "none") return CachePolicy::none;
    if (name == "lru") return CachePolicy::lru;
    if (name == "lfu") return CachePolicy::lfu;
    if (name == "lat") return CachePolicy::lat;
    if (name == "efu") return CachePolicy::efu;
    if (name == "hcst") return CachePolicy::hcst;
    throw std::runtime_error("unknown cache policy: " + name);
}

std::int64_t CacheConfig::checkpoint_interval() const {
    std::int64_t nc = std::llround(lambda * static_cast<double>(capacity) / q);
    return std::max<std::int64_t>(nc, 1);
}

void CacheConfig::validate() const {
    if (policy != CachePolicy::none && capacity < 1)
        throw std::invalid_argument("cache config: capacity must be >= 1");
    if (lambda <= 0) throw std::invalid_argument("cache config: lambda must be > 0");
    if (workers < 1) throw std::invalid_argument("cache config: workers must be >= 1");
    if (q < 1) throw std::invalid_argument("cache config: q must be >= 1");
    if (n_items < 1) throw std::invalid_argument("cache config: n_items must be >= 1");
}

std::vector<double> CacheStats::stage_hit_ratios(int stages) const {
    std::vector<std::int64_t> acc(stages, 0), hit(stages, 0);
    // Slices from a shared-cache run start above iteration 1; stages are
    // relative to the logged span.
    std::int64_t base = per_iteration.empty() ? 0 : per_iteration.front().iteration - 1;
    std::int64_t total_iters = per_iteration.empty() ? 0 : per_iteration.back().iteration - base;
    if (total_iters > 0) {
        for (const IterationStat& it : per_iteration) {
            int stage = stage_of_iteration(it.iteration - base, total_iters, stages);
            acc[stage - 1] += it.accesses;
            hit[stage - 1] += it.hits;
        }
    }
    std::vector<double> out(stages, 0.0);
    for (int t = 0; t < stages; ++t)
        if (acc[t] > 0) out[t] = static_cast<double>(hit[t]) / acc[t];
    return out;
}

CacheStats CacheStats::delta(const CacheStats& later, const CacheStats& earlier) {
    CacheStats d;
    d.accesses = later.accesses - earlier.accesses;
    d.hits = later.hits - earlier.hits;
    d.misses = later.misses - earlier.misses;
    d.admissions = later.admissions - earlier.admissions;
    d.rejections = later.rejections - earlier.rejections;
    d.switches = later.switches - earlier.switches;
    d.per_iteration.assign(later.per_iteration.begin() + earlier.per_iteration.size(),
                           later.per_iteration.end());
    return d;
}

KernelRowCache::KernelRowCache(CacheConfig config) : config_(config) {
    config_.validate();
    if (config_.policy != CachePolicy::none) slots_.resize(config_.capacity);
    slot_of_row_.assign(config_.n_items, -1);
    freq_.assign(config_.n_items, 0);
    last_iter_.assign(config_.n_items, -1);
    trace_.n = config_.n_items;
    trace_.q = config_.q;
}

KernelRowCache::AccessResult KernelRowCache::access_batch(std::span<const int> indices,
                                                          std::int64_t iteration) {
    if (iteration <= last_iteration_)
        throw std::invalid_argument("access_batch: iteration must be strictly increasing");
    std::unordered_set<int> seen;
    seen.reserve(indices.size());

    AccessResult result;
    const auto s = static_cast<std::int64_t>(config_.capacity);
    std::int64_t batch_hits = 0;
    for (int idx : indices) {
        if (idx < 0 || idx >= config_.n_items)
            throw std::out_of_range("access_batch: row index out of range");
        if (!seen.insert(idx).second)
            throw std::invalid_argument("access_batch: duplicate row index " + std::to_string(idx));

        ++freq_[idx];
        if (last_iter_[idx] >= 0 && iteration - last_iter_[idx] < s)
            ++hcst_.small_interval_accesses;
        last_iter_[idx] = iteration;

        ++stats_.accesses;
        trace_.events.push_back({iteration, idx, next_seq_++});
        if (config_.policy != CachePolicy::none && slot_of_row_[idx] >= 0) {
            ++stats_.hits;
            ++hcst_.hits_since_checkpoint;
            ++batch_hits;
            result.hits.emplace_back(idx, config_.store_rows ? &slots_[slot_of_row_[idx]] : nullptr);
        } else {
            ++stats_.misses;
            result.misses.push_back(idx);
        }
    }
    stats_.per_iteration.push_back({iteration, static_cast<std::int64_t>(indices.size()), batch_hits});
    ++hcst_.iterations_since_checkpoint;
    last_iteration_ = iteration;
    trace_.total_iterations = iteration;
    return result;
}

int KernelRowCache::insert_batch(std::vector<KernelRow> rows, std::int64_t iteration) {
    std::vector<Incoming> incoming;
    incoming.reserve(rows.size());
    for (KernelRow& row : rows) {
        if (config_.store_rows &&
            row.values.size() != static_cast<std::size_t>(config_.n_items))
            throw std::invalid_argument("insert_batch: row length != n");
        incoming.push_back({row.row_index, std::move(row.values)});
    }
    return insert_internal(std::move(incoming), iteration);
}

int KernelRowCache::insert_batch(std::span<const int> row_indices, std::int64_t iteration) {
    std::vector<Incoming> incoming;
    incoming.reserve(row_indices.size());
    for (int idx : row_indices) incoming.push_back({idx, {}});
    return insert_internal(std::move(incoming), iteration);
}

int KernelRowCache::insert_internal(std::vector<Incoming> incoming, std::int64_t iteration) {
    (void)iteration;
    if (config_.policy == CachePolicy::none) {
        stats_.rejections += static_cast<std::int64_t>(incoming.size());
        return 0;
    }
    for (const Incoming& in : incoming) {
        if (in.row < 0 || in.row >= config_.n_items)
            throw std::out_of_range("insert_batch: row index out of range");
        if (slot_of_row_[in.row] >= 0)
            throw std::invalid_argument("insert_batch: row already cached");
        if (freq_[in.row] == 0)
            throw std::invalid_argument("insert_batch: row was never accessed");
    }
    // Competing rows are resolved in ascending row-index order.
    std::sort(incoming.begin(), incoming.end(),
              [](const Incoming& a, const Incoming& b) { return a.row < b.row; });

    int admitted = 0;
    std::size_t next = 0;

    // Free slots are filled before any replacement decision.
    while (filled_ < config_.capacity && next < incoming.size()) {
        Incoming& in = incoming[next++];
        std::size_t slot = filled_++;
        slots_[slot].row_index = in.row;
        slots_[slot].values = std::move(in.values);
        slot_of_row_[in.row] = static_cast<std::int32_t>(slot);
        ++stats_.admissions;
        ++admitted;
    }
    if (next == incoming.size()) return admitted;

    const CachePolicy effective =
        config_.policy == CachePolicy::hcst
            ? (active_ == HcstActive::efu ? CachePolicy::efu : CachePolicy::lru)
            : config_.policy;

    struct Outcome {
        std::size_t slot = 0;
        int old_row = -1;
        int new_row = -1;
        bool admitted = false;
    };
    const std::size_t remaining = incoming.size() - next;
    std::vector<Outcome> outcomes(remaining);

    // The leftover rows and the slot array are split into p near-equal
    // groups and segments; worker k replaces only within segment k. Slot
    // writes are confined to the owning worker, the row->slot map and the
    // counters are only touched by the coordinator afterwards.
    const std::size_t p =
        std::min<std::size_t>(static_cast<std::size_t>(config_.workers), config_.capacity);
    auto run_group = [&](std::size_t k) {
        const std::size_t g_begin = next + k * remaining / p;
        const std::size_t g_end = next + (k + 1) * remaining / p;
        const std::size_t seg_begin = k * config_.capacity / p;
        const std::size_t seg_end = (k + 1) * config_.capacity / p;
        for (std::size_t i = g_begin; i < g_end; ++i) {
            Incoming& in = incoming[i];
            Outcome& out = outcomes[i - next];
            out.new_row = in.row;
            auto victim = find_victim(effective, seg_begin, seg_end, freq_[in.row]);
            if (victim) {
                out.slot = *victim;
                out.old_row = slots_[*victim].row_index;
                out.admitted = true;
                slots_[*victim].row_index = in.row;
                slots_[*victim].values = std::move(in.values);
            }
        }
    };
    if (p <= 1) {
        run_group(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(p);
        for (std::size_t k = 0; k < p; ++k) pool.emplace_back(run_group, k);
        for (auto& t : pool) t.join();
    }
    for (const Outcome& out : outcomes) {
        if (out.admitted) {
            slot_of_row_[out.old_row] = -1;
            slot_of_row_[out.new_row] = static_cast<std::int32_t>(out.slot);
            ++stats_.admissions;
            ++admitted;
        } else {
            ++stats_.rejections;
        }
    }
    return admitted;
}

std::optional<std::size_t> KernelRowCache::find_victim(CachePolicy policy, std::size_t seg_begin,
                                                       std::size_t seg_end,
                                                       std::int64_t incoming_freq) const {
    if (policy == CachePolicy::none || policy == CachePolicy::hcst)
        throw std::invalid_argument("find_victim: policy must be lru, lfu, lat or efu");
    if (seg_begin >= seg_end || seg_end > slots_.size())
        throw std::invalid_argument("find_victim: empty or out-of-range segment");

    bool have = false;
    std::size_t best = seg_begin;
    auto better = [&](std::size_t a, std::size_t b) {  // is slot a a better victim than b
        const KernelRow& ra = slots_[a];
        const KernelRow& rb = slots_[b];
        switch (policy) {
            case CachePolicy::lru:
                return last_iter_[ra.row_index] < last_iter_[rb.row_index];
            case CachePolicy::lat:
                return ra.row_index < rb.row_index;
            case CachePolicy::lfu:
            case CachePolicy::efu: {
                // Minimum frequency; among equals the least recently used.
                if (freq_[ra.row_index] != freq_[rb.row_index])
                    return freq_[ra.row_index] < freq_[rb.row_index];
                return last_iter_[ra.row_index] < last_iter_[rb.row_index];
            }
            default: return false;
        }
    };
    for (std::size_t slot = seg_begin; slot < seg_end; ++slot) {
        if (slots_[slot].row_index < 0)
            throw std::logic_error("find_victim: segment contains an empty slot");
        if (!have) {
            best = slot;
            have = true;
        } else if (better(slot, best)) {
            best = slot;
        }
    }
    if (policy == CachePolicy::efu && freq_[slots_[best].row_index] >= incoming_freq)
        return std::nullopt;  // admission denied: nothing strictly less frequent
    return best;
}

CheckpointDecision KernelRowCache::hcst_checkpoint() {
    if (config_.policy != CachePolicy::hcst)
        throw std::logic_error("hcst_checkpoint: policy is not hcst");
    CheckpointDecision decision;
    if (active_ == HcstActive::efu) {
        // H_hit is the measured EFU hits, H_s estimates what LRU would hit.
        if (hcst_.hits_since_checkpoint < hcst_.small_interval_accesses) {
            hcst_.saved_efu_hits = hcst_.hits_since_checkpoint;
            active_ = HcstActive::lru;
            ++stats_.switches;
            decision.switched = true;
        }
    } else {
        // H_hit is the measured LRU hits, the saved EFU period estimates EFU.
        if (hcst_.hits_since_checkpoint < hcst_.saved_efu_hits) {
            active_ = HcstActive::efu;
            ++stats_.switches;
            decision.switched = true;
        }
    }
    hcst_.hits_since_checkpoint = 0;
    hcst_.small_interval_accesses = 0;
    hcst_.iterations_since_checkpoint = 0;
    decision.active = active_;
    return decision;
}

std::optional<CheckpointDecision> KernelRowCache::maybe_checkpoint() {
    if (config_.policy != CachePolicy::hcst) return std::nullopt;
    if (hcst_.iterations_since_checkpoint < config_.checkpoint_interval()) return std::nullopt;
    return hcst_checkpoint();
}

void KernelRowCache::reset_controller() {
    active_ = HcstActive::efu;
    hcst_ = HcstCounters{};
}

bool KernelRowCache::contains(int row_index) const {
    return row_index >= 0 && row_index < config_.n_items && slot_of_row_[row_index] >= 0;
}

const KernelRow* KernelRowCache::peek(int row_index) const {
    if (!contains(row_index)) return nullptr;
    return &slots_[slot_of_row_[row_index]];
}

AccessTrace KernelRowCache::take_trace() {
    AccessTrace out = std::move(trace_);
    trace_ = AccessTrace{};
    trace_.n = config_.n_items;
    trace_.q = config_.q;
    return out;
}

BenefitEstimate estimate_benefit(std::int64_t hits, std::int64_t copies, std::int64_t n,
                                 std::int64_t d, double flops, double bandwidth) {
    if (flops <= 0) throw std::invalid_argument("estimate_benefit: flops must be > 0");
    if (bandwidth <= 0) throw std::invalid_argument("estimate_benefit: bandwidth must be > 0");
    BenefitEstimate est;
    est.saved_seconds = static_cast<double>(hits) * (2.0 * d - 1.0) * n / flops;
    est.copy_seconds = 4.0 * static_cast<double>(copies) * n / bandwidth;
    est.benefit_seconds = est.saved_seconds - est.copy_seconds;
    return est;
}

}  // namespace kcache
