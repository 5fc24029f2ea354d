#include "kcache/trace_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace kcache {

namespace {

// Uniform double in [0, 1) built directly from the engine's bits, so the
// stream does not depend on the standard library's distribution
// implementation.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class ZipfSampler {
public:
    ZipfSampler(std::int64_t items, double alpha) : cdf_(items) {
        double sum = 0.0;
        for (std::int64_t r = 0; r < items; ++r) {
            sum += std::pow(static_cast<double>(r + 1), -alpha);
            cdf_[r] = sum;
        }
        for (double& c : cdf_) c /= sum;
    }

    std::int64_t draw(std::mt19937_64& rng) const {
        double u = next_uniform(rng);
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return it - cdf_.begin();
    }

private:
    std::vector<double> cdf_;
};

void append_skewed_iterations(AccessTrace& trace, const ZipfSampler& sampler,
                              std::mt19937_64& rng, std::int64_t iterations, int q,
                              std::int64_t& iteration, std::int64_t& seq) {
    std::unordered_set<std::int64_t> in_batch;
    for (std::int64_t t = 0; t < iterations; ++t) {
        ++iteration;
        in_batch.clear();
        while (static_cast<int>(in_batch.size()) < q) {
            std::int64_t item = sampler.draw(rng);
            if (in_batch.insert(item).second)
                trace.events.push_back({iteration, static_cast<int>(item), seq++});
        }
    }
}

}  // namespace

AccessTrace gen_zipf_trace(std::int64_t items, std::int64_t accesses, int q, double alpha,
                           std::uint64_t seed) {
    if (items < 1 || q < 1 || q > items) throw std::invalid_argument("gen_zipf_trace: bad shape");
    if (accesses % q != 0)
        throw std::invalid_argument("gen_zipf_trace: accesses must be a multiple of q");

    AccessTrace trace;
    trace.n = items;
    trace.q = q;
    ZipfSampler sampler(items, alpha);
    std::mt19937_64 rng(seed);
    std::int64_t iteration = 0, seq = 0;
    append_skewed_iterations(trace, sampler, rng, accesses / q, q, iteration, seq);
    trace.total_iterations = iteration;
    return trace;
}

AccessTrace gen_two_phase_trace(const TwoPhaseSpec& spec) {
    if (spec.skew_items < 1 || spec.q < 1 || spec.q > spec.skew_items ||
        spec.q > spec.loop_items)
        throw std::invalid_argument("gen_two_phase_trace: bad shape");

    AccessTrace trace;
    trace.n = spec.skew_items + spec.loop_items;
    trace.q = spec.q;
    std::mt19937_64 rng(spec.seed);
    std::int64_t iteration = 0, seq = 0;

    ZipfSampler sampler(spec.skew_items, spec.alpha);
    append_skewed_iterations(trace, sampler, rng, spec.skew_iterations, spec.q, iteration, seq);

    // Phase B: deterministic cycle over the loop block.
    std::int64_t cursor = 0;
    for (std::int64_t t = 0; t < spec.loop_iterations; ++t) {
        ++iteration;
        for (int k = 0; k < spec.q; ++k) {
            std::int64_t item = spec.skew_items + cursor;
            cursor = (cursor + 1) % spec.loop_items;
            trace.events.push_back({iteration, static_cast<int>(item), seq++});
        }
    }
    trace.total_iterations = iteration;
    return trace;
}

double zipf_top_mass(std::int64_t items, std::int64_t top, double alpha) {
    double total = 0.0, head = 0.0;
    for (std::int64_t r = 1; r <= items; ++r) {
        double w = std::pow(static_cast<double>(r), -alpha);
        total += w;
        if (r <= top) head += w;
    }
    return head / total;
}

}  // namespace kcache
