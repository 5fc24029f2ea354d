#ifndef KCACHE_TRACE_GEN_HPP
#define KCACHE_TRACE_GEN_HPP

#include <cstdint>

#include "kcache/trace.hpp"

namespace kcache {

/// Zipf-distributed access trace: each iteration draws q distinct items
/// from P(rank r) proportional to r^-alpha over `items` ranks. Fully
/// deterministic for a given seed, independent of the platform.
AccessTrace gen_zipf_trace(std::int64_t items, std::int64_t accesses, int q, double alpha,
                           std::uint64_t seed);

struct TwoPhaseSpec {
    std::int64_t skew_items = 5000;    // universe of the frequency-skewed phase
    double alpha = 1.2;                // skew of phase A
    std::int64_t skew_iterations = 3000;
    std::int64_t loop_items = 400;     // cyclic working set of phase B
    std::int64_t loop_iterations = 4500;
    int q = 50;
    std::uint64_t seed = 1;
};

/// Two-phase trace: an i.i.d. frequency-skewed phase followed by a cyclic
/// loop over a block of fresh items (ids starting at skew_items), whose
/// reuse intervals are all short. Exercises a strategy change.
AccessTrace gen_two_phase_trace(const TwoPhaseSpec& spec);

/// Probability mass of the `top` most likely ranks under Zipf(alpha) over
/// `items` ranks.
double zipf_top_mass(std::int64_t items, std::int64_t top, double alpha);

}  // namespace kcache

#endif
