#ifndef KCACHE_KERNEL_HPP
#define KCACHE_KERNEL_HPP

#include <span>
#include <string>
#include <vector>

#include "kcache/dataset.hpp"

namespace kcache {

enum class KernelKind { linear, gaussian, sigmoid };

std::string to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& name);

/// Kernel function parameters. C rides along because trainer and cache
/// configuration are usually derived from the same place.
struct KernelParams {
    KernelKind kind = KernelKind::gaussian;
    double gamma = 0.5;   // gaussian / sigmoid scale, > 0
    double coef0 = 0.0;   // sigmoid offset
    double C = 1.0;       // regularization, > 0

    void validate() const;
};

/// One row of the kernel matrix: values[j] = K(x_i, x_j) for all j.
/// This is the unit of caching and replacement.
struct KernelRow {
    int row_index = -1;
    std::vector<double> values;
};

/// Self dot products ||x_i||^2, computed once up front.
std::vector<double> precompute_self_dots(const Dataset& ds);

/// Single kernel value between two arbitrary instances (used by predict).
double kernel_value(const SparseInstance& a, const SparseInstance& b, const KernelParams& params);

/// Computes the kernel row of instance `index` against the whole dataset.
/// The per-row summation order is fixed (ascending feature index), so the
/// same row is always bit-identical no matter when or where it is computed.
KernelRow compute_kernel_row(int index, const Dataset& ds, const KernelParams& params,
                             std::span<const double> self_dots);

/// Batch version; rows are independent, so a batch may be split across
/// `workers` threads without changing any result bit.
std::vector<KernelRow> compute_kernel_rows(std::span<const int> indices, const Dataset& ds,
                                           const KernelParams& params,
                                           std::span<const double> self_dots, int workers = 1);

}  // namespace kcache

#endif
