#include "kcache/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace kcache {

std::string to_string(KernelKind k) {
    switch (k) {
        case KernelKind::linear: return "linear";
        case KernelKind::gaussian: return "gaussian";
        case KernelKind::sigmoid: return "sigmoid";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "gaussian" || name == "rbf") return KernelKind::gaussian;
    if (name == "sigmoid") return KernelKind::sigmoid;
    throw std::runtime_error("unknown kernel type: " + name);
}

void KernelParams::validate() const {
    if (C <= 0) throw std::invalid_argument("kernel params: C must be > 0");
    if (kind != KernelKind::linear && gamma <= 0)
        throw std::invalid_argument("kernel params: gamma must be > 0");
}

std::vector<double> precompute_self_dots(const Dataset& ds) {
    std::vector<double> dots(ds.instances.size());
    for (std::size_t i = 0; i < ds.instances.size(); ++i) dots[i] = ds.instances[i].self_dot();
    return dots;
}

double kernel_value(const SparseInstance& a, const SparseInstance& b, const KernelParams& params) {
    double uv = a.dot(b);
    switch (params.kind) {
        case KernelKind::linear:
            return uv;
        case KernelKind::gaussian:
            return std::exp(-params.gamma * (a.self_dot() + b.self_dot() - 2.0 * uv));
        case KernelKind::sigmoid:
            return std::tanh(params.gamma * uv + params.coef0);
    }
    throw std::logic_error("unreachable kernel kind");
}

KernelRow compute_kernel_row(int index, const Dataset& ds, const KernelParams& params,
                             std::span<const double> self_dots) {
    const int n = ds.size();
    if (index < 0 || index >= n)
        throw std::out_of_range("kernel row index out of range: " + std::to_string(index));

    KernelRow row;
    row.row_index = index;
    row.values.resize(n);
    const SparseInstance& xi = ds.instances[index];
    switch (params.kind) {
        case KernelKind::linear:
            for (int j = 0; j < n; ++j) row.values[j] = xi.dot(ds.instances[j]);
            break;
        case KernelKind::gaussian: {
            const double di = self_dots[index];
            for (int j = 0; j < n; ++j) {
                double uv = xi.dot(ds.instances[j]);
                row.values[j] = std::exp(-params.gamma * (di + self_dots[j] - 2.0 * uv));
            }
            break;
        }
        case KernelKind::sigmoid:
            for (int j = 0; j < n; ++j)
                row.values[j] = std::tanh(params.gamma * xi.dot(ds.instances[j]) + params.coef0);
            break;
    }
    return row;
}

std::vector<KernelRow> compute_kernel_rows(std::span<const int> indices, const Dataset& ds,
                                           const KernelParams& params,
                                           std::span<const double> self_dots, int workers) {
    std::vector<KernelRow> rows(indices.size());
    auto compute_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            rows[k] = compute_kernel_row(indices[k], ds, params, self_dots);
    };

    const std::size_t m = indices.size();
    if (workers <= 1 || m <= 1) {
        compute_range(0, m);
        return rows;
    }
    // Validate indices up front so worker threads never throw.
    for (int idx : indices) {
        if (idx < 0 || idx >= ds.size())
            throw std::out_of_range("kernel row index out of range: " + std::to_string(idx));
    }
    const std::size_t p = std::min<std::size_t>(static_cast<std::size_t>(workers), m);
    std::vector<std::thread> pool;
    pool.reserve(p);
    for (std::size_t k = 0; k < p; ++k)
        pool.emplace_back(compute_range, k * m / p, (k + 1) * m / p);
    for (auto& t : pool) t.join();
    return rows;
}

}  // namespace kcache
