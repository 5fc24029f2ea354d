#include "kcache/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace kcache {

namespace {
constexpr double kEtaFloor = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::int64_t SolverConfig::outer_cap(int n) const {
    if (max_outer > 0) return max_outer;
    return 10LL * ((n + q - 1) / q) * 100LL;
}

void SolverConfig::validate() const {
    params.validate();
    if (q < 2 || q % 2 != 0) throw std::invalid_argument("solver config: q must be even and >= 2");
    int W = working_set();
    if (W < q || W % 2 != 0)
        throw std::invalid_argument("solver config: working set size must be even and >= q");
    if (eps <= 0) throw std::invalid_argument("solver config: eps must be > 0");
    if (max_inner < 1) throw std::invalid_argument("solver config: max_inner must be >= 1");
    if (workers < 1) throw std::invalid_argument("solver config: workers must be >= 1");
}

void WorkingSetRows::add(int index, std::vector<double> values) {
    if (pos_[index] >= 0) {
        rows_[pos_[index]] = std::move(values);
        return;
    }
    pos_[index] = static_cast<std::int32_t>(rows_.size());
    indices_.push_back(index);
    rows_.push_back(std::move(values));
}

void WorkingSetRows::retain(std::span<const int> keep) {
    std::vector<int> old_indices = std::move(indices_);
    std::vector<std::vector<double>> old_rows = std::move(rows_);
    indices_.clear();
    rows_.clear();
    for (int idx : old_indices) pos_[idx] = -1;
    for (int idx : keep) {
        auto it = std::find(old_indices.begin(), old_indices.end(), idx);
        if (it == old_indices.end())
            throw std::logic_error("WorkingSetRows::retain: row not present");
        pos_[idx] = static_cast<std::int32_t>(rows_.size());
        indices_.push_back(idx);
        rows_.push_back(std::move(old_rows[it - old_indices.begin()]));
    }
}

const std::vector<double>& WorkingSetRows::row(int index) const {
    if (pos_[index] < 0) throw std::logic_error("WorkingSetRows::row: row not present");
    return rows_[pos_[index]];
}

bool in_upper_set(double alpha, double y, double C) {
    return (y > 0 && alpha < C) || (y < 0 && alpha > 0);
}

bool in_lower_set(double alpha, double y, double C) {
    return (y > 0 && alpha > 0) || (y < 0 && alpha < C);
}

ExtremePair select_extreme_pair(std::span<const double> f, std::span<const double> alpha,
                                std::span<const double> y, double C,
                                std::span<const int> candidates, const WorkingSetRows& rows) {
    ExtremePair pair;
    double f_u = kInf;
    for (int i : candidates) {
        if (in_upper_set(alpha[i], y[i], C) && f[i] < f_u) {
            f_u = f[i];
            pair.u = i;
        }
    }
    if (pair.u < 0) return pair;

    const std::vector<double>& row_u = rows.row(pair.u);
    const double k_uu = row_u[pair.u];
    double best = -kInf;
    for (int i : candidates) {
        if (!in_lower_set(alpha[i], y[i], C) || !(f[i] > f_u)) continue;
        double eta = k_uu + rows.row(i)[i] - 2.0 * row_u[i];
        if (eta <= kEtaFloor) continue;  // duplicated instances make eta vanish
        double gain = (f_u - f[i]) * (f_u - f[i]) / eta;
        if (gain > best) {
            best = gain;
            pair.l = i;
        }
    }
    return pair;
}

std::pair<double, double> update_alpha_pair(int u, int l, std::span<const double> f,
                                            std::span<const double> alpha,
                                            std::span<const double> y, double C,
                                            std::span<const double> row_u,
                                            std::span<const double> row_l) {
    double eta = row_u[u] + row_l[l] - 2.0 * row_u[l];
    if (eta <= 0) throw std::runtime_error("update_alpha_pair: non-positive curvature");

    double alpha_l = alpha[l] + y[l] * (f[u] - f[l]) / eta;
    alpha_l = std::clamp(alpha_l, 0.0, C);
    double alpha_u = alpha[u] + y[l] * y[u] * (alpha[l] - alpha_l);
    if (alpha_u < 0.0 || alpha_u > C) {
        alpha_u = std::clamp(alpha_u, 0.0, C);
        alpha_l = alpha[l] + y[l] * y[u] * (alpha[u] - alpha_u);
    }
    return {alpha_u, alpha_l};
}

void update_indicators(std::span<double> f, double dalpha_u, double dalpha_l, double y_u,
                       double y_l, std::span<const double> row_u, std::span<const double> row_l) {
    const double cu = dalpha_u * y_u;
    const double cl = dalpha_l * y_l;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += cu * row_u[i] + cl * row_l[i];
}

bool is_converged(double f_u, double f_max, double eps) { return f_u >= f_max - eps; }

std::vector<int> select_new_violators(std::span<const double> f, std::span<const double> alpha,
                                      std::span<const double> y, double C, int q,
                                      std::span<const int> exclude) {
    const int n = static_cast<int>(f.size());
    std::vector<char> excluded(n, 0);
    for (int i : exclude) excluded[i] = 1;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });

    std::vector<int> picked;
    std::vector<char> taken(n, 0);
    int want = q / 2;
    for (int i : order) {
        if (static_cast<int>(picked.size()) == want) break;
        if (excluded[i] || !in_upper_set(alpha[i], y[i], C)) continue;
        picked.push_back(i);
        taken[i] = 1;
    }
    int upper_count = static_cast<int>(picked.size());
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (static_cast<int>(picked.size()) == upper_count + want) break;
        int i = *it;
        if (excluded[i] || taken[i] || !in_lower_set(alpha[i], y[i], C)) continue;
        picked.push_back(i);
        taken[i] = 1;
    }
    return picked;
}

SubproblemResult solve_working_set(std::span<double> alpha, std::span<double> f,
                                   std::span<const double> y, double C, double eps,
                                   std::int64_t max_inner, std::span<const int> working_set,
                                   const WorkingSetRows& rows) {
    SubproblemResult result;
    while (result.pair_updates < max_inner) {
        ExtremePair pair = select_extreme_pair(f, alpha, y, C, working_set, rows);
        if (pair.u < 0 || pair.l < 0) {
            result.converged = true;  // no violating pair inside the set
            break;
        }
        double f_max = -kInf;
        for (int i : working_set)
            if (in_lower_set(alpha[i], y[i], C)) f_max = std::max(f_max, f[i]);
        if (is_converged(f[pair.u], f_max, eps)) {
            result.converged = true;
            break;
        }
        const std::vector<double>& row_u = rows.row(pair.u);
        const std::vector<double>& row_l = rows.row(pair.l);
        auto [alpha_u, alpha_l] = update_alpha_pair(pair.u, pair.l, f, alpha, y, C, row_u, row_l);
        double du = alpha_u - alpha[pair.u];
        double dl = alpha_l - alpha[pair.l];
        alpha[pair.u] = alpha_u;
        alpha[pair.l] = alpha_l;
        update_indicators(f, du, dl, y[pair.u], y[pair.l], row_u, row_l);
        ++result.pair_updates;
        if (du == 0.0 && dl == 0.0) {
            result.converged = true;  // degenerate zero step, nothing left to move
            break;
        }
    }
    return result;
}

double compute_rho(std::span<const double> f, std::span<const double> alpha,
                   std::span<const double> y, double C) {
    double f_u = kInf;
    double f_max = -kInf;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (in_upper_set(alpha[i], y[i], C)) f_u = std::min(f_u, f[i]);
        if (in_lower_set(alpha[i], y[i], C)) f_max = std::max(f_max, f[i]);
    }
    if (f_u == kInf) return f_max;
    if (f_max == -kInf) return f_u;
    return (f_u + f_max) / 2.0;
}

double dual_objective(std::span<const double> alpha, std::span<const double> f,
                      std::span<const double> y) {
    // sum alpha_i - 1/2 alpha' Q alpha, using (Q alpha)_i = y_i (f_i + y_i).
    double obj = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        obj += alpha[i] - 0.5 * alpha[i] * y[i] * (f[i] + y[i]);
    return obj;
}

TrainResult train_binary(const Dataset& ds, const std::vector<double>& y,
                         const SolverConfig& config, KernelRowCache& cache) {
    config.validate();
    const int n = ds.size();
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("train_binary: label vector size mismatch");
    bool has_pos = false, has_neg = false;
    for (double v : y) {
        if (v == 1.0) has_pos = true;
        else if (v == -1.0) has_neg = true;
        else throw std::invalid_argument("train_binary: labels must be +1/-1");
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("train_binary: degenerate labels");

    const double C = config.params.C;
    const double eps = config.eps;
    const std::vector<double> self_dots = precompute_self_dots(ds);
    const std::int64_t base_iteration = cache.last_iteration();
    const CacheStats stats_before = cache.stats();
    const std::size_t events_before = cache.trace().events.size();

    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = -y[i];

    WorkingSetRows rows(n);
    std::vector<int> working_set;
    std::vector<int> introduced_last;

    TrainResult result;
    const std::int64_t outer_cap = config.outer_cap(n);
    std::int64_t iter = 0;
    while (iter < outer_cap) {
        double f_u = kInf, f_max = -kInf;
        for (int i = 0; i < n; ++i) {
            if (in_upper_set(alpha[i], y[i], C)) f_u = std::min(f_u, f[i]);
            if (in_lower_set(alpha[i], y[i], C)) f_max = std::max(f_max, f[i]);
        }
        if (is_converged(f_u, f_max, eps)) {
            result.converged = true;
            break;
        }
        ++iter;

        std::vector<int> selection;
        if (iter == 1) {
            selection = select_new_violators(f, alpha, y, C, config.working_set(), {});
        } else {
            selection = select_new_violators(f, alpha, y, C, config.q, introduced_last);
        }

        if (!selection.empty()) {
            auto access = cache.access_batch(selection, base_iteration + iter);
            for (auto& [idx, row] : access.hits) rows.add(idx, row->values);
            if (!access.misses.empty()) {
                std::vector<KernelRow> fresh = compute_kernel_rows(
                    access.misses, ds, config.params, self_dots, config.workers);
                for (const KernelRow& r : fresh) rows.add(r.row_index, r.values);
                cache.insert_batch(std::move(fresh), base_iteration + iter);
            }
        }

        working_set = introduced_last;
        working_set.insert(working_set.end(), selection.begin(), selection.end());
        rows.retain(working_set);

        SubproblemResult sub = solve_working_set(alpha, f, y, C, eps, config.max_inner,
                                                 working_set, rows);
        if (!selection.empty()) {
            // The q most recently introduced stay for the next iteration
            // (the warm-up iteration introduces a full working set).
            if (static_cast<int>(selection.size()) > config.q)
                introduced_last.assign(selection.end() - config.q, selection.end());
            else
                introduced_last = std::move(selection);
        } else if (sub.pair_updates == 0) {
            break;  // nothing new to select and the set is stuck
        }
        cache.maybe_checkpoint();
    }

    result.iterations = iter;
    result.model.params = config.params;
    result.model.rho = compute_rho(f, alpha, y, C);
    for (int i = 0; i < n; ++i) {
        if (alpha[i] > 0.0) {
            result.model.sv_indices.push_back(i);
            result.model.coef.push_back(alpha[i] * y[i]);
            result.model.support_vectors.push_back(ds.instances[i]);
        }
    }
    result.objective = dual_objective(alpha, f, y);
    result.alpha = std::move(alpha);
    result.f = std::move(f);
    result.stats = CacheStats::delta(cache.stats(), stats_before);

    // The solver's trace slice is rebased to start at iteration 1, so a
    // standalone run and a slice of a shared-cache run look alike.
    result.trace.n = n;
    result.trace.q = config.q;
    result.trace.events.assign(cache.trace().events.begin() + events_before,
                               cache.trace().events.end());
    for (TraceEvent& e : result.trace.events) e.iteration -= base_iteration;
    result.trace.total_iterations = cache.trace().total_iterations - base_iteration;
    return result;
}

MultiTrainResult train_multioutput(const Dataset& ds,
                                   const std::vector<std::vector<double>>& label_columns,
                                   const std::vector<double>& targets,
                                   const SolverConfig& config, KernelRowCache& cache) {
    if (label_columns.size() != targets.size())
        throw std::invalid_argument("train_multioutput: column/target count mismatch");
    MultiTrainResult result;
    const CacheStats before_all = cache.stats();
    for (std::size_t k = 0; k < label_columns.size(); ++k) {
        cache.reset_controller();
        try {
            TrainResult r = train_binary(ds, label_columns[k], config, cache);
            r.model.positive_label = targets[k];
            r.model.negative_label = std::numeric_limits<double>::quiet_NaN();
            result.models.push_back(std::move(r.model));
            result.targets.push_back(targets[k]);
            result.per_solver.push_back(std::move(r.stats));
        } catch (const std::invalid_argument& e) {
            std::cerr << "warning: skipping label " << targets[k] << ": " << e.what() << '\n';
            result.skipped.push_back(targets[k]);
        }
    }
    result.aggregate = CacheStats::delta(cache.stats(), before_all);
    return result;
}

MultiTrainResult train_multioutput(const Dataset& ds, const SolverConfig& config,
                                   KernelRowCache& cache) {
    std::vector<double> targets = distinct_labels(ds);
    if (targets.size() < 2)
        throw std::invalid_argument("train_multioutput: need at least 2 distinct labels");
    std::vector<std::vector<double>> columns;
    columns.reserve(targets.size());
    for (double target : targets) columns.push_back(binarize_labels(ds, target));
    return train_multioutput(ds, columns, targets, config, cache);
}

double decision_value(const SvmModel& model, const SparseInstance& x) {
    double sum = 0.0;
    for (std::size_t k = 0; k < model.coef.size(); ++k)
        sum += model.coef[k] * kernel_value(model.support_vectors[k], x, model.params);
    return sum - model.rho;
}

double predict_binary(const SvmModel& model, const SparseInstance& x) {
    return decision_value(model, x) >= 0 ? model.positive_label : model.negative_label;
}

double predict_multi(std::span<const SvmModel> models, const SparseInstance& x) {
    if (models.empty()) throw std::invalid_argument("predict_multi: no models");
    double best = -kInf;
    double label = models.front().positive_label;
    for (const SvmModel& m : models) {
        double d = decision_value(m, x);
        if (d > best) {
            best = d;
            label = m.positive_label;
        }
    }
    return label;
}

}  // namespace kcache
