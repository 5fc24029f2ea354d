#ifndef KCACHE_SOLVER_HPP
#define KCACHE_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kcache/cache.hpp"
#include "kcache/dataset.hpp"
#include "kcache/kernel.hpp"

namespace kcache {

struct SolverConfig {
    KernelParams params;
    int q = 64;                      // violators replaced per iteration, even
    int working_set_size = 0;        // W; defaults to 2q
    double eps = 1e-3;               // termination tolerance on the f gap
    std::int64_t max_outer = 0;      // 0: 10 * ceil(n/q) * 100
    std::int64_t max_inner = 10000;  // pair updates per subproblem
    int workers = 1;                 // kernel fan-out workers

    int working_set() const { return working_set_size > 0 ? working_set_size : 2 * q; }
    std::int64_t outer_cap(int n) const;
    void validate() const;
};

/// Trained binary model: the support vectors with their signed
/// coefficients alpha_i * y_i, plus the bias.
struct SvmModel {
    KernelParams params;
    double rho = 0.0;
    std::vector<int> sv_indices;  // training-set indices of the support vectors
    std::vector<double> coef;     // alpha_i * y_i, all nonzero
    std::vector<SparseInstance> support_vectors;
    double positive_label = 1.0;
    double negative_label = -1.0;
};

struct TrainResult {
    SvmModel model;
    std::vector<double> alpha;
    std::vector<double> f;  // optimality indicators at termination
    CacheStats stats;       // cache activity of this solver
    AccessTrace trace;      // row requests of this solver
    std::int64_t iterations = 0;
    double objective = 0.0;  // dual objective at termination
    bool converged = false;
};

/// Rows of the current working set keyed by instance index. The retained
/// half of the working set lives here between iterations instead of being
/// re-requested from the cache.
class WorkingSetRows {
public:
    explicit WorkingSetRows(int n) : pos_(n, -1) {}

    void add(int index, std::vector<double> values);
    /// Drops every row whose index is not in `keep`.
    void retain(std::span<const int> keep);
    bool has(int index) const { return pos_[index] >= 0; }
    const std::vector<double>& row(int index) const;

private:
    std::vector<std::int32_t> pos_;
    std::vector<int> indices_;
    std::vector<std::vector<double>> rows_;
};

/// Membership in the sets whose y_i alpha_i can still move.
bool in_upper_set(double alpha, double y, double C);  // y_i alpha_i can increase
bool in_lower_set(double alpha, double y, double C);  // y_i alpha_i can decrease

struct ExtremePair {
    int u = -1;
    int l = -1;  // -1: no candidate with f_l > f_u (locally optimal)
};

/// Picks the extreme pair over `candidates`: u minimizes f over the upper
/// set; l maximizes (f_u - f_i)^2 / eta_i over lower-set members with
/// f_i > f_u. Candidates with eta below a small floor are skipped.
ExtremePair select_extreme_pair(std::span<const double> f, std::span<const double> alpha,
                                std::span<const double> y, double C,
                                std::span<const int> candidates, const WorkingSetRows& rows);

/// One SMO pair update; returns the new (alpha_u, alpha_l), both clipped
/// into [0, C] while preserving sum y_i alpha_i. Throws on eta <= 0.
std::pair<double, double> update_alpha_pair(int u, int l, std::span<const double> f,
                                            std::span<const double> alpha,
                                            std::span<const double> y, double C,
                                            std::span<const double> row_u,
                                            std::span<const double> row_l);

/// f_i += dalpha_u y_u K(u,i) + dalpha_l y_l K(l,i) over all instances.
void update_indicators(std::span<double> f, double dalpha_u, double dalpha_l, double y_u,
                       double y_l, std::span<const double> row_u, std::span<const double> row_l);

bool is_converged(double f_u, double f_max, double eps);

/// q/2 upper-set members with the smallest f plus q/2 lower-set members
/// with the largest f, skipping anything in `exclude`. Ties break by
/// ascending index; takes fewer when fewer are eligible.
std::vector<int> select_new_violators(std::span<const double> f, std::span<const double> alpha,
                                      std::span<const double> y, double C, int q,
                                      std::span<const int> exclude);

struct SubproblemResult {
    std::int64_t pair_updates = 0;
    bool converged = false;  // false when max_inner was the stopping reason
};

/// Runs SMO pair updates restricted to `working_set` until the local gap
/// closes to eps or max_inner updates. The full indicator vector is kept
/// current after every update.
SubproblemResult solve_working_set(std::span<double> alpha, std::span<double> f,
                                   std::span<const double> y, double C, double eps,
                                   std::int64_t max_inner, std::span<const int> working_set,
                                   const WorkingSetRows& rows);

/// Bias at the converged state: midpoint of the KKT gap.
double compute_rho(std::span<const double> f, std::span<const double> alpha,
                   std::span<const double> y, double C);

/// Dual objective from the maintained indicators.
double dual_objective(std::span<const double> alpha, std::span<const double> f,
                      std::span<const double> y);

/// Trains one binary SVM with the batched working-set loop, routing every
/// row request through the cache. y must contain both labels.
TrainResult train_binary(const Dataset& ds, const std::vector<double>& y,
                         const SolverConfig& config, KernelRowCache& cache);

struct MultiTrainResult {
    std::vector<SvmModel> models;      // one per target label, in label order
    std::vector<double> targets;
    std::vector<CacheStats> per_solver;
    CacheStats aggregate;
    std::vector<double> skipped;       // labels whose subtask was degenerate
};

/// One-vs-all training over a shared cache: contents and frequency
/// counters persist across solvers, the HCST controller restarts per
/// solver.
MultiTrainResult train_multioutput(const Dataset& ds, const SolverConfig& config,
                                   KernelRowCache& cache);

/// Multi-label form: one solver per provided +1/-1 column, same shared
/// cache semantics. `targets[k]` labels the k-th column in the result.
MultiTrainResult train_multioutput(const Dataset& ds,
                                   const std::vector<std::vector<double>>& label_columns,
                                   const std::vector<double>& targets,
                                   const SolverConfig& config, KernelRowCache& cache);

double decision_value(const SvmModel& model, const SparseInstance& x);

/// Binary label of x; a decision value of exactly zero maps to the
/// positive label.
double predict_binary(const SvmModel& model, const SparseInstance& x);

/// Label of the one-vs-all model with the largest decision value.
double predict_multi(std::span<const SvmModel> models, const SparseInstance& x);

}  // namespace kcache

#endif
