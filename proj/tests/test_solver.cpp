#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "kcache/model_io.hpp"
#include "kcache/solver.hpp"
#include "qp_oracle.hpp"

using namespace kcache;

namespace {

// x1 = (1), x2 = (-1) with labels +1/-1: the classic closed-form pair.
Dataset two_point_dataset() { return parse_libsvm("+1 1:1\n-1 1:-1"); }

SolverConfig linear_config(double C, int q = 2) {
    SolverConfig cfg;
    cfg.params.kind = KernelKind::linear;
    cfg.params.C = C;
    cfg.q = q;
    return cfg;
}

KernelRowCache make_cache(CachePolicy policy, std::size_t capacity, std::int64_t n, int q) {
    CacheConfig c;
    c.policy = policy;
    c.capacity = capacity;
    c.n_items = n;
    c.q = q;
    return KernelRowCache(c);
}

WorkingSetRows all_rows(const Dataset& ds, const KernelParams& params) {
    WorkingSetRows rows(ds.size());
    auto dots = precompute_self_dots(ds);
    for (int i = 0; i < ds.size(); ++i)
        rows.add(i, compute_kernel_row(i, ds, params, dots).values);
    return rows;
}

Dataset random_dataset(std::mt19937& rng, int n, int d) {
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    Dataset ds;
    ds.dim = d;
    for (int i = 0; i < n; ++i) {
        SparseInstance inst;
        for (int j = 1; j <= d; ++j) inst.features.push_back({j, value(rng)});
        ds.instances.push_back(std::move(inst));
        ds.labels.push_back(i < n / 2 ? 1.0 : -1.0);
    }
    return ds;
}

}  // namespace

TEST_CASE("two-point walkthrough: pair selection, update, indicators") {
    Dataset ds = two_point_dataset();
    KernelParams params{KernelKind::linear, 0.0, 0.0, 100.0};
    WorkingSetRows rows = all_rows(ds, params);
    std::vector<double> y{1, -1};
    std::vector<double> alpha{0, 0};
    std::vector<double> f{-1, 1};
    std::vector<int> candidates{0, 1};

    ExtremePair pair = select_extreme_pair(f, alpha, y, 100.0, candidates, rows);
    CHECK(pair.u == 0);
    CHECK(pair.l == 1);

    auto [au, al] = update_alpha_pair(pair.u, pair.l, f, alpha, y, 100.0, rows.row(0), rows.row(1));
    CHECK(au == 0.5);  // eta = 4, alpha_l' = (-1)(-1-1)/4
    CHECK(al == 0.5);

    update_indicators(f, au - alpha[0], al - alpha[1], y[0], y[1], rows.row(0), rows.row(1));
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 0.0);
    CHECK(is_converged(f[0], f[1], 1e-3));

    alpha = {au, al};
    CHECK(compute_rho(f, alpha, y, 100.0) == 0.0);
}

TEST_CASE("two-point update clips at small C and back-propagates") {
    Dataset ds = two_point_dataset();
    KernelParams params{KernelKind::linear, 0.0, 0.0, 0.3};
    WorkingSetRows rows = all_rows(ds, params);
    std::vector<double> y{1, -1};
    std::vector<double> alpha{0, 0};
    std::vector<double> f{-1, 1};
    auto [au, al] = update_alpha_pair(0, 1, f, alpha, y, 0.3, rows.row(0), rows.row(1));
    CHECK(al == 0.3);
    CHECK(au == 0.3);
}

TEST_CASE("zero step when f_u equals f_l") {
    Dataset ds = two_point_dataset();
    KernelParams params{KernelKind::linear, 0.0, 0.0, 10.0};
    WorkingSetRows rows = all_rows(ds, params);
    std::vector<double> y{1, -1};
    std::vector<double> alpha{0.25, 0.25};
    std::vector<double> f{0.5, 0.5};
    auto [au, al] = update_alpha_pair(0, 1, f, alpha, y, 10.0, rows.row(0), rows.row(1));
    CHECK(au == 0.25);
    CHECK(al == 0.25);
}

TEST_CASE("non-positive curvature is an error") {
    std::vector<double> y{1, -1};
    std::vector<double> alpha{0, 0};
    std::vector<double> f{-1, 1};
    std::vector<double> row_u{1.0, 1.0};
    std::vector<double> row_l{1.0, 1.0};  // identical instances: eta = 0
    CHECK_THROWS_WITH_AS(update_alpha_pair(0, 1, f, alpha, y, 1.0, row_u, row_l),
                         doctest::Contains("curvature"), std::runtime_error);
}

TEST_CASE("l-selection maximizes the gain and skips tiny eta") {
    // Four candidates, unit eta via diag 1 and off-diagonal 0.5 wrt u.
    WorkingSetRows rows(4);
    rows.add(0, {1.0, 0.5, 0.5, 0.5});
    rows.add(1, {0.5, 1.0, 0.5, 0.5});
    rows.add(2, {0.5, 0.5, 1.0, 0.5});
    rows.add(3, {0.5, 0.5, 0.5, 1.0});
    std::vector<double> f{-2, -1, 0, 1};
    std::vector<double> alpha{0.5, 0.5, 0.5, 0.5};
    std::vector<double> y{1, 1, 1, 1};
    std::vector<int> candidates{0, 1, 2, 3};
    ExtremePair pair = select_extreme_pair(f, alpha, y, 1.0, candidates, rows);
    CHECK(pair.u == 0);
    CHECK(pair.l == 3);  // (f_u - f_i)^2 / 1 maximal at f = 1

    // A duplicate of u (eta = 0) must be skipped even with a larger gap.
    WorkingSetRows dup(3);
    dup.add(0, {1.0, 1.0, 0.5});
    dup.add(1, {1.0, 1.0, 0.5});  // same instance as u
    dup.add(2, {0.5, 0.5, 1.0});
    std::vector<double> f2{-2, 5, 1};
    std::vector<double> a2{0.5, 0.5, 0.5};
    std::vector<double> y2{1, 1, 1};
    std::vector<int> cand2{0, 1, 2};
    ExtremePair p2 = select_extreme_pair(f2, a2, y2, 1.0, cand2, dup);
    CHECK(p2.u == 0);
    CHECK(p2.l == 2);
}

TEST_CASE("one-class degenerate case has no l") {
    Dataset ds = parse_libsvm("+1 1:1\n+1 1:2");
    KernelParams params{KernelKind::linear, 0.0, 0.0, 1.0};
    WorkingSetRows rows = all_rows(ds, params);
    std::vector<double> y{1, 1};
    std::vector<double> alpha{0, 0};
    std::vector<double> f{-1, -1};
    std::vector<int> candidates{0, 1};
    ExtremePair pair = select_extreme_pair(f, alpha, y, 1.0, candidates, rows);
    CHECK(pair.u >= 0);
    CHECK(pair.l == -1);
}

TEST_CASE("update_indicators examples") {
    std::vector<double> f{0, 0, 0};
    std::vector<double> ones{1, 1, 1};
    update_indicators(f, 1.0, 1.0, 1.0, 1.0, ones, ones);
    CHECK(f == std::vector<double>{2, 2, 2});
    update_indicators(f, 0.0, 0.0, 1.0, -1.0, ones, ones);
    CHECK(f == std::vector<double>{2, 2, 2});
}

TEST_CASE("is_converged tolerance") {
    CHECK(is_converged(0.0, 0.0, 1e-3));
    CHECK(!is_converged(-1.0, 1.0, 1e-3));
    CHECK(is_converged(0.9995, 1.0, 1e-3));
}

TEST_CASE("select_new_violators picks both halves") {
    std::vector<double> f{-1, 1, -2, 2};
    std::vector<double> y{1, 1, -1, -1};
    std::vector<double> alpha{0, 0, 0, 0};
    // upper = {0,1} (y=+1, alpha<C), lower = {2,3} (y=-1, alpha<C)
    auto picked = select_new_violators(f, alpha, y, 1.0, 2, {});
    CHECK(picked == std::vector<int>{0, 3});

    SUBCASE("forced choice with one candidate per side") {
        std::vector<double> f2{-1, 1};
        std::vector<double> y2{1, -1};
        std::vector<double> a2{0, 0};
        auto both = select_new_violators(f2, a2, y2, 1.0, 2, {});
        CHECK(both.size() == 2);
    }

    SUBCASE("everything excluded yields empty selection") {
        std::vector<int> exclude{0, 1, 2, 3};
        CHECK(select_new_violators(f, alpha, y, 1.0, 2, exclude).empty());
    }

    SUBCASE("free instances are not picked twice") {
        std::vector<double> f3{-3, 3};
        std::vector<double> y3{1, 1};
        std::vector<double> a3{0.5, 0.5};  // both in upper and lower
        auto picks = select_new_violators(f3, a3, y3, 1.0, 2, {});
        CHECK(picks == std::vector<int>{0, 1});
    }
}

TEST_CASE("solve_working_set converges the two-point problem in one update") {
    Dataset ds = two_point_dataset();
    KernelParams params{KernelKind::linear, 0.0, 0.0, 100.0};
    WorkingSetRows rows = all_rows(ds, params);
    std::vector<double> y{1, -1};
    std::vector<double> alpha{0, 0};
    std::vector<double> f{-1, 1};
    std::vector<int> ws{0, 1};
    auto result = solve_working_set(alpha, f, y, 100.0, 1e-3, 100, ws, rows);
    CHECK(result.converged);
    CHECK(result.pair_updates == 1);
    CHECK(alpha == std::vector<double>{0.5, 0.5});

    // Already optimal: zero updates.
    auto again = solve_working_set(alpha, f, y, 100.0, 1e-3, 100, ws, rows);
    CHECK(again.pair_updates == 0);
    CHECK(again.converged);
}

TEST_CASE("objective never decreases and constraints hold across pair updates") {
    std::mt19937 rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        Dataset ds = random_dataset(rng, 10, 2);
        std::vector<double> y(ds.labels);
        KernelParams params{KernelKind::gaussian, 0.5, 0.0, rep % 2 ? 1.0 : 10.0};
        auto problem = qp_oracle::build_problem(ds, y, params);
        WorkingSetRows rows = all_rows(ds, params);
        std::vector<double> alpha(10, 0.0), f(10);
        for (int i = 0; i < 10; ++i) f[i] = -y[i];
        std::vector<int> ws(10);
        std::iota(ws.begin(), ws.end(), 0);

        double prev = problem.objective(alpha);
        for (int step = 0; step < 200; ++step) {
            ExtremePair pair = select_extreme_pair(f, alpha, y, params.C, ws, rows);
            if (pair.u < 0 || pair.l < 0) break;
            double f_max = -1e300;
            for (int i : ws)
                if (in_lower_set(alpha[i], y[i], params.C)) f_max = std::max(f_max, f[i]);
            if (is_converged(f[pair.u], f_max, 1e-6)) break;
            auto [au, al] = update_alpha_pair(pair.u, pair.l, f, alpha, y, params.C,
                                              rows.row(pair.u), rows.row(pair.l));
            update_indicators(f, au - alpha[pair.u], al - alpha[pair.l], y[pair.u], y[pair.l],
                              rows.row(pair.u), rows.row(pair.l));
            alpha[pair.u] = au;
            alpha[pair.l] = al;

            double obj = problem.objective(alpha);
            CHECK(obj >= prev - 1e-12);
            prev = obj;

            double balance = 0.0;
            for (int i = 0; i < 10; ++i) {
                CHECK(alpha[i] >= 0.0);
                CHECK(alpha[i] <= params.C);
                balance += y[i] * alpha[i];
            }
            CHECK(std::abs(balance) <= 1e-8 * params.C * 10);
        }
    }
}

TEST_CASE("train_binary solves the two-point problem under any policy") {
    Dataset ds = two_point_dataset();
    std::vector<double> y{1, -1};
    SolverConfig cfg = linear_config(100.0);
    for (CachePolicy policy : {CachePolicy::none, CachePolicy::lru, CachePolicy::hcst}) {
        KernelRowCache cache = make_cache(policy, 2, 2, cfg.q);
        TrainResult r = train_binary(ds, y, cfg, cache);
        CHECK(r.converged);
        CHECK(r.alpha == std::vector<double>{0.5, 0.5});
        CHECK(r.model.rho == 0.0);
        CHECK(r.model.coef == std::vector<double>{0.5, -0.5});

        SparseInstance x{{{1, 2.0}}};
        CHECK(decision_value(r.model, x) == 2.0);
        CHECK(predict_binary(r.model, x) == 1.0);
        CHECK(predict_binary(r.model, ds.instances[0]) == 1.0);
        CHECK(predict_binary(r.model, ds.instances[1]) == -1.0);
        SparseInstance origin{};  // decision exactly zero -> positive
        CHECK(predict_binary(r.model, origin) == 1.0);
    }
}

TEST_CASE("train_binary rejects degenerate labels") {
    Dataset ds = two_point_dataset();
    SolverConfig cfg = linear_config(1.0);
    KernelRowCache cache = make_cache(CachePolicy::none, 2, 2, cfg.q);
    std::vector<double> ones{1, 1};
    CHECK_THROWS_WITH_AS(train_binary(ds, ones, cfg, cache), doctest::Contains("degenerate"),
                         std::invalid_argument);
}

TEST_CASE("4-point separable set matches the QP oracle") {
    Dataset ds = parse_libsvm("+1 1:1\n+1 1:1 2:0.1\n-1 1:-1\n-1 1:-1 2:0.1");
    std::vector<double> y{1, 1, -1, -1};
    SolverConfig cfg = linear_config(10.0);
    cfg.eps = 1e-6;
    KernelRowCache cache = make_cache(CachePolicy::lru, 4, 4, cfg.q);
    TrainResult r = train_binary(ds, y, cfg, cache);
    CHECK(r.converged);

    auto problem = qp_oracle::build_problem(ds, y, cfg.params);
    auto oracle = qp_oracle::pg_solve(problem, 1e-10);
    CHECK(problem.objective(r.alpha) ==
          doctest::Approx(oracle.objective).epsilon(1e-6));
}

TEST_CASE("random gaussian problems match the QP oracle within 1e-5") {
    std::mt19937 rng(23);
    for (int rep = 0; rep < 5; ++rep) {
        Dataset ds = random_dataset(rng, 12, 2);
        std::vector<double> y(ds.labels);
        SolverConfig cfg;
        cfg.params = KernelParams{KernelKind::gaussian, 0.5, 0.0, 1.0};
        cfg.q = 4;
        cfg.eps = 1e-7;
        KernelRowCache cache = make_cache(CachePolicy::hcst, 8, 12, cfg.q);
        TrainResult r = train_binary(ds, y, cfg, cache);

        auto problem = qp_oracle::build_problem(ds, y, cfg.params);
        auto oracle = qp_oracle::pg_solve(problem, 1e-9);
        double got = problem.objective(r.alpha);
        CHECK(std::abs(got - oracle.objective) <=
              1e-5 * std::max(1.0, std::abs(oracle.objective)));
    }
}

TEST_CASE("incrementally maintained indicators match recomputation") {
    std::mt19937 rng(29);
    Dataset ds = random_dataset(rng, 40, 3);
    std::vector<double> y(ds.labels);
    SolverConfig cfg;
    cfg.params = KernelParams{KernelKind::gaussian, 0.5, 0.0, 5.0};
    cfg.q = 8;
    KernelRowCache cache = make_cache(CachePolicy::efu, 16, 40, cfg.q);
    TrainResult r = train_binary(ds, y, cfg, cache);

    auto dots = precompute_self_dots(ds);
    for (int i = 0; i < ds.size(); ++i) {
        KernelRow row = compute_kernel_row(i, ds, cfg.params, dots);
        double direct = -y[i];
        for (int j = 0; j < ds.size(); ++j) direct += r.alpha[j] * y[j] * row.values[j];
        CHECK(r.f[i] == doctest::Approx(direct).epsilon(1e-6));
    }
}

TEST_CASE("cache transparency: identical alpha and trace for every policy") {
    std::mt19937 rng(31);
    Dataset ds = random_dataset(rng, 60, 4);
    std::vector<double> y(ds.labels);
    SolverConfig cfg;
    cfg.params = KernelParams{KernelKind::gaussian, 0.5, 0.0, 10.0};
    cfg.q = 8;

    std::optional<TrainResult> reference;
    for (CachePolicy policy : {CachePolicy::none, CachePolicy::lru, CachePolicy::lfu,
                               CachePolicy::lat, CachePolicy::efu, CachePolicy::hcst}) {
        KernelRowCache cache = make_cache(policy, 16, 60, cfg.q);
        TrainResult r = train_binary(ds, y, cfg, cache);
        if (!reference) {
            reference = std::move(r);
            continue;
        }
        CHECK(r.alpha == reference->alpha);  // bit-identical
        CHECK(r.model.sv_indices == reference->model.sv_indices);
        REQUIRE(r.trace.events.size() == reference->trace.events.size());
        for (std::size_t e = 0; e < r.trace.events.size(); ++e) {
            CHECK(r.trace.events[e].row_index == reference->trace.events[e].row_index);
            CHECK(r.trace.events[e].iteration == reference->trace.events[e].iteration);
        }
    }
}

TEST_CASE("rows served from cache are bit-identical to recomputation") {
    std::mt19937 rng(37);
    Dataset ds = random_dataset(rng, 30, 3);
    std::vector<double> y(ds.labels);
    SolverConfig cfg;
    cfg.params = KernelParams{KernelKind::gaussian, 0.7, 0.0, 2.0};
    cfg.q = 6;
    KernelRowCache cache = make_cache(CachePolicy::lru, 10, 30, cfg.q);
    train_binary(ds, y, cfg, cache);

    auto dots = precompute_self_dots(ds);
    int checked = 0;
    for (int i = 0; i < ds.size(); ++i) {
        const KernelRow* stored = cache.peek(i);
        if (!stored) continue;
        KernelRow fresh = compute_kernel_row(i, ds, cfg.params, dots);
        CHECK(stored->values == fresh.values);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("rho shifts with the data so training points classify correctly") {
    Dataset ds = parse_libsvm("+1 1:11\n-1 1:9");
    std::vector<double> y{1, -1};
    SolverConfig cfg = linear_config(100.0);
    KernelRowCache cache = make_cache(CachePolicy::none, 2, 2, cfg.q);
    TrainResult r = train_binary(ds, y, cfg, cache);
    CHECK(r.converged);
    CHECK(r.model.rho == doctest::Approx(10.0));
    CHECK(predict_binary(r.model, ds.instances[0]) == 1.0);
    CHECK(predict_binary(r.model, ds.instances[1]) == -1.0);
}

namespace {

Dataset three_cluster_dataset(std::mt19937& rng, int per_label) {
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    Dataset ds;
    ds.dim = 2;
    const double centers[3][2] = {{0, 0}, {3, 0}, {0, 3}};
    for (int label = 0; label < 3; ++label) {
        for (int k = 0; k < per_label; ++k) {
            SparseInstance inst;
            inst.features.push_back({1, centers[label][0] + jitter(rng)});
            inst.features.push_back({2, centers[label][1] + jitter(rng)});
            ds.instances.push_back(std::move(inst));
            ds.labels.push_back(static_cast<double>(label + 1));
        }
    }
    return ds;
}

}  // namespace

TEST_CASE("multi-output training shares the cache across solvers") {
    std::mt19937 rng(41);
    Dataset ds = three_cluster_dataset(rng, 12);
    SolverConfig cfg;
    cfg.params = KernelParams{KernelKind::gaussian, 1.0, 0.0, 10.0};
    cfg.q = 4;

    CacheConfig cache_cfg;
    cache_cfg.policy = CachePolicy::efu;
    cache_cfg.capacity = 36;
    cache_cfg.n_items = ds.size();
    cache_cfg.q = cfg.q;
    KernelRowCache shared(cache_cfg);
    MultiTrainResult multi = train_multioutput(ds, cfg, shared);
    REQUIRE(multi.models.size() == 3);
    CHECK(multi.targets == std::vector<double>{1, 2, 3});

    // Aggregate accounting is the sum over solvers.
    std::int64_t sum_accesses = 0, sum_hits = 0;
    for (const CacheStats& s : multi.per_solver) {
        sum_accesses += s.accesses;
        sum_hits += s.hits;
    }
    CHECK(multi.aggregate.accesses == sum_accesses);
    CHECK(multi.aggregate.hits == sum_hits);

    // Later solvers reuse rows the first solver cached: strictly more hits
    // than the same runs over per-solver fresh caches.
    std::int64_t fresh_hits = 0;
    for (double target : multi.targets) {
        KernelRowCache fresh(cache_cfg);
        std::vector<double> y = binarize_labels(ds, target);
        TrainResult r = train_binary(ds, y, cfg, fresh);
        fresh_hits += r.stats.hits;
    }
    CHECK(multi.aggregate.hits > fresh_hits);

    // Every training point classifies to its own cluster.
    for (int i = 0; i < ds.size(); ++i)
        CHECK(predict_multi(multi.models, ds.instances[i]) == ds.labels[i]);

    // A later solver's trace slice starts at iteration 1 like a fresh run.
    std::vector<double> y2 = binarize_labels(ds, multi.targets[1]);
    KernelRowCache shared2(cache_cfg);
    train_binary(ds, binarize_labels(ds, multi.targets[0]), cfg, shared2);
    TrainResult second = train_binary(ds, y2, cfg, shared2);
    REQUIRE(!second.trace.events.empty());
    CHECK(second.trace.events.front().iteration == 1);
    CHECK_NOTHROW(second.trace.validate());
}

TEST_CASE("two-label multi-output equals the binary model plus its complement") {
    std::mt19937 rng(43);
    Dataset ds = random_dataset(rng, 20, 2);
    // relabel as 1/2 so the multi path triggers
    for (int i = 0; i < ds.size(); ++i) ds.labels[i] = ds.labels[i] > 0 ? 1.0 : 2.0;
    SolverConfig cfg;
    cfg.params = KernelParams{KernelKind::gaussian, 0.5, 0.0, 10.0};
    cfg.q = 4;

    CacheConfig cache_cfg;
    cache_cfg.policy = CachePolicy::lru;
    cache_cfg.capacity = 20;
    cache_cfg.n_items = ds.size();
    cache_cfg.q = cfg.q;
    KernelRowCache shared(cache_cfg);
    MultiTrainResult multi = train_multioutput(ds, cfg, shared);
    REQUIRE(multi.models.size() == 2);

    KernelRowCache solo(cache_cfg);
    std::vector<double> y = binarize_labels(ds, 1.0);
    TrainResult binary = train_binary(ds, y, cfg, solo);
    binary.model.positive_label = 1.0;
    binary.model.negative_label = 2.0;

    for (int i = 0; i < ds.size(); ++i)
        CHECK(predict_multi(multi.models, ds.instances[i]) ==
              predict_binary(binary.model, ds.instances[i]));
}

TEST_CASE("sigmoid training skips indefinite pairs and still separates") {
    // tanh kernels are indefinite, so some candidate pairs carry
    // non-positive curvature and must be passed over.
    std::mt19937 rng(47);
    Dataset ds;
    ds.dim = 2;
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    for (int i = 0; i < 30; ++i) {
        double side = i % 2 == 0 ? 1.0 : -1.0;
        SparseInstance inst;
        inst.features.push_back({1, side * 1.5 + jitter(rng)});
        inst.features.push_back({2, jitter(rng)});
        ds.instances.push_back(std::move(inst));
        ds.labels.push_back(side);
    }
    std::vector<double> y(ds.labels);
    SolverConfig cfg;
    cfg.params = KernelParams{KernelKind::sigmoid, 0.5, 0.0, 10.0};
    cfg.q = 4;
    KernelRowCache cache = make_cache(CachePolicy::hcst, 10, ds.size(), cfg.q);
    TrainResult r = train_binary(ds, y, cfg, cache);
    int correct = 0;
    for (int i = 0; i < ds.size(); ++i)
        if (predict_binary(r.model, ds.instances[i]) == ds.labels[i]) ++correct;
    CHECK(correct == ds.size());
}

TEST_CASE("indicators stay consistent at every truncation point") {
    std::mt19937 rng(53);
    Dataset ds = random_dataset(rng, 50, 3);
    std::vector<double> y(ds.labels);
    auto dots = precompute_self_dots(ds);
    for (std::int64_t cap : {1, 2, 3, 5}) {
        SolverConfig cfg;
        cfg.params = KernelParams{KernelKind::gaussian, 0.5, 0.0, 5.0};
        cfg.q = 8;
        cfg.max_outer = cap;
        KernelRowCache cache = make_cache(CachePolicy::lru, 12, 50, cfg.q);
        TrainResult r = train_binary(ds, y, cfg, cache);
        for (int i = 0; i < ds.size(); ++i) {
            KernelRow row = compute_kernel_row(i, ds, cfg.params, dots);
            double direct = -y[i];
            for (int j = 0; j < ds.size(); ++j) direct += r.alpha[j] * y[j] * row.values[j];
            CHECK(r.f[i] == doctest::Approx(direct).epsilon(1e-6));
        }
    }
}

TEST_CASE("multi-label columns train independent solvers over one cache") {
    std::mt19937 rng(59);
    Dataset ds = random_dataset(rng, 24, 2);
    SolverConfig cfg;
    cfg.params = KernelParams{KernelKind::gaussian, 0.5, 0.0, 5.0};
    cfg.q = 4;

    // Two label columns: the original split and a shifted one.
    std::vector<std::vector<double>> columns(2, std::vector<double>(ds.size()));
    for (int i = 0; i < ds.size(); ++i) {
        columns[0][i] = ds.labels[i];
        columns[1][i] = i % 3 == 0 ? 1.0 : -1.0;
    }
    CacheConfig cache_cfg;
    cache_cfg.policy = CachePolicy::efu;
    cache_cfg.capacity = 24;
    cache_cfg.n_items = ds.size();
    cache_cfg.q = cfg.q;
    KernelRowCache shared(cache_cfg);
    MultiTrainResult multi = train_multioutput(ds, columns, {10.0, 20.0}, cfg, shared);
    REQUIRE(multi.models.size() == 2);
    CHECK(multi.targets == std::vector<double>{10.0, 20.0});
    CHECK(multi.aggregate.accesses ==
          multi.per_solver[0].accesses + multi.per_solver[1].accesses);

    std::vector<std::vector<double>> bad(1);
    CHECK_THROWS_AS(train_multioutput(ds, bad, {1.0, 2.0}, cfg, shared), std::invalid_argument);
}

TEST_CASE("model files round-trip through save and load") {
    std::mt19937 rng(61);
    Dataset ds = three_cluster_dataset(rng, 8);
    SolverConfig cfg;
    cfg.params = KernelParams{KernelKind::gaussian, 1.0, 0.0, 10.0};
    cfg.q = 4;
    CacheConfig cache_cfg;
    cache_cfg.policy = CachePolicy::lru;
    cache_cfg.capacity = 24;
    cache_cfg.n_items = ds.size();
    cache_cfg.q = cfg.q;
    KernelRowCache cache(cache_cfg);
    MultiTrainResult multi = train_multioutput(ds, cfg, cache);

    ModelFile mf{std::move(multi.models), true};
    std::ostringstream text;
    save_model(mf, text);
    std::istringstream in(text.str());
    ModelFile back = load_model(in);
    REQUIRE(back.multi);
    REQUIRE(back.models.size() == mf.models.size());
    for (int i = 0; i < ds.size(); ++i) {
        for (std::size_t k = 0; k < mf.models.size(); ++k)
            CHECK(decision_value(back.models[k], ds.instances[i]) ==
                  doctest::Approx(decision_value(mf.models[k], ds.instances[i])).epsilon(1e-12));
        CHECK(predict_multi(back.models, ds.instances[i]) ==
              predict_multi(mf.models, ds.instances[i]));
    }

    // Binary model round trip preserves the label mapping.
    Dataset two = two_point_dataset();
    std::vector<double> y{1, -1};
    KernelRowCache c2 = make_cache(CachePolicy::none, 2, 2, 2);
    TrainResult r = train_binary(two, y, linear_config(100.0), c2);
    r.model.positive_label = 7.0;
    r.model.negative_label = -3.0;
    ModelFile bf{{r.model}, false};
    std::ostringstream btext;
    save_model(bf, btext);
    std::istringstream bin(btext.str());
    ModelFile bback = load_model(bin);
    CHECK(!bback.multi);
    CHECK(predict_binary(bback.models[0], SparseInstance{{{1, 2.0}}}) == 7.0);
    CHECK(predict_binary(bback.models[0], SparseInstance{{{1, -2.0}}}) == -3.0);
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    cfg.q = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.q = 4;
    cfg.working_set_size = 2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.working_set_size = 0;
    cfg.eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
