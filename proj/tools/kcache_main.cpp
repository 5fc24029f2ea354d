#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "kcache/dataset.hpp"
#include "kcache/model_io.hpp"
#include "kcache/simulator.hpp"
#include "kcache/solver.hpp"
#include "kcache/stats_json.hpp"
#include "kcache/trace.hpp"
#include "kcache/trace_gen.hpp"

namespace {

using namespace kcache;

struct TrainOptions {
    std::string data_path;
    std::string model_path;
    std::string kernel = "gaussian";
    double gamma = 0.5;
    double coef0 = 0.0;
    double cost = 1.0;
    double eps = 1e-3;
    int q = 64;
    int working_set = 0;
    std::string policy = "hcst";
    std::size_t capacity = 512;
    double lambda = 2.0;
    int workers = 1;
    int stages = 4;
    int dim_override = 0;
    std::string trace_path;
    std::string stats_path;
};

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

int run_train(const TrainOptions& opt) {
    Dataset ds = load_libsvm_file(opt.data_path);
    if (opt.dim_override > ds.dim) ds.dim = opt.dim_override;

    SolverConfig config;
    config.params.kind = kernel_kind_from_string(opt.kernel);
    config.params.gamma = opt.gamma;
    config.params.coef0 = opt.coef0;
    config.params.C = opt.cost;
    config.q = opt.q;
    config.working_set_size = opt.working_set;
    config.eps = opt.eps;
    config.workers = opt.workers;
    config.validate();

    CacheConfig cache_config;
    cache_config.capacity = opt.capacity;
    cache_config.policy = cache_policy_from_string(opt.policy);
    cache_config.lambda = opt.lambda;
    cache_config.workers = opt.workers;
    cache_config.q = opt.q;
    cache_config.n_items = ds.size();
    KernelRowCache cache(cache_config);

    std::vector<double> labels = distinct_labels(ds);
    if (labels.size() < 2) throw std::runtime_error("dataset has a single label, nothing to train");

    ModelFile mf;
    nlohmann::ordered_json stats_json;
    if (labels.size() == 2) {
        std::vector<double> y = binarize_labels(ds, labels[0]);
        TrainResult result = train_binary(ds, y, config, cache);
        result.model.positive_label = labels[0];
        result.model.negative_label = labels[1];
        stats_json = stats_to_json(result.stats, cache_config, opt.stages);
        stats_json["iterations"] = result.iterations;
        stats_json["converged"] = result.converged;
        stats_json["objective"] = result.objective;
        stats_json["total_sv"] = result.model.coef.size();
        mf.models.push_back(std::move(result.model));
        mf.multi = false;
    } else {
        MultiTrainResult result = train_multioutput(ds, config, cache);
        if (result.models.empty()) throw std::runtime_error("all binary subtasks degenerate");
        stats_json = stats_to_json(result.aggregate, cache_config, opt.stages);
        auto solvers = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < result.models.size(); ++i) {
            auto entry = stats_counters_json(result.per_solver[i], opt.stages);
            entry["label"] = result.targets[i];
            solvers.push_back(std::move(entry));
        }
        stats_json["solvers"] = std::move(solvers);
        mf.models = std::move(result.models);
        mf.multi = true;
    }
    stats_json["kernel"] = opt.kernel;
    stats_json["gamma"] = config.params.gamma;
    stats_json["coef0"] = config.params.coef0;
    stats_json["C"] = config.params.C;
    stats_json["eps"] = config.eps;
    stats_json["n"] = ds.size();
    stats_json["d"] = ds.dim;

    save_model_file(mf, opt.model_path);
    if (!opt.trace_path.empty()) write_trace_file(cache.trace(), opt.trace_path);
    std::string stats_text = stats_json.dump(2) + "\n";
    if (opt.stats_path.empty())
        std::cout << stats_text;
    else
        write_text_file(opt.stats_path, stats_text);
    return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& output_path) {
    ModelFile mf = load_model_file(model_path);
    Dataset ds = load_libsvm_file(data_path);

    std::ostringstream lines;
    char buf[64];
    std::int64_t correct = 0;
    for (int i = 0; i < ds.size(); ++i) {
        double label = mf.multi ? predict_multi(mf.models, ds.instances[i])
                                : predict_binary(mf.models.front(), ds.instances[i]);
        if (label == ds.labels[i]) ++correct;
        std::snprintf(buf, sizeof(buf), "%.17g", label);
        lines << buf << '\n';
    }
    if (output_path.empty())
        std::cout << lines.str();
    else
        write_text_file(output_path, lines.str());
    std::snprintf(buf, sizeof(buf), "%.4f", static_cast<double>(correct) / ds.size());
    std::cerr << "accuracy " << buf << " (" << correct << "/" << ds.size() << ")\n";
    return 0;
}

int run_simulate(const std::string& trace_path, const std::string& policy, std::size_t capacity,
                 double lambda, int workers, const std::string& output_path) {
    AccessTrace trace = read_trace_file(trace_path);
    CacheConfig effective;
    effective.capacity = capacity;
    effective.lambda = lambda;
    effective.q = trace.q > 0 ? trace.q : 1;
    std::cerr << "config: cache=" << policy << " capacity=" << capacity << " lambda=" << lambda
              << " workers=" << workers << " n_c=" << effective.checkpoint_interval() << '\n';
    std::vector<StrategyResult> rows;
    if (policy == "all") {
        rows = compare_strategies(trace, capacity, lambda, workers);
    } else if (policy == "opt") {
        rows.push_back({"opt", belady_opt_replay(trace, capacity)});
    } else {
        CachePolicy p = cache_policy_from_string(policy);
        rows.push_back({policy, replay_trace(trace, p, capacity, lambda, workers)});
    }
    std::ostringstream csv;
    write_comparison_csv(rows, capacity, csv);
    if (output_path.empty())
        std::cout << csv.str();
    else
        write_text_file(output_path, csv.str());
    return 0;
}

int run_analyze(const std::string& trace_path, int stages, std::size_t capacity,
                const std::string& unit_name, std::string cdf_path, std::string diff_path) {
    AccessTrace trace = read_trace_file(trace_path);
    IntervalUnit unit;
    if (unit_name == "iterations")
        unit = IntervalUnit::iterations;
    else if (unit_name == "positions")
        unit = IntervalUnit::positions;
    else
        throw std::runtime_error("unknown interval unit: " + unit_name);

    if (cdf_path.empty()) cdf_path = trace_path + ".cdf.csv";
    if (diff_path.empty()) diff_path = trace_path + ".freqdiff.csv";

    auto cdfs = reuse_interval_cdf_by_stage(trace, stages, static_cast<std::int64_t>(capacity), unit);
    std::ostringstream cdf_csv;
    write_stage_cdf_csv(cdfs, cdf_csv);
    write_text_file(cdf_path, cdf_csv.str());
    std::cout << "wrote " << cdf_path << '\n';

    if (stages >= 2) {
        auto hist = frequency_difference_by_stage(trace, stages);
        std::ostringstream diff_csv;
        write_frequency_difference_csv(hist, diff_csv);
        write_text_file(diff_path, diff_csv.str());
        std::cout << "wrote " << diff_path << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SVM training with pluggable kernel-row caching"};
    app.require_subcommand(1);

    TrainOptions train;
    CLI::App* cmd_train = app.add_subcommand("train", "train an SVM model");
    cmd_train->add_option("data", train.data_path, "LIBSVM training data")->required();
    cmd_train->add_option("model", train.model_path, "output model file")->required();
    cmd_train->add_option("-t,--kernel", train.kernel, "kernel: linear|gaussian|sigmoid");
    cmd_train->add_option("-g,--gamma", train.gamma, "kernel gamma");
    cmd_train->add_option("-r,--coef0", train.coef0, "sigmoid offset");
    cmd_train->add_option("-c,--cost", train.cost, "regularization C");
    cmd_train->add_option("-e,--eps", train.eps, "termination tolerance");
    cmd_train->add_option("-q", train.q, "violators replaced per iteration");
    cmd_train->add_option("--ws", train.working_set, "working set size (default 2q)");
    cmd_train->add_option("--cache", train.policy, "cache policy: none|lru|lfu|lat|efu|hcst");
    cmd_train->add_option("-m,--cache-size", train.capacity, "cache capacity in items");
    cmd_train->add_option("--lambda", train.lambda, "checkpoint spacing factor");
    cmd_train->add_option("--workers", train.workers, "replacement/kernel workers")
        ->envname("KCACHE_WORKERS");
    cmd_train->add_option("--stages", train.stages, "stages for stage_hit_ratios");
    cmd_train->add_option("--dim", train.dim_override, "raise the feature dimension");
    cmd_train->add_option("--trace", train.trace_path, "write the access trace here");
    cmd_train->add_option("--stats", train.stats_path, "write stats JSON here (default stdout)");

    std::string predict_model, predict_data, predict_out;
    CLI::App* cmd_predict = app.add_subcommand("predict", "predict labels with a model");
    cmd_predict->add_option("model", predict_model, "model file")->required();
    cmd_predict->add_option("data", predict_data, "LIBSVM data")->required();
    cmd_predict->add_option("-o,--output", predict_out, "predictions file (default stdout)");

    std::string sim_trace, sim_policy = "all", sim_out;
    std::size_t sim_capacity = 512;
    double sim_lambda = 2.0;
    int sim_workers = 1;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "replay a trace under caching strategies");
    cmd_sim->add_option("--trace", sim_trace, "trace file")->required();
    cmd_sim->add_option("--cache", sim_policy, "policy, 'opt' or 'all'");
    cmd_sim->add_option("-m,--cache-size", sim_capacity, "cache capacity in items");
    cmd_sim->add_option("--lambda", sim_lambda, "checkpoint spacing factor");
    cmd_sim->add_option("--workers", sim_workers, "replacement workers")->envname("KCACHE_WORKERS");
    cmd_sim->add_option("-o,--output", sim_out, "CSV output (default stdout)");

    std::string an_trace, an_unit = "iterations", an_cdf, an_diff;
    int an_stages = 4;
    std::size_t an_capacity = 512;
    CLI::App* cmd_an = app.add_subcommand("analyze", "access-pattern analytics over a trace");
    cmd_an->add_option("--trace", an_trace, "trace file")->required();
    cmd_an->add_option("--stages", an_stages, "number of training stages");
    cmd_an->add_option("-m,--cache-size", an_capacity, "capacity for the interval thresholds");
    cmd_an->add_option("--unit", an_unit, "reuse interval unit: iterations|positions");
    cmd_an->add_option("--cdf-out", an_cdf, "stage CDF csv (default <trace>.cdf.csv)");
    cmd_an->add_option("--diff-out", an_diff, "frequency-difference csv (default <trace>.freqdiff.csv)");

    std::string gen_kind = "zipf", gen_out;
    std::int64_t gen_items = 10000, gen_accesses = 100000;
    int gen_q = 50;
    double gen_alpha = 1.2;
    std::uint64_t gen_seed = 1;
    std::int64_t gen_phase_a = 3000, gen_phase_b = 4500, gen_loop_items = 400;
    CLI::App* cmd_gen = app.add_subcommand("gen-trace", "generate a synthetic access trace");
    cmd_gen->add_option("--kind", gen_kind, "zipf|two-phase");
    cmd_gen->add_option("--out", gen_out, "output trace file")->required();
    cmd_gen->add_option("--items", gen_items, "item universe (skewed part for two-phase)");
    cmd_gen->add_option("--accesses", gen_accesses, "total accesses (zipf)");
    cmd_gen->add_option("-q", gen_q, "accesses per iteration");
    cmd_gen->add_option("--alpha", gen_alpha, "zipf exponent");
    cmd_gen->add_option("--seed", gen_seed, "random seed");
    cmd_gen->add_option("--phase-a", gen_phase_a, "skewed-phase iterations (two-phase)");
    cmd_gen->add_option("--phase-b", gen_phase_b, "loop-phase iterations (two-phase)");
    cmd_gen->add_option("--loop-items", gen_loop_items, "loop working-set size (two-phase)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_train->parsed()) return run_train(train);
        if (cmd_predict->parsed()) return run_predict(predict_model, predict_data, predict_out);
        if (cmd_sim->parsed())
            return run_simulate(sim_trace, sim_policy, sim_capacity, sim_lambda, sim_workers, sim_out);
        if (cmd_an->parsed())
            return run_analyze(an_trace, an_stages, an_capacity, an_unit, an_cdf, an_diff);
        if (cmd_gen->parsed()) {
            AccessTrace trace;
            if (gen_kind == "zipf") {
                trace = gen_zipf_trace(gen_items, gen_accesses, gen_q, gen_alpha, gen_seed);
            } else if (gen_kind == "two-phase") {
                TwoPhaseSpec spec;
                spec.skew_items = gen_items;
                spec.alpha = gen_alpha;
                spec.skew_iterations = gen_phase_a;
                spec.loop_items = gen_loop_items;
                spec.loop_iterations = gen_phase_b;
                spec.q = gen_q;
                spec.seed = gen_seed;
                trace = gen_two_phase_trace(spec);
            } else {
                throw std::runtime_error("unknown trace kind: " + gen_kind);
            }
            write_trace_file(trace, gen_out);
            std::cout << "wrote " << gen_out << " (" << trace.events.size() << " events, n="
                      << trace.n << ")\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
