#include "sidtw/alignment.hpp"
#include "sidtw/baselines.hpp"
#include "sidtw/errors.hpp"
#include "sidtw/harness/experiment.hpp"
#include "sidtw/harness/io.hpp"
#include "sidtw/parametric_dtw.hpp"
#include "sidtw/selective_inference.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

namespace {

using namespace sidtw;
using namespace sidtw::harness;
using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

json region_json(const IntervalUnion& region) {
    json out = json::array();
    for (const Interval& iv : region.intervals()) {
        out.push_back({std::isinf(iv.lo) ? json("-inf") : json(iv.lo),
                       std::isinf(iv.hi) ? json("inf") : json(iv.hi)});
    }
    return out;
}

// Output goes to --out when given, stdout otherwise.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw InputError("cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct TestArgs {
    std::string file_a;
    std::string file_b;
    std::size_t row_a = 0;
    std::size_t row_b = 0;
    std::string method = "si-dtw";
    std::string variance = "estimated";
    std::string cov = "indep";
    double alpha = 0.05;
    int perm_B = 1000;
    std::uint64_t seed = 0;
    bool no_ci = false;
    std::string out;
};

int run_test(const TestArgs& args) {
    UcrPairOptions opts;
    opts.row_a = args.row_a;
    opts.row_b = args.row_b;
    opts.variance_mode = parse_variance_mode(args.variance);
    opts.covariance = parse_covariance(args.cov);
    const TimeSeriesPair pair = load_ucr_pair(args.file_a, args.file_b, opts);
    const Method method = parse_method(args.method);

    json rec = {{"method", to_string(method)}, {"n", pair.n()}, {"m", pair.m()}};
    if (method == Method::si_dtw || method == Method::si_dtw_oc) {
        const InferenceResult r =
            method == Method::si_dtw ? selective_p_value(pair) : si_dtw_oc_p_value(pair);
        rec["statistic"] = r.z_obs;
        rec["sigma"] = r.sigma;
        rec["p"] = r.p_selective;
        rec["alignment"] = r.alignment.to_string();
        rec["region"] = region_json(r.region);
        if (!args.no_ci) {
            const ConfidenceInterval ci = confidence_interval(r.z_obs, r.sigma, r.region, args.alpha);
            rec["ci"] = {ci.lo, ci.hi};
            rec["alpha"] = args.alpha;
        }
    } else if (method == Method::permutation) {
        rec["statistic"] = dtw_abs_statistic(pair.x(), pair.y());
        rec["p"] = permutation_test(pair, args.perm_B, args.seed);
    } else {
        rec["p"] = data_splitting_test(pair);
    }
    Sink sink(args.out);
    sink.stream() << rec.dump() << '\n';
    return 0;
}

struct SimulateArgs {
    std::string config_path;
    std::string experiment = "fpr";
    std::string out;
    std::string format = "json-lines";
    // Flag name -> config key, filled from whichever flags were given.
    KeyValues overrides;
};

int run_simulate(const SimulateArgs& args) {
    KeyValues kv;
    if (!args.config_path.empty()) kv = read_key_values(args.config_path);
    for (const auto& [key, value] : args.overrides) kv[key] = value;
    const std::vector<ExperimentConfig> grid = expand_grid(ExperimentConfig{}, kv);
    const ReportFormat format = parse_report_format(args.format);

    Sink sink(args.out);
    for (const ExperimentConfig& config : grid) {
        if (args.experiment == "fpr") {
            write_report(sink.stream(), run_fpr(config), format);
        } else if (args.experiment == "tpr") {
            write_report(sink.stream(), run_tpr(config), format);
        } else if (args.experiment == "ci") {
            const PairedReport paired = run_ci(config);
            write_report(sink.stream(), paired.si, format);
            write_report(sink.stream(), paired.oc, format);
        } else if (args.experiment == "timing") {
            write_report(sink.stream(), run_experiment(config), format);
        } else {
            throw InputError("unknown experiment '" + args.experiment + "' (fpr, tpr, ci, timing)");
        }
    }
    return 0;
}

struct OracleArgs {
    int n = 4;
    int m = 4;
    int trials = 50;
    std::uint64_t seed = 0;
    std::string out;
};

// Cross-checks DTW against exhaustive enumeration and the parametric Z1
// against the enumeration envelope on random null pairs.
int run_oracle(const OracleArgs& args) {
    ExperimentConfig config;
    config.n = args.n;
    config.m = args.m;
    config.seed = args.seed;
    config.trials = args.trials;
    config.validate();
    const auto all = enumerate_alignments(args.n, args.m);

    int dtw_mismatch = 0;
    int p_mismatch = 0;
    double max_p_diff = 0.0;
    for (int t = 0; t < args.trials; ++t) {
        const TimeSeriesPair pair = generate_pair(config, t);
        const DtwResult d = dtw(pair);
        double best = kInf;
        for (const AlignmentMatrix& M : all) best = std::min(best, alignment_cost(M, pair.x(), pair.y()));
        if (std::abs(best - d.distance) > 1e-9 * std::max(1.0, std::abs(best))) ++dtw_mismatch;

        const double p_para = selective_p_value(pair).p_selective;
        const double p_enum = selective_p_value(pair, {Z1Method::enumeration}).p_selective;
        const double diff = std::abs(p_para - p_enum);
        max_p_diff = std::max(max_p_diff, diff);
        if (diff > 1e-9) ++p_mismatch;
    }
    const json rec = {{"n", args.n},
                      {"m", args.m},
                      {"trials", args.trials},
                      {"alignments", all.size()},
                      {"dtw_mismatches", dtw_mismatch},
                      {"p_mismatches", p_mismatch},
                      {"max_p_difference", max_p_diff}};
    Sink sink(args.out);
    sink.stream() << rec.dump() << '\n';
    return dtw_mismatch == 0 && p_mismatch == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Selective inference for the DTW distance"};
    app.require_subcommand(1);

    TestArgs test;
    CLI::App* test_cmd = app.add_subcommand("test", "Selective test for one pair of series read from files");
    test_cmd->add_option("file_a", test.file_a, "UCR-style file holding X")->required()->check(CLI::ExistingFile);
    test_cmd->add_option("file_b", test.file_b, "UCR-style file holding Y")->required()->check(CLI::ExistingFile);
    test_cmd->add_option("--row-a", test.row_a, "0-based row of file_a");
    test_cmd->add_option("--row-b", test.row_b, "0-based row of file_b");
    test_cmd->add_option("--method", test.method, "si-dtw, si-dtw-oc, perm or ds");
    test_cmd->add_option("--variance", test.variance, "known or estimated");
    test_cmd->add_option("--cov", test.cov, "indep or ar (known variance only)");
    test_cmd->add_option("--alpha", test.alpha, "Confidence interval level is 1 - alpha");
    test_cmd->add_option("--perm-B", test.perm_B, "Permutation replicates");
    test_cmd->add_option("--seed", test.seed, "Permutation seed");
    test_cmd->add_flag("--no-ci", test.no_ci, "Skip the confidence interval");
    test_cmd->add_option("--out", test.out, "Write the record here instead of stdout");

    SimulateArgs sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Run a synthetic experiment grid");
    sim_cmd->add_option("--config", sim.config_path, "key = value config file")->check(CLI::ExistingFile);
    sim_cmd->add_option("--experiment", sim.experiment, "fpr, tpr, ci or timing");
    sim_cmd->add_option("--out", sim.out, "Write the report here instead of stdout");
    sim_cmd->add_option("--format", sim.format, "json-lines or csv");
    const std::pair<const char*, const char*> overridable[] = {
        {"--method", "method"}, {"--n", "n"},         {"--m", "m"},         {"--delta", "delta"},
        {"--cov", "cov"},       {"--noise", "noise"}, {"--variance", "variance"},
        {"--alpha", "alpha"},   {"--trials", "trials"}, {"--repetitions", "repetitions"},
        {"--seed", "seed"},     {"--perm-B", "perm_B"}, {"--threads", "threads"},
    };
    for (const auto& [flag, key] : overridable) {
        sim_cmd->add_option_function<std::string>(
            flag, [&sim, key = std::string(key)](const std::string& v) { sim.overrides[key] = v; },
            "Overrides '" + std::string(key) + "' from the config file");
    }

    OracleArgs oracle;
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "Brute-force cross-checks for small n, m");
    oracle_cmd->add_option("--n", oracle.n, "Length of X");
    oracle_cmd->add_option("--m", oracle.m, "Length of Y");
    oracle_cmd->add_option("--trials", oracle.trials, "Random pairs to check");
    oracle_cmd->add_option("--seed", oracle.seed, "Generator seed");
    oracle_cmd->add_option("--out", oracle.out, "Write the summary here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*test_cmd) return run_test(test);
        if (*sim_cmd) return run_simulate(sim);
        return run_oracle(oracle);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}
