#include "sidtw/harness/experiment.hpp"

#include "sidtw/baselines.hpp"
#include "sidtw/errors.hpp"
#include "sidtw/harness/rng.hpp"
#include "sidtw/selective_inference.hpp"

#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <thread>

namespace sidtw::harness {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::si_dtw: return "si-dtw";
        case Method::si_dtw_oc: return "si-dtw-oc";
        case Method::permutation: return "permutation";
        case Method::data_split: return "data-split";
    }
    return "?";
}

std::string_view to_string(Covariance c) {
    return c == Covariance::independence ? "independence" : "ar-correlation";
}

std::string_view to_string(Noise n) {
    switch (n) {
        case Noise::gaussian: return "gaussian";
        case Noise::laplace: return "laplace";
        case Noise::skew_normal: return "skew-normal-10";
        case Noise::student_t20: return "student-t-20";
    }
    return "?";
}

std::string_view to_string(VarianceMode v) { return v == VarianceMode::known ? "known" : "estimated"; }

Method parse_method(std::string_view s) {
    if (s == "si-dtw") return Method::si_dtw;
    if (s == "si-dtw-oc") return Method::si_dtw_oc;
    if (s == "permutation" || s == "perm") return Method::permutation;
    if (s == "data-split" || s == "ds") return Method::data_split;
    throw InputError("unknown method '" + std::string(s) + "'");
}

Covariance parse_covariance(std::string_view s) {
    if (s == "indep" || s == "independence") return Covariance::independence;
    if (s == "ar" || s == "ar-correlation") return Covariance::ar_correlation;
    throw InputError("unknown covariance '" + std::string(s) + "'");
}

Noise parse_noise(std::string_view s) {
    if (s == "gauss" || s == "gaussian") return Noise::gaussian;
    if (s == "laplace") return Noise::laplace;
    if (s == "skewnormal" || s == "skew-normal" || s == "skew-normal-10") return Noise::skew_normal;
    if (s == "t20" || s == "student-t-20") return Noise::student_t20;
    throw InputError("unknown noise family '" + std::string(s) + "'");
}

VarianceMode parse_variance_mode(std::string_view s) {
    if (s == "known") return VarianceMode::known;
    if (s == "estimated") return VarianceMode::estimated;
    throw InputError("unknown variance mode '" + std::string(s) + "'");
}

ReportFormat parse_report_format(std::string_view s) {
    if (s == "json-lines" || s == "jsonl") return ReportFormat::json_lines;
    if (s == "csv") return ReportFormat::csv;
    throw InputError("unknown report format '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
    if (n < 1 || m < 1) throw InputError("n and m must be positive");
    if (trials < 1) throw InputError("trials must be at least 1");
    if (repetitions < 1) throw InputError("repetitions must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (!std::isfinite(delta)) throw InputError("delta must be finite");
    if (method == Method::permutation) {
        if (n != m) throw InputError("permutation requires equal lengths");
        if (permutation_B < 1) throw InputError("perm-B must be at least 1");
    }
    if (method == Method::data_split && (n < 2 || m < 2)) {
        throw InputError("data splitting needs n, m >= 2");
    }
    if (variance_mode == VarianceMode::estimated && (n < 2 || m < 2)) {
        throw InputError("estimated variance needs n, m >= 2");
    }
    if (threads < 0) throw InputError("threads must be non-negative");
}

Eigen::MatrixXd covariance_matrix(Covariance c, int len) {
    if (c == Covariance::independence) return Eigen::MatrixXd::Identity(len, len);
    Eigen::MatrixXd s(len, len);
    for (int r = 0; r < len; ++r) {
        for (int q = 0; q < len; ++q) s(r, q) = std::pow(kArRho, std::abs(r - q));
    }
    return s;
}

namespace {

// Zero-mean, unit-variance draws from the configured family.
Eigen::VectorXd standardized_noise(Noise family, int len, CounterRng& rng) {
    Eigen::VectorXd e(len);
    switch (family) {
        case Noise::gaussian: {
            boost::random::normal_distribution<double> d(0.0, 1.0);
            for (int k = 0; k < len; ++k) e[k] = d(rng);
            break;
        }
        case Noise::laplace: {
            boost::random::laplace_distribution<double> d(0.0, 1.0 / std::numbers::sqrt2);
            for (int k = 0; k < len; ++k) e[k] = d(rng);
            break;
        }
        case Noise::skew_normal: {
            // w = δ|u| + sqrt(1-δ²) v has the skew-normal law with shape α.
            const double delta = kSkewNormalShape / std::sqrt(1.0 + kSkewNormalShape * kSkewNormalShape);
            const double mean = delta * std::sqrt(2.0 / std::numbers::pi);
            const double sd = std::sqrt(1.0 - 2.0 * delta * delta / std::numbers::pi);
            boost::random::normal_distribution<double> d(0.0, 1.0);
            for (int k = 0; k < len; ++k) {
                const double u = d(rng);
                const double v = d(rng);
                e[k] = (delta * std::abs(u) + std::sqrt(1.0 - delta * delta) * v - mean) / sd;
            }
            break;
        }
        case Noise::student_t20: {
            boost::random::student_t_distribution<double> d(kStudentDof);
            const double scale = std::sqrt((kStudentDof - 2.0) / kStudentDof);
            for (int k = 0; k < len; ++k) e[k] = d(rng) * scale;
            break;
        }
    }
    return e;
}

}  // namespace

Eigen::MatrixXd sample_variance_diagonal(const Eigen::VectorXd& v) {
    const Eigen::Index len = v.size();
    double var = 0.0;
    if (len > 1) var = (v.array() - v.mean()).square().sum() / static_cast<double>(len - 1);
    // A constant series would give a singular Σ.
    return Eigen::MatrixXd::Identity(len, len) * std::max(var, kVarianceFloor);
}

TimeSeriesPair generate_pair(const ExperimentConfig& config, int trial_index) {
    const Eigen::MatrixXd sx = covariance_matrix(config.covariance, config.n);
    const Eigen::MatrixXd sy = covariance_matrix(config.covariance, config.m);
    CounterRng rx(config.seed, static_cast<std::uint64_t>(trial_index), CounterRng::noise_x);
    CounterRng ry(config.seed, static_cast<std::uint64_t>(trial_index), CounterRng::noise_y);
    const Eigen::MatrixXd lx = sx.llt().matrixL();
    const Eigen::MatrixXd ly = sy.llt().matrixL();
    Eigen::VectorXd x = lx * standardized_noise(config.noise, config.n, rx);
    Eigen::VectorXd y = ly * standardized_noise(config.noise, config.m, ry);
    y.array() += config.delta;
    if (config.variance_mode == VarianceMode::estimated) {
        Eigen::MatrixXd ex = sample_variance_diagonal(x);
        Eigen::MatrixXd ey = sample_variance_diagonal(y);
        return TimeSeriesPair(std::move(x), std::move(y), std::move(ex), std::move(ey));
    }
    return TimeSeriesPair(std::move(x), std::move(y), sx, sy);
}

namespace {

TrialRecord run_trial(const ExperimentConfig& config, Method method, const TimeSeriesPair& pair,
                      int trial) {
    TrialRecord rec;
    rec.trial = trial;
    const auto start = std::chrono::steady_clock::now();
    try {
        switch (method) {
            case Method::si_dtw:
            case Method::si_dtw_oc: {
                const InferenceResult r =
                    method == Method::si_dtw ? selective_p_value(pair) : si_dtw_oc_p_value(pair);
                rec.p = r.p_selective;
                rec.statistic = r.z_obs;
                Eigen::VectorXd mu = Eigen::VectorXd::Zero(pair.n() + pair.m());
                mu.tail(pair.m()).setConstant(config.delta);
                rec.true_mean = r.direction.eta.dot(mu);
                if (config.with_ci) {
                    const ConfidenceInterval ci = confidence_interval(r.z_obs, r.sigma, r.region, config.alpha);
                    rec.ci_lo = ci.lo;
                    rec.ci_hi = ci.hi;
                }
                break;
            }
            case Method::permutation: {
                CounterRng rng(config.seed, static_cast<std::uint64_t>(trial), CounterRng::permutation);
                rec.p = permutation_test(pair, config.permutation_B, rng());
                break;
            }
            case Method::data_split:
                rec.p = data_splitting_test(pair);
                break;
        }
    } catch (const NumericalError& e) {
        rec.p.reset();
        rec.error = e.what();
    } catch (const InternalError& e) {
        rec.p.reset();
        rec.error = e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    const int workers = threads == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                                     : threads;
    if (workers <= 1 || count <= 1) {
        for (int k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&] {
            for (int k = next++; k < count; k = next++) fn(k);
        });
    }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report{config, std::vector<TrialRecord>(config.total_trials())};
    parallel_for(config.total_trials(), config.threads, [&](int t) {
        report.records[t] = run_trial(config, config.method, generate_pair(config, t), t);
    });
    return report;
}

ExperimentReport run_fpr(const ExperimentConfig& config) {
    if (config.delta != 0.0) throw InputError("run_fpr requires delta = 0");
    return run_experiment(config);
}

ExperimentReport run_tpr(const ExperimentConfig& config) { return run_experiment(config); }

PairedReport run_paired(const ExperimentConfig& config) {
    config.validate();
    ExperimentConfig si_cfg = config;
    si_cfg.method = Method::si_dtw;
    ExperimentConfig oc_cfg = config;
    oc_cfg.method = Method::si_dtw_oc;
    PairedReport out{{si_cfg, std::vector<TrialRecord>(config.total_trials())},
                     {oc_cfg, std::vector<TrialRecord>(config.total_trials())}};
    parallel_for(config.total_trials(), config.threads, [&](int t) {
        const TimeSeriesPair pair = generate_pair(config, t);
        out.si.records[t] = run_trial(si_cfg, Method::si_dtw, pair, t);
        out.oc.records[t] = run_trial(oc_cfg, Method::si_dtw_oc, pair, t);
    });
    return out;
}

PairedReport run_ci(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.with_ci = true;
    return run_paired(c);
}

int ExperimentReport::completed() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const TrialRecord& r) { return r.p.has_value(); }));
}

int ExperimentReport::failures() const { return static_cast<int>(records.size()) - completed(); }

namespace {

double rate_of(std::span<const TrialRecord> recs, double alpha) {
    int done = 0;
    int rejected = 0;
    for (const TrialRecord& r : recs) {
        if (!r.p) continue;
        ++done;
        if (*r.p <= alpha) ++rejected;
    }
    return done == 0 ? 0.0 : static_cast<double>(rejected) / done;
}

std::vector<double> ci_lengths(const std::vector<TrialRecord>& recs) {
    std::vector<double> out;
    for (const TrialRecord& r : recs) {
        if (r.ci_lo && r.ci_hi) out.push_back(*r.ci_hi - *r.ci_lo);
    }
    return out;
}

}  // namespace

double ExperimentReport::rejection_rate() const { return rate_of(records, config.alpha); }

std::vector<double> ExperimentReport::repetition_rates() const {
    std::vector<double> out;
    const std::size_t block = static_cast<std::size_t>(config.trials);
    for (std::size_t start = 0; start < records.size(); start += block) {
        const std::size_t len = std::min(block, records.size() - start);
        out.push_back(rate_of(std::span(records).subspan(start, len), config.alpha));
    }
    return out;
}

double ExperimentReport::mean_repetition_rate() const {
    const auto rates = repetition_rates();
    if (rates.empty()) return 0.0;
    double s = 0.0;
    for (double r : rates) s += r;
    return s / static_cast<double>(rates.size());
}

std::optional<double> ExperimentReport::mean_ci_length() const {
    const auto len = ci_lengths(records);
    if (len.empty()) return std::nullopt;
    double s = 0.0;
    for (double l : len) s += l;
    return s / static_cast<double>(len.size());
}

std::optional<double> ExperimentReport::median_ci_length() const {
    auto len = ci_lengths(records);
    if (len.empty()) return std::nullopt;
    std::sort(len.begin(), len.end());
    const std::size_t h = len.size() / 2;
    return len.size() % 2 ? len[h] : 0.5 * (len[h - 1] + len[h]);
}

double ExperimentReport::ci_coverage() const {
    int total = 0;
    int covered = 0;
    for (const TrialRecord& r : records) {
        if (!r.ci_lo || !r.ci_hi || !r.true_mean) continue;
        ++total;
        if (*r.ci_lo <= *r.true_mean && *r.true_mean <= *r.ci_hi) ++covered;
    }
    return total == 0 ? 0.0 : static_cast<double>(covered) / total;
}

double ExperimentReport::mean_seconds() const {
    if (records.empty()) return 0.0;
    double s = 0.0;
    for (const TrialRecord& r : records) s += r.seconds;
    return s / static_cast<double>(records.size());
}

namespace {

nlohmann::json config_json(const ExperimentConfig& c) {
    return {{"method", to_string(c.method)},
            {"n", c.n},
            {"m", c.m},
            {"delta", c.delta},
            {"covariance", to_string(c.covariance)},
            {"noise", to_string(c.noise)},
            {"variance_mode", to_string(c.variance_mode)},
            {"alpha", c.alpha},
            {"trials", c.trials},
            {"repetitions", c.repetitions},
            {"seed", c.seed},
            {"perm_B", c.permutation_B}};
}

template <class T>
nlohmann::json opt(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string csv_opt(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

}  // namespace

void write_report(std::ostream& os, const ExperimentReport& report, ReportFormat format) {
    const ExperimentConfig& c = report.config;
    if (format == ReportFormat::json_lines) {
        for (const TrialRecord& r : report.records) {
            nlohmann::json j = {{"type", "trial"},      {"method", to_string(c.method)},
                                {"trial", r.trial},     {"p", opt(r.p)},
                                {"statistic", opt(r.statistic)},
                                {"ci_lo", opt(r.ci_lo)}, {"ci_hi", opt(r.ci_hi)},
                                {"seconds", r.seconds}};
            if (!r.error.empty()) j["error"] = r.error;
            os << j.dump() << '\n';
        }
        nlohmann::json s = {{"type", "summary"},
                            {"config", config_json(c)},
                            {"completed", report.completed()},
                            {"failures", report.failures()},
                            {"rejection_rate", report.rejection_rate()},
                            {"repetition_rates", report.repetition_rates()},
                            {"mean_repetition_rate", report.mean_repetition_rate()},
                            {"mean_ci_length", opt(report.mean_ci_length())},
                            {"median_ci_length", opt(report.median_ci_length())},
                            {"mean_seconds", report.mean_seconds()}};
        os << s.dump() << '\n';
        return;
    }
    os << "method,n,m,delta,covariance,noise,variance_mode,alpha,trial,p,statistic,ci_lo,ci_hi,seconds\n";
    for (const TrialRecord& r : report.records) {
        os << to_string(c.method) << ',' << c.n << ',' << c.m << ',' << c.delta << ','
           << to_string(c.covariance) << ',' << to_string(c.noise) << ',' << to_string(c.variance_mode)
           << ',' << c.alpha << ',' << r.trial << ',' << csv_opt(r.p) << ',' << csv_opt(r.statistic)
           << ',' << csv_opt(r.ci_lo) << ',' << csv_opt(r.ci_hi) << ',' << r.seconds << '\n';
    }
}

}  // namespace sidtw::harness
