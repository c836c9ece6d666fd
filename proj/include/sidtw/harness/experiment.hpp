#pragma once

#include "sidtw/dtw_core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sidtw::harness {

enum class Method { si_dtw, si_dtw_oc, permutation, data_split };
enum class Covariance { independence, ar_correlation };
enum class Noise { gaussian, laplace, skew_normal, student_t20 };
enum class VarianceMode { known, estimated };

std::string_view to_string(Method m);
std::string_view to_string(Covariance c);
std::string_view to_string(Noise n);
std::string_view to_string(VarianceMode v);

// Accept both the long names and the CLI short forms (indep, ar, gauss, ...).
Method parse_method(std::string_view s);
Covariance parse_covariance(std::string_view s);
Noise parse_noise(std::string_view s);
VarianceMode parse_variance_mode(std::string_view s);

inline constexpr double kArRho = 0.5;
inline constexpr double kSkewNormalShape = 10.0;
inline constexpr int kStudentDof = 20;

struct ExperimentConfig {
    Method method = Method::si_dtw;
    int n = 5;
    int m = 5;
    double delta = 0.0;
    Covariance covariance = Covariance::independence;
    Noise noise = Noise::gaussian;
    VarianceMode variance_mode = VarianceMode::known;
    double alpha = 0.05;
    int trials = 120;
    int repetitions = 1;
    std::uint64_t seed = 0;
    int permutation_B = 200;
    bool with_ci = false;
    int threads = 1;  // 0 = hardware concurrency

    // Throws InputError on out-of-range values.
    void validate() const;
    int total_trials() const noexcept { return trials * repetitions; }
};

// Σ for one series under the configured covariance model.
Eigen::MatrixXd covariance_matrix(Covariance c, int len);

// Diagonal Σ holding the sample variance of v, floored at kVarianceFloor.
inline constexpr double kVarianceFloor = 1e-12;
Eigen::MatrixXd sample_variance_diagonal(const Eigen::VectorXd& v);

// μ_X = 0, μ_Y = Δ, noise standardized to unit variance and colored by the
// Cholesky factor of Σ. Deterministic in (config.seed, trial_index).
TimeSeriesPair generate_pair(const ExperimentConfig& config, int trial_index);

struct TrialRecord {
    int trial = 0;
    std::optional<double> p;  // absent when the trial failed
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
    std::optional<double> statistic;
    // ηᵀ(μ_X; μ_Y) for the selected direction, the estimand of the interval.
    std::optional<double> true_mean;
    double seconds = 0.0;
    std::string error;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialRecord> records;

    int completed() const;
    int failures() const;
    // Fraction of completed trials with p <= alpha.
    double rejection_rate() const;
    // One rate per block of `trials` records.
    std::vector<double> repetition_rates() const;
    double mean_repetition_rate() const;
    std::optional<double> mean_ci_length() const;
    std::optional<double> median_ci_length() const;
    double ci_coverage() const;  // fraction of intervals containing true_mean
    double mean_seconds() const;
};

// Runs `config.method` on every trial. run_fpr requires delta == 0.
ExperimentReport run_experiment(const ExperimentConfig& config);
ExperimentReport run_fpr(const ExperimentConfig& config);
ExperimentReport run_tpr(const ExperimentConfig& config);

struct PairedReport {
    ExperimentReport si;
    ExperimentReport oc;
};

// SI-DTW and SI-DTW-oc on identical generated data.
PairedReport run_paired(const ExperimentConfig& config);
// Paired run with confidence intervals enabled.
PairedReport run_ci(const ExperimentConfig& config);

enum class ReportFormat { json_lines, csv };
ReportFormat parse_report_format(std::string_view s);

void write_report(std::ostream& os, const ExperimentReport& report, ReportFormat format);

}  // namespace sidtw::harness
