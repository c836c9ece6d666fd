#include "sidtw/selective_inference.hpp"

#include "sidtw/errors.hpp"
#include "sidtw/normal_tail.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sidtw {

DataLine nuisance_decomposition(const TimeSeriesPair& pair, const TestDirection& dir) {
    const Eigen::VectorXd& eta = dir.eta;
    if (eta.size() != pair.n() + pair.m()) {
        throw InputError("nuisance_decomposition: direction length does not match the pair");
    }
    const double var = pair.quadratic_form(eta);
    const double scale = eta.squaredNorm() *
                         std::max(pair.sigma_x().diagonal().maxCoeff(), pair.sigma_y().diagonal().maxCoeff());
    if (eta.isZero(0.0) || !(var > 1e-14 * scale)) {
        throw DegenerateDirectionError(
            "degenerate direction: eta' Sigma eta vanishes (X and Y coincide on the alignment)");
    }
    const Eigen::VectorXd obs = pair.stacked();
    DataLine line;
    line.n = pair.n();
    line.b = pair.sigma_times(eta) / var;
    line.a = obs - line.b * eta.dot(obs);
    return line;
}

IntervalUnion z2_region(const DataLine& line, const AlignmentMatrix& M,
                        std::span<const signed char> observed_sign) {
    const int n = line.n;
    const int m = line.m();
    if (M.rows() != n || M.cols() != m ||
        observed_sign.size() != static_cast<std::size_t>(n) * m) {
        throw InputError("z2_region: dimensions do not match the data line");
    }
    double lo = -kInf;
    double hi = kInf;
    for (const Cell& c : M.path()) {
        const double s = observed_sign[static_cast<std::size_t>(c.i) * m + c.j];
        if (s == 0.0) continue;
        const double nu1 = s * omega_row_value(line.a, n, c.i, c.j);
        const double nu2 = s * omega_row_value(line.b, n, c.i, c.j);
        if (nu2 > 0.0) {
            lo = std::max(lo, -nu1 / nu2);
        } else if (nu2 < 0.0) {
            hi = std::min(hi, -nu1 / nu2);
        } else if (nu1 < 0.0) {
            return IntervalUnion::empty();
        }
    }
    if (lo > hi) return IntervalUnion::empty();
    return IntervalUnion{{lo, hi}};
}

double truncated_gaussian_sf(double z_obs, double sigma, const IntervalUnion& region, double mean) {
    if (!(sigma > 0.0)) throw InputError("truncated_gaussian_sf: sigma must be positive");
    const double z = (z_obs - mean) / sigma;
    double log_total = -kInf;
    double log_upper = -kInf;
    for (const Interval& iv : region.intervals()) {
        const double lo = (iv.lo - mean) / sigma;
        const double hi = (iv.hi - mean) / sigma;
        log_total = log_add_exp(log_total, log_normal_interval_mass(lo, hi));
        if (hi > z) {
            log_upper = log_add_exp(log_upper, log_normal_interval_mass(std::max(lo, z), hi));
        }
    }
    if (log_total == -kInf || std::isnan(log_total)) {
        std::ostringstream os;
        os << "region mass underflow: log-mass " << log_total << " for region " << region.to_string();
        throw RegionMassUnderflowError(os.str(), log_total);
    }
    return std::clamp(std::exp(log_upper - log_total), 0.0, 1.0);
}

SelectionEvent observe_selection(const TimeSeriesPair& pair) {
    DtwResult d = dtw(pair);
    std::vector<signed char> sign = sign_vector(d.alignment, pair);
    TestDirection dir = test_direction(d.alignment, sign);
    DataLine line = nuisance_decomposition(pair, dir);
    const double z_obs = test_statistic(dir, pair);
    const double sigma = std::sqrt(pair.quadratic_form(dir.eta));
    return {std::move(d), std::move(sign), std::move(dir), z_obs, sigma, std::move(line)};
}

InferenceResult selective_p_value(const TimeSeriesPair& pair, const InferenceOptions& options) {
    SelectionEvent ev = observe_selection(pair);
    const int n = pair.n();
    const int m = pair.m();

    const PiecewiseEnvelope env = options.z1_method == Z1Method::parametric
                                      ? para_dtw(ev.line, n, m)
                                      : envelope_bruteforce(enumerate_alignments(n, m), ev.line);
    const IntervalUnion z1 = z1_region(env, ev.dtw.alignment);
    const IntervalUnion z2 = z2_region(ev.line, ev.dtw.alignment, ev.sign);
    IntervalUnion region = z1.intersect(z2);
    if (!region.contains(ev.z_obs, options.membership_tol)) {
        std::ostringstream os;
        os.precision(17);
        os << "observed statistic " << ev.z_obs << " lies outside its truncation region "
           << region.to_string() << " (Z1 = " << z1.to_string() << ", Z2 = " << z2.to_string() << ")";
        throw InternalError(os.str());
    }
    const double p = truncated_gaussian_sf(ev.z_obs, ev.sigma, region);
    return InferenceResult{ev.z_obs,         ev.sigma,  std::move(region),         p, std::nullopt,
                           ev.dtw.alignment, ev.direction, std::move(ev.line)};
}

namespace {

// θ with sf(θ) = target, where sf is non-decreasing in θ.
double solve_for_mean(double z_obs, double sigma, const IntervalUnion& region, double target) {
    auto f = [&](double theta) { return truncated_gaussian_sf(z_obs, sigma, region, theta) - target; };
    double width = sigma;
    double lo = z_obs - width;
    double hi = z_obs + width;
    // Near an endpoint the tail tilts only like exp(θ d / σ²), so allow θ out to
    // a multiple of σ² / d.
    double d = kInf;
    for (const Interval& iv : region.intervals()) {
        if (std::isfinite(iv.lo) && iv.lo != z_obs) d = std::min(d, std::abs(z_obs - iv.lo));
        if (std::isfinite(iv.hi) && iv.hi != z_obs) d = std::min(d, std::abs(iv.hi - z_obs));
    }
    const double cap = std::max(kMaxBracketSigmas * sigma, kBracketTiltFactor * sigma * sigma / d);
    while (f(lo) > 0.0) {
        width *= 2.0;
        if (width > cap) throw NumericalError("confidence interval: lower bracket not found");
        lo = z_obs - width;
    }
    width = sigma;
    while (f(hi) < 0.0) {
        width *= 2.0;
        if (width > cap) throw NumericalError("confidence interval: upper bracket not found");
        hi = z_obs + width;
    }
    const double tol = 1e-8 * sigma;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ConfidenceInterval confidence_interval(double z_obs, double sigma, const IntervalUnion& region,
                                       double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (!(sigma > 0.0)) throw InputError("confidence_interval: sigma must be positive");
    const double lo = solve_for_mean(z_obs, sigma, region, 0.5 * alpha);
    const double hi = solve_for_mean(z_obs, sigma, region, 1.0 - 0.5 * alpha);
    return {lo, hi};
}

ConfidenceInterval selective_confidence_interval(const TimeSeriesPair& pair, double alpha) {
    const InferenceResult r = selective_p_value(pair);
    return confidence_interval(r.z_obs, r.sigma, r.region, alpha);
}

}  // namespace sidtw
