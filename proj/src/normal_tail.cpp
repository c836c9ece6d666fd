#include "sidtw/normal_tail.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sidtw {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(sqrt(2π))

// Beyond this point the continued fraction converges quickly and erfc has
// lost too many exponent bits to be trusted in log space.
constexpr double kContinuedFractionFrom = 5.0;

// Laplace continued fraction R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))),
// evaluated with the modified Lentz method.
double mills_ratio_cf(double x) {
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 500; ++k) {
        d = x + k * d;
        if (d == 0.0) d = tiny;
        c = x + k / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return 1.0 / f;
}

}  // namespace

double log_mills_ratio(double x) {
    if (x < 0.0) throw std::domain_error("log_mills_ratio expects x >= 0");
    if (std::isinf(x)) return kNegInf;
    if (x < kContinuedFractionFrom) {
        return std::log(0.5 * std::erfc(x / std::numbers::sqrt2)) + 0.5 * x * x + kHalfLog2Pi;
    }
    return std::log(mills_ratio_cf(x));
}

double log_normal_sf(double x) {
    if (std::isnan(x)) return x;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    if (x < 0.0) return std::log1p(-0.5 * std::erfc(-x / std::numbers::sqrt2));
    if (x < kContinuedFractionFrom) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
    return log_mills_ratio(x) - 0.5 * x * x - kHalfLog2Pi;
}

double log_normal_interval_mass(double lo, double hi) {
    if (!(lo < hi)) return kNegInf;
    if (lo < 0.0 && hi > 0.0) {
        const double upper = std::isinf(hi) ? 1.0 : std::erf(hi / std::numbers::sqrt2);
        const double lower = std::isinf(lo) ? 1.0 : std::erf(-lo / std::numbers::sqrt2);
        return std::log(0.5 * (upper + lower));
    }
    if (hi <= 0.0) {
        // Reflect onto the upper half-line.
        return log_normal_interval_mass(-hi, -lo);
    }
    // 0 <= lo < hi.
    const double log_tail_lo = log_normal_sf(lo);
    if (std::isinf(hi)) return log_tail_lo;
    // log(Q(hi)/Q(lo)) from the Mills ratios keeps the small difference exact.
    const double log_ratio = -0.5 * (hi - lo) * (hi + lo) + log_mills_ratio(hi) - log_mills_ratio(lo);
    return log_tail_lo + std::log(-std::expm1(log_ratio));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile expects 0 < p < 1");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace sidtw
