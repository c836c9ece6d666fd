#include "doctest.h"
#include "oracles.hpp"

#include "sidtw/errors.hpp"
#include "sidtw/normal_tail.hpp"
#include "sidtw/selective_inference.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

using namespace sidtw;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// P(Z >= z | Z ∈ region) evaluated with 50 significant digits.
double high_precision_sf(double z_obs, double sigma, const IntervalUnion& region, double mean = 0.0) {
    auto cdf = [&](double v) -> Big {
        if (std::isinf(v)) return v > 0 ? Big(1) : Big(0);
        const Big t = (Big(v) - Big(mean)) / Big(sigma);
        return boost::math::erfc(-t / boost::multiprecision::sqrt(Big(2))) / 2;
    };
    // Upper tail computed separately so far-right regions keep their digits.
    auto sf = [&](double v) -> Big {
        if (std::isinf(v)) return v > 0 ? Big(0) : Big(1);
        const Big t = (Big(v) - Big(mean)) / Big(sigma);
        return boost::math::erfc(t / boost::multiprecision::sqrt(Big(2))) / 2;
    };
    Big total = 0;
    Big upper = 0;
    for (const Interval& iv : region.intervals()) {
        const Big mass = iv.lo >= mean ? sf(iv.lo) - sf(iv.hi) : cdf(iv.hi) - cdf(iv.lo);
        total += mass;
        if (iv.hi > z_obs) {
            const double lo = std::max(iv.lo, z_obs);
            upper += lo >= mean ? sf(lo) - sf(iv.hi) : cdf(iv.hi) - cdf(lo);
        }
    }
    return static_cast<double>(upper / total);
}

// Rejection sampler for N(mean, sigma²) restricted to region.
double monte_carlo_sf(std::mt19937_64& gen, double z_obs, double sigma, const IntervalUnion& region,
                      long accepted_target, double* standard_error) {
    std::normal_distribution<double> g(0.0, sigma);
    long accepted = 0;
    long above = 0;
    while (accepted < accepted_target) {
        const double z = g(gen);
        if (!region.contains(z)) continue;
        ++accepted;
        if (z >= z_obs) ++above;
    }
    const double p = static_cast<double>(above) / static_cast<double>(accepted);
    *standard_error = std::sqrt(std::max(p * (1 - p), 1e-12) / static_cast<double>(accepted));
    return p;
}

TimeSeriesPair random_pair(std::mt19937_64& gen, int n, int m) {
    return TimeSeriesPair::with_unit_noise(oracle::gaussian_vector(gen, n), oracle::gaussian_vector(gen, m));
}

}  // namespace

TEST_CASE("log normal tail against high precision") {
    for (double x : {-30.0, -8.0, -2.0, -0.1, 0.0, 0.5, 3.0, 4.99, 5.0, 5.01, 8.0, 20.0, 37.5, 100.0}) {
        const Big exact = boost::math::erfc(Big(x) / boost::multiprecision::sqrt(Big(2))) / 2;
        const double expect = static_cast<double>(boost::multiprecision::log(exact));
        CHECK(log_normal_sf(x) == doctest::Approx(expect).epsilon(1e-13));
    }
    CHECK(log_normal_sf(-kInf) == 0.0);
    CHECK(log_normal_sf(kInf) == -kInf);
}

TEST_CASE("interval mass against high precision") {
    const std::pair<double, double> cases[] = {{-1, 1}, {0, 1}, {2, 3}, {6, 6.001}, {-9, -8},
                                               {30, 31}, {-kInf, -40}, {7.5, kInf}, {-0.5, kInf}};
    for (const auto& [lo, hi] : cases) {
        auto sf = [](double v) -> Big {
            if (std::isinf(v)) return v > 0 ? Big(0) : Big(1);
            return boost::math::erfc(Big(v) / boost::multiprecision::sqrt(Big(2))) / 2;
        };
        Big exact;
        if (lo >= 0) {
            exact = sf(lo) - sf(hi);
        } else if (hi <= 0) {
            exact = sf(-hi) - sf(-lo);
        } else {
            exact = Big(1) - sf(hi) - sf(-lo);
        }
        const double expect = static_cast<double>(boost::multiprecision::log(exact));
        CHECK(log_normal_interval_mass(lo, hi) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(log_normal_interval_mass(1, 1) == -kInf);
}

TEST_CASE("log_add_exp and quantile") {
    CHECK(log_add_exp(-kInf, -kInf) == -kInf);
    CHECK(log_add_exp(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
    CHECK(log_add_exp(-1000.0, -1000.0) == doctest::Approx(-1000.0 + std::log(2.0)));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
}

TEST_CASE("truncated sf special cases") {
    CHECK(truncated_gaussian_sf(0.0, 1.0, IntervalUnion::real_line()) == doctest::Approx(0.5));
    CHECK(truncated_gaussian_sf(0.0, 1.0, IntervalUnion{{0, kInf}}) == 1.0);
    CHECK(truncated_gaussian_sf(5.0, 2.0, IntervalUnion::real_line(), 5.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(truncated_gaussian_sf(0.0, 1.0, IntervalUnion::empty()), RegionMassUnderflowError);
    CHECK_THROWS_AS(truncated_gaussian_sf(0.0, 0.0, IntervalUnion::real_line()), InputError);
}

TEST_CASE("truncated sf against Monte Carlo on a two-piece region") {
    std::mt19937_64 gen(21);
    const IntervalUnion region{{-1, 1}, {2, 3}};
    double se = 0.0;
    const double mc = monte_carlo_sf(gen, 0.5, 1.0, region, 2'000'000, &se);
    CHECK(std::abs(truncated_gaussian_sf(0.5, 1.0, region) - mc) < 3 * se);
}

TEST_CASE("truncated sf against high precision up to 8 sigma") {
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> u(-8, 8);
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<Interval> pieces;
        for (int k = 0; k < 3; ++k) {
            const double a = u(gen);
            const double b = a + std::abs(u(gen)) / 4 + 1e-3;
            pieces.push_back({a, std::min(b, 8.0)});
        }
        const IntervalUnion region(pieces);
        if (region.is_empty()) continue;
        const auto& ivs = region.intervals();
        const double z = ivs[rep % ivs.size()].lo + 0.3 * ivs[rep % ivs.size()].length();
        const double p = truncated_gaussian_sf(z, 1.0, region);
        const double expect = high_precision_sf(z, 1.0, region);
        CHECK(std::abs(p - expect) <= 1e-10 * std::max(expect, 1e-300));
    }
}

TEST_CASE("truncated sf in the far tail") {
    const IntervalUnion region{{30, 31}, {40, 41}};
    const double p = truncated_gaussian_sf(30.01, 1.0, region);
    CHECK(p == doctest::Approx(high_precision_sf(30.01, 1.0, region)).epsilon(1e-10));
    CHECK(p > 0.0);
    CHECK(p < 1.0);
}

TEST_CASE("truncated sf is monotone in the mean") {
    const IntervalUnion region{{-2, -1}, {0.5, 4}};
    double prev = 0.0;
    for (double theta = -10; theta <= 10; theta += 0.25) {
        const double p = truncated_gaussian_sf(1.0, 1.0, region, theta);
        CHECK(p >= prev - 1e-15);
        prev = p;
    }
}

TEST_CASE("nuisance decomposition identities") {
    std::mt19937_64 gen(23);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 2 + rep % 4;
        const int m = 2 + (rep / 4) % 4;
        Eigen::MatrixXd Lx = Eigen::MatrixXd::Random(n, n);
        const Eigen::MatrixXd sx = Lx * Lx.transpose() + Eigen::MatrixXd::Identity(n, n);
        const TimeSeriesPair pair(oracle::gaussian_vector(gen, n), oracle::gaussian_vector(gen, m), sx,
                                  Eigen::MatrixXd::Identity(m, m) * 2.0);
        const DtwResult d = dtw(pair);
        const TestDirection dir = test_direction(d.alignment, sign_vector(d.alignment, pair));
        const DataLine line = nuisance_decomposition(pair, dir);
        CHECK(dir.eta.dot(line.b) == doctest::Approx(1.0).epsilon(1e-10));
        const double t = test_statistic(dir, pair);
        CHECK((line.a + line.b * t - pair.stacked()).norm() < 1e-10 * std::max(1.0, pair.stacked().norm()));
        CHECK(std::abs(dir.eta.dot(line.a)) < 1e-10 * std::max(1.0, line.a.norm()));
    }
}

TEST_CASE("nuisance decomposition with identity covariance and a unit direction") {
    Eigen::VectorXd x(2), y(2);
    x << 1.5, -2.0;
    y << 0.25, 4.0;
    const auto pair = TimeSeriesPair::with_unit_noise(x, y);
    TestDirection dir;
    dir.eta = Eigen::VectorXd::Unit(4, 0);
    const DataLine line = nuisance_decomposition(pair, dir);
    CHECK(line.b == Eigen::VectorXd::Unit(4, 0));
    Eigen::VectorXd expect = pair.stacked();
    expect[0] = 0.0;
    CHECK(line.a == expect);
}

TEST_CASE("degenerate direction is rejected") {
    Eigen::VectorXd x(2);
    x << 1.0, 2.0;
    const auto pair = TimeSeriesPair::with_unit_noise(x, x);
    const DtwResult d = dtw(pair);
    const TestDirection dir = test_direction(d.alignment, sign_vector(d.alignment, pair));
    CHECK_THROWS_AS(nuisance_decomposition(pair, dir), DegenerateDirectionError);
    CHECK_THROWS_AS(selective_p_value(pair), DegenerateDirectionError);
}

TEST_CASE("z2 region from single constraints") {
    const AlignmentMatrix M(1, 1, {{0, 0}});
    const std::vector<signed char> plus{1};
    DataLine line;
    line.n = 1;
    line.a = Eigen::Vector2d(-2, 0);
    line.b = Eigen::Vector2d(1, 0);
    CHECK(z2_region(line, M, plus) == IntervalUnion{{2, kInf}});

    line.a = Eigen::Vector2d(3, 1);
    line.b = Eigen::Vector2d(0.5, 0.5);
    CHECK(z2_region(line, M, plus) == IntervalUnion::real_line());

    line.a = Eigen::Vector2d(1, 3);
    CHECK(z2_region(line, M, plus).is_empty());

    const std::vector<signed char> zero{0};
    CHECK(z2_region(line, M, zero) == IntervalUnion::real_line());
    CHECK_THROWS_AS(z2_region(line, AlignmentMatrix(1, 2, {{0, 0}, {0, 1}}), plus), InputError);
}

TEST_CASE("z2 region contains the observation and preserves signs") {
    std::mt19937_64 gen(24);
    for (int rep = 0; rep < 50; ++rep) {
        const auto pair = random_pair(gen, 2 + rep % 5, 2 + (rep * 3) % 5);
        const SelectionEvent ev = observe_selection(pair);
        const IntervalUnion z2 = z2_region(ev.line, ev.dtw.alignment, ev.sign);
        REQUIRE(z2.contains(ev.z_obs, 1e-9));
        // Sample inside Z2 and recompute the signs on the path.
        const Interval iv = z2.intervals().front();
        const double lo = std::isinf(iv.lo) ? ev.z_obs - 10 : iv.lo;
        const double hi = std::isinf(iv.hi) ? ev.z_obs + 10 : iv.hi;
        std::uniform_real_distribution<double> u(lo, hi);
        for (int k = 0; k < 20; ++k) {
            const double z = u(gen);
            const Eigen::VectorXd x = ev.line.x_at(z);
            const Eigen::VectorXd y = ev.line.y_at(z);
            for (const Cell& c : ev.dtw.alignment.path()) {
                const signed char s = ev.sign[c.i * pair.m() + c.j];
                if (s != 0) CHECK(s * (x[c.i] - y[c.j]) >= -1e-9);
            }
        }
    }
}

TEST_CASE("selective p-value contract") {
    std::mt19937_64 gen(25);
    for (int rep = 0; rep < 50; ++rep) {
        const auto pair = random_pair(gen, 1 + rep % 6, 1 + (rep * 5) % 6);
        const InferenceResult r = selective_p_value(pair);
        CHECK(r.p_selective >= 0.0);
        CHECK(r.p_selective <= 1.0);
        CHECK(r.region.contains(r.z_obs, 1e-9));
        CHECK(r.sigma > 0.0);
        CHECK(r.alignment == dtw(pair).alignment);
    }
    Eigen::VectorXd x(4);
    x << 0.1, 0.5, -0.2, 0.9;
    Eigen::VectorXd y = x;
    y[2] += 1e-6;
    const InferenceResult r = selective_p_value(TimeSeriesPair::with_unit_noise(x, y));
    CHECK(r.p_selective >= 0.0);
    CHECK(r.p_selective <= 1.0);
    CHECK(r.region.contains(r.z_obs, 1e-9));
}

TEST_CASE("p-values agree between parametric and enumerated Z1") {
    std::mt19937_64 gen(26);
    for (int rep = 0; rep < 60; ++rep) {
        const auto pair = random_pair(gen, 1 + rep % 5, 1 + (rep / 5) % 5);
        const InferenceResult para = selective_p_value(pair);
        const InferenceResult brute = selective_p_value(pair, {Z1Method::enumeration});
        CHECK(std::abs(para.p_selective - brute.p_selective) <= 1e-9);
    }
}

TEST_CASE("selective region matches recomputed selection on a grid") {
    std::mt19937_64 gen(27);
    for (int rep = 0; rep < 10; ++rep) {
        const auto pair = random_pair(gen, 4, 4);
        const SelectionEvent ev = observe_selection(pair);
        const InferenceResult r = selective_p_value(pair);
        std::uniform_real_distribution<double> u(-5, ev.z_obs + 10);
        for (int k = 0; k < 300; ++k) {
            const double z = u(gen);
            const auto moved = TimeSeriesPair::with_unit_noise(ev.line.x_at(z), ev.line.y_at(z));
            const DtwResult d = dtw(moved);
            const bool same = d.alignment == ev.dtw.alignment && sign_vector(d.alignment, moved) == ev.sign;
            // Points at measure-zero boundaries can go either way.
            if (r.region.contains(z, 1e-7) != r.region.contains(z, -1e-7)) continue;
            CHECK(same == r.region.contains(z));
        }
    }
}

TEST_CASE("null rejection rate over 120 simulations") {
    std::mt19937_64 gen(28);
    int rejections = 0;
    for (int t = 0; t < 120; ++t) {
        if (selective_p_value(random_pair(gen, 5, 5)).p_selective <= 0.05) ++rejections;
    }
    const double rate = rejections / 120.0;
    CHECK(rate >= 0.008);
    CHECK(rate <= 0.12);
}

TEST_CASE("untruncated confidence interval") {
    const ConfidenceInterval ci = confidence_interval(1.3, 2.0, IntervalUnion::real_line(), 0.05);
    const double q = normal_quantile(0.975);
    CHECK(std::abs(ci.lo - (1.3 - 2.0 * q)) < 1e-6);
    CHECK(std::abs(ci.hi - (1.3 + 2.0 * q)) < 1e-6);
    CHECK(ci.length() > 0.0);
    CHECK_THROWS_AS(confidence_interval(0.0, 1.0, IntervalUnion::real_line(), 0.0), InputError);
}

TEST_CASE("confidence intervals nest as alpha shrinks") {
    const IntervalUnion region{{-1, 0.5}, {2, 6}};
    ConfidenceInterval prev = confidence_interval(2.5, 1.0, region, 0.5);
    for (double alpha : {0.2, 0.1, 0.05, 0.01, 0.001}) {
        const ConfidenceInterval ci = confidence_interval(2.5, 1.0, region, alpha);
        CHECK(ci.lo <= prev.lo);
        CHECK(ci.hi >= prev.hi);
        CHECK(ci.length() > prev.length());
        prev = ci;
    }
}

TEST_CASE("confidence interval coverage on simulated truncated data") {
    std::mt19937_64 gen(29);
    const IntervalUnion region{{-1, 1}, {1.5, 4}};
    const double theta = 0.8;
    std::normal_distribution<double> g(theta, 1.0);
    int covered = 0;
    const int reps = 500;
    for (int r = 0; r < reps; ++r) {
        double z = g(gen);
        while (!region.contains(z)) z = g(gen);
        const ConfidenceInterval ci = confidence_interval(z, 1.0, region, 0.05);
        if (ci.lo <= theta && theta <= ci.hi) ++covered;
    }
    const double coverage = static_cast<double>(covered) / reps;
    CHECK(coverage >= 0.90);
    CHECK(coverage <= 0.99);
}

TEST_CASE("selective confidence interval of a random pair") {
    std::mt19937_64 gen(30);
    for (int rep = 0; rep < 10; ++rep) {
        const auto pair = random_pair(gen, 5, 5);
        const ConfidenceInterval ci = selective_confidence_interval(pair, 0.05);
        CHECK(ci.hi > ci.lo);
    }
}

TEST_CASE("confidence interval on a narrow region reaches far means") {
    const IntervalUnion region{{0.0, 2e-3}};
    const ConfidenceInterval ci = confidence_interval(1.9e-3, 1.0, region, 0.05);
    CHECK(ci.hi > 1e4);
    CHECK(truncated_gaussian_sf(1.9e-3, 1.0, region, ci.lo) == doctest::Approx(0.025).epsilon(1e-4));
    CHECK(truncated_gaussian_sf(1.9e-3, 1.0, region, ci.hi) == doctest::Approx(0.975).epsilon(1e-4));
}
