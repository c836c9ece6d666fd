#include "doctest.h"
#include "oracles.hpp"

#include "sidtw/alignment.hpp"
#include "sidtw/dtw_core.hpp"
#include "sidtw/errors.hpp"
#include "sidtw/interval_union.hpp"
#include "sidtw/parametric_dtw.hpp"
#include "sidtw/quadratic.hpp"

using namespace sidtw;

namespace {

// Uniform z samples over a hull that covers every finite breakpoint.
std::vector<double> sample_z(std::mt19937_64& gen, const PiecewiseEnvelope& env, int count) {
    double lo = -5.0;
    double hi = 5.0;
    for (double b : env.breakpoints()) {
        lo = std::min(lo, b - 1.0);
        hi = std::max(hi, b + 1.0);
    }
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> out(count);
    for (double& z : out) z = u(gen);
    return out;
}

}  // namespace

TEST_CASE("interval union normalization") {
    const IntervalUnion u{{3, 4}, {0, 1}, {1, 2}, {5, 5}};
    REQUIRE(u.size() == 2);
    CHECK(u.intervals()[0] == Interval{0, 2});
    CHECK(u.intervals()[1] == Interval{3, 4});
    CHECK(u.contains(1.5));
    CHECK(u.contains(2.0));
    CHECK_FALSE(u.contains(2.5));
    CHECK(u.contains(2.0 + 1e-12, 1e-9));
    CHECK(IntervalUnion{{1, 1}}.is_empty());
}

TEST_CASE("interval union set operations") {
    const IntervalUnion a{{-kInf, 0}, {1, 3}};
    const IntervalUnion b{{-1, 2}, {2.5, kInf}};
    CHECK(a.intersect(b) == IntervalUnion{{-1, 0}, {1, 2}, {2.5, 3}});
    CHECK(a.unite(b) == IntervalUnion::real_line());
    CHECK(a.intersect(IntervalUnion::empty()).is_empty());
    CHECK(a.intersect(IntervalUnion::real_line()) == a);
    CHECK(a.clip(-5, 2) == IntervalUnion{{-5, 0}, {1, 2}});
    CHECK(a.shifted(1.0) == IntervalUnion{{-kInf, -1}, {0, 2}});
    CHECK(IntervalUnion{{1, 2}}.is_subset_of(a));
    CHECK_FALSE(IntervalUnion{{0.5, 2}}.is_subset_of(a));
    CHECK(IntervalUnion{{1 - 1e-12, 2}}.is_subset_of(a, 1e-9));
}

TEST_CASE("interval union intersection is commutative and agrees pointwise") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<Interval> pa, pb;
        for (int k = 0; k < 4; ++k) {
            double x = u(gen), y = u(gen);
            pa.push_back({std::min(x, y), std::max(x, y)});
            x = u(gen);
            y = u(gen);
            pb.push_back({std::min(x, y), std::max(x, y)});
        }
        const IntervalUnion a(pa), b(pb);
        const IntervalUnion ab = a.intersect(b);
        CHECK(ab == b.intersect(a));
        for (int k = 0; k < 20; ++k) {
            const double z = u(gen);
            CHECK(ab.contains(z) == (a.contains(z) && b.contains(z)));
            CHECK(a.unite(b).contains(z) == (a.contains(z) || b.contains(z)));
        }
    }
}

TEST_CASE("quadratic loss arithmetic") {
    const QuadraticLoss q{1, -2, 3};
    CHECK(q(2.0) == 1 - 4 + 12);
    CHECK(q.slope(2.0) == -2 + 12);
    CHECK(q + q == QuadraticLoss{2, -4, 6});
    CHECK(q - q == QuadraticLoss{0, 0, 0});
    CHECK(squared_linear(1, 2) == QuadraticLoss{1, 4, 4});
}

TEST_CASE("real roots against the quadratic formula") {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 500; ++rep) {
        const double a = g(gen), b = g(gen), c = g(gen);
        const RealRoots r = real_roots({c, b, a});
        const double disc = b * b - 4 * a * c;
        if (disc > 1e-6) {
            REQUIRE(r.count == 2);
            const double r1 = (-b - std::sqrt(disc)) / (2 * a);
            const double r2 = (-b + std::sqrt(disc)) / (2 * a);
            CHECK(r.lo == doctest::Approx(std::min(r1, r2)).epsilon(1e-9));
            CHECK(r.hi == doctest::Approx(std::max(r1, r2)).epsilon(1e-9));
        } else if (disc < -1e-6) {
            CHECK(r.count == 0);
        }
    }
    const RealRoots lin = real_roots({2, -4, 0});
    REQUIRE(lin.count == 1);
    CHECK(lin.lo == 0.5);
    CHECK(real_roots({1, 0, 0}).count == 0);
}

TEST_CASE("solve_nonpositive") {
    CHECK(solve_nonpositive({-1, 0, 1}) == IntervalUnion{{-1, 1}});
    CHECK(solve_nonpositive({1, 0, -1}) == IntervalUnion{{-kInf, -1}, {1, kInf}});
    CHECK(solve_nonpositive({1, 0, 1}).is_empty());
    CHECK(solve_nonpositive({-1, 0, -1}) == IntervalUnion::real_line());
    CHECK(solve_nonpositive({-2, 1, 0}) == IntervalUnion{{-kInf, 2}});
    CHECK(solve_nonpositive({-2, -1, 0}) == IntervalUnion{{-2, kInf}});
    // Degenerate constant constraint: sign of the constant decides.
    CHECK(solve_nonpositive({-3, 0, 0}) == IntervalUnion::real_line());
    CHECK(solve_nonpositive({3, 0, 0}).is_empty());
}

TEST_CASE("quadratic loss of a constant line is the static loss") {
    std::mt19937_64 gen(5);
    DataLine line;
    line.a = oracle::gaussian_vector(gen, 7);
    line.b = Eigen::VectorXd::Zero(7);
    line.n = 3;
    for (const auto& M : enumerate_alignments(3, 4)) {
        const QuadraticLoss q = quadratic_loss(M, line);
        CHECK(q.w1 == 0.0);
        CHECK(q.w2 == 0.0);
        CHECK(q.w0 == doctest::Approx(alignment_cost(M, line.x_at(0), line.y_at(0))));
    }
}

TEST_CASE("quadratic loss of a single cell") {
    DataLine line;
    line.a = Eigen::Vector2d(0, 0);
    line.b = Eigen::Vector2d(1, -1);
    line.n = 1;
    CHECK(quadratic_loss(AlignmentMatrix(1, 1, {{0, 0}}), line) == QuadraticLoss{0, 0, 4});
}

TEST_CASE("quadratic loss matches hand expansion and direct evaluation") {
    std::mt19937_64 gen(6);
    for (int rep = 0; rep < 20; ++rep) {
        const DataLine line = oracle::random_line(gen, 4, 3);
        const auto all = enumerate_alignments(4, 3);
        const auto& M = all[rep % all.size()];
        const QuadraticLoss q = quadratic_loss(M, line);
        const auto w = oracle::path_quadratic(oracle::to_path(M), line.a, line.b, 4);
        CHECK(q.w0 == doctest::Approx(w[0]).epsilon(1e-12));
        CHECK(q.w1 == doctest::Approx(w[1]).epsilon(1e-12));
        CHECK(q.w2 == doctest::Approx(w[2]).epsilon(1e-12));
        std::uniform_real_distribution<double> u(-20, 20);
        for (int k = 0; k < 100; ++k) {
            const double z = u(gen);
            const double direct = oracle::path_cost(oracle::to_path(M), line.x_at(z), line.y_at(z));
            CHECK(std::abs(q(z) - direct) < 1e-9 * std::max(1.0, direct));
        }
    }
    DataLine bad = oracle::random_line(gen, 3, 3);
    CHECK_THROWS_AS(quadratic_loss(AlignmentMatrix(2, 2, {{0, 0}, {1, 1}}), bad), InputError);
}

TEST_CASE("envelope of one candidate") {
    const AlignmentMatrix M(1, 1, {{0, 0}});
    const PiecewiseEnvelope env = lower_envelope({{M, {1, 2, 3}}});
    REQUIRE(env.size() == 1);
    CHECK(env.segments()[0].lo == -kInf);
    CHECK(env.segments()[0].hi == kInf);
    CHECK(env.breakpoints().empty());
}

TEST_CASE("envelope of two parabolas crossing twice") {
    // q1 = z², q2 = 0.5 z² + 1: crossings where 0.5 z² = 1.
    const AlignmentMatrix A(2, 2, {{0, 0}, {1, 1}});
    const AlignmentMatrix B(2, 2, {{0, 0}, {0, 1}, {1, 1}});
    const PiecewiseEnvelope env = lower_envelope({{A, {0, 0, 1}}, {B, {1, 0, 0.5}}});
    REQUIRE(env.size() == 3);
    const double root = std::sqrt(2.0);
    CHECK(env.segments()[0].alignment == B);
    CHECK(env.segments()[0].hi == doctest::Approx(-root).epsilon(1e-14));
    CHECK(env.segments()[1].alignment == A);
    CHECK(env.segments()[1].hi == doctest::Approx(root).epsilon(1e-14));
    CHECK(env.segments()[2].alignment == B);
    CHECK(env.segment_at(0.0).alignment == A);
    CHECK(env.segment_at(-root).alignment == B);  // shared point goes to the earlier segment
}

TEST_CASE("envelope of tangent parabolas has no spurious segment") {
    // q2 - q1 = (z - 1)², tangent at z = 1.
    const AlignmentMatrix A(2, 2, {{0, 0}, {1, 1}});
    const AlignmentMatrix B(2, 2, {{0, 0}, {1, 0}, {1, 1}});
    const PiecewiseEnvelope env = lower_envelope({{A, {0, 0, 1}}, {B, {1, -2, 2}}});
    REQUIRE(env.size() == 1);
    CHECK(env.segments()[0].alignment == A);
}

TEST_CASE("envelope ignores a rounding-level dip between accumulated losses") {
    // Exact difference is a perfect square; the stored sums carry rounding.
    const AlignmentMatrix A(2, 2, {{0, 0}, {1, 1}});
    const AlignmentMatrix B(2, 2, {{0, 0}, {1, 0}, {1, 1}});
    const QuadraticLoss qa{3.0651283953122892, -0.17327452864136814, 0.21875};
    const QuadraticLoss qb{3.0651585439410312, -0.17052914029258978, 0.28125};
    const PiecewiseEnvelope env = lower_envelope({{A, qa}, {B, qb}});
    REQUIRE(env.size() == 1);
    CHECK(env.segments()[0].alignment == A);
}

TEST_CASE("envelope treats a rounding-level curvature difference as linear") {
    const AlignmentMatrix A(2, 2, {{0, 0}, {1, 1}});
    const AlignmentMatrix B(2, 2, {{0, 0}, {1, 0}, {1, 1}});
    const QuadraticLoss qa{14.682815396966083, -2.077550696022719, 0.20833333333333334};
    const QuadraticLoss qb{14.853357217189158, -1.5939991086570464, 0.20833333333333329};
    const PiecewiseEnvelope env = lower_envelope({{A, qa}, {B, qb}});
    REQUIRE(env.size() == 2);
    CHECK(env.segments()[0].alignment == B);
    CHECK(env.segments()[1].alignment == A);
    CHECK(env.segments()[0].hi == doctest::Approx(-(qb.w0 - qa.w0) / (qb.w1 - qa.w1)));
}

TEST_CASE("envelope of identical quadratics picks the smaller path") {
    const AlignmentMatrix A(2, 2, {{0, 0}, {1, 1}});
    const AlignmentMatrix B(2, 2, {{0, 0}, {0, 1}, {1, 1}});
    const PiecewiseEnvelope env = lower_envelope({{B, {1, 1, 1}}, {A, {1, 1, 1}}});
    REQUIRE(env.size() == 1);
    CHECK(env.segments()[0].alignment == std::min(A, B));
}

TEST_CASE("envelope with a linear-only family") {
    const AlignmentMatrix A(1, 2, {{0, 0}, {0, 1}});
    const AlignmentMatrix B(2, 1, {{0, 0}, {1, 0}});
    const PiecewiseEnvelope env = lower_envelope({{A, {0, 1, 0}}, {B, {0, -1, 0}}});
    // Different shapes are fine for the walk; only the quadratics matter.
    REQUIRE(env.size() == 2);
    CHECK(env.segments()[0].alignment == A);
    CHECK(env.segments()[0].hi == 0.0);
    CHECK(env.segments()[1].alignment == B);
}

TEST_CASE("brute-force envelope equals the pointwise minimum") {
    std::mt19937_64 gen(13);
    const auto all = enumerate_alignments(3, 3);
    const auto paths = oracle::all_paths(3, 3);
    for (int rep = 0; rep < 20; ++rep) {
        const DataLine line = oracle::random_line(gen, 3, 3);
        const PiecewiseEnvelope env = envelope_bruteforce(all, line);
        for (double z : sample_z(gen, env, 200)) {
            const double expect = oracle::pointwise_min(paths, line.a, line.b, 3, z);
            CHECK(oracle::close_rel(env.value(z), expect, 1e-8));
        }
        for (std::size_t k = 1; k < env.size(); ++k) {
            CHECK(env.segments()[k].lo == env.segments()[k - 1].hi);
            CHECK(env.segments()[k].alignment != env.segments()[k - 1].alignment);
        }
    }
}

TEST_CASE("para_dtw of a single cell") {
    std::mt19937_64 gen(14);
    const DataLine line = oracle::random_line(gen, 1, 1);
    const PiecewiseEnvelope env = para_dtw(line, 1, 1);
    REQUIRE(env.size() == 1);
    CHECK(env.segments()[0].alignment == AlignmentMatrix(1, 1, {{0, 0}}));
}

TEST_CASE("para_dtw equals the brute-force envelope") {
    std::mt19937_64 gen(15);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 1 + rep % 5;
        const int m = 1 + (rep * 3) % 5;
        const DataLine line = oracle::random_line(gen, n, m);
        const auto all = enumerate_alignments(n, m);
        const PiecewiseEnvelope para = para_dtw(line, n, m);
        const PiecewiseEnvelope brute = envelope_bruteforce(all, line);
        for (double z : sample_z(gen, brute, 500)) {
            CHECK(oracle::close_rel(para.value(z), brute.value(z), 1e-8));
        }
        for (const auto& seg : brute.segments()) {
            const IntervalUnion a = z1_region(para, seg.alignment);
            const IntervalUnion b = z1_region(brute, seg.alignment);
            REQUIRE(a.size() == b.size());
            for (std::size_t k = 0; k < a.size(); ++k) {
                CHECK(oracle::close_rel(a.intervals()[k].lo, b.intervals()[k].lo, 1e-9));
                CHECK(oracle::close_rel(a.intervals()[k].hi, b.intervals()[k].hi, 1e-9));
            }
        }
    }
}

TEST_CASE("para_dtw segments are DTW optimal at every sampled point") {
    std::mt19937_64 gen(16);
    for (int rep = 0; rep < 10; ++rep) {
        const DataLine line = oracle::random_line(gen, 7, 6);
        const PiecewiseEnvelope env = para_dtw(line, 7, 6);
        for (double z : sample_z(gen, env, 200)) {
            const Eigen::VectorXd x = line.x_at(z);
            const Eigen::VectorXd y = line.y_at(z);
            const double best = oracle::table_dtw(x, y);
            const double seg = alignment_cost(env.segment_at(z).alignment, x, y);
            CHECK(oracle::close_rel(seg, best, 1e-8));
        }
    }
}

TEST_CASE("para_dtw reports table statistics") {
    std::mt19937_64 gen(17);
    const DataLine line = oracle::random_line(gen, 5, 5);
    ParaDtwStats stats;
    const PiecewiseEnvelope env = para_dtw(line, 5, 5, stats);
    CHECK(stats.final_segments == env.size());
    CHECK(stats.max_candidates >= 1);
    CHECK(stats.total_candidates >= stats.max_candidates);
}

TEST_CASE("z1 region basics") {
    std::mt19937_64 gen(18);
    const DataLine line = oracle::random_line(gen, 4, 4);
    const PiecewiseEnvelope env = para_dtw(line, 4, 4);
    const double z_obs = 0.3;
    const auto& seg = env.segment_at(z_obs);
    CHECK(z1_region(env, seg.alignment).contains(z_obs));
    // A path that never wins: far away from any data, e.g. the top edge then down.
    std::vector<Cell> edge;
    for (int j = 0; j < 4; ++j) edge.push_back({0, j});
    for (int i = 1; i < 4; ++i) edge.push_back({i, 3});
    const AlignmentMatrix corner(4, 4, edge);
    bool present = false;
    for (const auto& s : env.segments()) present = present || s.alignment == corner;
    CHECK(z1_region(env, corner).is_empty() == !present);
}

TEST_CASE("z1 membership agrees with recomputed DTW") {
    std::mt19937_64 gen(19);
    for (int rep = 0; rep < 5; ++rep) {
        const DataLine line = oracle::random_line(gen, 4, 4);
        const PiecewiseEnvelope env = para_dtw(line, 4, 4);
        const AlignmentMatrix observed = env.segment_at(0.0).alignment;
        const IntervalUnion z1 = z1_region(env, observed);
        std::uniform_real_distribution<double> u(-15, 15);
        for (int k = 0; k < 1000; ++k) {
            const double z = u(gen);
            const Eigen::VectorXd x = line.x_at(z);
            const Eigen::VectorXd y = line.y_at(z);
            const double best = oracle::brute_dtw(x, y);
            const bool optimal = oracle::close_rel(alignment_cost(observed, x, y), best, 1e-9);
            if (z1.contains(z)) {
                CHECK(optimal);
            } else if (optimal) {
                // Outside Z1 the observed path can only tie with the winner.
                CHECK(oracle::close_rel(env.value(z), best, 1e-9));
            }
        }
    }
}

TEST_CASE("envelope validation") {
    const AlignmentMatrix M(1, 1, {{0, 0}});
    CHECK_THROWS(PiecewiseEnvelope({}));
    CHECK_THROWS(PiecewiseEnvelope({{M, {}, -kInf, 0.0}}));
    CHECK_THROWS(PiecewiseEnvelope({{M, {}, -kInf, 0.0}, {M, {}, 1.0, kInf}}));
}
