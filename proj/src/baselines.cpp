#include "sidtw/baselines.hpp"

#include "sidtw/errors.hpp"
#include "sidtw/normal_tail.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace sidtw {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Triplets of G(M) = Σ_{(i,j) ∈ M} (e_i - e_{n+j})(e_i - e_{n+j})ᵀ, scaled.
void append_gram(const AlignmentMatrix& M, int n, double scale, Triplets& out) {
    for (const Cell& c : M.path()) {
        const int yi = n + c.j;
        out.emplace_back(c.i, c.i, scale);
        out.emplace_back(yi, yi, scale);
        out.emplace_back(c.i, yi, -scale);
        out.emplace_back(yi, c.i, -scale);
    }
}

constexpr int kPredDi[] = {1, 1, 0};
constexpr int kPredDj[] = {1, 0, 1};

}  // namespace

QuadraticLoss QuadraticConstraint::along(const DataLine& line) const {
    const Eigen::VectorXd Ab = A * line.b;
    const Eigen::VectorXd Aa = A * line.a;
    return {line.a.dot(Aa), 2.0 * line.a.dot(Ab), line.b.dot(Ab)};
}

std::vector<QuadraticConstraint> over_conditioning_constraints(const TimeSeriesPair& pair) {
    const int n = pair.n();
    const int m = pair.m();
    const int dim = n + m;
    const DtwTable table = dtw_table(pair.x(), pair.y());

    // Observed optimal alignment of every sub-problem.
    std::vector<std::optional<AlignmentMatrix>> optimal(static_cast<std::size_t>(n) * m);
    auto at = [&](int i, int j) -> const AlignmentMatrix& {
        auto& slot = optimal[static_cast<std::size_t>(i) * m + j];
        if (!slot) slot.emplace(table.backtrack(i, j));
        return *slot;
    };

    std::vector<QuadraticConstraint> out;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const int chosen = table.pred(i, j);
            if (chosen < 0) continue;
            const AlignmentMatrix& winner = at(i - kPredDi[chosen], j - kPredDj[chosen]);
            for (int k = 0; k < 3; ++k) {
                if (k == chosen) continue;
                const int pi = i - kPredDi[k];
                const int pj = j - kPredDj[k];
                if (pi < 0 || pj < 0) continue;
                Triplets t;
                append_gram(winner, n, 1.0, t);
                append_gram(at(pi, pj), n, -1.0, t);
                QuadraticConstraint c;
                c.A.resize(dim, dim);
                c.A.setFromTriplets(t.begin(), t.end());
                c.A.prune(0.0);
                c.i = i;
                c.j = j;
                c.k = k;
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

IntervalUnion si_dtw_oc_region(const TimeSeriesPair& pair, const DataLine& line, CellOrder order) {
    std::vector<QuadraticConstraint> constraints = over_conditioning_constraints(pair);
    if (order == CellOrder::reverse) std::reverse(constraints.begin(), constraints.end());
    IntervalUnion region = IntervalUnion::real_line();
    for (const QuadraticConstraint& c : constraints) {
        region = region.intersect(solve_nonpositive(c.along(line)));
    }
    if (region.is_empty()) {
        throw InternalError("over-conditioned region is empty");
    }
    return region;
}

InferenceResult si_dtw_oc_p_value(const TimeSeriesPair& pair, CellOrder order) {
    SelectionEvent ev = observe_selection(pair);
    const IntervalUnion oc = si_dtw_oc_region(pair, ev.line, order);
    const IntervalUnion z2 = z2_region(ev.line, ev.dtw.alignment, ev.sign);
    IntervalUnion region = oc.intersect(z2);
    if (!region.contains(ev.z_obs, 1e-9)) {
        std::ostringstream os;
        os.precision(17);
        os << "observed statistic " << ev.z_obs << " lies outside the over-conditioned region "
           << region.to_string();
        throw InternalError(os.str());
    }
    const double p = truncated_gaussian_sf(ev.z_obs, ev.sigma, region);
    return InferenceResult{ev.z_obs,         ev.sigma,  std::move(region),         p, std::nullopt,
                           ev.dtw.alignment, ev.direction, std::move(ev.line)};
}

double dtw_abs_statistic(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const DtwResult d = dtw(x, y);
    double t = 0.0;
    for (const Cell& c : d.alignment.path()) t += std::abs(x[c.i] - y[c.j]);
    return t;
}

double permutation_test(const TimeSeriesPair& pair, std::span<const std::vector<bool>> swaps) {
    if (pair.n() != pair.m()) throw InputError("permutation requires equal lengths");
    if (swaps.empty()) throw InputError("permutation test needs B >= 1");
    const int n = pair.n();
    const double t_obs = dtw_abs_statistic(pair.x(), pair.y());
    int exceed = 0;
    Eigen::VectorXd x(n), y(n);
    for (const std::vector<bool>& row : swaps) {
        if (row.size() != static_cast<std::size_t>(n)) {
            throw InputError("permutation swap row has wrong length");
        }
        for (int i = 0; i < n; ++i) {
            x[i] = row[i] ? pair.y()[i] : pair.x()[i];
            y[i] = row[i] ? pair.x()[i] : pair.y()[i];
        }
        if (t_obs <= dtw_abs_statistic(x, y)) ++exceed;
    }
    return static_cast<double>(exceed) / static_cast<double>(swaps.size());
}

double permutation_test(const TimeSeriesPair& pair, int B, std::uint64_t seed) {
    if (pair.n() != pair.m()) throw InputError("permutation requires equal lengths");
    if (B < 1) throw InputError("permutation test needs B >= 1");
    std::mt19937_64 gen(seed);
    std::vector<std::vector<bool>> swaps(B, std::vector<bool>(pair.n()));
    for (auto& row : swaps) {
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = (gen() >> 63) != 0;
    }
    return permutation_test(pair, swaps);
}

namespace {

Eigen::VectorXd take(const Eigen::VectorXd& v, int first) {
    const int count = (static_cast<int>(v.size()) - first + 1) / 2;
    Eigen::VectorXd out(count);
    for (int k = 0; k < count; ++k) out[k] = v[first + 2 * k];
    return out;
}

Eigen::MatrixXd take(const Eigen::MatrixXd& s, int first) {
    const int count = (static_cast<int>(s.rows()) - first + 1) / 2;
    Eigen::MatrixXd out(count, count);
    for (int r = 0; r < count; ++r) {
        for (int c = 0; c < count; ++c) out(r, c) = s(first + 2 * r, first + 2 * c);
    }
    return out;
}

}  // namespace

double data_splitting_test(const TimeSeriesPair& pair) {
    if (pair.n() < 2 || pair.m() < 2) {
        throw InputError("data splitting needs at least two elements per series");
    }
    // 1st, 3rd, ... elements select; 2nd, 4th, ... infer.
    const Eigen::VectorXd x_sel = take(pair.x(), 0);
    const Eigen::VectorXd y_sel = take(pair.y(), 0);
    const TimeSeriesPair held_out(take(pair.x(), 1), take(pair.y(), 1), take(pair.sigma_x(), 1),
                                  take(pair.sigma_y(), 1));
    const int ne = held_out.n();
    const int me = held_out.m();

    const DtwResult selected = dtw(x_sel, y_sel);
    std::vector<Cell> mapped;
    for (const Cell& c : selected.alignment.path()) {
        const Cell e{std::min(c.i, ne - 1), std::min(c.j, me - 1)};
        if (mapped.empty() || mapped.back() != e) mapped.push_back(e);
    }
    const AlignmentMatrix M(ne, me, std::move(mapped));
    const std::vector<signed char> s = sign_vector(M, held_out);
    const TestDirection dir = test_direction(M, s);
    const double t = test_statistic(dir, held_out);
    const double var = held_out.quadratic_form(dir.eta);
    if (!(var > 0.0)) return 0.5;
    return 0.5 * std::erfc(t / std::sqrt(var) / std::numbers::sqrt2);
}

}  // namespace sidtw
