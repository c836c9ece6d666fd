#include "sidtw/dtw_core.hpp"

#include "sidtw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sidtw {

namespace {

constexpr double kSymmetryTol = 1e-10;

Eigen::MatrixXd checked_cholesky(const Eigen::MatrixXd& s, const char* name) {
    if (s.rows() != s.cols()) {
        throw InputError(std::string(name) + " must be square");
    }
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
        throw InputError(std::string(name) + " is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
        throw InputError(std::string(name) + " is not positive definite");
    }
    return llt.matrixL();
}

}  // namespace

TimeSeriesPair::TimeSeriesPair(Eigen::VectorXd x, Eigen::VectorXd y, Eigen::MatrixXd sigma_x,
                               Eigen::MatrixXd sigma_y)
    : x_(std::move(x)), y_(std::move(y)), sigma_x_(std::move(sigma_x)), sigma_y_(std::move(sigma_y)) {
    if (x_.size() < 1 || y_.size() < 1) {
        throw InputError("time series must have at least one element");
    }
    if (sigma_x_.rows() != x_.size() || sigma_y_.rows() != y_.size()) {
        throw InputError("covariance dimensions do not match series lengths");
    }
    if (!x_.allFinite() || !y_.allFinite()) {
        throw InputError("time series contain non-finite values");
    }
    chol_x_ = checked_cholesky(sigma_x_, "sigma_x");
    chol_y_ = checked_cholesky(sigma_y_, "sigma_y");
}

TimeSeriesPair TimeSeriesPair::with_unit_noise(Eigen::VectorXd x, Eigen::VectorXd y) {
    const auto n = x.size();
    const auto m = y.size();
    return TimeSeriesPair(std::move(x), std::move(y), Eigen::MatrixXd::Identity(n, n),
                          Eigen::MatrixXd::Identity(m, m));
}

Eigen::VectorXd TimeSeriesPair::stacked() const {
    Eigen::VectorXd v(x_.size() + y_.size());
    v << x_, y_;
    return v;
}

Eigen::VectorXd TimeSeriesPair::sigma_times(const Eigen::VectorXd& v) const {
    const auto n = x_.size();
    const auto m = y_.size();
    Eigen::VectorXd out(n + m);
    out.head(n) = sigma_x_ * v.head(n);
    out.tail(m) = sigma_y_ * v.tail(m);
    return out;
}

double TimeSeriesPair::quadratic_form(const Eigen::VectorXd& v) const {
    const auto n = x_.size();
    const auto m = y_.size();
    const double qx = (chol_x_.transpose() * v.head(n)).squaredNorm();
    const double qy = (chol_y_.transpose() * v.tail(m)).squaredNorm();
    return qx + qy;
}

Eigen::MatrixXd cost_matrix(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd c(x.size(), y.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            const double d = x[i] - y[j];
            c(i, j) = d * d;
        }
    }
    return c;
}

Eigen::MatrixXd cost_matrix(const TimeSeriesPair& pair) { return cost_matrix(pair.x(), pair.y()); }

DtwTable dtw_table(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(y.size());
    DtwTable t{Eigen::MatrixXd(n, m), Eigen::MatrixXi(n, m)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double d = x[i] - y[j];
            const double c = d * d;
            if (i == 0 && j == 0) {
                t.cost(i, j) = c;
                t.pred(i, j) = -1;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            int arg = -1;
            if (i > 0 && j > 0) {
                best = t.cost(i - 1, j - 1);
                arg = 0;
            }
            if (i > 0 && t.cost(i - 1, j) < best) {
                best = t.cost(i - 1, j);
                arg = 1;
            }
            if (j > 0 && t.cost(i, j - 1) < best) {
                best = t.cost(i, j - 1);
                arg = 2;
            }
            t.cost(i, j) = c + best;
            t.pred(i, j) = arg;
        }
    }
    return t;
}

AlignmentMatrix DtwTable::backtrack(int i, int j) const {
    std::vector<Cell> path;
    path.reserve(static_cast<std::size_t>(i + j + 1));
    int a = i;
    int b = j;
    while (true) {
        path.push_back({a, b});
        const int p = pred(a, b);
        if (p < 0) break;
        if (p == 0) {
            --a;
            --b;
        } else if (p == 1) {
            --a;
        } else {
            --b;
        }
    }
    std::reverse(path.begin(), path.end());
    return AlignmentMatrix(i + 1, j + 1, std::move(path));
}

DtwResult dtw(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const DtwTable t = dtw_table(x, y);
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(y.size());
    return {t.backtrack(n - 1, m - 1), t.cost(n - 1, m - 1)};
}

DtwResult dtw(const TimeSeriesPair& pair) { return dtw(pair.x(), pair.y()); }

double alignment_cost(const AlignmentMatrix& M, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    double s = 0.0;
    for (const Cell& c : M.path()) {
        const double d = x[c.i] - y[c.j];
        s += d * d;
    }
    return s;
}

Eigen::MatrixXd omega_matrix(int n, int m) {
    Eigen::MatrixXd om = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * m, n + m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const Eigen::Index r = static_cast<Eigen::Index>(i) * m + j;
            om(r, i) = 1.0;
            om(r, n + j) = -1.0;
        }
    }
    return om;
}

std::vector<signed char> sign_vector(const AlignmentMatrix& M, const TimeSeriesPair& pair) {
    if (M.rows() != pair.n() || M.cols() != pair.m()) {
        throw InputError("sign_vector: alignment does not match series lengths");
    }
    const int m = pair.m();
    std::vector<signed char> s(static_cast<std::size_t>(pair.n()) * m, 0);
    for (const Cell& c : M.path()) {
        const double d = pair.x()[c.i] - pair.y()[c.j];
        s[static_cast<std::size_t>(c.i) * m + c.j] = static_cast<signed char>((d > 0.0) - (d < 0.0));
    }
    return s;
}

TestDirection test_direction(const AlignmentMatrix& M, std::span<const signed char> sign) {
    const int n = M.rows();
    const int m = M.cols();
    if (sign.size() != static_cast<std::size_t>(n) * m) {
        throw InputError("test_direction: sign vector has wrong length");
    }
    TestDirection dir{Eigen::VectorXd::Zero(n + m), std::vector<signed char>(sign.begin(), sign.end())};
    for (const Cell& c : M.path()) {
        const double s = sign[static_cast<std::size_t>(c.i) * m + c.j];
        dir.eta[c.i] += s;
        dir.eta[n + c.j] -= s;
    }
    return dir;
}

double test_statistic(const TestDirection& dir, const TimeSeriesPair& pair) {
    if (dir.eta.size() != pair.n() + pair.m()) {
        throw InputError("test_statistic: direction length does not match the pair");
    }
    return dir.eta.head(pair.n()).dot(pair.x()) + dir.eta.tail(pair.m()).dot(pair.y());
}

}  // namespace sidtw
