#pragma once

#include "sidtw/alignment.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sidtw {

// Two observed series with their noise covariances. Σ = blockdiag(Σx, Σy).
class TimeSeriesPair {
public:
    TimeSeriesPair(Eigen::VectorXd x, Eigen::VectorXd y, Eigen::MatrixXd sigma_x,
                   Eigen::MatrixXd sigma_y);

    // Identity covariances.
    static TimeSeriesPair with_unit_noise(Eigen::VectorXd x, Eigen::VectorXd y);

    int n() const noexcept { return static_cast<int>(x_.size()); }
    int m() const noexcept { return static_cast<int>(y_.size()); }
    const Eigen::VectorXd& x() const noexcept { return x_; }
    const Eigen::VectorXd& y() const noexcept { return y_; }
    const Eigen::MatrixXd& sigma_x() const noexcept { return sigma_x_; }
    const Eigen::MatrixXd& sigma_y() const noexcept { return sigma_y_; }

    // (x; y), length n + m.
    Eigen::VectorXd stacked() const;
    // Σ v for v of length n + m, using the block structure.
    Eigen::VectorXd sigma_times(const Eigen::VectorXd& v) const;
    // vᵀ Σ v computed as ‖Lᵀ v‖² with the Cholesky factors of each block.
    double quadratic_form(const Eigen::VectorXd& v) const;

private:
    Eigen::VectorXd x_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd sigma_x_;
    Eigen::MatrixXd sigma_y_;
    Eigen::MatrixXd chol_x_;  // lower factor
    Eigen::MatrixXd chol_y_;
};

// Test-statistic direction η together with the sign vector it was built from.
struct TestDirection {
    Eigen::VectorXd eta;            // length n + m
    std::vector<signed char> sign;  // length n * m, entries in {-1, 0, 1}
};

struct DtwResult {
    AlignmentMatrix alignment;
    double distance;
};

// C(X, Y)_{ij} = (x_i - y_j)².
Eigen::MatrixXd cost_matrix(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
Eigen::MatrixXd cost_matrix(const TimeSeriesPair& pair);

// Bellman-recursion DTW. Ties prefer the diagonal predecessor, then (i-1, j),
// then (i, j-1).
DtwResult dtw(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
DtwResult dtw(const TimeSeriesPair& pair);

// Cumulative-cost table of the recursion and the predecessor chosen for every
// cell. pred(i, j) is 0 for the diagonal, 1 for (i-1, j), 2 for (i, j-1), -1 at
// the origin.
struct DtwTable {
    Eigen::MatrixXd cost;
    Eigen::MatrixXi pred;

    // Optimal alignment of the sub-problem X[0..i], Y[0..j].
    AlignmentMatrix backtrack(int i, int j) const;
};
DtwTable dtw_table(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// ⟨M, C⟩.
double alignment_cost(const AlignmentMatrix& M, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Row r = i*m + j of Ω has +1 in column i and -1 in column n + j, so that
// Ω (x; y) lists x_i - y_j in row-major order. Only materialized for tests and
// small problems; the library uses omega_row_value().
Eigen::MatrixXd omega_matrix(int n, int m);

// (Ω v)_{i*m+j} without forming Ω.
inline double omega_row_value(const Eigen::VectorXd& v, int n, int i, int j) {
    return v[i] - v[n + j];
}

// ŝ = sign(M_vec ∘ Ω (x; y)), with sign(0) = 0 decided by exact comparison.
std::vector<signed char> sign_vector(const AlignmentMatrix& M, const TimeSeriesPair& pair);

// η = (M_vecᵀ diag(s) Ω)ᵀ.
TestDirection test_direction(const AlignmentMatrix& M, std::span<const signed char> sign);

// T = ηᵀ (x; y).
double test_statistic(const TestDirection& dir, const TimeSeriesPair& pair);

}  // namespace sidtw
