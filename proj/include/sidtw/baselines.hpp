#pragma once

#include "sidtw/dtw_core.hpp"
#include "sidtw/interval_union.hpp"
#include "sidtw/parametric_dtw.hpp"
#include "sidtw/selective_inference.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <span>
#include <vector>

namespace sidtw {

// vᵀ A v <= 0 over v = (x; y).
struct QuadraticConstraint {
    Eigen::SparseMatrix<double> A;
    int i = 0;  // DTW cell the constraint belongs to
    int j = 0;
    int k = 0;  // competing predecessor: 0 diagonal, 1 (i-1, j), 2 (i, j-1)

    // Coefficients of (a + b z)ᵀ A (a + b z) as a quadratic in z.
    QuadraticLoss along(const DataLine& line) const;
};

// One constraint per cell and existing competing predecessor: the loss of the
// observed optimal alignment of the chosen predecessor must not exceed that of
// the observed optimal alignment of the competitor. Together they pin every
// sub-problem optimizer of the DTW table to its observed value.
std::vector<QuadraticConstraint> over_conditioning_constraints(const TimeSeriesPair& pair);

enum class CellOrder { forward, reverse };

// Intersection over all over-conditioning constraints restricted to the line.
IntervalUnion si_dtw_oc_region(const TimeSeriesPair& pair, const DataLine& line,
                               CellOrder order = CellOrder::forward);

// Over-conditioned selective test: region = si_dtw_oc_region ∩ Z2.
InferenceResult si_dtw_oc_p_value(const TimeSeriesPair& pair, CellOrder order = CellOrder::forward);

// Paired permutation test. Each replicate swaps (x_i, y_i) independently with
// probability 1/2 and recomputes the DTW statistic; returns
// (1/B) Σ 1{T_obs <= T_b}. Requires n == m.
double permutation_test(const TimeSeriesPair& pair, int B, std::uint64_t seed);

// Same test with caller-supplied swap decisions, one row of n flags per
// replicate.
double permutation_test(const TimeSeriesPair& pair, std::span<const std::vector<bool>> swaps);

// The DTW statistic Σ_path |x_i - y_j| of the optimal alignment.
double dtw_abs_statistic(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Data splitting. The odd-indexed elements (1st, 3rd, ...) select the alignment;
// it is mapped onto the even-indexed elements, with indices clamped to their
// range, and a one-sided Gaussian z-test of ηᵀ(x_even; y_even) is returned.
double data_splitting_test(const TimeSeriesPair& pair);

}  // namespace sidtw
