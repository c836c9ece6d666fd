#pragma once

#include "sidtw/alignment.hpp"
#include "sidtw/dtw_core.hpp"
#include "sidtw/interval_union.hpp"
#include "sidtw/parametric_dtw.hpp"

#include <optional>
#include <span>
#include <utility>

namespace sidtw {

struct ConfidenceInterval {
    double lo;
    double hi;
    double length() const noexcept { return hi - lo; }
};

struct InferenceResult {
    double z_obs = 0.0;  // the test statistic T
    double sigma = 0.0;  // sqrt(ηᵀ Σ η)
    IntervalUnion region;
    double p_selective = 1.0;
    std::optional<ConfidenceInterval> ci;
    AlignmentMatrix alignment;
    TestDirection direction;
    DataLine line;
};

// Projects the data onto the line a + b z through the observation along η:
// b = Ση / (ηᵀΣη), a = (I - b ηᵀ)(x; y). Throws DegenerateDirectionError when
// ηᵀΣη is not positive.
DataLine nuisance_decomposition(const TimeSeriesPair& pair, const TestDirection& dir);

// { z : sign(M_vec ∘ Ω(a + b z)) keeps the observed signs }, a single interval
// (possibly empty or unbounded).
IntervalUnion z2_region(const DataLine& line, const AlignmentMatrix& M,
                        std::span<const signed char> observed_sign);

// P(Z >= z_obs | Z ∈ region) for Z ~ N(mean, sigma²). Masses are summed in log
// space. Throws RegionMassUnderflowError when the region carries no mass.
double truncated_gaussian_sf(double z_obs, double sigma, const IntervalUnion& region,
                             double mean = 0.0);

enum class Z1Method {
    parametric,   // para_dtw
    enumeration,  // envelope over every alignment; small n, m only
};

struct InferenceOptions {
    Z1Method z1_method = Z1Method::parametric;
    // Relative tolerance when checking that z_obs lies in its own region.
    double membership_tol = 1e-9;
};

// Observed alignment, sign vector, direction and data line for a pair.
struct SelectionEvent {
    DtwResult dtw;
    std::vector<signed char> sign;
    TestDirection direction;
    double z_obs;
    double sigma;
    DataLine line;
};
SelectionEvent observe_selection(const TimeSeriesPair& pair);

// Full selective test: DTW, direction, data line, parametric DTW for Z1, the
// sign interval Z2, and the truncated-Gaussian tail on Z1 ∩ Z2.
InferenceResult selective_p_value(const TimeSeriesPair& pair, const InferenceOptions& options = {});

// Equal-tailed interval for the mean θ of the truncated Gaussian: lo solves
// P_θ(Z >= z_obs | Z ∈ region) = α/2 and hi solves the same = 1 - α/2.
ConfidenceInterval confidence_interval(double z_obs, double sigma, const IntervalUnion& region,
                                       double alpha);
ConfidenceInterval selective_confidence_interval(const TimeSeriesPair& pair, double alpha);

// Half-width cap on the bracket search for the interval endpoints: the larger
// of kMaxBracketSigmas * sigma and kBracketTiltFactor * sigma² / d, with d the
// distance from z_obs to the nearest finite region endpoint.
inline constexpr double kMaxBracketSigmas = 1e4;
inline constexpr double kBracketTiltFactor = 1e3;

}  // namespace sidtw
