#pragma once

#include "sidtw/interval_union.hpp"

#include <optional>

namespace sidtw {

// w0 + w1 z + w2 z².
struct QuadraticLoss {
    double w0 = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;

    double operator()(double z) const noexcept { return w0 + z * (w1 + z * w2); }
    double slope(double z) const noexcept { return w1 + 2.0 * w2 * z; }

    QuadraticLoss& operator+=(const QuadraticLoss& o) noexcept {
        w0 += o.w0;
        w1 += o.w1;
        w2 += o.w2;
        return *this;
    }
    friend QuadraticLoss operator+(QuadraticLoss a, const QuadraticLoss& b) noexcept { return a += b; }
    friend QuadraticLoss operator-(const QuadraticLoss& a, const QuadraticLoss& b) noexcept {
        return {a.w0 - b.w0, a.w1 - b.w1, a.w2 - b.w2};
    }
    friend bool operator==(const QuadraticLoss&, const QuadraticLoss&) = default;
};

// (d0 + d1 z)² for the cell difference d0 + d1 z.
inline QuadraticLoss squared_linear(double d0, double d1) noexcept {
    return {d0 * d0, 2.0 * d0 * d1, d1 * d1};
}

// Discriminants within this relative margin of zero count as tangency.
inline constexpr double kTangencyTol = 1e-12;

struct RealRoots {
    int count = 0;  // 0, 1 or 2
    double lo = 0.0;
    double hi = 0.0;
};

// Real roots of q(z) = 0, sorted. Near-zero discriminants report no crossing
// (count 0). A linear q yields one root; a constant q yields none.
RealRoots real_roots(const QuadraticLoss& q);

// { z : q(z) <= 0 } as a union of at most two intervals.
IntervalUnion solve_nonpositive(const QuadraticLoss& q);

}  // namespace sidtw
