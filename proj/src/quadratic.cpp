#include "sidtw/quadratic.hpp"

#include <cmath>
#include <utility>

namespace sidtw {

RealRoots real_roots(const QuadraticLoss& q) {
    const double a = q.w2;
    const double b = q.w1;
    const double c = q.w0;
    if (a == 0.0) {
        if (b == 0.0) return {};
        const double r = -c / b;
        return {1, r, r};
    }
    const double disc = b * b - 4.0 * a * c;
    const double scale = b * b + std::abs(4.0 * a * c);
    if (disc <= kTangencyTol * scale) return {};
    // Stable form: avoid cancelling b against sqrt(disc).
    const double t = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double r1 = t / a;
    double r2 = (t != 0.0) ? c / t : -r1;
    if (r1 > r2) std::swap(r1, r2);
    return {2, r1, r2};
}

IntervalUnion solve_nonpositive(const QuadraticLoss& q) {
    const double a = q.w2;
    const double b = q.w1;
    const double c = q.w0;
    if (a == 0.0) {
        if (b == 0.0) return c <= 0.0 ? IntervalUnion::real_line() : IntervalUnion::empty();
        const double r = -c / b;
        return b > 0.0 ? IntervalUnion{{-kInf, r}} : IntervalUnion{{r, kInf}};
    }
    const RealRoots roots = real_roots(q);
    if (roots.count < 2) {
        // No sign change: the set is everything (a < 0) or at most a point (a > 0).
        return a < 0.0 ? IntervalUnion::real_line() : IntervalUnion::empty();
    }
    if (a > 0.0) return IntervalUnion{{roots.lo, roots.hi}};
    return IntervalUnion{{-kInf, roots.lo}, {roots.hi, kInf}};
}

}  // namespace sidtw
