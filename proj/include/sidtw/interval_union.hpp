#pragma once

#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

namespace sidtw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A closed interval [lo, hi]; endpoints may be infinite.
struct Interval {
    double lo;
    double hi;

    bool contains(double z) const noexcept { return lo <= z && z <= hi; }
    double length() const noexcept { return hi - lo; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

// A finite union of disjoint real intervals, kept sorted. Overlapping or
// touching pieces are merged and zero-length pieces are dropped, so the
// stored list is canonical: two unions describing the same set up to
// measure zero compare equal.
class IntervalUnion {
public:
    IntervalUnion() = default;
    IntervalUnion(std::initializer_list<Interval> pieces);
    explicit IntervalUnion(std::vector<Interval> pieces);

    static IntervalUnion real_line() { return IntervalUnion{{-kInf, kInf}}; }
    static IntervalUnion empty() { return {}; }

    const std::vector<Interval>& intervals() const noexcept { return pieces_; }
    bool is_empty() const noexcept { return pieces_.empty(); }
    std::size_t size() const noexcept { return pieces_.size(); }

    bool contains(double z) const noexcept;
    // Membership with a tolerance on the endpoints: tol * max(1, |endpoint|).
    bool contains(double z, double tol) const noexcept;

    IntervalUnion intersect(const IntervalUnion& other) const;
    IntervalUnion unite(const IntervalUnion& other) const;
    // Clip to [lo, hi].
    IntervalUnion clip(double lo, double hi) const;
    // Every endpoint shifted by -delta.
    IntervalUnion shifted(double delta) const;

    // True when every piece lies inside some piece of `outer`, allowing each
    // endpoint to stick out by tol * max(1, |endpoint|).
    bool is_subset_of(const IntervalUnion& outer, double tol = 0.0) const;

    std::string to_string() const;

    friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;

private:
    void normalize();

    std::vector<Interval> pieces_;
};

}  // namespace sidtw
