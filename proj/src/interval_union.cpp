#include "sidtw/interval_union.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sidtw {

namespace {

double slack(double endpoint, double tol) {
    if (!std::isfinite(endpoint)) return 0.0;
    return tol * std::max(1.0, std::abs(endpoint));
}

}  // namespace

IntervalUnion::IntervalUnion(std::initializer_list<Interval> pieces) : pieces_(pieces) { normalize(); }

IntervalUnion::IntervalUnion(std::vector<Interval> pieces) : pieces_(std::move(pieces)) { normalize(); }

void IntervalUnion::normalize() {
    for (const Interval& iv : pieces_) {
        if (std::isnan(iv.lo) || std::isnan(iv.hi)) {
            throw std::invalid_argument("interval endpoint is NaN");
        }
    }
    std::erase_if(pieces_, [](const Interval& iv) { return !(iv.lo < iv.hi); });
    std::sort(pieces_.begin(), pieces_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    merged.reserve(pieces_.size());
    for (const Interval& iv : pieces_) {
        if (!merged.empty() && iv.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        } else {
            merged.push_back(iv);
        }
    }
    pieces_ = std::move(merged);
}

bool IntervalUnion::contains(double z) const noexcept {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), z,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    if (it == pieces_.begin()) return false;
    return std::prev(it)->contains(z);
}

bool IntervalUnion::contains(double z, double tol) const noexcept {
    return std::any_of(pieces_.begin(), pieces_.end(), [&](const Interval& iv) {
        return iv.lo - slack(iv.lo, tol) <= z && z <= iv.hi + slack(iv.hi, tol);
    });
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
    std::vector<Interval> out;
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < pieces_.size() && b < other.pieces_.size()) {
        const Interval& p = pieces_[a];
        const Interval& q = other.pieces_[b];
        const double lo = std::max(p.lo, q.lo);
        const double hi = std::min(p.hi, q.hi);
        if (lo < hi) out.push_back({lo, hi});
        if (p.hi < q.hi) {
            ++a;
        } else {
            ++b;
        }
    }
    IntervalUnion r;
    r.pieces_ = std::move(out);  // already sorted and disjoint
    return r;
}

IntervalUnion IntervalUnion::unite(const IntervalUnion& other) const {
    std::vector<Interval> all = pieces_;
    all.insert(all.end(), other.pieces_.begin(), other.pieces_.end());
    return IntervalUnion(std::move(all));
}

IntervalUnion IntervalUnion::clip(double lo, double hi) const {
    return intersect(IntervalUnion{{lo, hi}});
}

IntervalUnion IntervalUnion::shifted(double delta) const {
    std::vector<Interval> out;
    out.reserve(pieces_.size());
    for (const Interval& iv : pieces_) {
        out.push_back({iv.lo - delta, iv.hi - delta});
    }
    return IntervalUnion(std::move(out));
}

bool IntervalUnion::is_subset_of(const IntervalUnion& outer, double tol) const {
    return std::all_of(pieces_.begin(), pieces_.end(), [&](const Interval& iv) {
        return std::any_of(outer.pieces_.begin(), outer.pieces_.end(), [&](const Interval& o) {
            return o.lo - slack(o.lo, tol) <= iv.lo && iv.hi <= o.hi + slack(o.hi, tol);
        });
    });
}

std::string IntervalUnion::to_string() const {
    if (pieces_.empty()) return "{}";
    std::ostringstream os;
    os.precision(17);
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        if (k) os << " U ";
        os << '[' << pieces_[k].lo << ", " << pieces_[k].hi << ']';
    }
    return os.str();
}

}  // namespace sidtw
