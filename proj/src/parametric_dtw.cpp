#include "sidtw/parametric_dtw.hpp"

#include "sidtw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace sidtw {

namespace {

// Minimum separation between consecutive breakpoints.
double breakpoint_gap(double z) { return 1e-12 * std::max(1.0, std::abs(z)); }

constexpr double kNoise = 64.0 * std::numeric_limits<double>::epsilon();

// a - b with coefficients at rounding level set to zero.
QuadraticLoss snapped_difference(const QuadraticLoss& a, const QuadraticLoss& b) {
    QuadraticLoss d = a - b;
    auto snap = [](double& v, double x, double y) {
        if (std::abs(v) <= kNoise * (std::abs(x) + std::abs(y))) v = 0.0;
    };
    snap(d.w0, a.w0, b.w0);
    snap(d.w1, a.w1, b.w1);
    snap(d.w2, a.w2, b.w2);
    return d;
}

// Strict "a is below b as z -> -inf".
bool below_at_minus_inf(const Candidate& a, const Candidate& b) {
    const QuadraticLoss d = snapped_difference(a.loss, b.loss);
    if (d.w2 != 0.0) return d.w2 < 0.0;
    if (d.w1 != 0.0) return d.w1 > 0.0;
    if (d.w0 != 0.0) return d.w0 < 0.0;
    return a.alignment < b.alignment;
}

// Strict "a is below b immediately to the right of z", for candidates that
// meet at z.
bool below_right_of(double z, const Candidate& a, const Candidate& b) {
    const double sa = a.loss.slope(z);
    const double sb = b.loss.slope(z);
    if (sa != sb) return sa < sb;
    if (a.loss.w2 != b.loss.w2) return a.loss.w2 < b.loss.w2;
    return a.alignment < b.alignment;
}

// Magnitude of the rounding error in evaluating q at z.
double evaluation_scale(const QuadraticLoss& q, double z) {
    return std::abs(q.w0) + std::abs(q.w1 * z) + std::abs(q.w2 * z * z);
}

// Smallest r beyond z + gap at which the candidate drops below the active loss.
// A dip shallower than the rounding noise of the two losses is a tangency.
std::optional<double> next_downcrossing(const QuadraticLoss& cand, const QuadraticLoss& active, double z) {
    const QuadraticLoss diff = snapped_difference(cand, active);
    const double floor = std::isfinite(z) ? z + breakpoint_gap(z) : -kInf;
    const RealRoots roots = real_roots(diff);
    if (roots.count == 0) return std::nullopt;
    if (diff.w2 > 0.0) {
        const double vertex = 0.5 * (roots.lo + roots.hi);
        const double noise = kNoise * (evaluation_scale(cand, vertex) + evaluation_scale(active, vertex));
        if (-diff(vertex) <= noise) return std::nullopt;
    }
    if (diff.w2 == 0.0) {
        if (diff.w1 < 0.0 && roots.lo > floor) return roots.lo;
        return std::nullopt;
    }
    const double r = diff.w2 > 0.0 ? roots.lo : roots.hi;
    if (r > floor) return r;
    return std::nullopt;
}

}  // namespace

QuadraticLoss quadratic_loss(const AlignmentMatrix& M, const DataLine& line) {
    if (M.rows() != line.n || M.cols() != line.m()) {
        throw InputError("quadratic_loss: alignment does not match the data line split");
    }
    QuadraticLoss q;
    for (const Cell& c : M.path()) {
        q += line.cell_loss(c.i, c.j);
    }
    return q;
}

PiecewiseEnvelope::PiecewiseEnvelope(std::vector<EnvelopeSegment> segments)
    : segments_(std::move(segments)) {
    if (segments_.empty()) {
        throw std::invalid_argument("envelope needs at least one segment");
    }
    if (segments_.front().lo != -kInf || segments_.back().hi != kInf) {
        throw std::invalid_argument("envelope must cover the real line");
    }
    for (std::size_t k = 1; k < segments_.size(); ++k) {
        if (segments_[k].lo != segments_[k - 1].hi || !(segments_[k].lo < segments_[k].hi)) {
            throw std::invalid_argument("envelope segments must be contiguous and increasing");
        }
    }
}

std::vector<double> PiecewiseEnvelope::breakpoints() const {
    std::vector<double> out;
    out.reserve(segments_.size() - 1);
    for (std::size_t k = 1; k < segments_.size(); ++k) out.push_back(segments_[k].lo);
    return out;
}

const EnvelopeSegment& PiecewiseEnvelope::segment_at(double z) const {
    auto it = std::lower_bound(segments_.begin(), segments_.end(), z,
                               [](const EnvelopeSegment& s, double v) { return s.hi < v; });
    if (it == segments_.end()) return segments_.back();
    return *it;
}

PiecewiseEnvelope lower_envelope(std::vector<Candidate> candidates) {
    if (candidates.empty()) {
        throw std::invalid_argument("lower_envelope: empty candidate set");
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.alignment < b.alignment; });
    candidates.erase(std::unique(candidates.begin(), candidates.end(),
                                 [](const Candidate& a, const Candidate& b) {
                                     return a.alignment == b.alignment;
                                 }),
                     candidates.end());

    std::size_t active = 0;
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        if (below_at_minus_inf(candidates[k], candidates[active])) active = k;
    }

    std::vector<EnvelopeSegment> segments;
    double z = -kInf;
    // Each quadratic pair crosses at most twice, so the walk is bounded.
    const std::size_t max_steps = 2 * candidates.size() * candidates.size() + 2;
    for (std::size_t step = 0;; ++step) {
        if (step > max_steps) {
            throw NumericalError("lower_envelope: breakpoint walk did not terminate");
        }
        const Candidate& cur = candidates[active];
        double best = kInf;
        std::vector<std::size_t> group;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (k == active) continue;
            const auto r = next_downcrossing(candidates[k].loss, cur.loss, z);
            if (!r) continue;
            const double tol = breakpoint_gap(*r);
            if (*r < best - tol) {
                best = *r;
                group.assign(1, k);
            } else if (std::abs(*r - best) <= tol) {
                group.push_back(k);
            }
        }
        if (group.empty()) {
            segments.push_back({cur.alignment, cur.loss, z, kInf});
            break;
        }
        std::size_t next = group.front();
        for (std::size_t k : group) {
            if (below_right_of(best, candidates[k], candidates[next])) next = k;
        }
        segments.push_back({cur.alignment, cur.loss, z, best});
        z = best;
        active = next;
    }
    return PiecewiseEnvelope(std::move(segments));
}

PiecewiseEnvelope envelope_bruteforce(std::span<const AlignmentMatrix> candidates,
                                      const DataLine& line) {
    std::vector<Candidate> cands;
    cands.reserve(candidates.size());
    for (const AlignmentMatrix& M : candidates) {
        cands.push_back({M, quadratic_loss(M, line)});
    }
    return lower_envelope(std::move(cands));
}

namespace {

std::vector<Candidate> distinct_segment_candidates(const PiecewiseEnvelope& env) {
    std::vector<Candidate> out;
    for (const EnvelopeSegment& s : env.segments()) {
        const bool seen = std::any_of(out.begin(), out.end(), [&](const Candidate& c) {
            return c.alignment == s.alignment;
        });
        if (!seen) out.push_back({s.alignment, s.loss});
    }
    return out;
}

}  // namespace

PiecewiseEnvelope para_dtw(const DataLine& line, int n, int m, ParaDtwStats& stats) {
    if (n < 1 || m < 1 || line.n != n || line.m() != m) {
        throw InputError("para_dtw: dimensions do not match the data line");
    }
    stats = {};
    // Only the previous row of optimal sets is needed.
    std::vector<std::vector<Candidate>> prev_row(m), cur_row(m);
    std::optional<PiecewiseEnvelope> last;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const QuadraticLoss cell = line.cell_loss(i, j);
            std::vector<Candidate> cands;
            if (i == 0 && j == 0) {
                cands.push_back({AlignmentMatrix(1, 1, {{0, 0}}), cell});
            }
            if (i > 0) {
                for (const Candidate& c : prev_row[j]) {
                    cands.push_back({c.alignment.extend_down(), c.loss + cell});
                }
            }
            if (j > 0) {
                for (const Candidate& c : cur_row[j - 1]) {
                    cands.push_back({c.alignment.extend_right(), c.loss + cell});
                }
            }
            if (i > 0 && j > 0) {
                for (const Candidate& c : prev_row[j - 1]) {
                    cands.push_back({c.alignment.extend_diagonal(), c.loss + cell});
                }
            }
            stats.max_candidates = std::max(stats.max_candidates, cands.size());
            stats.total_candidates += cands.size();
            PiecewiseEnvelope env = lower_envelope(std::move(cands));
            cur_row[j] = distinct_segment_candidates(env);
            if (i == n - 1 && j == m - 1) last.emplace(std::move(env));
        }
        std::swap(prev_row, cur_row);
    }
    stats.final_segments = last->size();
    return std::move(*last);
}

PiecewiseEnvelope para_dtw(const DataLine& line, int n, int m) {
    ParaDtwStats stats;
    return para_dtw(line, n, m, stats);
}

IntervalUnion z1_region(const PiecewiseEnvelope& env, const AlignmentMatrix& observed) {
    std::vector<Interval> pieces;
    for (const EnvelopeSegment& s : env.segments()) {
        if (s.alignment == observed) pieces.push_back({s.lo, s.hi});
    }
    return IntervalUnion(std::move(pieces));
}

}  // namespace sidtw
