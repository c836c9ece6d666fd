#pragma once

#include "sidtw/alignment.hpp"
#include "sidtw/interval_union.hpp"
#include "sidtw/quadratic.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sidtw {

// The data line (x(z); y(z)) = a + b z, split after the first n entries.
struct DataLine {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    int n = 0;

    int m() const noexcept { return static_cast<int>(a.size()) - n; }
    Eigen::VectorXd x_at(double z) const { return a.head(n) + b.head(n) * z; }
    Eigen::VectorXd y_at(double z) const { return a.tail(m()) + b.tail(m()) * z; }

    // (x_i(z) - y_j(z))² as a quadratic in z.
    QuadraticLoss cell_loss(int i, int j) const noexcept {
        return squared_linear(a[i] - a[n + j], b[i] - b[n + j]);
    }
};

// ⟨M, C(x(z), y(z))⟩ as a quadratic in z, accumulated in path order.
QuadraticLoss quadratic_loss(const AlignmentMatrix& M, const DataLine& line);

struct EnvelopeSegment {
    AlignmentMatrix alignment;
    QuadraticLoss loss;
    double lo;  // segment covers [lo, hi]
    double hi;
};

// Lower envelope of a finite family of quadratics. Segments are contiguous,
// start at -inf and end at +inf.
class PiecewiseEnvelope {
public:
    explicit PiecewiseEnvelope(std::vector<EnvelopeSegment> segments);

    const std::vector<EnvelopeSegment>& segments() const noexcept { return segments_; }
    std::size_t size() const noexcept { return segments_.size(); }

    // Finite breakpoints z_2 < ... < z_{T-1}.
    std::vector<double> breakpoints() const;

    // Segment owning z. A shared breakpoint belongs to the earlier segment.
    const EnvelopeSegment& segment_at(double z) const;
    double value(double z) const { return segment_at(z).loss(z); }

private:
    std::vector<EnvelopeSegment> segments_;
};

struct Candidate {
    AlignmentMatrix alignment;
    QuadraticLoss loss;
};

// Breakpoint walk over an explicit candidate family: start from the candidate
// that is minimal as z -> -inf and repeatedly jump to the nearest crossing.
//
// Ties are resolved by the behaviour immediately to the right of the point in
// question (slope, then curvature), and identical quadratics by lexicographic
// path order. Candidates with equal paths are deduplicated.
PiecewiseEnvelope lower_envelope(std::vector<Candidate> candidates);

// lower_envelope over a set of alignments, computing their quadratics.
PiecewiseEnvelope envelope_bruteforce(std::span<const AlignmentMatrix> candidates,
                                      const DataLine& line);

// Parametric DTW: fills the n×m table of envelopes, building each cell's
// candidate set from the alignments on its three predecessors' envelopes.
// Returns the envelope of the final cell.
PiecewiseEnvelope para_dtw(const DataLine& line, int n, int m);

struct ParaDtwStats {
    std::size_t max_candidates = 0;
    std::size_t total_candidates = 0;
    std::size_t final_segments = 0;
};

// Same as para_dtw, additionally reporting table statistics.
PiecewiseEnvelope para_dtw(const DataLine& line, int n, int m, ParaDtwStats& stats);

// Union of the segments whose alignment equals `observed`.
IntervalUnion z1_region(const PiecewiseEnvelope& env, const AlignmentMatrix& observed);

}  // namespace sidtw
