#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace sidtw {

// One matched index pair. Indices are 0-based; (0, 0) is the first element of
// both series.
struct Cell {
    int i = 0;
    int j = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

// A warping path between a series of length n and one of length m.
//
// The path starts at (0, 0), ends at (n-1, m-1) and advances by one of
// (1,0), (0,1), (1,1) per step. The constructor rejects anything else, so
// every live AlignmentMatrix is valid. Ordering is lexicographic on the cell
// sequence, which is the tie-break order used by the envelope code.
class AlignmentMatrix {
public:
    AlignmentMatrix(int n, int m, std::vector<Cell> path);

    int rows() const noexcept { return n_; }
    int cols() const noexcept { return m_; }
    const std::vector<Cell>& path() const noexcept { return path_; }
    std::size_t size() const noexcept { return path_.size(); }

    bool contains(int i, int j) const;

    // Row-major vectorization: entry i*m + j is 1 when (i, j) is on the path.
    Eigen::VectorXd vectorized() const;
    Eigen::MatrixXi dense() const;

    // Extensions used by the Bellman recursion: append (n, m') etc.
    AlignmentMatrix extend_down() const;      // (n-1, m-1) -> (n, m-1)
    AlignmentMatrix extend_right() const;     // (n-1, m-1) -> (n-1, m)
    AlignmentMatrix extend_diagonal() const;  // (n-1, m-1) -> (n, m)

    std::string to_string() const;  // 1-based, "(1,1) (2,2) ..."

    friend bool operator==(const AlignmentMatrix&, const AlignmentMatrix&) = default;
    friend std::strong_ordering operator<=>(const AlignmentMatrix& a, const AlignmentMatrix& b);

private:
    AlignmentMatrix(int n, int m, std::vector<Cell> path, bool /*trusted*/);

    int n_;
    int m_;
    std::vector<Cell> path_;
};

// Delannoy number D(a, b): number of lattice paths from (0,0) to (a,b) with
// east, north and north-east steps. Saturates at UINT64_MAX.
std::uint64_t delannoy(int a, int b);

inline constexpr std::uint64_t kMaxEnumeration = 1'000'000;

// All alignments between lengths n and m, in lexicographic order. Throws
// InputError when D(n-1, m-1) exceeds `limit`.
std::vector<AlignmentMatrix> enumerate_alignments(int n, int m,
                                                  std::uint64_t limit = kMaxEnumeration);

}  // namespace sidtw
