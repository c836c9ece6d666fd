#include "sidtw/alignment.hpp"

#include "sidtw/errors.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace sidtw {

AlignmentMatrix::AlignmentMatrix(int n, int m, std::vector<Cell> path)
    : n_(n), m_(m), path_(std::move(path)) {
    if (n_ < 1 || m_ < 1) {
        throw std::invalid_argument("alignment dimensions must be positive");
    }
    if (path_.empty() || path_.front() != Cell{0, 0} || path_.back() != Cell{n_ - 1, m_ - 1}) {
        throw std::invalid_argument("alignment path must run from (1,1) to (n,m)");
    }
    for (std::size_t k = 1; k < path_.size(); ++k) {
        const int di = path_[k].i - path_[k - 1].i;
        const int dj = path_[k].j - path_[k - 1].j;
        if (di < 0 || di > 1 || dj < 0 || dj > 1 || (di == 0 && dj == 0)) {
            throw std::invalid_argument("alignment path has an invalid step at position " +
                                        std::to_string(k + 1));
        }
    }
}

AlignmentMatrix::AlignmentMatrix(int n, int m, std::vector<Cell> path, bool)
    : n_(n), m_(m), path_(std::move(path)) {}

bool AlignmentMatrix::contains(int i, int j) const {
    // Path cells are sorted lexicographically.
    return std::binary_search(path_.begin(), path_.end(), Cell{i, j});
}

Eigen::VectorXd AlignmentMatrix::vectorized() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_) * m_);
    for (const Cell& c : path_) {
        v[static_cast<Eigen::Index>(c.i) * m_ + c.j] = 1.0;
    }
    return v;
}

Eigen::MatrixXi AlignmentMatrix::dense() const {
    Eigen::MatrixXi d = Eigen::MatrixXi::Zero(n_, m_);
    for (const Cell& c : path_) {
        d(c.i, c.j) = 1;
    }
    return d;
}

AlignmentMatrix AlignmentMatrix::extend_down() const {
    auto p = path_;
    p.push_back({n_, m_ - 1});
    return AlignmentMatrix(n_ + 1, m_, std::move(p), true);
}

AlignmentMatrix AlignmentMatrix::extend_right() const {
    auto p = path_;
    p.push_back({n_ - 1, m_});
    return AlignmentMatrix(n_, m_ + 1, std::move(p), true);
}

AlignmentMatrix AlignmentMatrix::extend_diagonal() const {
    auto p = path_;
    p.push_back({n_, m_});
    return AlignmentMatrix(n_ + 1, m_ + 1, std::move(p), true);
}

std::string AlignmentMatrix::to_string() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < path_.size(); ++k) {
        if (k) os << ' ';
        os << '(' << path_[k].i + 1 << ',' << path_[k].j + 1 << ')';
    }
    return os.str();
}

std::strong_ordering operator<=>(const AlignmentMatrix& a, const AlignmentMatrix& b) {
    if (auto c = a.n_ <=> b.n_; c != 0) return c;
    if (auto c = a.m_ <=> b.m_; c != 0) return c;
    return std::lexicographical_compare_three_way(a.path_.begin(), a.path_.end(), b.path_.begin(),
                                                  b.path_.end());
}

std::uint64_t delannoy(int a, int b) {
    if (a < 0 || b < 0) return 0;
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    auto sat_add = [](std::uint64_t x, std::uint64_t y) { return x > kMax - y ? kMax : x + y; };
    std::vector<std::uint64_t> prev(b + 1, 1), cur(b + 1, 1);
    for (int r = 1; r <= a; ++r) {
        cur[0] = 1;
        for (int c = 1; c <= b; ++c) {
            cur[c] = sat_add(sat_add(prev[c], cur[c - 1]), prev[c - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b];
}

namespace {

void enumerate_from(int n, int m, std::vector<Cell>& stack, std::vector<AlignmentMatrix>& out) {
    const Cell last = stack.back();
    if (last.i == n - 1 && last.j == m - 1) {
        out.emplace_back(n, m, stack);
        return;
    }
    // Lexicographic order of the next cell: (i, j+1) < (i+1, j) < (i+1, j+1).
    constexpr Cell kSteps[] = {{0, 1}, {1, 0}, {1, 1}};
    for (const Cell s : kSteps) {
        const Cell next{last.i + s.i, last.j + s.j};
        if (next.i >= n || next.j >= m) continue;
        stack.push_back(next);
        enumerate_from(n, m, stack, out);
        stack.pop_back();
    }
}

}  // namespace

std::vector<AlignmentMatrix> enumerate_alignments(int n, int m, std::uint64_t limit) {
    if (n < 1 || m < 1) {
        throw InputError("enumerate_alignments: lengths must be positive");
    }
    const std::uint64_t count = delannoy(n - 1, m - 1);
    if (count > limit) {
        throw InputError("enumerate_alignments: too large to enumerate (" + std::to_string(count) +
                         " alignments for n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
    }
    std::vector<AlignmentMatrix> out;
    out.reserve(count);
    std::vector<Cell> stack{{0, 0}};
    enumerate_from(n, m, stack, out);
    return out;
}

}  // namespace sidtw
