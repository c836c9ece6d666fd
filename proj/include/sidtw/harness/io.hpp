#pragma once

#include "sidtw/dtw_core.hpp"
#include "sidtw/harness/experiment.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sidtw::harness {

// One row of a UCR-style text file: class label followed by the values.
struct UcrRow {
    std::string label;
    Eigen::VectorXd values;
};

// Rows are comma-separated (tab/space-separated files are accepted too);
// blank lines are skipped. Parse failures throw InputError naming the file,
// 1-based line and 1-based column (field index).
std::vector<UcrRow> read_ucr(std::istream& in, const std::string& source = "<stream>");
std::vector<UcrRow> read_ucr(const std::filesystem::path& path);

// Values written with max_digits10, so reading them back is exact.
void write_ucr_row(std::ostream& out, const UcrRow& row);

struct UcrPairOptions {
    std::size_t row_a = 0;
    std::size_t row_b = 0;
    VarianceMode variance_mode = VarianceMode::estimated;
    Covariance covariance = Covariance::independence;  // used when known
};

// Builds a pair from one selected row of each file. Estimated variance fills
// a diagonal Σ with each series' sample variance; known variance uses the
// configured covariance model with unit marginal variance.
TimeSeriesPair load_ucr_pair(const std::filesystem::path& path_a, const std::filesystem::path& path_b,
                             const UcrPairOptions& options = {});

// Flat "key = value" document; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(std::istream& in, const std::string& source = "<stream>");
KeyValues read_key_values(const std::filesystem::path& path);

// Applies recognised keys to `config`; unknown keys throw InputError.
// List-valued keys are rejected here; see expand_grid.
void apply_key_values(ExperimentConfig& config, const KeyValues& kv);

// Expands comma-separated lists in "n", "m" and "delta" into one config per
// grid point (n-major). When "m" is absent it follows "n".
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const KeyValues& kv);

}  // namespace sidtw::harness
