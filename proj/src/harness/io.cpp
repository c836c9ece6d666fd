#include "sidtw/harness/io.hpp"

#include "sidtw/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sidtw::harness {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    if (line.find(',') != std::string_view::npos) {
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            out.push_back(trim(line.substr(start, comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos < line.size()) {
        pos = line.find_first_not_of(" \t", pos);
        if (pos == std::string_view::npos) break;
        const auto end = line.find_first_of(" \t", pos);
        out.push_back(line.substr(pos, end == std::string_view::npos ? end : end - pos));
        pos = end;
    }
    return out;
}

[[noreturn]] void parse_failure(const std::string& source, std::size_t line, std::size_t column,
                                const std::string& what) {
    std::ostringstream os;
    os << source << ':' << line << ':' << column << ": " << what;
    throw InputError(os.str());
}

double parse_double(std::string_view field, const std::string& source, std::size_t line,
                    std::size_t column) {
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        parse_failure(source, line, column, "cannot parse '" + std::string(field) + "' as a number");
    }
    if (!std::isfinite(v)) parse_failure(source, line, column, "value is not finite");
    return v;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

int parse_int(const std::string& key, const std::string& value) {
    int v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (value.empty() || ec != std::errc{} || ptr != end) {
        throw InputError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
    return v;
}

double parse_real(const std::string& key, const std::string& value) {
    double v = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (value.empty() || ec != std::errc{} || ptr != end) {
        throw InputError("config key '" + key + "': expected a number, got '" + value + "'");
    }
    return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (value.empty() || ec != std::errc{} || ptr != end) {
        throw InputError("config key '" + key + "': expected an unsigned integer, got '" + value + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw InputError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        out.emplace_back(trim(std::string_view(value).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool is_grid_key(const std::string& key) { return key == "n" || key == "m" || key == "delta"; }

}  // namespace

std::vector<UcrRow> read_ucr(std::istream& in, const std::string& source) {
    std::vector<UcrRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        const auto fields = split_fields(body);
        if (fields.size() < 2) parse_failure(source, line_no, 1, "row has a label but no values");
        UcrRow row;
        row.label = std::string(fields.front());
        row.values.resize(static_cast<Eigen::Index>(fields.size() - 1));
        for (std::size_t k = 1; k < fields.size(); ++k) {
            row.values[static_cast<Eigen::Index>(k - 1)] = parse_double(fields[k], source, line_no, k + 1);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(source + ": no rows");
    return rows;
}

std::vector<UcrRow> read_ucr(const std::filesystem::path& path) {
    std::ifstream in = open(path);
    return read_ucr(in, path.string());
}

void write_ucr_row(std::ostream& out, const UcrRow& row) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << row.label;
    for (Eigen::Index k = 0; k < row.values.size(); ++k) out << ',' << row.values[k];
    out << '\n';
    out.precision(old);
}

TimeSeriesPair load_ucr_pair(const std::filesystem::path& path_a, const std::filesystem::path& path_b,
                             const UcrPairOptions& options) {
    const auto rows_a = read_ucr(path_a);
    const auto rows_b = read_ucr(path_b);
    if (options.row_a >= rows_a.size()) {
        throw InputError(path_a.string() + ": row " + std::to_string(options.row_a) + " out of range");
    }
    if (options.row_b >= rows_b.size()) {
        throw InputError(path_b.string() + ": row " + std::to_string(options.row_b) + " out of range");
    }
    const Eigen::VectorXd& x = rows_a[options.row_a].values;
    const Eigen::VectorXd& y = rows_b[options.row_b].values;
    if (options.variance_mode == VarianceMode::estimated) {
        return TimeSeriesPair(x, y, sample_variance_diagonal(x), sample_variance_diagonal(y));
    }
    return TimeSeriesPair(x, y, covariance_matrix(options.covariance, static_cast<int>(x.size())),
                          covariance_matrix(options.covariance, static_cast<int>(y.size())));
}

KeyValues read_key_values(std::istream& in, const std::string& source) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) parse_failure(source, line_no, 1, "expected key = value");
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        if (key.empty()) parse_failure(source, line_no, 1, "empty key");
        kv[key] = value;
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in = open(path);
    return read_key_values(in, path.string());
}

void apply_key_values(ExperimentConfig& config, const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        if (is_grid_key(key) && value.find(',') != std::string::npos) {
            throw InputError("config key '" + key + "' holds a list; expand the grid first");
        }
        if (key == "method") config.method = parse_method(value);
        else if (key == "n") config.n = parse_int(key, value);
        else if (key == "m") config.m = parse_int(key, value);
        else if (key == "delta") config.delta = parse_real(key, value);
        else if (key == "cov" || key == "covariance") config.covariance = parse_covariance(value);
        else if (key == "noise") config.noise = parse_noise(value);
        else if (key == "variance") config.variance_mode = parse_variance_mode(value);
        else if (key == "alpha") config.alpha = parse_real(key, value);
        else if (key == "trials") config.trials = parse_int(key, value);
        else if (key == "repetitions") config.repetitions = parse_int(key, value);
        else if (key == "seed") config.seed = parse_seed(key, value);
        else if (key == "perm_B" || key == "perm-B") config.permutation_B = parse_int(key, value);
        else if (key == "ci") config.with_ci = parse_bool(key, value);
        else if (key == "threads") config.threads = parse_int(key, value);
        else throw InputError("unknown config key '" + key + "'");
    }
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const KeyValues& kv) {
    KeyValues scalars;
    for (const auto& [key, value] : kv) {
        if (!is_grid_key(key)) scalars.emplace(key, value);
    }
    ExperimentConfig common = base;
    apply_key_values(common, scalars);

    auto list_or = [&](const std::string& key, std::vector<std::string> fallback) {
        const auto it = kv.find(key);
        return it == kv.end() ? fallback : split_list(it->second);
    };
    const auto ns = list_or("n", {std::to_string(common.n)});
    const bool m_follows_n = kv.find("m") == kv.end() && kv.find("n") != kv.end();
    const auto ms = list_or("m", {std::to_string(common.m)});
    const auto deltas = list_or("delta", {""});

    std::vector<ExperimentConfig> out;
    for (const auto& n : ns) {
        for (const auto& m : m_follows_n ? std::vector<std::string>{n} : ms) {
            for (const auto& d : deltas) {
                ExperimentConfig c = common;
                c.n = parse_int("n", n);
                c.m = parse_int("m", m);
                if (!d.empty()) c.delta = parse_real("delta", d);
                out.push_back(c);
            }
        }
    }
    return out;
}

}  // namespace sidtw::harness
