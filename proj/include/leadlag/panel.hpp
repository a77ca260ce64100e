#pragma once

// Multivariate time-series panels: CSV ingestion, forward-fill, log returns
// and per-series standardization.

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "leadlag/common.hpp"

namespace leadlag {

enum class PanelKind { Levels, Differences };

/// T x p panel of aligned observations. Column i of `values` is series i.
struct TimeSeriesPanel {
    std::vector<std::string> timestamps;
    std::vector<std::string> series_ids;
    Eigen::MatrixXd values;
    PanelKind kind = PanelKind::Levels;
    std::string time_label = "timestamp";

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

    std::span<const double> series(std::size_t i) const {
        return {values.col(static_cast<Eigen::Index>(i)).data(), rows()};
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

inline bool is_missing_token(std::string_view s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// YYYY-MM-DD optionally followed by 'T' or ' ' and a time part.
inline bool looks_iso8601(std::string_view s) {
    if (s.size() < 10) return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') return false;
    if (s[4] != '-' || s[7] != '-') return false;
    return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace detail

/// Throws DataError unless timestamps are all integers (strictly increasing
/// numerically) or all ISO-8601 (strictly increasing lexicographically).
inline void check_timestamps(const std::vector<std::string>& ts) {
    bool all_int = true;
    for (const auto& t : ts)
        if (!detail::parse_int(t)) {
            all_int = false;
            break;
        }
    for (std::size_t r = 0; r < ts.size(); ++r) {
        if (!all_int && !detail::looks_iso8601(ts[r]))
            throw DataError("unparseable timestamp '" + ts[r] + "' at row " + std::to_string(r + 1));
        if (r == 0) continue;
        const bool increasing = all_int ? *detail::parse_int(ts[r]) > *detail::parse_int(ts[r - 1]) : ts[r] > ts[r - 1];
        if (!increasing)
            throw DataError("timestamps not strictly increasing at '" + ts[r] + "' (row " + std::to_string(r + 1) + ")");
    }
}

struct LoadOptions {
    /// Series with fewer non-missing rows than ceil(min_fraction * T) are dropped.
    double min_fraction = 0.5;
    /// Absolute override of the row threshold.
    std::optional<std::size_t> min_rows;
    PanelKind kind = PanelKind::Levels;
};

struct LoadResult {
    TimeSeriesPanel panel;
    std::vector<std::string> dropped;
    std::vector<std::string> warnings;
};

/// Reads a CSV (header mandatory; first column timestamps, one column per
/// series). Leading rows are truncated to the first timestamp where every
/// retained series is observed; remaining gaps are forward-filled (Levels only).
inline LoadResult load_panel(const std::string& path, const LoadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2) throw DataError("header needs a timestamp column and at least one series: " + path);

    LoadResult out;
    auto& panel = out.panel;
    panel.kind = opts.kind;
    panel.time_label = std::string(header[0]);
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string id(header[c]);
        if (id.empty()) throw DataError("empty series id in header column " + std::to_string(c + 1));
        if (!seen.insert(id).second) throw DataError("duplicate series id '" + id + "'");
        ids.push_back(std::move(id));
    }
    const std::size_t p_all = ids.size();

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> ts;
    std::vector<std::vector<double>> raw;  // row-major
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != p_all + 1)
            throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(p_all + 1) + " fields, got " +
                            std::to_string(cells.size()));
        ts.emplace_back(cells[0]);
        std::vector<double> row(p_all, nan);
        for (std::size_t c = 0; c < p_all; ++c) {
            if (detail::is_missing_token(cells[c + 1])) continue;
            const auto v = detail::parse_double(cells[c + 1]);
            if (!v)
                throw DataError("line " + std::to_string(lineno) + ", series '" + ids[c] + "': non-numeric value '" +
                                std::string(cells[c + 1]) + "'");
            row[c] = *v;
        }
        raw.push_back(std::move(row));
    }
    if (ts.empty()) throw DataError("no data rows: " + path);
    check_timestamps(ts);

    const std::size_t T = ts.size();
    const std::size_t min_rows =
        opts.min_rows ? *opts.min_rows : static_cast<std::size_t>(std::ceil(opts.min_fraction * static_cast<double>(T)));

    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < p_all; ++c) {
        std::size_t observed = 0;
        for (std::size_t r = 0; r < T; ++r)
            if (!std::isnan(raw[r][c])) ++observed;
        if (observed == 0) throw DataError("series '" + ids[c] + "' has no observations");
        if (observed < min_rows) {
            out.dropped.push_back(ids[c]);
            out.warnings.push_back("dropped series '" + ids[c] + "': " + std::to_string(observed) +
                                   " non-missing rows < minimum " + std::to_string(min_rows));
            continue;
        }
        keep.push_back(c);
    }
    if (keep.empty()) throw DataError("no series left after the minimum-observation filter");

    std::size_t first = 0;
    while (first < T && std::any_of(keep.begin(), keep.end(), [&](std::size_t c) { return std::isnan(raw[first][c]); }))
        ++first;
    if (first == T) throw DataError("no timestamp where all retained series are observed");
    if (first > 0)
        out.warnings.push_back("truncated " + std::to_string(first) + " leading rows before first complete observation");

    const std::size_t rows = T - first;
    panel.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto c = keep[k];
        double last = raw[first][c];
        for (std::size_t r = 0; r < rows; ++r) {
            double v = raw[first + r][c];
            if (std::isnan(v)) {
                if (opts.kind == PanelKind::Differences)
                    throw DataError("missing value in returns series '" + ids[c] + "' at " + ts[first + r]);
                v = last;
            }
            last = v;
            panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
        }
        panel.series_ids.push_back(ids[c]);
    }
    panel.timestamps.assign(ts.begin() + static_cast<std::ptrdiff_t>(first), ts.end());
    return out;
}

/// Writes the panel in the ingestion CSV format using shortest round-trip decimals.
inline void write_panel_csv(const TimeSeriesPanel& panel, std::ostream& os) {
    os << panel.time_label;
    for (const auto& id : panel.series_ids) os << ',' << id;
    os << '\n';
    for (std::size_t r = 0; r < panel.rows(); ++r) {
        os << panel.timestamps[r];
        for (std::size_t c = 0; c < panel.cols(); ++c)
            os << ',' << detail::format_double(panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        os << '\n';
    }
}

inline void write_panel_csv(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write file: " + path);
    write_panel_csv(panel, os);
}

/// output[t] = ln(level[t+1]) - ln(level[t]), stamped with the later timestamp.
inline TimeSeriesPanel to_log_returns(const TimeSeriesPanel& levels) {
    if (levels.kind != PanelKind::Levels) throw std::invalid_argument("to_log_returns expects a Levels panel");
    if (levels.rows() < 2) throw std::invalid_argument("to_log_returns needs at least two rows");
    for (Eigen::Index c = 0; c < levels.values.cols(); ++c)
        for (Eigen::Index r = 0; r < levels.values.rows(); ++r)
            if (!(levels.values(r, c) > 0.0))
                throw DataError("non-positive level in series '" + levels.series_ids[static_cast<std::size_t>(c)] +
                                "' at " + levels.timestamps[static_cast<std::size_t>(r)]);
    TimeSeriesPanel out;
    out.kind = PanelKind::Differences;
    out.series_ids = levels.series_ids;
    out.time_label = levels.time_label;
    out.timestamps.assign(levels.timestamps.begin() + 1, levels.timestamps.end());
    const Eigen::MatrixXd logs = levels.values.array().log();
    const auto n = logs.rows() - 1;
    out.values = logs.bottomRows(n) - logs.topRows(n);
    return out;
}

/// Inverse of differencing: prepends `origin` with `initial` levels and
/// accumulates the increments.
inline TimeSeriesPanel integrate_returns(const TimeSeriesPanel& returns, const Eigen::VectorXd& initial,
                                         std::string origin) {
    if (returns.kind != PanelKind::Differences) throw std::invalid_argument("integrate_returns expects a Differences panel");
    if (initial.size() != returns.values.cols()) throw std::invalid_argument("initial level count mismatch");
    TimeSeriesPanel out;
    out.kind = PanelKind::Levels;
    out.series_ids = returns.series_ids;
    out.time_label = returns.time_label;
    out.timestamps.reserve(returns.rows() + 1);
    out.timestamps.push_back(std::move(origin));
    out.timestamps.insert(out.timestamps.end(), returns.timestamps.begin(), returns.timestamps.end());
    out.values.resize(returns.values.rows() + 1, returns.values.cols());
    out.values.row(0) = initial.transpose();
    for (Eigen::Index r = 0; r < returns.values.rows(); ++r) out.values.row(r + 1) = out.values.row(r) + returns.values.row(r);
    return out;
}

/// Standardizes every series to sample mean 0 and sample (n-1) sd 1.
inline TimeSeriesPanel normalize_series(const TimeSeriesPanel& panel) {
    if (panel.rows() < 2) throw std::invalid_argument("normalize_series needs at least two rows");
    TimeSeriesPanel out = panel;
    const double n = static_cast<double>(panel.rows());
    for (Eigen::Index c = 0; c < panel.values.cols(); ++c) {
        auto col = out.values.col(c);
        const double mean = col.mean();
        col.array() -= mean;
        const double sd = std::sqrt(col.squaredNorm() / (n - 1.0));
        if (!(sd > 0.0) || sd < 1e-300)
            throw DataError("zero-variance series '" + panel.series_ids[static_cast<std::size_t>(c)] + "'");
        col /= sd;
    }
    return out;
}

}  // namespace leadlag
