#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ccfolio/errors.hpp"

namespace ccfolio {

/// Price history for n assets over T+1 periods (rows).
struct PriceSeries {
    std::vector<std::string> asset_labels;
    std::vector<std::string> timestamps;  // sorted, strictly increasing
    Eigen::MatrixXd prices;               // (T+1) x n, all entries > 0
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_price(const std::string& field, std::size_t row) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw MalformedCsv("non-numeric price '" + field + "' in data row " +
                           std::to_string(row));
    }
    return value;
}

}  // namespace detail

/// Parses a price CSV with header `date,<label1>,...,<labeln>` and one
/// timestamp plus n decimal prices per data row. Rows are sorted by
/// timestamp; duplicates are rejected.
inline PriceSeries load_prices(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw MalformedCsv("missing header row");
    }
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "date") {
        throw MalformedCsv("header must be 'date,<label1>,...'");
    }
    const std::size_t n = header.size() - 1;

    struct Row {
        std::string timestamp;
        std::vector<double> prices;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != n + 1) {
            throw MalformedCsv("row " + std::to_string(lineno) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(n + 1));
        }
        Row row;
        row.timestamp = fields[0];
        row.prices.reserve(n);
        for (std::size_t j = 1; j <= n; ++j) {
            const double p = detail::parse_price(fields[j], lineno);
            if (!(p > 0.0)) {
                throw NonPositivePrice("price " + fields[j] + " for asset '" +
                                       header[j] + "' at " + row.timestamp);
            }
            row.prices.push_back(p);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) {
        throw TooFewRows("need at least 2 price rows, got " + std::to_string(rows.size()));
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].timestamp == rows[i - 1].timestamp) {
            throw DuplicateTimestamp(rows[i].timestamp);
        }
    }

    PriceSeries series;
    series.asset_labels.assign(header.begin() + 1, header.end());
    series.timestamps.reserve(rows.size());
    series.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        series.timestamps.push_back(rows[i].timestamp);
        for (std::size_t j = 0; j < n; ++j) {
            series.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i].prices[j];
        }
    }
    return series;
}

inline PriceSeries load_prices(const std::string& csv_text) {
    std::istringstream in(csv_text);
    return load_prices(in);
}

/// Keeps every `step`-th row (indices 0, step, 2*step, ...), e.g. step = 3
/// turns monthly closes into quarterly ones.
inline PriceSeries resample(const PriceSeries& series, int step) {
    if (step < 1) throw ConfigInvalid("resample step must be >= 1");
    if (step == 1) return series;
    PriceSeries out;
    out.asset_labels = series.asset_labels;
    const Eigen::Index rows = series.prices.rows();
    for (Eigen::Index i = 0; i < rows; i += step) {
        out.timestamps.push_back(series.timestamps[static_cast<std::size_t>(i)]);
    }
    if (out.timestamps.size() < 2) {
        throw TooFewRows("resampling left fewer than 2 rows");
    }
    out.prices.resize(static_cast<Eigen::Index>(out.timestamps.size()), series.prices.cols());
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < rows; i += step) {
        out.prices.row(r++) = series.prices.row(i);
    }
    return out;
}

}  // namespace ccfolio
