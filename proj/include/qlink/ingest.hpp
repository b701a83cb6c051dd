#pragma once

#include "qlink/error.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qlink {

using Date = std::chrono::year_month_day;

/// Parses an ISO 8601 calendar date (yyyy-mm-dd). Returns nullopt on anything else.
[[nodiscard]] inline std::optional<Date> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return std::nullopt;
    }
    auto field = [&](std::size_t pos, std::size_t len) -> std::optional<unsigned> {
        unsigned v = 0;
        auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
        if (ec != std::errc{} || ptr != s.data() + pos + len) {
            return std::nullopt;
        }
        return v;
    };
    auto y = field(0, 4);
    auto m = field(5, 2);
    auto d = field(8, 2);
    if (!y || !m || !d) {
        return std::nullopt;
    }
    Date date{std::chrono::year{static_cast<int>(*y)}, std::chrono::month{*m}, std::chrono::day{*d}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

[[nodiscard]] inline std::string format_iso_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

/// Daily closing prices. Dates strictly increasing, closes positive, length >= 3.
class PriceSeries {
public:
    PriceSeries(std::vector<Date> dates, std::vector<double> closes)
        : dates_(std::move(dates)), closes_(std::move(closes)) {
        if (dates_.size() != closes_.size()) {
            throw Error(ErrorCode::MisalignedInputs, "ingest", "dates and closes differ in length");
        }
        if (dates_.size() < 3) {
            throw Error(ErrorCode::EmptySeries, "ingest",
                        "need at least 3 prices, got " + std::to_string(dates_.size()));
        }
        for (std::size_t i = 0; i < closes_.size(); ++i) {
            if (!(closes_[i] > 0.0) || !std::isfinite(closes_[i])) {
                throw Error(ErrorCode::UnparseableRow, "ingest",
                            "non-positive close at index " + std::to_string(i));
            }
            if (i > 0 && !(dates_[i - 1] < dates_[i])) {
                throw Error(ErrorCode::DuplicateDate, "ingest",
                            "dates not strictly increasing at " + format_iso_date(dates_[i]));
            }
        }
    }

    [[nodiscard]] std::span<const Date> dates() const noexcept { return dates_; }
    [[nodiscard]] std::span<const double> closes() const noexcept { return closes_; }
    [[nodiscard]] std::size_t size() const noexcept { return closes_.size(); }

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

private:
    std::vector<Date> dates_;
    std::vector<double> closes_;
};

/// Log returns; dates[t] is the date of the later close of each pair.
class ReturnSeries {
public:
    ReturnSeries() = default;
    ReturnSeries(std::vector<Date> dates, std::vector<double> returns)
        : dates_(std::move(dates)), returns_(std::move(returns)) {
        if (dates_.size() != returns_.size()) {
            throw Error(ErrorCode::MisalignedInputs, "ingest", "dates and returns differ in length");
        }
        for (std::size_t i = 0; i < returns_.size(); ++i) {
            if (!std::isfinite(returns_[i])) {
                throw Error(ErrorCode::UnparseableRow, "ingest", "non-finite return at index " + std::to_string(i));
            }
        }
    }

    /// Series without calendar information (simulated data); dates are synthetic
    /// consecutive days starting 2000-01-01.
    [[nodiscard]] static ReturnSeries from_values(std::vector<double> returns) {
        std::vector<Date> dates;
        dates.reserve(returns.size());
        std::chrono::sys_days day = std::chrono::sys_days{std::chrono::year{2000} / 1 / 1};
        for (std::size_t i = 0; i < returns.size(); ++i) {
            dates.emplace_back(day);
            day += std::chrono::days{1};
        }
        return ReturnSeries(std::move(dates), std::move(returns));
    }

    [[nodiscard]] std::span<const Date> dates() const noexcept { return dates_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return returns_; }
    [[nodiscard]] std::size_t size() const noexcept { return returns_.size(); }
    [[nodiscard]] bool empty() const noexcept { return returns_.empty(); }
    [[nodiscard]] double operator[](std::size_t i) const { return returns_[i]; }

    [[nodiscard]] ReturnSeries slice(std::size_t first, std::size_t count) const {
        return ReturnSeries({dates_.begin() + static_cast<std::ptrdiff_t>(first),
                             dates_.begin() + static_cast<std::ptrdiff_t>(first + count)},
                            {returns_.begin() + static_cast<std::ptrdiff_t>(first),
                             returns_.begin() + static_cast<std::ptrdiff_t>(first + count)});
    }

    friend bool operator==(const ReturnSeries&, const ReturnSeries&) = default;

private:
    std::vector<Date> dates_;
    std::vector<double> returns_;
};

struct SplitReturns {
    ReturnSeries in_sample;
    ReturnSeries out_sample;
    double fraction = 0.8;
};

namespace detail {

[[nodiscard]] inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

[[nodiscard]] inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

[[nodiscard]] inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    if (s.empty()) {
        return std::nullopt;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

[[nodiscard]] inline std::string shortest_repr(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace detail

/// Parses a delimited price table (Stooq layout: Date,Open,High,Low,Close,Volume;
/// only Date and Close are read, header names matched case-insensitively).
/// Rows may come in any date order; the result is sorted ascending.
/// Row numbers in diagnostics are 1-based line numbers of the input.
[[nodiscard]] inline PriceSeries parse_price_csv(std::string_view text) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) {
            return false;
        }
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        return true;
    };

    std::string_view header;
    do {
        if (!next_line(header)) {
            throw Error(ErrorCode::MalformedHeader, "ingest", "input is empty");
        }
    } while (detail::trim(header).empty());
    if (line_no == 1 && header.starts_with("\xEF\xBB\xBF")) {
        header.remove_prefix(3);
    }

    const char delim = header.find(',') != std::string_view::npos   ? ','
                       : header.find(';') != std::string_view::npos ? ';'
                                                                    : '\t';
    auto lower = [](std::string_view s) {
        std::string r(s);
        std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return r;
    };
    auto columns = detail::split_fields(header, delim);
    std::optional<std::size_t> date_col;
    std::optional<std::size_t> close_col;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        auto name = lower(columns[i]);
        if (name == "date" && !date_col) {
            date_col = i;
        } else if (name == "close" && !close_col) {
            close_col = i;
        }
    }
    if (!date_col || !close_col) {
        throw Error(ErrorCode::MalformedHeader, "ingest",
                    "header must contain Date and Close columns: '" + std::string(detail::trim(header)) + "'");
    }

    std::vector<std::pair<Date, double>> rows;
    std::string_view line;
    while (next_line(line)) {
        if (detail::trim(line).empty()) {
            continue;
        }
        auto fields = detail::split_fields(line, delim);
        auto bad = [&](const std::string& what) {
            return Error(ErrorCode::UnparseableRow, "ingest", "row " + std::to_string(line_no) + ": " + what);
        };
        if (fields.size() <= std::max(*date_col, *close_col)) {
            throw bad("too few fields");
        }
        auto date = parse_iso_date(fields[*date_col]);
        if (!date) {
            throw bad("bad date '" + std::string(fields[*date_col]) + "'");
        }
        auto close = detail::parse_double(fields[*close_col]);
        if (!close) {
            throw bad("bad or missing close '" + std::string(fields[*close_col]) + "'");
        }
        if (!(*close > 0.0) || !std::isfinite(*close)) {
            throw bad("non-positive close '" + std::string(fields[*close_col]) + "'");
        }
        rows.emplace_back(*date, *close);
    }
    if (rows.size() < 3) {
        throw Error(ErrorCode::EmptySeries, "ingest", "need at least 3 valid rows, got " + std::to_string(rows.size()));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Date> dates;
    std::vector<double> closes;
    dates.reserve(rows.size());
    closes.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first == rows[i - 1].first) {
            throw Error(ErrorCode::DuplicateDate, "ingest", "duplicate date " + format_iso_date(rows[i].first));
        }
        dates.push_back(rows[i].first);
        closes.push_back(rows[i].second);
    }
    return PriceSeries(std::move(dates), std::move(closes));
}

/// Canonical Date,Close rendering; parse_price_csv reads it back exactly.
[[nodiscard]] inline std::string serialize_price_csv(const PriceSeries& prices) {
    std::string out = "Date,Close\n";
    for (std::size_t i = 0; i < prices.size(); ++i) {
        out += format_iso_date(prices.dates()[i]);
        out += ',';
        out += detail::shortest_repr(prices.closes()[i]);
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline ReturnSeries to_log_returns(const PriceSeries& prices) {
    auto closes = prices.closes();
    std::vector<double> r(closes.size() - 1);
    for (std::size_t t = 0; t + 1 < closes.size(); ++t) {
        r[t] = std::log(closes[t + 1] / closes[t]);
    }
    return ReturnSeries({prices.dates().begin() + 1, prices.dates().end()}, std::move(r));
}

/// Contiguous split at floor(fraction * N); both windows must hold >= 2 returns.
[[nodiscard]] inline SplitReturns split(const ReturnSeries& returns, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw Error(ErrorCode::DegenerateSplit, "ingest", "fraction must lie in (0, 1)");
    }
    const auto n = returns.size();
    const auto n_in = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    if (n_in < 2 || n - n_in < 2) {
        throw Error(ErrorCode::DegenerateSplit, "ingest",
                    "split of " + std::to_string(n) + " returns at " + std::to_string(fraction) + " leaves windows of " +
                        std::to_string(n_in) + " and " + std::to_string(n - n_in));
    }
    return {returns.slice(0, n_in), returns.slice(n_in, n - n_in), fraction};
}

/// Subtracts the in-sample mean from both windows.
[[nodiscard]] inline SplitReturns demean(const SplitReturns& s) {
    double mean = 0.0;
    for (double r : s.in_sample.values()) {
        mean += r;
    }
    mean /= static_cast<double>(s.in_sample.size());
    auto shift = [mean](const ReturnSeries& rs) {
        std::vector<double> v(rs.values().begin(), rs.values().end());
        for (double& x : v) {
            x -= mean;
        }
        return ReturnSeries({rs.dates().begin(), rs.dates().end()}, std::move(v));
    };
    return {shift(s.in_sample), shift(s.out_sample), s.fraction};
}

} // namespace qlink
