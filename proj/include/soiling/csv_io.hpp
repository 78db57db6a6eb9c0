#pragma once

// CSV ingestion of power (`timestamp,power`) and daily (`date,energy`) files,
// plus ISO-8601 helpers shared by the writers.

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "soiling/error.hpp"
#include "soiling/signal_prep.hpp"

namespace soiling::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

inline bool parse_int(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace detail

/// Parses `YYYY-MM-DD`.
inline std::optional<LocalDays> parse_date(std::string_view s) {
    using namespace std::chrono;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), m) ||
        !detail::parse_int(s.substr(8, 2), d))
        return std::nullopt;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return local_days{ymd};
}

/// Parses `YYYY-MM-DD[T ]HH:MM[:SS[.fff]][Z|+HH:MM|-HH:MM]` as local wall-clock
/// time. Offsets are accepted and ignored: days are the timestamp's own calendar
/// days.
inline std::optional<LocalSeconds> parse_timestamp(std::string_view s) {
    using namespace std::chrono;
    auto date = parse_date(s);
    if (!date) return std::nullopt;
    if (s.size() == 10) return LocalSeconds{*date};
    if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') return std::nullopt;
    int hh = 0, mm = 0, ss = 0;
    if (!detail::parse_int(s.substr(11, 2), hh) || !detail::parse_int(s.substr(14, 2), mm))
        return std::nullopt;
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (s.size() < pos + 3 || !detail::parse_int(s.substr(pos + 1, 2), ss)) return std::nullopt;
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        }
    }
    if (pos < s.size()) {
        const auto rest = s.substr(pos);
        const bool zulu = rest == "Z";
        const bool offset = (rest.front() == '+' || rest.front() == '-') && (rest.size() == 6 || rest.size() == 5 || rest.size() == 3);
        if (!zulu && !offset) return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    return LocalSeconds{*date} + hours{hh} + minutes{mm} + seconds{ss};
}

/// Blank and NaN cells are missing.
inline double parse_value(std::string_view s, std::size_t line_no) {
    if (s.empty()) return kMissing;
    const auto l = detail::lower(s);
    if (l == "nan" || l == "na" || l == "null") return kMissing;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw InputError(fmt::format("line {}: cannot parse number '{}'", line_no, s));
    return v;
}

enum class InputKind { Power, Daily };

struct LoadedInput {
    InputKind kind = InputKind::Daily;
    std::optional<PowerSeries> power;  // set for power files
    DailySignal daily;                 // integrated (power) or as read (daily)
};

/// Reads a daily `date,energy` table. Gaps in the date sequence become
/// missing days.
inline DailySignal read_daily_rows(const std::vector<std::pair<LocalDays, double>>& rows) {
    if (rows.empty()) throw InputError("no data");
    const auto first = rows.front().first;
    const auto last = rows.back().first;
    if (last < first) throw InputError("dates not increasing");
    std::vector<double> values(static_cast<std::size_t>((last - first).count() + 1), kMissing);
    std::vector<bool> seen(values.size(), false);
    for (const auto& [d, v] : rows) {
        if (d < first || d > last) throw InputError("dates not increasing");
        const auto t = static_cast<std::size_t>((d - first).count());
        if (seen[t]) throw InputError("duplicate date");
        seen[t] = true;
        values[t] = v;
    }
    auto signal = DailySignal::from_values(first, std::move(values), false);
    validate_measurements(signal);
    return signal;
}

/// Loads a power or daily CSV, dispatching on the header's first column
/// (`timestamp` or `date`).
inline LoadedInput load_csv(const std::filesystem::path& path, IntegrationOptions opts = {}) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    std::string line;
    if (!std::getline(in, line)) throw InputError("no data");
    const auto header = detail::split(line);
    if (header.size() < 2) throw InputError("header must have two columns");
    const auto first_col = detail::lower(header[0]);
    LoadedInput out;
    if (first_col == "timestamp") {
        out.kind = InputKind::Power;
    } else if (first_col == "date") {
        out.kind = InputKind::Daily;
    } else {
        throw InputError(fmt::format("unrecognized header '{}'", line));
    }

    std::vector<LocalSeconds> stamps;
    std::vector<double> values;
    std::vector<std::pair<LocalDays, double>> daily_rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() < 2) throw InputError(fmt::format("line {}: expected two columns", line_no));
        const double v = parse_value(cells[1], line_no);
        if (out.kind == InputKind::Power) {
            auto ts = parse_timestamp(cells[0]);
            if (!ts) throw InputError(fmt::format("line {}: bad timestamp '{}'", line_no, cells[0]));
            stamps.push_back(*ts);
            values.push_back(v);
        } else {
            auto d = parse_date(cells[0]);
            if (!d || cells[0].size() != 10)
                throw InputError(fmt::format("line {}: bad date '{}'", line_no, cells[0]));
            daily_rows.emplace_back(*d, v);
        }
    }

    if (out.kind == InputKind::Power) {
        out.power = make_power_series(std::move(stamps), std::move(values));
        out.daily = integrate_daily(*out.power, opts);
    } else {
        out.daily = read_daily_rows(daily_rows);
    }
    return out;
}

/// Reads per-day quality flags (`date,good`, good in {1,0,true,false}) aligned
/// to `signal`. Days absent from the file count as good; dates outside the
/// signal are ignored.
inline std::vector<bool> load_quality_flags(const std::filesystem::path& path, const DailySignal& signal) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    std::string line;
    if (!std::getline(in, line)) throw InputError("quality flags: no data");
    std::vector<bool> good(signal.size(), true);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() < 2) throw InputError(fmt::format("line {}: expected two columns", line_no));
        auto d = parse_date(cells[0]);
        if (!d) throw InputError(fmt::format("line {}: bad date '{}'", line_no, cells[0]));
        const auto flag = detail::lower(cells[1]);
        bool ok = true;
        if (flag == "1" || flag == "true") ok = true;
        else if (flag == "0" || flag == "false") ok = false;
        else throw InputError(fmt::format("line {}: bad flag '{}'", line_no, cells[1]));
        const auto t = (*d - signal.first_day).count();
        if (t >= 0 && static_cast<std::size_t>(t) < signal.size()) good[static_cast<std::size_t>(t)] = ok;
    }
    return good;
}

inline std::string format_date(LocalDays d) {
    const std::chrono::year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

inline std::string format_timestamp(LocalSeconds ts) {
    using namespace std::chrono;
    const auto d = floor<days>(ts);
    const hh_mm_ss hms{ts - d};
    return fmt::format("{}T{:02d}:{:02d}:{:02d}", format_date(d), hms.hours().count(),
                       hms.minutes().count(), hms.seconds().count());
}

/// Round-trippable, platform-independent number formatting; NaN prints as
/// `NaN` and negative zero as `0`.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "NaN";
    if (v == 0.0) return "0";
    return fmt::format("{:.17g}", v);
}

}  // namespace soiling::io
