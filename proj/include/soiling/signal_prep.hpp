#pragma once

// Daily signal preparation: integration of power measurements into daily
// energy, quality masking and 95th-percentile scaling.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "soiling/error.hpp"

namespace soiling {

using LocalSeconds = std::chrono::local_seconds;
using LocalDays = std::chrono::local_days;

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Uniformly sampled power measurements. Timestamps are local wall-clock
/// time; NaN values mark missing samples.
struct PowerSeries {
    std::vector<LocalSeconds> timestamps;
    std::vector<double> values;
    int interval_minutes = 0;

    std::size_t size() const { return values.size(); }
};

/// Builds a PowerSeries, inferring and validating the sampling interval.
inline PowerSeries make_power_series(std::vector<LocalSeconds> timestamps,
                                     std::vector<double> values) {
    if (timestamps.empty()) throw InputError("no data");
    if (timestamps.size() != values.size())
        throw InputError("timestamp/value length mismatch");
    if (timestamps.size() < 2) throw InputError("irregular sampling: single sample");

    const auto step = timestamps[1] - timestamps[0];
    if (step.count() <= 0 || step.count() % 60 != 0)
        throw InputError("irregular sampling");
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (timestamps[i] - timestamps[i - 1] != step) throw InputError("irregular sampling");
    }
    const auto minutes = static_cast<int>(step.count() / 60);
    if (1440 % minutes != 0)
        throw InputError("irregular sampling: interval does not divide a day");

    return PowerSeries{std::move(timestamps), std::move(values), minutes};
}

/// Daily series y with missing-day markers. `known[t] == 0` marks a missing
/// day; the stored value at a missing day is never used downstream.
struct DailySignal {
    LocalDays first_day{};
    std::vector<double> values;
    std::vector<std::uint8_t> known;
    double scale = 1.0;          // cumulative divisor applied by scale_p95
    bool scaled = false;         // scale_p95 has been applied
    bool is_normalized = false;  // performance index ("labeled") rather than raw energy

    std::size_t size() const { return values.size(); }
    bool is_known(std::size_t t) const { return known[t] != 0; }

    std::vector<std::size_t> known_set() const {
        std::vector<std::size_t> out;
        for (std::size_t t = 0; t < known.size(); ++t)
            if (known[t]) out.push_back(t);
        return out;
    }

    std::size_t known_count() const {
        return static_cast<std::size_t>(std::count(known.begin(), known.end(), std::uint8_t{1}));
    }

    /// Ready to enter the decomposition: scaled, or already a normalized index.
    bool prepared() const { return scaled || is_normalized; }

    LocalDays day(std::size_t t) const { return first_day + std::chrono::days{static_cast<int>(t)}; }

    /// Non-finite entries become missing.
    static DailySignal from_values(LocalDays first_day, std::vector<double> values,
                                   bool is_normalized = false) {
        DailySignal s;
        s.first_day = first_day;
        s.known.resize(values.size());
        for (std::size_t t = 0; t < values.size(); ++t) s.known[t] = std::isfinite(values[t]) ? 1 : 0;
        s.values = std::move(values);
        s.is_normalized = is_normalized;
        return s;
    }
};

struct IntegrationOptions {
    /// Minimum fraction of a day's expected samples that must be present.
    double completeness = 0.95;
};

/// Rectangular-sum integration of power into daily energy (power unit x hours).
/// Negative power samples (night-time inverter draw) count as zero.
inline DailySignal integrate_daily(const PowerSeries& series, IntegrationOptions opts = {}) {
    using namespace std::chrono;
    if (series.size() == 0) throw InputError("no data");
    if (series.timestamps.size() != series.values.size())
        throw InputError("timestamp/value length mismatch");
    if (series.interval_minutes <= 0 || 1440 % series.interval_minutes != 0)
        throw InputError("irregular sampling");
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series.timestamps[i] - series.timestamps[i - 1] != minutes{series.interval_minutes})
            throw InputError("irregular sampling");
    }

    const auto first = floor<days>(series.timestamps.front());
    const auto last = floor<days>(series.timestamps.back());
    const auto n_days = static_cast<std::size_t>((last - first).count() + 1);
    const int expected = 1440 / series.interval_minutes;
    const double hours = series.interval_minutes / 60.0;
    const double required = std::ceil(opts.completeness * expected - 1e-9);

    std::vector<int> slots(n_days, 0);
    std::vector<int> present(n_days, 0);
    std::vector<double> energy(n_days, 0.0);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto d = static_cast<std::size_t>((floor<days>(series.timestamps[i]) - first).count());
        ++slots[d];
        const double v = series.values[i];
        if (!std::isfinite(v)) continue;
        ++present[d];
        energy[d] += std::max(v, 0.0) * hours;
    }
    if (std::none_of(slots.begin(), slots.end(), [&](int c) { return c == expected; }))
        throw InputError("no complete day");

    std::vector<double> values(n_days, kMissing);
    for (std::size_t d = 0; d < n_days; ++d) {
        if (present[d] >= required) values[d] = energy[d];
    }
    return DailySignal::from_values(first, std::move(values), false);
}

/// Marks days with a false flag as missing.
inline DailySignal apply_quality_mask(DailySignal signal, const std::vector<bool>& good) {
    if (good.size() != signal.size()) throw InputError("quality flag length mismatch");
    for (std::size_t t = 0; t < good.size(); ++t)
        if (!good[t]) signal.known[t] = 0;
    if (signal.known_count() == 0) throw InputError("empty known set");
    return signal;
}

/// Percentile with linear interpolation between sorted order statistics
/// (h = (n-1) q).
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw InputError("percentile of empty set");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Divides known values by their 95th percentile.
inline DailySignal scale_p95(DailySignal signal) {
    std::vector<double> known_values;
    for (std::size_t t = 0; t < signal.size(); ++t)
        if (signal.is_known(t)) known_values.push_back(signal.values[t]);
    if (known_values.empty()) throw InputError("empty known set");
    const double p95 = percentile(std::move(known_values), 0.95);
    if (!(p95 > 0.0) || !std::isfinite(p95)) throw InputError("degenerate signal");
    for (std::size_t t = 0; t < signal.size(); ++t)
        if (signal.is_known(t)) signal.values[t] /= p95;
    signal.scale *= p95;
    signal.scaled = true;
    return signal;
}

/// Throws unless every known value is finite and nonnegative.
inline void validate_measurements(const DailySignal& signal) {
    for (std::size_t t = 0; t < signal.size(); ++t) {
        if (!signal.is_known(t)) continue;
        const double v = signal.values[t];
        if (!std::isfinite(v)) throw InputError("non-finite value at known day");
        if (v < 0.0) throw InputError("negative energy value");
    }
}

}  // namespace soiling
