#pragma once

// Validation metrics against known soiling, soiling correction of measured
// data and summary statistics of an estimated soiling component.
//
// Soiling x4 <= 0 is a fractional loss; the multiplicative performance factor
// is (1 + x4).

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "soiling/error.hpp"
#include "soiling/signal_prep.hpp"

namespace soiling {

inline constexpr double kNegativeRateThreshold = 1e-6;
inline constexpr double kMinimumSoilingFactor = 0.05;

inline void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw InputError(fmt::format("length mismatch: {} vs {}", a.size(), b.size()));
}

inline double loss_mae(std::span<const double> truth, std::span<const double> estimate) {
    require_same_length(truth, estimate);
    if (truth.empty()) throw InputError("empty sequences");
    double acc = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) acc += std::abs(truth[t] - estimate[t]);
    return acc / static_cast<double>(truth.size());
}

/// First differences x[t+1] - x[t].
inline std::vector<double> soiling_rate(std::span<const double> x) {
    if (x.size() < 2) throw InputError("soiling rate needs at least two samples");
    std::vector<double> out(x.size() - 1);
    for (std::size_t t = 0; t + 1 < x.size(); ++t) out[t] = x[t + 1] - x[t];
    return out;
}

inline double rate_mae(std::span<const double> truth, std::span<const double> estimate) {
    require_same_length(truth, estimate);
    const auto a = soiling_rate(truth);
    const auto b = soiling_rate(estimate);
    return loss_mae(a, b);
}

struct FilteredRateMae {
    double value = 0.0;
    /// Length T-1; true where both rates are below -threshold.
    std::vector<bool> mask;
    bool empty = true;
};

inline FilteredRateMae filtered_rate_mae(std::span<const double> truth, std::span<const double> estimate,
                                         double threshold = kNegativeRateThreshold) {
    require_same_length(truth, estimate);
    const auto a = soiling_rate(truth);
    const auto b = soiling_rate(estimate);
    FilteredRateMae out;
    out.mask.assign(a.size(), false);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (a[t] < -threshold && b[t] < -threshold) {
            out.mask[t] = true;
            acc += std::abs(a[t] - b[t]);
            ++count;
        }
    }
    out.empty = count == 0;
    out.value = count == 0 ? 0.0 : acc / static_cast<double>(count);
    return out;
}

inline void check_soiling_factors(std::span<const double> soiling) {
    for (std::size_t t = 0; t < soiling.size(); ++t)
        if (!(1.0 + soiling[t] > kMinimumSoilingFactor))
            throw Error(fmt::format("implausible soiling factor at day {}: 1 + x4 = {}", t, 1.0 + soiling[t]));
}

/// y_t / (1 + x4_t) per day; missing days pass through.
inline DailySignal correct_soiling(DailySignal signal, std::span<const double> soiling) {
    if (soiling.size() != signal.size()) throw InputError("soiling and signal lengths differ");
    check_soiling_factors(soiling);
    for (std::size_t t = 0; t < signal.size(); ++t)
        if (signal.is_known(t)) signal.values[t] /= 1.0 + soiling[t];
    return signal;
}

/// Each sample divided by its day's factor. `first_day` is the day that
/// soiling[0] refers to; samples outside the covered days pass through.
inline PowerSeries correct_soiling(PowerSeries series, std::span<const double> soiling, LocalDays first_day) {
    check_soiling_factors(soiling);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto d = (std::chrono::floor<std::chrono::days>(series.timestamps[i]) - first_day).count();
        if (d < 0 || static_cast<std::size_t>(d) >= soiling.size()) continue;
        if (std::isfinite(series.values[i])) series.values[i] /= 1.0 + soiling[static_cast<std::size_t>(d)];
    }
    return series;
}

struct SoilingSummary {
    double total_energy_loss_fraction = 0.0;
    /// Mean of -x4 over days of each calendar month (index 0 = January);
    /// empty where no day falls in the month.
    std::array<std::optional<double>, 12> monthly_mean_loss{};
    /// Mean first difference over days where it is negative; 0 if none.
    double mean_soiling_rate = 0.0;
};

/// Loss statistics over the known days of `signal`.
inline SoilingSummary summarize(const DailySignal& signal, std::span<const double> soiling) {
    if (soiling.size() != signal.size()) throw InputError("soiling and signal lengths differ");
    SoilingSummary s;
    double measured = 0.0, clean = 0.0;
    for (std::size_t t = 0; t < signal.size(); ++t) {
        if (!signal.is_known(t)) continue;
        measured += signal.values[t];
        clean += signal.values[t] / (1.0 + soiling[t]);
    }
    s.total_energy_loss_fraction = clean > 0.0 ? 1.0 - measured / clean : 0.0;

    std::array<double, 12> sum{};
    std::array<std::size_t, 12> count{};
    for (std::size_t t = 0; t < signal.size(); ++t) {
        const std::chrono::year_month_day ymd{signal.day(t)};
        const auto m = static_cast<unsigned>(ymd.month()) - 1;
        sum[m] -= soiling[t];
        ++count[m];
    }
    for (std::size_t m = 0; m < 12; ++m)
        if (count[m] > 0) s.monthly_mean_loss[m] = sum[m] / static_cast<double>(count[m]);

    if (soiling.size() >= 2) {
        double acc = 0.0;
        std::size_t n = 0;
        for (double v : soiling_rate(soiling)) {
            if (v < -kNegativeRateThreshold) {
                acc += v;
                ++n;
            }
        }
        if (n > 0) s.mean_soiling_rate = acc / static_cast<double>(n);
    }
    return s;
}

struct SoilingReport {
    std::optional<double> loss_mae;
    std::optional<double> rate_mae;
    std::optional<double> filtered_rate_mae;
    double total_energy_loss_fraction = 0.0;
    std::vector<bool> insoiling_mask;
    SoilingSummary summary;
};

/// Report without ground truth; the MAE fields stay empty.
inline SoilingReport make_report(const DailySignal& signal, std::span<const double> soiling) {
    SoilingReport r;
    r.summary = summarize(signal, soiling);
    r.total_energy_loss_fraction = r.summary.total_energy_loss_fraction;
    return r;
}

/// Report against known soiling.
inline SoilingReport make_report(const DailySignal& signal, std::span<const double> soiling,
                                 std::span<const double> true_soiling) {
    SoilingReport r = make_report(signal, soiling);
    r.loss_mae = loss_mae(true_soiling, soiling);
    r.rate_mae = rate_mae(true_soiling, soiling);
    auto f = filtered_rate_mae(true_soiling, soiling);
    r.filtered_rate_mae = f.value;
    r.insoiling_mask = std::move(f.mask);
    return r;
}

inline void to_json(nlohmann::json& j, const SoilingReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json monthly = nlohmann::json::array();
    for (const auto& m : r.summary.monthly_mean_loss) monthly.push_back(opt(m));
    j = nlohmann::json{{"loss_mae", opt(r.loss_mae)},
                       {"rate_mae", opt(r.rate_mae)},
                       {"filtered_rate_mae", opt(r.filtered_rate_mae)},
                       {"total_energy_loss_fraction", r.total_energy_loss_fraction},
                       {"insoiling_mask", r.insoiling_mask},
                       {"monthly_mean_loss", std::move(monthly)},
                       {"mean_soiling_rate", r.summary.mean_soiling_rate}};
}

}  // namespace soiling
