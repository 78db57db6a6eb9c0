#pragma once

// Synthetic performance-index realizations with known components:
//
//     pi_t = 1 + seasonal_t + degradation_t + soiling_t + noise_t
//
// Soiling is a sawtooth: zero on a cleaning day, then decreasing linearly at
// a rate drawn per interval until the next cleaning.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "soiling/error.hpp"
#include "soiling/signal_prep.hpp"

namespace soiling {

/// Counter-based generator: the k-th draw of stream s under seed is a pure
/// function of (seed, s, k), so draws never depend on platform or call order
/// across streams.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() { return mix(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal by Box-Muller; one variate per pair of uniforms.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

enum class CleaningMode { Stochastic, Seasonal };

struct ScenarioConfig {
    int id = 1;
    /// Soiling rate range in fraction per day, magnitudes.
    double rate_lo = 0.0;
    double rate_hi = 0.003;
    double seasonal_multiplier = 1.0;
    double noise_multiplier = 1.0;
    CleaningMode cleaning = CleaningMode::Stochastic;

    double seasonal_amplitude = 0.02;
    double noise_sigma = 0.005;
    /// Annual degradation drawn uniform in [degradation_lo, degradation_hi].
    double degradation_lo = -0.01;
    double degradation_hi = 0.0;
    /// Stochastic cleaning: gap = min_gap + Exp(mean_gap - min_gap) days.
    double mean_gap_days = 30.0;
    double min_gap_days = 7.0;
    double rain_probability = 0.005;
    /// Seasonal cleaning: day index modulo 365 on which cleaning happens.
    int seasonal_cleaning_day = 180;
    LocalDays start = LocalDays{std::chrono::year{2015} / 1 / 1};

    /// The six standard scenarios.
    static ScenarioConfig standard(int id) {
        ScenarioConfig c;
        c.id = id;
        switch (id) {
            case 1: c.rate_hi = 0.003; break;
            case 2: c.rate_hi = 0.001; c.seasonal_multiplier = 2.0; break;
            case 3: c.rate_hi = 0.001; c.noise_multiplier = 2.0; break;
            case 4: c.rate_hi = 0.005; c.cleaning = CleaningMode::Seasonal; break;
            case 5: c.rate_hi = 0.005; break;
            case 6: c.rate_hi = 0.001; break;
            default: throw InputError(fmt::format("scenario id must be 1..6, got {}", id));
        }
        return c;
    }

    void validate() const {
        if (!(rate_lo >= 0.0 && rate_hi >= rate_lo)) throw InputError("soiling rate range must satisfy 0 <= lo <= hi");
        if (!(seasonal_multiplier >= 0.0) || !(noise_multiplier >= 0.0)) throw InputError("multipliers must be >= 0");
        if (!(mean_gap_days > min_gap_days) || !(min_gap_days >= 1.0)) throw InputError("need mean_gap > min_gap >= 1");
        if (!(rain_probability >= 0.0 && rain_probability <= 1.0)) throw InputError("rain probability must be in [0,1]");
        if (seasonal_cleaning_day < 0 || seasonal_cleaning_day >= 365) throw InputError("cleaning day must be in [0,365)");
        if (!(degradation_hi >= degradation_lo)) throw InputError("degradation range reversed");
    }
};

struct SyntheticRealization {
    DailySignal pi;
    std::vector<double> true_soiling;
    std::vector<double> true_seasonal;
    std::vector<double> true_degradation;
    std::vector<double> true_noise;
    std::vector<std::size_t> cleaning_days;
    double degradation_per_year = 0.0;
    double seasonal_phase = 0.0;
    std::uint64_t seed = 0;
    int scenario = 0;
};

inline constexpr std::size_t kMinimumSyntheticDays = 365;

namespace detail {
enum Stream : std::uint64_t { kSeasonal = 1, kDegradation = 2, kCleaning = 3, kRain = 4, kRate = 5, kNoise = 6 };
}

inline SyntheticRealization generate(const ScenarioConfig& scenario, std::uint64_t seed, std::size_t days) {
    scenario.validate();
    if (days < kMinimumSyntheticDays)
        throw InputError(fmt::format("synthetic signals need at least {} days, got {}", kMinimumSyntheticDays, days));

    SyntheticRealization r;
    r.seed = seed;
    r.scenario = scenario.id;
    r.true_soiling.assign(days, 0.0);
    r.true_seasonal.assign(days, 0.0);
    r.true_degradation.assign(days, 0.0);
    r.true_noise.assign(days, 0.0);

    CounterRng season_rng(seed, detail::kSeasonal);
    r.seasonal_phase = season_rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amplitude = scenario.seasonal_amplitude * scenario.seasonal_multiplier;
    for (std::size_t t = 0; t < days; ++t) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(t % 365) / 365.0;
        r.true_seasonal[t] = amplitude * std::sin(angle + r.seasonal_phase);
    }

    CounterRng degradation_rng(seed, detail::kDegradation);
    r.degradation_per_year = degradation_rng.uniform(scenario.degradation_lo, scenario.degradation_hi);
    for (std::size_t t = 0; t < days; ++t)
        r.true_degradation[t] = r.degradation_per_year * static_cast<double>(t) / 365.0;

    std::vector<bool> cleaned(days, false);
    if (scenario.cleaning == CleaningMode::Seasonal) {
        for (std::size_t t = 0; t < days; ++t)
            if (t % 365 == static_cast<std::size_t>(scenario.seasonal_cleaning_day)) cleaned[t] = true;
    } else {
        CounterRng gap_rng(seed, detail::kCleaning);
        double next = scenario.min_gap_days + gap_rng.exponential(scenario.mean_gap_days - scenario.min_gap_days);
        while (next < static_cast<double>(days)) {
            cleaned[static_cast<std::size_t>(next)] = true;
            next += std::floor(scenario.min_gap_days + gap_rng.exponential(scenario.mean_gap_days - scenario.min_gap_days));
        }
        CounterRng rain_rng(seed, detail::kRain);
        for (std::size_t t = 0; t < days; ++t)
            if (rain_rng.uniform() < scenario.rain_probability) cleaned[t] = true;
    }
    cleaned[0] = false;

    CounterRng rate_rng(seed, detail::kRate);
    double rate = rate_rng.uniform(scenario.rate_lo, scenario.rate_hi);
    std::size_t last_clean = 0;
    for (std::size_t t = 0; t < days; ++t) {
        if (cleaned[t]) {
            r.cleaning_days.push_back(t);
            last_clean = t;
            rate = rate_rng.uniform(scenario.rate_lo, scenario.rate_hi);
        }
        r.true_soiling[t] = -rate * static_cast<double>(t - last_clean);
    }

    CounterRng noise_rng(seed, detail::kNoise);
    const double sigma = scenario.noise_sigma * scenario.noise_multiplier;
    for (std::size_t t = 0; t < days; ++t) r.true_noise[t] = sigma * noise_rng.normal();

    std::vector<double> pi(days);
    for (std::size_t t = 0; t < days; ++t)
        pi[t] = 1.0 + r.true_seasonal[t] + r.true_degradation[t] + r.true_soiling[t] + r.true_noise[t];
    r.pi = DailySignal::from_values(scenario.start, std::move(pi), /*is_normalized=*/true);
    return r;
}

/// Seed of realization k of a scenario, derived from the suite seed.
inline std::uint64_t derive_seed(std::uint64_t base_seed, int scenario, std::size_t k) {
    return CounterRng::mix(base_seed ^ CounterRng::mix((static_cast<std::uint64_t>(scenario) << 32) ^ k));
}

/// All six scenarios, `per_scenario` realizations each, ordered by scenario
/// then realization index.
inline std::vector<SyntheticRealization> scenario_suite(std::size_t per_scenario, std::uint64_t base_seed,
                                                        std::size_t days) {
    if (per_scenario < 1) throw InputError("realizations per scenario must be >= 1");
    std::vector<SyntheticRealization> out;
    out.reserve(6 * per_scenario);
    for (int id = 1; id <= 6; ++id)
        for (std::size_t k = 0; k < per_scenario; ++k)
            out.push_back(generate(ScenarioConfig::standard(id), derive_seed(base_seed, id, k), days));
    return out;
}

}  // namespace soiling
