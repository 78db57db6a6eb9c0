#pragma once

// Component cost functions and parameters of the four-component soiling
// decomposition  y = x1 + x2 + x3 + x4  on the known set:
//   x1  residual          quantile cost with parameter tau1
//   x2  seasonal          lambda2 * ||D2 x||^2, periodic with period Y
//   x3  degradation       linear through zero at the first sample
//   x4  soiling           lambda4a ||D2 x||_1 + lambda4b sum(-x)
//                         + lambda4c quant_tau4(D1 x),  x <= 0

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <fmt/format.h>
#include <json.hpp>

#include "soiling/error.hpp"
#include "soiling/signal_prep.hpp"

namespace soiling {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct SDConfig {
    double tau1 = 0.85;
    double lambda2 = 5e2;
    double lambda4a = 2.0;
    double lambda4b = 3e-2;
    double lambda4c = 2e-1;
    double tau4 = 0.9;
    int period = 365;

    /// Defaults for raw energy (tau1 = 0.85) or a performance index (tau1 = 0.5).
    static SDConfig defaults(bool labeled = false) {
        SDConfig c;
        c.tau1 = labeled ? 0.5 : 0.85;
        return c;
    }

    void validate() const {
        auto in_unit = [](double t) { return t > 0.0 && t < 1.0; };
        if (!in_unit(tau1)) throw InputError(fmt::format("tau1 must lie in (0,1), got {}", tau1));
        if (!in_unit(tau4)) throw InputError(fmt::format("tau4 must lie in (0,1), got {}", tau4));
        for (double l : {lambda2, lambda4a, lambda4b, lambda4c}) {
            if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("lambda parameters must be finite and >= 0");
        }
        if (period < 2) throw InputError("period must be >= 2");
    }

    bool operator==(const SDConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const SDConfig& c) {
    j = nlohmann::json{{"tau1", c.tau1},         {"lambda2", c.lambda2}, {"lambda4a", c.lambda4a},
                       {"lambda4b", c.lambda4b}, {"lambda4c", c.lambda4c}, {"tau4", c.tau4},
                       {"period", c.period}};
}

/// Overlays the keys present in `j` on `base`. Unknown keys are rejected.
inline SDConfig config_from_json(const nlohmann::json& j, SDConfig base = {}) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "tau1") base.tau1 = value.get<double>();
            else if (key == "lambda2") base.lambda2 = value.get<double>();
            else if (key == "lambda4a") base.lambda4a = value.get<double>();
            else if (key == "lambda4b") base.lambda4b = value.get<double>();
            else if (key == "lambda4c") base.lambda4c = value.get<double>();
            else if (key == "tau4") base.tau4 = value.get<double>();
            else if (key == "period") base.period = value.get<int>();
            else throw InputError(fmt::format("unknown config key '{}'", key));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(fmt::format("config key '{}': {}", key, e.what()));
        }
    }
    base.validate();
    return base;
}

inline SDConfig load_config(const std::filesystem::path& path, SDConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open config '{}'", path.string()));
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(fmt::format("config '{}': {}", path.string(), e.what()));
    }
    return config_from_json(j, base);
}

/// Banded forward difference operator of order 1 or 2 on R^dim.
///   order 1, row t:  x[t+1] - x[t]
///   order 2, row t:  x[t] - 2 x[t+1] + x[t+2]
class DifferenceOperator {
public:
    DifferenceOperator(int order, std::size_t dim) : order_(order), dim_(dim) {
        if (order != 1 && order != 2) throw Error("difference order must be 1 or 2");
    }

    int order() const { return order_; }
    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return dim_ > static_cast<std::size_t>(order_) ? dim_ - order_ : 0; }

    /// Row stencil, left to right.
    std::span<const double> stencil() const {
        static constexpr std::array<double, 2> d1{-1.0, 1.0};
        static constexpr std::array<double, 3> d2{1.0, -2.0, 1.0};
        return order_ == 1 ? std::span<const double>(d1) : std::span<const double>(d2);
    }

    std::vector<double> apply(std::span<const double> x) const {
        if (x.size() != dim_) throw Error("difference operator dimension mismatch");
        std::vector<double> out(rows());
        const auto st = stencil();
        for (std::size_t r = 0; r < out.size(); ++r) {
            double acc = 0.0;
            for (std::size_t k = 0; k < st.size(); ++k) acc += st[k] * x[r + k];
            out[r] = acc;
        }
        return out;
    }

    Eigen::SparseMatrix<double> matrix() const {
        std::vector<Eigen::Triplet<double>> trips;
        const auto st = stencil();
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t k = 0; k < st.size(); ++k)
                trips.emplace_back(static_cast<int>(r), static_cast<int>(r + k), st[k]);
        Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(dim_));
        m.setFromTriplets(trips.begin(), trips.end());
        return m;
    }

private:
    int order_;
    std::size_t dim_;
};

/// quant_tau(x) = sum_t (1/2)|x_t| + (tau - 1/2) x_t.
inline double quantile_cost(std::span<const double> x, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw Error(fmt::format("quantile parameter must lie in (0,1), got {}", tau));
    double acc = 0.0;
    for (double v : x) acc += 0.5 * std::abs(v) + (tau - 0.5) * v;
    return acc;
}

/// lambda2 ||D2 x||^2 if x is Y-periodic, +inf otherwise.
inline double seasonal_cost(std::span<const double> x, const SDConfig& config) {
    const auto Y = static_cast<std::size_t>(config.period);
    for (std::size_t t = 0; t + Y < x.size(); ++t)
        if (x[t] != x[t + Y]) return kInfinity;
    if (x.size() < 3) return 0.0;
    double acc = 0.0;
    for (double d : DifferenceOperator(2, x.size()).apply(x)) acc += d * d;
    return config.lambda2 * acc;
}

/// True iff x is affine in t and starts at zero, i.e. x_t = m t.
inline bool degradation_feasible(std::span<const double> x, double tol = 1e-9) {
    if (x.empty()) return true;
    if (x[0] != 0.0) return false;
    if (x.size() < 3) return true;
    const double slope = x[1] - x[0];
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double expected = slope * static_cast<double>(t);
        if (std::abs(x[t] - expected) > tol * std::max(1.0, std::abs(expected))) return false;
    }
    return true;
}

/// Soiling component cost; +inf for any positive entry.
inline double soiling_cost(std::span<const double> x, const SDConfig& config) {
    for (double v : x)
        if (v > 0.0) return kInfinity;
    double curvature = 0.0;
    if (x.size() >= 3)
        for (double d : DifferenceOperator(2, x.size()).apply(x)) curvature += std::abs(d);
    double magnitude = 0.0;
    for (double v : x) magnitude -= v;
    double asymmetry = 0.0;
    if (x.size() >= 2) asymmetry = quantile_cost(DifferenceOperator(1, x.size()).apply(x), config.tau4);
    return config.lambda4a * curvature + config.lambda4b * magnitude + config.lambda4c * asymmetry;
}

enum class ComponentKind { Residual, Seasonal, Degradation, Soiling };

inline constexpr std::array<ComponentKind, 4> kComponentRoster{
    ComponentKind::Residual, ComponentKind::Seasonal, ComponentKind::Degradation, ComponentKind::Soiling};

inline constexpr std::size_t kMinimumDays = 30;

struct SDProblem {
    DailySignal signal;
    SDConfig config;
    std::array<ComponentKind, 4> roster = kComponentRoster;

    std::size_t days() const { return signal.size(); }
    /// Periodicity binds only when the signal spans more than one period.
    bool periodic_constraint_active() const { return signal.size() > static_cast<std::size_t>(config.period); }
    /// Fewer than two full periods leaves the seasonal shape weakly identified.
    bool short_for_seasonality() const { return signal.size() < 2 * static_cast<std::size_t>(config.period); }
};

inline SDProblem assemble(DailySignal signal, const SDConfig& config) {
    config.validate();
    if (signal.size() < kMinimumDays) throw InputError("signal too short");
    if (signal.known.size() != signal.size()) throw InputError("known mask length mismatch");
    if (signal.known_count() == 0) throw InputError("empty known set");
    if (!signal.prepared()) throw InputError("signal not scaled");
    for (std::size_t t = 0; t < signal.size(); ++t)
        if (signal.is_known(t) && !std::isfinite(signal.values[t]))
            throw InputError("non-finite value at known day");
    return SDProblem{std::move(signal), config, kComponentRoster};
}

}  // namespace soiling
