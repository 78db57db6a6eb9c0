#pragma once

// Command implementations behind the `soiling` executable: single-site
// analysis, fleet analysis, the synthetic validation study and synthetic
// signal export. Every data file is written with round-trippable number
// formatting so identical inputs give byte-identical outputs.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "soiling/csv_io.hpp"
#include "soiling/decomposition.hpp"
#include "soiling/error.hpp"
#include "soiling/metrics.hpp"
#include "soiling/sd_model.hpp"
#include "soiling/signal_prep.hpp"
#include "soiling/synthetic.hpp"

namespace soiling::app {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kConfigEnv = "SOILING_CONFIG";

enum ExitCode : int { kOk = 0, kFailure = 1, kInputFailure = 2, kNotOptimal = 3 };

/// Defaults for the data kind, then the config file, then an explicit tau1.
inline SDConfig resolve_config(const std::optional<fs::path>& config_path, bool labeled,
                               std::optional<double> tau) {
    SDConfig c = SDConfig::defaults(labeled);
    if (config_path) c = load_config(*config_path, c);
    if (tau) {
        c.tau1 = *tau;
        c.validate();
    }
    return c;
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads. Results must be written
/// to per-index slots; scheduling order never affects them.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
    const auto workers = static_cast<std::size_t>(std::clamp<long long>(jobs, 1, static_cast<long long>(std::max<std::size_t>(n, 1))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    for (auto& t : pool) t.join();
}

inline std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

inline json report_summary(const qp::SolveReport& r) {
    return json{{"status", qp::to_string(r.status)},
                {"iterations", r.iterations},
                {"objective", r.objective},
                {"primal_residual", r.primal_residual},
                {"dual_residual", r.dual_residual},
                {"polished", r.polished},
                {"wall_time_s", r.wall_time_s}};
}

inline void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << j.dump(2) << '\n';
}

inline std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    return out;
}

/// Prepared signal: performance indices are used as is, energy is scaled so
/// its 95th percentile is 1.
inline DailySignal prepare_signal(DailySignal daily, bool labeled) {
    if (labeled) {
        daily.is_normalized = true;
        return daily;
    }
    return scale_p95(std::move(daily));
}

inline void write_components(const fs::path& path, const DailySignal& y, const Decomposition& d) {
    auto out = open_output(path);
    out << "date,y,x1,x2,x3,x4\n";
    for (std::size_t t = 0; t < y.size(); ++t) {
        out << io::format_date(y.day(t)) << ',' << io::format_number(y.is_known(t) ? y.values[t] : kMissing) << ','
            << io::format_number(d.x1[t]) << ',' << io::format_number(d.x2[t]) << ',' << io::format_number(d.x3[t])
            << ',' << io::format_number(d.x4[t]) << '\n';
    }
}

inline void write_corrected(const fs::path& path, const io::LoadedInput& input, const std::vector<double>& x4) {
    auto out = open_output(path);
    if (input.kind == io::InputKind::Power) {
        const PowerSeries corrected = correct_soiling(*input.power, x4, input.daily.first_day);
        out << "timestamp,power,corrected\n";
        for (std::size_t i = 0; i < corrected.size(); ++i)
            out << io::format_timestamp(corrected.timestamps[i]) << ',' << io::format_number(input.power->values[i])
                << ',' << io::format_number(corrected.values[i]) << '\n';
    } else {
        const DailySignal corrected = correct_soiling(input.daily, x4);
        out << "date,energy,corrected\n";
        for (std::size_t t = 0; t < corrected.size(); ++t) {
            const bool known = input.daily.is_known(t);
            out << io::format_date(corrected.day(t)) << ',' << io::format_number(known ? input.daily.values[t] : kMissing)
                << ',' << io::format_number(known ? corrected.values[t] : kMissing) << '\n';
        }
    }
}

struct AnalyzeRequest {
    fs::path input;
    fs::path out;
    SDConfig config;
    bool labeled = false;
    std::optional<fs::path> config_path;
    std::optional<fs::path> quality_flags;
    std::optional<fs::path> dump_qp;
    qp::SolverSettings solver;
};

struct SiteOutcome {
    std::string site;
    /// Solver status, or "input-error" / "error" when no solve completed.
    std::string status = "error";
    int exit_code = kFailure;
    double total_loss = kMissing;
    double mean_soiling_rate = kMissing;
    std::string message;
    std::optional<qp::SolveReport> report;
    std::vector<fs::path> outputs;
};

inline SiteOutcome run_analyze(const AnalyzeRequest& req) {
    SiteOutcome o;
    o.site = req.input.stem().string();
    json manifest{{"tool", "soiling"},
                  {"version", kVersion},
                  {"command", "analyze"},
                  {"input", req.input.string()},
                  {"config_path", req.config_path ? json(req.config_path->string()) : json(nullptr)},
                  {"config", req.config},
                  {"labeled", req.labeled},
                  {"seed", nullptr}};
    try {
        fs::create_directories(req.out);
        auto input = io::load_csv(req.input);
        if (req.quality_flags) {
            const auto good = io::load_quality_flags(*req.quality_flags, input.daily);
            input.daily = apply_quality_mask(std::move(input.daily), good);
        }
        const DailySignal y = prepare_signal(input.daily, req.labeled);
        const SDProblem problem = assemble(y, req.config);
        if (req.dump_qp) {
            auto out = open_output(*req.dump_qp);
            qp::write_qp(out, reformulate(problem).qp);
        }
        const Decomposition d = decompose(problem, req.solver);
        o.report = d.report;
        o.status = qp::to_string(d.report.status);
        manifest["solve"] = report_summary(d.report);
        manifest["scale"] = y.scale;
        manifest["variables"] = d.variables;
        manifest["constraints"] = d.constraints;
        manifest["short_for_seasonality"] = d.short_for_seasonality;

        const auto components = req.out / "components.csv";
        write_components(components, y, d);
        o.outputs.push_back(components);

        const SoilingReport report = make_report(y, d.x4);
        o.total_loss = report.total_energy_loss_fraction;
        o.mean_soiling_rate = report.summary.mean_soiling_rate;
        json rj = report;
        rj["solve_status"] = o.status;
        rj["objective"] = d.objective;
        rj["slope_per_day"] = d.slope;
        const auto report_path = req.out / "report.json";
        write_json(report_path, rj);
        o.outputs.push_back(report_path);

        const auto corrected = req.out / "corrected.csv";
        write_corrected(corrected, input, d.x4);
        o.outputs.push_back(corrected);

        o.exit_code = d.report.status == qp::SolveStatus::Optimal ? kOk : kNotOptimal;
    } catch (const InputError& e) {
        o.status = "input-error";
        o.message = e.what();
        o.exit_code = kInputFailure;
    } catch (const std::exception& e) {
        o.message = e.what();
        o.exit_code = kFailure;
    }

    manifest["partial"] = o.exit_code != kOk;
    manifest["message"] = o.message;
    std::vector<std::string> outputs;
    for (const auto& p : o.outputs) outputs.push_back(p.string());
    manifest["outputs"] = outputs;
    manifest["created"] = utc_now();
    try {
        fs::create_directories(req.out);
        write_json(req.out / "manifest.json", manifest);
    } catch (const std::exception& e) {
        if (o.message.empty()) o.message = e.what();
        if (o.exit_code == kOk) o.exit_code = kFailure;
    }
    return o;
}

struct FleetRequest {
    fs::path input_dir;
    fs::path out;
    SDConfig config;
    bool labeled = false;
    std::optional<fs::path> config_path;
    int jobs = 1;
    /// Sites whose total energy loss fraction exceeds this are flagged.
    double outlier_threshold = 0.1;
    qp::SolverSettings solver;
};

struct FleetResult {
    std::vector<SiteOutcome> sites;
    int exit_code = kOk;
    fs::path summary;
};

/// Site files are the `*.csv` entries of the input directory, in name order.
inline std::vector<fs::path> list_sites(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError(fmt::format("'{}' is not a directory", dir.string()));
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw InputError(fmt::format("no site CSV files in '{}'", dir.string()));
    return out;
}

inline FleetResult run_fleet(const FleetRequest& req) {
    const auto files = list_sites(req.input_dir);
    FleetResult r;
    r.sites.resize(files.size());
    fs::create_directories(req.out / "sites");
    parallel_for(files.size(), req.jobs, [&](std::size_t i) {
        AnalyzeRequest a;
        a.input = files[i];
        a.out = req.out / "sites" / files[i].stem();
        a.config = req.config;
        a.labeled = req.labeled;
        a.config_path = req.config_path;
        a.solver = req.solver;
        r.sites[i] = run_analyze(a);
    });

    r.summary = req.out / "fleet_summary.csv";
    {
        auto out = open_output(r.summary);
        out << "site,total_loss,mean_soiling_rate,status,outlier\n";
        for (const auto& s : r.sites) {
            const bool outlier = std::isfinite(s.total_loss) && s.total_loss > req.outlier_threshold;
            out << s.site << ',' << io::format_number(s.total_loss) << ',' << io::format_number(s.mean_soiling_rate)
                << ',' << s.status << ',' << (outlier ? 1 : 0) << '\n';
        }
    }

    json sites = json::array();
    for (const auto& s : r.sites) {
        if (s.exit_code != kOk) r.exit_code = kNotOptimal;
        json j{{"site", s.site}, {"status", s.status}, {"exit_code", s.exit_code}, {"message", s.message}};
        if (s.report) j["solve"] = report_summary(*s.report);
        sites.push_back(std::move(j));
    }
    std::vector<std::string> inputs;
    for (const auto& f : files) inputs.push_back(f.string());
    write_json(req.out / "manifest.json",
               json{{"tool", "soiling"},
                    {"version", kVersion},
                    {"command", "fleet"},
                    {"inputs", inputs},
                    {"config_path", req.config_path ? json(req.config_path->string()) : json(nullptr)},
                    {"config", req.config},
                    {"labeled", req.labeled},
                    {"jobs", req.jobs},
                    {"outlier_threshold", req.outlier_threshold},
                    {"seed", nullptr},
                    {"sites", std::move(sites)},
                    {"outputs", {r.summary.string()}},
                    {"partial", r.exit_code != kOk},
                    {"created", utc_now()}});
    return r;
}

struct ValidateRequest {
    std::size_t per_scenario = 10;
    std::uint64_t seed = 1;
    std::size_t days = 730;
    int jobs = 1;
    fs::path out;
    SDConfig config = SDConfig::defaults(/*labeled=*/true);
    std::optional<fs::path> config_path;
    qp::SolverSettings solver;
};

struct ValidationRow {
    int scenario = 0;
    std::size_t realization = 0;
    std::uint64_t seed = 0;
    double loss_mae = kMissing;
    double rate_mae = kMissing;
    double filtered_rate_mae = kMissing;
    bool filtered_empty = false;
    std::string status = "error";
    int iterations = 0;
    double mean_true_rate = kMissing;
    std::string message;
};

struct ValidateResult {
    std::vector<ValidationRow> rows;
    int exit_code = kOk;
    fs::path metrics;
};

inline ValidationRow validate_realization(int scenario, std::size_t k, std::uint64_t seed, std::size_t days,
                                          const SDConfig& config, const qp::SolverSettings& solver) {
    ValidationRow row;
    row.scenario = scenario;
    row.realization = k;
    row.seed = seed;
    try {
        const SyntheticRealization real = generate(ScenarioConfig::standard(scenario), seed, days);
        const Decomposition d = decompose(real.pi, config, solver);
        row.status = qp::to_string(d.report.status);
        row.iterations = d.report.iterations;
        row.loss_mae = loss_mae(real.true_soiling, d.x4);
        row.rate_mae = rate_mae(real.true_soiling, d.x4);
        const auto f = filtered_rate_mae(real.true_soiling, d.x4);
        row.filtered_rate_mae = f.value;
        row.filtered_empty = f.empty;
        row.mean_true_rate = summarize(real.pi, real.true_soiling).mean_soiling_rate;
    } catch (const std::exception& e) {
        row.message = e.what();
    }
    return row;
}

inline ValidateResult run_validate(const ValidateRequest& req) {
    if (req.per_scenario < 1) throw InputError("realizations per scenario must be >= 1");
    if (req.days < kMinimumSyntheticDays) throw InputError(fmt::format("days must be >= {}", kMinimumSyntheticDays));
    ValidateResult r;
    r.rows.resize(6 * req.per_scenario);
    parallel_for(r.rows.size(), req.jobs, [&](std::size_t i) {
        const int scenario = static_cast<int>(i / req.per_scenario) + 1;
        const std::size_t k = i % req.per_scenario;
        r.rows[i] = validate_realization(scenario, k, derive_seed(req.seed, scenario, k), req.days, req.config, req.solver);
    });

    fs::create_directories(req.out);
    r.metrics = req.out / "validation_metrics.csv";
    {
        auto out = open_output(r.metrics);
        out << "scenario,realization,seed,loss_mae,rate_mae,filtered_rate_mae,filtered_mask_empty,status,iterations\n";
        for (const auto& row : r.rows) {
            out << row.scenario << ',' << row.realization << ',' << row.seed << ',' << io::format_number(row.loss_mae)
                << ',' << io::format_number(row.rate_mae) << ',' << io::format_number(row.filtered_rate_mae) << ','
                << (row.filtered_empty ? 1 : 0) << ',' << row.status << ',' << row.iterations << '\n';
            if (row.status != "optimal") r.exit_code = kNotOptimal;
        }
    }
    json failures = json::array();
    for (const auto& row : r.rows)
        if (!row.message.empty()) failures.push_back({{"scenario", row.scenario}, {"realization", row.realization}, {"message", row.message}});
    write_json(req.out / "manifest.json",
               json{{"tool", "soiling"},
                    {"version", kVersion},
                    {"command", "validate"},
                    {"realizations_per_scenario", req.per_scenario},
                    {"seed", req.seed},
                    {"days", req.days},
                    {"jobs", req.jobs},
                    {"config_path", req.config_path ? json(req.config_path->string()) : json(nullptr)},
                    {"config", req.config},
                    {"failures", std::move(failures)},
                    {"outputs", {r.metrics.string()}},
                    {"partial", r.exit_code != kOk},
                    {"created", utc_now()}});
    return r;
}

struct SynthRequest {
    int scenario = 1;
    std::uint64_t seed = 1;
    std::size_t days = 730;
    fs::path out;
};

inline fs::path run_synth(const SynthRequest& req) {
    const SyntheticRealization r = generate(ScenarioConfig::standard(req.scenario), req.seed, req.days);
    fs::create_directories(req.out);
    const auto csv = req.out / fmt::format("synthetic_s{}_{}.csv", req.scenario, req.seed);
    {
        auto out = open_output(csv);
        out << "date,pi,true_soiling,true_seasonal,true_degradation,true_noise\n";
        for (std::size_t t = 0; t < r.pi.size(); ++t)
            out << io::format_date(r.pi.day(t)) << ',' << io::format_number(r.pi.values[t]) << ','
                << io::format_number(r.true_soiling[t]) << ',' << io::format_number(r.true_seasonal[t]) << ','
                << io::format_number(r.true_degradation[t]) << ',' << io::format_number(r.true_noise[t]) << '\n';
    }
    write_json(req.out / fmt::format("synthetic_s{}_{}.json", req.scenario, req.seed),
               json{{"tool", "soiling"},
                    {"version", kVersion},
                    {"command", "synth"},
                    {"scenario", req.scenario},
                    {"seed", req.seed},
                    {"days", req.days},
                    {"degradation_per_year", r.degradation_per_year},
                    {"seasonal_phase", r.seasonal_phase},
                    {"cleaning_days", r.cleaning_days},
                    {"outputs", {csv.string()}}});
    return csv;
}

}  // namespace soiling::app
