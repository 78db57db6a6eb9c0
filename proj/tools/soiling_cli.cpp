// soiling: estimate PV soiling losses from daily energy or performance-index data.
//
//   soiling analyze  INPUT.csv --out DIR [--labeled] [--tau T] [--config FILE]
//   soiling fleet    SITE_DIR  --out DIR [--jobs N] [--outlier-threshold F]
//   soiling validate --out DIR [--realizations N] [--seed S] [--days D] [--jobs N]
//   soiling synth    --out DIR [--scenario K] [--seed S] [--days D]
//
// Exit codes: 0 ok, 1 other failure, 2 input error, 3 solver not optimal.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "soiling/app.hpp"

namespace {

using namespace soiling;
namespace fs = std::filesystem;

struct ModelFlags {
    std::string config;
    bool labeled = false;
    std::optional<double> tau;
    int max_iter = qp::SolverSettings{}.max_iter;

    void attach(CLI::App* cmd, bool with_labeled = true) {
        cmd->add_option("--config", config, "JSON file overriding model parameters (default: $SOILING_CONFIG)");
        if (with_labeled) cmd->add_flag("--labeled", labeled, "Input is a performance index (tau1 = 0.5, no scaling)");
        cmd->add_option("--tau", tau, "Residual quantile tau1, overrides config")->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--max-iter", max_iter, "Solver iteration limit")->check(CLI::PositiveNumber);
    }

    std::optional<fs::path> config_path() const {
        if (!config.empty()) return fs::path(config);
        if (const char* env = std::getenv(app::kConfigEnv); env && *env) return fs::path(env);
        return std::nullopt;
    }

    SDConfig resolve(bool force_labeled = false) const {
        return app::resolve_config(config_path(), labeled || force_labeled, tau);
    }

    qp::SolverSettings solver() const {
        qp::SolverSettings s;
        s.max_iter = max_iter;
        return s;
    }
};

void print_site(const app::SiteOutcome& o) {
    if (o.report)
        fmt::print("{}: {} after {} iterations, total loss {:.4f}\n", o.site, o.status, o.report->iterations,
                   o.total_loss);
    if (!o.message.empty()) fmt::print(stderr, "{}: {}\n", o.site, o.message);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Soiling loss estimation by signal decomposition"};
    cli.set_version_flag("--version", app::kVersion);
    cli.require_subcommand(1);

    ModelFlags analyze_flags;
    std::string analyze_input, analyze_out = "out", quality, dump_qp;
    auto* analyze = cli.add_subcommand("analyze", "Decompose one site's daily energy or power data");
    analyze->add_option("input", analyze_input, "CSV with timestamp,power or date,energy")->required();
    analyze->add_option("--out", analyze_out, "Output directory");
    analyze->add_option("--quality", quality, "CSV date,good of per-day quality flags");
    analyze->add_option("--dump-qp", dump_qp, "Write the assembled quadratic program to this file");
    analyze_flags.attach(analyze);

    ModelFlags fleet_flags;
    std::string fleet_dir, fleet_out = "out";
    int fleet_jobs = 1;
    double outlier = app::FleetRequest{}.outlier_threshold;
    auto* fleet = cli.add_subcommand("fleet", "Analyze every *.csv site file in a directory");
    fleet->add_option("input_dir", fleet_dir, "Directory of per-site CSV files")->required();
    fleet->add_option("--out", fleet_out, "Output directory");
    fleet->add_option("--jobs", fleet_jobs, "Sites analyzed concurrently")->check(CLI::PositiveNumber);
    fleet->add_option("--outlier-threshold", outlier, "Flag sites with total loss fraction above this");
    fleet_flags.attach(fleet);

    ModelFlags validate_flags;
    std::string validate_out = "out";
    std::size_t realizations = 10, validate_days = 730;
    std::uint64_t validate_seed = 1;
    int validate_jobs = 1;
    auto* validate = cli.add_subcommand("validate", "Synthetic study over the six scenarios");
    validate->add_option("--out", validate_out, "Output directory");
    validate->add_option("--realizations", realizations, "Realizations per scenario")->check(CLI::PositiveNumber);
    validate->add_option("--seed", validate_seed, "Base seed");
    validate->add_option("--days", validate_days, "Signal length in days")->check(CLI::Range(365, 100000));
    validate->add_option("--jobs", validate_jobs, "Realizations solved concurrently")->check(CLI::PositiveNumber);
    validate_flags.attach(validate, /*with_labeled=*/false);

    std::string synth_out = "out";
    app::SynthRequest synth_req;
    auto* synth = cli.add_subcommand("synth", "Write one synthetic realization with its true components");
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--scenario", synth_req.scenario, "Scenario 1..6")->check(CLI::Range(1, 6));
    synth->add_option("--seed", synth_req.seed, "Seed");
    synth->add_option("--days", synth_req.days, "Signal length in days")->check(CLI::Range(365, 100000));

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : app::kInputFailure;
    }

    try {
        if (*analyze) {
            app::AnalyzeRequest req;
            req.input = analyze_input;
            req.out = analyze_out;
            req.labeled = analyze_flags.labeled;
            req.config_path = analyze_flags.config_path();
            req.config = analyze_flags.resolve();
            req.solver = analyze_flags.solver();
            if (!quality.empty()) req.quality_flags = fs::path(quality);
            if (!dump_qp.empty()) req.dump_qp = fs::path(dump_qp);
            const auto o = app::run_analyze(req);
            print_site(o);
            return o.exit_code;
        }
        if (*fleet) {
            app::FleetRequest req;
            req.input_dir = fleet_dir;
            req.out = fleet_out;
            req.labeled = fleet_flags.labeled;
            req.config_path = fleet_flags.config_path();
            req.config = fleet_flags.resolve();
            req.solver = fleet_flags.solver();
            req.jobs = fleet_jobs;
            req.outlier_threshold = outlier;
            const auto r = app::run_fleet(req);
            for (const auto& s : r.sites) print_site(s);
            fmt::print("summary: {}\n", r.summary.string());
            return r.exit_code;
        }
        if (*validate) {
            app::ValidateRequest req;
            req.per_scenario = realizations;
            req.seed = validate_seed;
            req.days = validate_days;
            req.jobs = validate_jobs;
            req.out = validate_out;
            req.config_path = validate_flags.config_path();
            req.config = validate_flags.resolve(/*force_labeled=*/true);
            req.solver = validate_flags.solver();
            const auto r = app::run_validate(req);
            for (const auto& row : r.rows)
                fmt::print("scenario {} #{}: {} loss MAE {:.5f} filtered rate MAE {:.6f}\n", row.scenario,
                           row.realization, row.status, row.loss_mae, row.filtered_rate_mae);
            fmt::print("metrics: {}\n", r.metrics.string());
            return r.exit_code;
        }
        if (*synth) {
            synth_req.out = synth_out;
            fmt::print("{}\n", app::run_synth(synth_req).string());
            return app::kOk;
        }
    } catch (const InputError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return app::kInputFailure;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return app::kFailure;
    }
    return app::kFailure;
}
