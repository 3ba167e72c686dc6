// Command-line front end: score trajectory streams, fit rho per participant,
// generate synthetic cohorts, run the analysis tables, emit GSI curves.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsi/commands.hpp"

namespace fs = std::filesystem;

namespace {

gsi::cmd::RunConfig resolve_config(const std::string& config_path,
                                   const std::optional<std::uint64_t>& seed) {
    gsi::cmd::RunConfig cfg;
    if (!config_path.empty()) cfg = gsi::cmd::load_config(config_path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized proxemics-based safety index toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // let --config/--seed/--out-dir follow the subcommand

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "RNG seed (overrides config)");
    app.add_option("--out-dir", out_dir, "output directory for multi-file commands");

    // score
    auto* score = app.add_subcommand("score", "score a trajectory stream with Eq-style GSI");
    double score_rho = 1.0;
    std::string score_in = "-";
    std::string score_out = "-";
    score->add_option("--rho", score_rho, "personalization exponent")->capture_default_str();
    score->add_option("--in", score_in, "input trajectories.jsonl ('-' for stdin)");
    score->add_option("--out", score_out, "output stream ('-' for stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "fit rho per participant from trajectories + ratings");
    std::string fit_traj, fit_ratings, fit_out = "fits.csv";
    std::string fit_method, fit_agg;
    fit->add_option("--trajectories", fit_traj, "trajectories.jsonl")->required();
    fit->add_option("--ratings", fit_ratings, "ratings.jsonl")->required();
    fit->add_option("--out", fit_out, "output fit table")->capture_default_str();
    fit->add_option("--method", fit_method, "quasi_newton | fixed_step | grid");
    fit->add_option("--aggregation", fit_agg, "worst_case | mean");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic MEDEVAC cohort");
    gsi::sim::CohortSpec cohort;
    simulate->add_option("--n-bys", cohort.n_bys, "bystander count")->capture_default_str();
    simulate->add_option("--n-cas", cohort.n_cas, "casualty count")->capture_default_str();
    simulate->add_option("--cas-rho-mean", cohort.cas_rho_mean)->capture_default_str();
    simulate->add_option("--cas-rho-sd", cohort.cas_rho_sd)->capture_default_str();
    simulate->add_option("--bys-rho-mean", cohort.bys_rho_mean)->capture_default_str();
    simulate->add_option("--bys-rho-sd", cohort.bys_rho_sd)->capture_default_str();
    simulate->add_option("--noise", cohort.rating_noise, "rating noise std")->capture_default_str();
    simulate->add_flag("--quantize", cohort.quantize, "snap ratings to the 5-point grid");
    simulate->add_option("--cas-standoff", cohort.cas_standoff, "CAS approach stop distance, m")
        ->capture_default_str();
    simulate->add_option("--bys-offset", cohort.bys_offset, "BYS pass-by offset, m")
        ->capture_default_str();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "emit the analysis tables from fit results");
    std::string an_fits, an_traj, an_ratings;
    analyze->add_option("--fits", an_fits, "fit table from 'fit'")->required();
    analyze->add_option("--trajectories", an_traj, "trajectories.jsonl")->required();
    analyze->add_option("--ratings", an_ratings, "ratings.jsonl")->required();

    // curves
    auto* curves = app.add_subcommand("curves", "emit gsi(d) curves for a list of rho values");
    std::vector<double> curve_rhos;
    double curve_v = 0.0;
    std::size_t curve_points = 188;
    std::string curve_out = "-";
    curves->add_option("--rho", curve_rhos, "rho values (repeatable)")->required();
    curves->add_option("--v", curve_v, "relative velocity, m/s")->capture_default_str();
    curves->add_option("--points", curve_points, "samples per curve")->capture_default_str();
    curves->add_option("--out", curve_out, "output file ('-' for stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        const gsi::cmd::RunConfig cfg = resolve_config(config_path, seed);

        if (score->parsed()) {
            std::ifstream fin;
            std::ofstream fout;
            if (score_in != "-") {
                fin = gsi::io::open_in(score_in);
            }
            if (score_out != "-") {
                fout = gsi::io::open_out(score_out);
            }
            gsi::cmd::score(score_in == "-" ? std::cin : fin, score_out == "-" ? std::cout : fout,
                            gsi::Rho(score_rho), cfg.safety);
        } else if (fit->parsed()) {
            gsi::cmd::RunConfig fit_cfg = cfg;
            if (!fit_method.empty()) fit_cfg.method = gsi::cmd::parse_method(fit_method);
            if (!fit_agg.empty()) fit_cfg.aggregation = gsi::cmd::parse_aggregation(fit_agg);
            auto traj_in = gsi::io::open_in(fit_traj);
            auto ratings_in = gsi::io::open_in(fit_ratings);
            const auto rows = gsi::cmd::fit(gsi::io::read_trajectories(traj_in),
                                            gsi::io::read_ratings(ratings_in), fit_cfg);
            auto os = gsi::io::open_out(fit_out);
            gsi::cmd::write_fit_rows(os, rows, fit_cfg);
        } else if (simulate->parsed()) {
            cohort.safety = cfg.safety;
            cohort.aggregation = cfg.aggregation;
            gsi::cmd::simulate(cohort, cfg.seed, out_dir);
        } else if (analyze->parsed()) {
            gsi::cmd::analyze(an_fits, an_traj, an_ratings, out_dir, cfg);
        } else if (curves->parsed()) {
            std::ofstream fout;
            if (curve_out != "-") fout = gsi::io::open_out(curve_out);
            gsi::cmd::curves(curve_rhos, curve_v, cfg.safety,
                             curve_out == "-" ? std::cout : fout, curve_points);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
