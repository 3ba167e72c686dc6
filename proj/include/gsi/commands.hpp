#ifndef GSI_COMMANDS_HPP
#define GSI_COMMANDS_HPP

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsi/cluster.hpp"
#include "gsi/errors.hpp"
#include "gsi/estimation.hpp"
#include "gsi/io.hpp"
#include "gsi/safety.hpp"
#include "gsi/simulate.hpp"
#include "gsi/stats.hpp"

namespace gsi::cmd {

/// Everything a run needs beyond its input files. Loadable from a strict
/// JSON config file; unknown keys are rejected.
struct RunConfig {
    SafetyParams safety{};
    LikelihoodConfig likelihood{};
    Aggregation aggregation = Aggregation::WorstCase;
    FitMethod method = FitMethod::QuasiNewton;
    std::optional<double> cluster_bandwidth;
    double oracle_grid_step = 1e-3;
    std::uint64_t seed = 7;

    void validate() const {
        safety.validate();
        likelihood.validate();
        if (cluster_bandwidth && !(*cluster_bandwidth > 0.0)) {
            throw validation_error("cluster_bandwidth must be > 0");
        }
        if (!(oracle_grid_step > 0.0)) throw validation_error("oracle_grid_step must be > 0");
    }
};

inline Aggregation parse_aggregation(const std::string& s) {
    if (s == "worst_case") return Aggregation::WorstCase;
    if (s == "mean") return Aggregation::Mean;
    throw validation_error("unknown aggregation '" + s + "' (expected worst_case or mean)");
}

inline FitMethod parse_method(const std::string& s) {
    if (s == "quasi_newton") return FitMethod::QuasiNewton;
    if (s == "fixed_step") return FitMethod::FixedStep;
    if (s == "grid") return FitMethod::Grid;
    throw validation_error("unknown method '" + s + "'");
}

inline RunConfig load_config(const std::filesystem::path& path) {
    using nlohmann::json;
    auto is = io::open_in(path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw validation_error("config " + path.string() + ": " + e.what());
    }
    const auto check_keys = [&](const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (!allowed.count(it.key())) {
                throw validation_error("config: unknown key '" + it.key() + "' in " + where);
            }
        }
    };
    check_keys(j, {"safety", "likelihood", "aggregation", "method", "cluster_bandwidth",
                   "oracle_grid_step", "seed"},
               "top level");
    RunConfig cfg;
    if (j.contains("safety")) {
        const auto& s = j.at("safety");
        check_keys(s, {"a_max", "d_min", "d_max", "zone_edges"}, "safety");
        if (s.contains("a_max")) cfg.safety.a_max = s.at("a_max").get<double>();
        if (s.contains("d_min")) cfg.safety.d_min = s.at("d_min").get<double>();
        if (s.contains("d_max")) cfg.safety.d_max = s.at("d_max").get<double>();
        if (s.contains("zone_edges")) {
            const auto edges = s.at("zone_edges").get<std::vector<double>>();
            if (edges.size() != 3) throw validation_error("config: zone_edges needs 3 values");
            std::copy(edges.begin(), edges.end(), cfg.safety.zone_edges.begin());
        }
    }
    if (j.contains("likelihood")) {
        const auto& l = j.at("likelihood");
        check_keys(l, {"sigma", "eta", "max_iters", "tol", "rho_init"}, "likelihood");
        if (l.contains("sigma")) cfg.likelihood.sigma = l.at("sigma").get<double>();
        if (l.contains("eta")) cfg.likelihood.eta = l.at("eta").get<double>();
        if (l.contains("max_iters")) cfg.likelihood.max_iters = l.at("max_iters").get<std::size_t>();
        if (l.contains("tol")) cfg.likelihood.tol = l.at("tol").get<double>();
        if (l.contains("rho_init")) cfg.likelihood.rho_init = l.at("rho_init").get<double>();
    }
    if (j.contains("aggregation")) cfg.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
    if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("cluster_bandwidth") && !j.at("cluster_bandwidth").is_null()) {
        cfg.cluster_bandwidth = j.at("cluster_bandwidth").get<double>();
    }
    if (j.contains("oracle_grid_step")) cfg.oracle_grid_step = j.at("oracle_grid_step").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------- score ----

/// Score a trajectory stream line by line: margin, gsi, zone appended to each
/// record. Enforces segment contiguity and monotone time on the fly.
inline void score(std::istream& in, std::ostream& out, Rho rho, const SafetyParams& params) {
    params.validate();
    std::string line;
    std::size_t line_no = 0;
    std::set<io::SegmentKey> seen;
    std::optional<io::SegmentKey> current;
    double last_t = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const io::TrajectoryRecord r = io::parse_trajectory_line(line, line_no);
        const io::SegmentKey key{r.participant_id, r.mode, r.trial};
        if (!current || !(key == *current)) {
            if (seen.count(key)) throw parse_error(line_no, "segment " + key.str() + " is not contiguous");
            seen.insert(key);
            current = key;
        } else if (r.t < last_t) {
            throw parse_error(line_no, "non-monotone t within segment " + key.str());
        }
        last_t = r.t;

        const double margin = safety_margin(r.d, r.v, params);
        const double score = score_from_margin(margin, rho);
        const ProxemicsZone zone = classify_zone(r.d, params);
        out << "{\"participant_id\":\"" << r.participant_id << "\",\"role\":\"" << to_string(r.role)
            << "\",\"mode\":\"" << to_string(r.mode) << "\",\"trial\":" << r.trial
            << ",\"t\":" << io::fmt6(r.t) << ",\"d\":" << io::fmt6(r.d) << ",\"v\":" << io::fmt6(r.v);
        if (r.bearing) out << ",\"bearing\":" << io::fmt6(*r.bearing);
        out << ",\"margin\":" << io::fmt6(margin) << ",\"gsi\":" << io::fmt6(score)
            << ",\"zone\":\"" << to_string(zone) << "\"}\n";
    }
}

// ------------------------------------------------------------------ fit ----

struct FitRow {
    std::string participant_id;
    sim::Role role = sim::Role::CAS;
    std::size_t n_obs = 0;
    std::optional<EstimationResult> fit;      // absent when unidentifiable
    std::optional<double> oracle_rho;         // grid cross-check
    std::string status = "ok";                // ok | unidentifiable
};

/// Join ratings to trajectory segments, build one observation per rating,
/// and fit rho per participant with the configured method plus a grid-oracle
/// cross-check. Per-participant failures flag the row and the run continues.
inline std::vector<FitRow> fit(const std::vector<io::TrajectoryRecord>& trajectories,
                               const std::vector<io::RatingRecord>& ratings,
                               const RunConfig& cfg) {
    cfg.validate();
    const auto segments = io::group_segments(trajectories);

    struct PerParticipant {
        sim::Role role;
        std::vector<Observation> obs;
    };
    std::map<std::string, PerParticipant> by_participant;
    for (const auto& [key, recs] : segments) {
        auto [it, inserted] = by_participant.try_emplace(key.participant_id,
                                                         PerParticipant{recs.front().role, {}});
        if (!inserted && it->second.role != recs.front().role) {
            throw join_error("participant " + key.participant_id + " has inconsistent roles");
        }
    }

    std::vector<std::string> missing;
    for (const auto& r : ratings) {
        const io::SegmentKey key{r.participant_id, r.mode, r.trial};
        const auto seg = segments.find(key);
        if (seg == segments.end()) {
            missing.push_back(key.str());
            continue;
        }
        auto& slot = by_participant.at(r.participant_id);
        if (slot.role != r.role) {
            throw join_error("rating/trajectory role mismatch for " + r.participant_id);
        }
        std::vector<TrajectorySample> samples;
        samples.reserve(seg->second.size());
        for (const auto& rec : seg->second) {
            samples.push_back({rec.t, rec.d, rec.v, rec.bearing.value_or(0.0)});
        }
        slot.obs.push_back(build_observations(samples, r.normalized(), cfg.aggregation, cfg.safety,
                                              key.str() + "/" + r.item));
    }
    if (!missing.empty()) {
        std::string keys;
        for (const auto& k : missing) keys += (keys.empty() ? "" : ", ") + k;
        throw join_error("ratings without trajectory data: " + keys);
    }

    std::vector<FitRow> rows;
    for (const auto& [pid, data] : by_participant) {
        if (data.obs.empty()) continue; // trajectory-only participant: nothing to fit
        FitRow row;
        row.participant_id = pid;
        row.role = data.role;
        row.n_obs = data.obs.size();
        if (!identifiable(data.obs)) {
            row.status = "unidentifiable";
            rows.push_back(std::move(row));
            continue;
        }
        switch (cfg.method) {
            case FitMethod::QuasiNewton: row.fit = fit_rho_quasi_newton(data.obs, cfg.likelihood); break;
            case FitMethod::FixedStep: row.fit = fit_rho_fixed_step(data.obs, cfg.likelihood); break;
            case FitMethod::Grid: row.fit = fit_rho_grid(data.obs, cfg.likelihood, cfg.oracle_grid_step); break;
        }
        row.oracle_rho = fit_rho_grid(data.obs, cfg.likelihood, cfg.oracle_grid_step).rho_hat.value;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline const std::vector<std::string> kFitColumns = {
    "participant_id", "role", "n_obs", "rho_hat", "log_lik", "sse", "iterations",
    "converged", "at_bound", "method", "oracle_rho", "oracle_gap", "aggregation", "status"};

inline void write_fit_rows(std::ostream& os, const std::vector<FitRow>& rows,
                           const RunConfig& cfg) {
    io::CsvWriter csv(os);
    csv.header(kFitColumns);
    for (const auto& row : rows) {
        std::vector<std::string> cells;
        cells.push_back(row.participant_id);
        cells.push_back(to_string(row.role));
        cells.push_back(std::to_string(row.n_obs));
        if (row.fit) {
            const auto& f = *row.fit;
            cells.push_back(io::fmt6(f.rho_hat.value));
            cells.push_back(io::fmt6(f.log_lik));
            cells.push_back(io::fmt6(f.sse));
            cells.push_back(std::to_string(f.iterations));
            cells.push_back(f.converged ? "1" : "0");
            cells.push_back(f.at_bound ? "1" : "0");
            cells.push_back(to_string(f.method));
            cells.push_back(io::fmt6(*row.oracle_rho));
            cells.push_back(io::fmt6(std::abs(f.rho_hat.value - *row.oracle_rho)));
        } else {
            for (int i = 0; i < 9; ++i) cells.push_back("NA");
        }
        cells.push_back(to_string(cfg.aggregation));
        cells.push_back(row.status);
        csv.row(cells);
    }
}

// ------------------------------------------------------------- simulate ----

/// Write a synthetic cohort as the three dataset files: trajectories.jsonl,
/// ratings.jsonl, participants.csv (the ground-truth manifest).
inline void simulate(const sim::CohortSpec& spec, std::uint64_t seed,
                     const std::filesystem::path& out_dir) {
    const sim::CohortDataset ds = sim::generate_cohort(spec, seed);
    std::filesystem::create_directories(out_dir);

    auto traj = io::open_out((out_dir / "trajectories.jsonl").string());
    auto rate = io::open_out((out_dir / "ratings.jsonl").string());
    auto manifest = io::open_out((out_dir / "participants.csv").string());

    io::CsvWriter csv(manifest);
    csv.header({"participant_id", "role", "rho_star", "rating_noise", "quantize", "n_trials",
                "n_samples"});

    for (const auto& p : ds.participants) {
        std::size_t n_samples = 0;
        for (const auto& trial : p.trials) {
            for (const auto& s : trial.samples) {
                io::TrajectoryRecord rec;
                rec.participant_id = p.participant.id;
                rec.role = p.participant.role;
                rec.mode = trial.mode.tag;
                rec.trial = trial.trial;
                rec.t = s.t;
                rec.d = s.d;
                rec.v = s.v;
                rec.bearing = s.bearing;
                io::write_trajectory_line(traj, rec);
                ++n_samples;
            }
            io::RatingRecord rr;
            rr.participant_id = p.participant.id;
            rr.role = p.participant.role;
            rr.mode = trial.mode.tag;
            rr.trial = trial.trial;
            rr.item = "Q3_approach";
            rr.scale_points = 5;
            rr.value = 1 + static_cast<int>(std::lround(trial.obs.rating * 4.0));
            rr.value_norm = trial.obs.rating;
            io::write_rating_line(rate, rr);
        }
        csv.row({p.participant.id, to_string(p.participant.role), io::fmt6(p.participant.rho_star),
                 io::fmt6(p.participant.rating_noise), p.participant.quantize ? "1" : "0", "6",
                 std::to_string(n_samples)});
    }
}

// -------------------------------------------------------------- analyze ----

namespace detail {

struct ParticipantSummary {
    sim::Role role;
    double rho_hat = 0.0;
    double gsi_mean = 0.0;   // mean per-trial gsi at rho_hat
    double gsi_trial1 = 0.0; // mean over the first trial of each mode
    double gsi_trial2 = 0.0;
    std::optional<double> rating_mean;
};

inline std::string opt_cell(const std::optional<double>& v) {
    return v ? io::fmt6(*v) : "NA";
}

} // namespace detail

/// Reproduce the analysis tables from fit results plus the dataset files:
/// per-role descriptives of rho-hat and GSI, role contrast (Mann-Whitney),
/// per-role trial contrast (Wilcoxon), rating/GSI correlations, mean-shift
/// cluster tables with outliers and silhouette, and a KDE series of rho-hat.
/// Cells that cannot be computed are written as NA; the run continues.
inline void analyze(const std::filesystem::path& fits_path,
                    const std::filesystem::path& trajectories_path,
                    const std::filesystem::path& ratings_path,
                    const std::filesystem::path& out_dir, const RunConfig& cfg) {
    cfg.validate();

    // fitted rho per participant
    auto fits_in = io::open_in(fits_path.string());
    const auto fit_rows = io::read_csv(fits_in);
    if (fit_rows.empty() || fit_rows[0] != kFitColumns) {
        throw validation_error("unrecognized fit table header in " + fits_path.string());
    }
    std::map<std::string, detail::ParticipantSummary> summaries;
    for (std::size_t i = 1; i < fit_rows.size(); ++i) {
        const auto& cells = fit_rows[i];
        if (cells.size() != kFitColumns.size()) {
            throw validation_error("fit table row " + std::to_string(i + 1) + " has wrong arity");
        }
        if (cells.back() != "ok") continue; // flagged rows carry no estimate
        detail::ParticipantSummary s;
        s.role = io::parse_role(cells[1]);
        s.rho_hat = std::stod(cells[3]);
        summaries.emplace(cells[0], s);
    }

    // per-trial margins from the trajectories
    auto traj_in = io::open_in(trajectories_path.string());
    const auto segments = io::group_segments(io::read_trajectories(traj_in));
    std::map<std::string, std::map<std::pair<int, int>, double>> margins; // pid -> (mode, trial) -> margin
    for (const auto& [key, recs] : segments) {
        std::vector<TrajectorySample> samples;
        samples.reserve(recs.size());
        for (const auto& r : recs) samples.push_back({r.t, r.d, r.v, r.bearing.value_or(0.0)});
        const Observation o = build_observations(samples, 0.0, cfg.aggregation, cfg.safety);
        margins[key.participant_id][{static_cast<int>(key.mode), key.trial}] = o.margin;
    }

    // mean normalized rating per participant (for the H1-style correlation)
    auto ratings_in = io::open_in(ratings_path.string());
    std::map<std::string, std::pair<double, std::size_t>> rating_acc;
    for (const auto& r : io::read_ratings(ratings_in)) {
        auto& acc = rating_acc[r.participant_id];
        acc.first += r.normalized();
        acc.second += 1;
    }

    for (auto& [pid, s] : summaries) {
        const auto it = margins.find(pid);
        if (it == margins.end()) {
            throw join_error("fit row for " + pid + " has no trajectory data");
        }
        const Rho rho = Rho::clamped(s.rho_hat);
        double sum = 0.0, sum1 = 0.0, sum2 = 0.0;
        std::size_t n = 0, n1 = 0, n2 = 0;
        for (const auto& [mode_trial, margin] : it->second) {
            const double g = score_from_margin(margin, rho);
            sum += g;
            ++n;
            if (mode_trial.second == 1) {
                sum1 += g;
                ++n1;
            } else {
                sum2 += g;
                ++n2;
            }
        }
        s.gsi_mean = sum / static_cast<double>(n);
        s.gsi_trial1 = n1 ? sum1 / static_cast<double>(n1) : s.gsi_mean;
        s.gsi_trial2 = n2 ? sum2 / static_cast<double>(n2) : s.gsi_mean;
        const auto racc = rating_acc.find(pid);
        if (racc != rating_acc.end() && racc->second.second > 0) {
            s.rating_mean = racc->second.first / static_cast<double>(racc->second.second);
        }
    }

    std::filesystem::create_directories(out_dir);
    const std::vector<sim::Role> roles = {sim::Role::BYS, sim::Role::CAS};

    const auto values_of = [&](sim::Role role, auto getter) {
        std::vector<double> v;
        for (const auto& [pid, s] : summaries) {
            if (s.role == role) v.push_back(getter(s));
        }
        return v;
    };

    // --- role_descriptives.csv: Table I flavor -----------------------------
    {
        auto os = io::open_out((out_dir / "role_descriptives.csv").string());
        io::CsvWriter csv(os);
        csv.header({"role", "measure", "n", "mean", "sd", "se", "min", "max"});
        for (const auto role : roles) {
            for (const std::string measure : {"rho_hat", "gsi"}) {
                const auto vals = values_of(role, [&](const detail::ParticipantSummary& s) {
                    return measure == "rho_hat" ? s.rho_hat : s.gsi_mean;
                });
                if (vals.empty()) {
                    csv.row({to_string(role), measure, "0", "NA", "NA", "NA", "NA", "NA"});
                    continue;
                }
                const auto d = stats::describe(vals);
                csv.row({to_string(role), measure, std::to_string(d.n), io::fmt6(d.mean),
                         detail::opt_cell(d.sd), detail::opt_cell(d.se), io::fmt6(d.min),
                         io::fmt6(d.max)});
            }
        }
    }

    // --- trial_descriptives.csv: Table VI flavor ---------------------------
    {
        auto os = io::open_out((out_dir / "trial_descriptives.csv").string());
        io::CsvWriter csv(os);
        csv.header({"role", "trial", "n", "mean", "sd", "se", "min", "max"});
        for (const auto role : roles) {
            for (int trial = 1; trial <= 2; ++trial) {
                const auto vals = values_of(role, [&](const detail::ParticipantSummary& s) {
                    return trial == 1 ? s.gsi_trial1 : s.gsi_trial2;
                });
                if (vals.empty()) {
                    csv.row({to_string(role), std::to_string(trial), "0", "NA", "NA", "NA", "NA", "NA"});
                    continue;
                }
                const auto d = stats::describe(vals);
                csv.row({to_string(role), std::to_string(trial), std::to_string(d.n),
                         io::fmt6(d.mean), detail::opt_cell(d.sd), detail::opt_cell(d.se),
                         io::fmt6(d.min), io::fmt6(d.max)});
            }
        }
    }

    // --- role_contrast.csv: H4, Mann-Whitney BYS vs CAS --------------------
    {
        auto os = io::open_out((out_dir / "role_contrast.csv").string());
        io::CsvWriter csv(os);
        csv.header({"measure", "n_bys", "n_cas", "u_statistic", "z", "p_value", "effect_r", "exact"});
        for (const std::string measure : {"gsi", "rho_hat"}) {
            const auto getter = [&](const detail::ParticipantSummary& s) {
                return measure == "gsi" ? s.gsi_mean : s.rho_hat;
            };
            const auto bys = values_of(sim::Role::BYS, getter);
            const auto cas = values_of(sim::Role::CAS, getter);
            if (bys.empty() || cas.empty()) {
                csv.row({measure, std::to_string(bys.size()), std::to_string(cas.size()), "NA", "NA",
                         "NA", "NA", "NA"});
                continue;
            }
            const auto t = stats::mann_whitney_u(bys, cas);
            csv.row({measure, std::to_string(t.n_a), std::to_string(t.n_b), io::fmt6(t.statistic),
                     io::fmt6(t.z), io::fmt6(t.p_value), io::fmt6(t.effect_r), t.exact ? "1" : "0"});
        }
    }

    // --- trial_contrast.csv: H5, Wilcoxon trial 1 vs trial 2 per role ------
    {
        auto os = io::open_out((out_dir / "trial_contrast.csv").string());
        io::CsvWriter csv(os);
        csv.header({"role", "n_pairs", "w_statistic", "z", "p_value", "effect_r", "exact", "status"});
        for (const auto role : roles) {
            const auto t1 = values_of(role, [](const detail::ParticipantSummary& s) { return s.gsi_trial1; });
            const auto t2 = values_of(role, [](const detail::ParticipantSummary& s) { return s.gsi_trial2; });
            if (t1.empty()) {
                csv.row({to_string(role), "0", "NA", "NA", "NA", "NA", "NA", "no_data"});
                continue;
            }
            try {
                const auto t = stats::wilcoxon_signed_rank(t1, t2);
                csv.row({to_string(role), std::to_string(t.n_a), io::fmt6(t.statistic), io::fmt6(t.z),
                         io::fmt6(t.p_value), io::fmt6(t.effect_r), t.exact ? "1" : "0", "ok"});
            } catch (const degenerate_input&) {
                csv.row({to_string(role), std::to_string(t1.size()), "NA", "NA", "NA", "NA", "NA",
                         "degenerate"});
            }
        }
    }

    // --- correlations.csv: H1 flavor, mean rating vs fitted GSI ------------
    {
        auto os = io::open_out((out_dir / "correlations.csv").string());
        io::CsvWriter csv(os);
        csv.header({"role", "n", "r", "t", "p_value", "status"});
        for (const auto role : roles) {
            std::vector<double> x, y;
            for (const auto& [pid, s] : summaries) {
                if (s.role == role && s.rating_mean) {
                    x.push_back(*s.rating_mean);
                    y.push_back(s.gsi_mean);
                }
            }
            try {
                const auto t = stats::pearson(x, y);
                csv.row({to_string(role), std::to_string(x.size()), io::fmt6(t.statistic),
                         io::fmt6(t.z), io::fmt6(t.p_value), "ok"});
            } catch (const std::runtime_error&) {
                csv.row({to_string(role), std::to_string(x.size()), "NA", "NA", "NA", "degenerate"});
            }
        }
    }

    // --- clusters.csv + cluster_summary.csv: H6, Table VII flavor ----------
    {
        auto os = io::open_out((out_dir / "clusters.csv").string());
        auto sum_os = io::open_out((out_dir / "cluster_summary.csv").string());
        io::CsvWriter csv(os);
        io::CsvWriter sum_csv(sum_os);
        csv.header({"role", "cluster", "count", "gsi_mean", "gsi_sd"});
        sum_csv.header({"role", "n_points", "n_clusters", "n_outliers", "silhouette", "bandwidth"});
        for (const auto role : roles) {
            const auto vals = values_of(role, [](const detail::ParticipantSummary& s) { return s.gsi_mean; });
            if (vals.size() < 2) {
                sum_csv.row({to_string(role), std::to_string(vals.size()), "NA", "NA", "NA", "NA"});
                continue;
            }
            const auto clusters = stats::mean_shift(vals, cfg.cluster_bandwidth);
            for (std::size_t c = 0; c < clusters.counts.size(); ++c) {
                std::vector<double> members;
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    if (clusters.labels[i] == static_cast<int>(c)) members.push_back(vals[i]);
                }
                const auto d = stats::describe(members);
                csv.row({to_string(role), std::to_string(c), std::to_string(d.n), io::fmt6(d.mean),
                         detail::opt_cell(d.sd)});
            }
            if (!clusters.outliers.empty()) {
                std::vector<double> outs;
                for (const auto i : clusters.outliers) outs.push_back(vals[i]);
                const auto d = stats::describe(outs);
                csv.row({to_string(role), "outliers", std::to_string(d.n), io::fmt6(d.mean),
                         detail::opt_cell(d.sd)});
            }
            sum_csv.row({to_string(role), std::to_string(vals.size()),
                         std::to_string(clusters.counts.size()),
                         std::to_string(clusters.outliers.size()),
                         detail::opt_cell(clusters.silhouette), io::fmt6(clusters.bandwidth)});
        }
    }

    // --- kde_rho.csv: Fig. 3 flavor -----------------------------------------
    {
        auto os = io::open_out((out_dir / "kde_rho.csv").string());
        io::CsvWriter csv(os);
        csv.header({"role", "x", "density"});
        for (const auto role : roles) {
            const auto vals = values_of(role, [](const detail::ParticipantSummary& s) { return s.rho_hat; });
            if (vals.size() < 2) continue;
            for (const auto& [x, dens] : stats::kde_1d(vals)) {
                csv.row({to_string(role), io::fmt6(x), io::fmt6(dens)});
            }
        }
    }
}

// --------------------------------------------------------------- curves ----

/// Emit gsi(d) curves for a list of rho values over d in
/// [d_min, d_max + 0.5], one column per rho.
inline void curves(std::span<const double> rho_values, double v, const SafetyParams& params,
                   std::ostream& out, std::size_t n_points = 188) {
    params.validate();
    if (rho_values.empty()) throw validation_error("curves: need at least one rho");
    std::vector<Rho> rhos;
    for (const double r : rho_values) rhos.push_back(Rho(r));

    std::vector<std::vector<CurvePoint>> series;
    series.reserve(rhos.size());
    for (const Rho r : rhos) {
        series.push_back(gsi_curve(r, v, params, params.d_min, params.d_max + 0.5, n_points));
    }

    io::CsvWriter csv(out);
    std::vector<std::string> header{"d"};
    for (const double r : rho_values) header.push_back("gsi_rho_" + io::fmt6(r));
    csv.header(header);
    for (std::size_t i = 0; i < n_points; ++i) {
        std::vector<std::string> cells{io::fmt6(series[0][i].d)};
        for (const auto& s : series) cells.push_back(io::fmt6(s[i].gsi));
        csv.row(cells);
    }
}

} // namespace gsi::cmd

#endif
