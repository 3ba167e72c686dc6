#ifndef GSI_SIMULATE_HPP
#define GSI_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gsi/errors.hpp"
#include "gsi/estimation.hpp"
#include "gsi/rng.hpp"
#include "gsi/safety.hpp"

namespace gsi::sim {

enum class ModeTag { AutonomousSlow, AutonomousFast, Teleop };

struct OperatingMode {
    ModeTag tag = ModeTag::AutonomousSlow;
    double speed = 0.3; // m/s

    static OperatingMode standard(ModeTag tag) {
        switch (tag) {
            case ModeTag::AutonomousSlow: return {tag, 0.3};
            case ModeTag::AutonomousFast: return {tag, 0.75};
            case ModeTag::Teleop: return {tag, 0.5};
        }
        throw validation_error("unknown mode tag");
    }
};

inline const char* to_string(ModeTag m) {
    switch (m) {
        case ModeTag::AutonomousSlow: return "AS";
        case ModeTag::AutonomousFast: return "AF";
        case ModeTag::Teleop: return "TO";
    }
    return "?";
}

/// Parameters of one synthetic approach run. The robot covers route_length
/// and halts standoff meters from the human under a trapezoidal speed
/// profile: ramp up at `accel`, cruise at the mode speed with multiplicative
/// jitter, ramp down to stop. Teleoperation uses a larger default jitter as a
/// proxy for human steering variability.
struct EpisodeSpec {
    double route_length = 11.0;
    OperatingMode mode = OperatingMode::standard(ModeTag::AutonomousSlow);
    double dt = 0.1;           // sampling period, s
    double standoff = 0.5;     // final stopping distance from the human, m
    double speed_jitter = 0.02;
    double accel = 0.5;        // ramp accel/decel, m/s^2

    void validate() const {
        if (!(dt > 0.0)) throw validation_error("dt must be > 0");
        if (!(standoff >= 0.0)) throw validation_error("standoff must be >= 0");
        if (!(route_length > standoff)) throw validation_error("route_length must exceed standoff");
        if (!(mode.speed > 0.0)) throw validation_error("mode speed must be > 0");
        if (!(speed_jitter >= 0.0)) throw validation_error("speed_jitter must be >= 0");
        if (!(accel > 0.0)) throw validation_error("accel must be > 0");
    }
};

enum class Role { BYS, CAS };

inline const char* to_string(Role r) { return r == Role::BYS ? "BYS" : "CAS"; }

struct SyntheticParticipant {
    std::string id;
    Role role = Role::CAS;
    double rho_star = 1.0;      // ground truth, within the rho box
    double rating_noise = 0.05; // std of additive rating noise
    bool quantize = false;      // snap ratings to the 5-point grid
};

namespace detail {

inline double jitter_factor(rng::Random& rnd, double sd) {
    if (sd <= 0.0) return 1.0;
    // clamp to 3 sigma so a single draw cannot stall or lurch the robot
    return 1.0 + std::clamp(rnd.normal(0.0, sd), -3.0 * sd, 3.0 * sd);
}

} // namespace detail

/// Head-on approach: distance falls monotonically from route_length to
/// standoff. v is the backward difference -(d_k - d_{k-1}) / dt, positive
/// while closing. Deterministic for a given (spec, seed).
inline std::vector<TrajectorySample> generate_episode(const EpisodeSpec& spec, std::uint64_t seed) {
    spec.validate();
    rng::Random rnd(seed);
    std::vector<TrajectorySample> out;
    const double cruise = spec.mode.speed;
    const std::size_t cap =
        static_cast<std::size_t>(10.0 * spec.route_length / (cruise * spec.dt)) + 1000;
    double d = spec.route_length;
    double u = 0.0;
    double t = 0.0;
    out.push_back({t, d, 0.0, 0.0});
    while (d > spec.standoff + 1e-12 && out.size() < cap) {
        double target = std::min(cruise, std::sqrt(2.0 * spec.accel * (d - spec.standoff)));
        target *= detail::jitter_factor(rnd, spec.speed_jitter);
        u = std::clamp(target, std::max(0.0, u - spec.accel * spec.dt), u + spec.accel * spec.dt);
        const double d_next = std::max(spec.standoff, d - u * spec.dt);
        t += spec.dt;
        out.push_back({t, d_next, (d - d_next) / spec.dt, 0.0});
        d = d_next;
    }
    return out;
}

/// Drive-past run for bystanders: the robot runs the whole route at the mode
/// speed while the human watches from `offset` meters beside the path,
/// abeam of the midpoint. Distance falls to the offset and rises again, so v
/// changes sign after the pass. Bearing is the angle from the robot's heading
/// to the human.
inline std::vector<TrajectorySample> generate_passby_episode(const EpisodeSpec& spec, double offset,
                                                             std::uint64_t seed) {
    spec.validate();
    if (!(offset > 0.0)) throw validation_error("passby offset must be > 0");
    rng::Random rnd(seed);
    std::vector<TrajectorySample> out;
    const double cruise = spec.mode.speed;
    const double half = spec.route_length / 2.0;
    const std::size_t cap =
        static_cast<std::size_t>(10.0 * spec.route_length / (cruise * spec.dt)) + 1000;
    double x = 0.0;
    double u = 0.0;
    double t = 0.0;
    double d = std::hypot(offset, x - half);
    out.push_back({t, d, 0.0, std::atan2(offset, half - x)});
    while (x < spec.route_length - 1e-12 && out.size() < cap) {
        double target = std::min(cruise, std::sqrt(2.0 * spec.accel * (spec.route_length - x)));
        target *= detail::jitter_factor(rnd, spec.speed_jitter);
        u = std::clamp(target, std::max(0.0, u - spec.accel * spec.dt), u + spec.accel * spec.dt);
        x = std::min(spec.route_length, x + u * spec.dt);
        const double d_next = std::hypot(offset, x - half);
        t += spec.dt;
        out.push_back({t, d_next, (d - d_next) / spec.dt, std::atan2(offset, half - x)});
        d = d_next;
    }
    return out;
}

/// Snap a rating to the normalized 5-point grid {0, .25, .5, .75, 1}.
inline double quantize_rating(double r) {
    return std::clamp(std::round(r * 4.0) / 4.0, 0.0, 1.0);
}

/// Invert the noise model: rate an episode the way the synthetic participant
/// would, rating = clip(margin^rho* + eps, 0, 1) with Gaussian eps.
inline Observation synth_rating(std::span<const TrajectorySample> episode,
                                const SyntheticParticipant& who, Aggregation agg,
                                const SafetyParams& params, rng::Random& rnd,
                                std::string segment_id = {}) {
    if (episode.empty()) throw validation_error("episode is empty");
    Observation obs = build_observations(episode, 0.0, agg, params, std::move(segment_id));
    const double ideal = score_from_margin(obs.margin, Rho::clamped(who.rho_star));
    double rating = ideal + (who.rating_noise > 0.0 ? rnd.normal(0.0, who.rating_noise) : 0.0);
    rating = std::clamp(rating, 0.0, 1.0);
    if (who.quantize) rating = quantize_rating(rating);
    obs.rating = rating;
    return obs;
}

inline Observation synth_rating(std::span<const TrajectorySample> episode,
                                const SyntheticParticipant& who, Aggregation agg,
                                const SafetyParams& params, std::uint64_t seed,
                                std::string segment_id = {}) {
    rng::Random rnd(seed);
    return synth_rating(episode, who, agg, params, rnd, std::move(segment_id));
}

/// Direct observation-level generator for estimator studies: n margins drawn
/// uniformly from [margin_lo, margin_hi], rated under the noise model.
inline std::vector<Observation> synth_observations(double rho_star, std::size_t n,
                                                   double noise_sd, bool quantize,
                                                   double margin_lo, double margin_hi,
                                                   std::uint64_t seed) {
    if (n == 0) throw validation_error("need at least one observation");
    if (!(margin_lo < margin_hi)) throw validation_error("require margin_lo < margin_hi");
    rng::Random rnd(seed);
    const Rho rho = Rho::clamped(rho_star);
    std::vector<Observation> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = rnd.uniform(margin_lo, margin_hi);
        double rating = score_from_margin(m, rho);
        if (noise_sd > 0.0) rating += rnd.normal(0.0, noise_sd);
        rating = std::clamp(rating, 0.0, 1.0);
        if (quantize) rating = quantize_rating(rating);
        out.push_back({m, rating, "obs" + std::to_string(i)});
    }
    return out;
}

/// One trial of one participant: the trajectory plus the derived observation.
struct TrialRecord {
    OperatingMode mode;
    int trial = 1;  // 1 or 2, within mode
    int order = 0;  // presentation slot 0..5 in the randomized sequence
    std::vector<TrajectorySample> samples;
    Observation obs;
};

struct ParticipantData {
    SyntheticParticipant participant;
    std::vector<TrialRecord> trials; // exactly 6: 2 per mode
};

/// Cohort recipe. Role geometry differs on purpose: casualties are approached
/// head-on to a close standoff, bystanders watch the robot drive past at a
/// comfortable lateral offset. The rho* priors are truncated normals.
struct CohortSpec {
    std::size_t n_bys = 30;
    std::size_t n_cas = 31;
    double bys_rho_mean = 0.97;
    double bys_rho_sd = 0.93;
    double cas_rho_mean = 0.29;
    double cas_rho_sd = 0.28;
    double rating_noise = 0.05;
    bool quantize = false;
    double cas_standoff = 1.1;  // m, approach stop distance for casualties
    double bys_offset = 3.44;   // m, lateral pass-by offset for bystanders
    double route_length = 11.0;
    double dt = 0.1;
    double accel = 0.5;
    double jitter_auto = 0.02;
    double jitter_teleop = 0.10;
    Aggregation aggregation = Aggregation::WorstCase;
    SafetyParams safety{};

    void validate() const {
        if (n_bys < 1 || n_cas < 1) throw validation_error("need at least one participant per role");
        if (!(rating_noise >= 0.0)) throw validation_error("rating_noise must be >= 0");
        if (!(bys_rho_sd >= 0.0 && cas_rho_sd >= 0.0)) throw validation_error("rho sd must be >= 0");
        safety.validate();
        EpisodeSpec probe;
        probe.route_length = route_length;
        probe.dt = dt;
        probe.accel = accel;
        probe.standoff = cas_standoff;
        probe.validate();
        if (!(bys_offset > 0.0)) throw validation_error("bys_offset must be > 0");
    }
};

struct CohortDataset {
    CohortSpec spec;
    std::uint64_t seed = 0;
    std::vector<ParticipantData> participants;
};

namespace detail {

inline std::string participant_id(Role role, std::size_t index) {
    const std::string num = std::to_string(index + 1);
    return std::string(to_string(role)) + std::string(num.size() < 3 ? 3 - num.size() : 0, '0') + num;
}

inline ParticipantData generate_participant(const CohortSpec& spec, Role role, std::size_t index,
                                            std::uint64_t cohort_seed, std::uint64_t stream) {
    rng::Random rnd(rng::derive_stream(cohort_seed, stream));
    ParticipantData out;
    out.participant.id = participant_id(role, index);
    out.participant.role = role;
    const double mean = role == Role::CAS ? spec.cas_rho_mean : spec.bys_rho_mean;
    const double sd = role == Role::CAS ? spec.cas_rho_sd : spec.bys_rho_sd;
    out.participant.rho_star =
        sd > 0.0 ? rnd.truncated_normal(mean, sd, kRhoMin, kRhoMax) : std::clamp(mean, kRhoMin, kRhoMax);
    out.participant.rating_noise = spec.rating_noise;
    out.participant.quantize = spec.quantize;

    // 2 trials per mode, presented in randomized order
    std::vector<std::pair<ModeTag, int>> slots = {
        {ModeTag::AutonomousSlow, 1}, {ModeTag::AutonomousSlow, 2},
        {ModeTag::AutonomousFast, 1}, {ModeTag::AutonomousFast, 2},
        {ModeTag::Teleop, 1},         {ModeTag::Teleop, 2},
    };
    std::vector<std::size_t> order(slots.size());
    std::iota(order.begin(), order.end(), 0);
    rnd.shuffle(order);

    for (std::size_t slot = 0; slot < slots.size(); ++slot) {
        const auto [mode_tag, trial] = slots[slot];
        EpisodeSpec ep;
        ep.route_length = spec.route_length;
        ep.dt = spec.dt;
        ep.accel = spec.accel;
        ep.mode = OperatingMode::standard(mode_tag);
        ep.speed_jitter = mode_tag == ModeTag::Teleop ? spec.jitter_teleop : spec.jitter_auto;
        ep.standoff = spec.cas_standoff;

        TrialRecord rec;
        rec.mode = ep.mode;
        rec.trial = trial;
        rec.order = static_cast<int>(order[slot]);
        const std::uint64_t ep_seed = rnd.next_u64();
        rec.samples = role == Role::CAS
                          ? generate_episode(ep, ep_seed)
                          : generate_passby_episode(ep, spec.bys_offset, ep_seed);
        const std::string seg = out.participant.id + "/" + to_string(mode_tag) + "/" +
                                std::to_string(trial);
        rec.obs = synth_rating(rec.samples, out.participant, spec.aggregation, spec.safety, rnd, seg);
        out.trials.push_back(std::move(rec));
    }
    return out;
}

} // namespace detail

/// Generate the full synthetic cohort. Each participant consumes an
/// independent RNG stream derived from (seed, participant slot), so the
/// result is reproducible and order-independent.
inline CohortDataset generate_cohort(const CohortSpec& spec, std::uint64_t seed) {
    spec.validate();
    CohortDataset ds;
    ds.spec = spec;
    ds.seed = seed;
    ds.participants.reserve(spec.n_bys + spec.n_cas);
    std::uint64_t stream = 0;
    for (std::size_t i = 0; i < spec.n_bys; ++i) {
        ds.participants.push_back(detail::generate_participant(spec, Role::BYS, i, seed, stream++));
    }
    for (std::size_t i = 0; i < spec.n_cas; ++i) {
        ds.participants.push_back(detail::generate_participant(spec, Role::CAS, i, seed, stream++));
    }
    return ds;
}

/// Convenience overload mirroring the (counts, per-role rho prior, seed) call.
inline CohortDataset generate_cohort(std::size_t n_bys, std::size_t n_cas, double cas_rho_mean,
                                     double cas_rho_sd, double bys_rho_mean, double bys_rho_sd,
                                     std::uint64_t seed) {
    CohortSpec spec;
    spec.n_bys = n_bys;
    spec.n_cas = n_cas;
    spec.cas_rho_mean = cas_rho_mean;
    spec.cas_rho_sd = cas_rho_sd;
    spec.bys_rho_mean = bys_rho_mean;
    spec.bys_rho_sd = bys_rho_sd;
    return generate_cohort(spec, seed);
}

} // namespace gsi::sim

#endif
