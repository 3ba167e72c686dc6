#ifndef GSI_ESTIMATION_HPP
#define GSI_ESTIMATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gsi/errors.hpp"
#include "gsi/safety.hpp"

namespace gsi {

/// One (margin, rating) pair: the atom of rho estimation. The margin is the
/// aggregate of a whole trajectory segment; the rating is the participant's
/// normalized perceived safety for that segment.
struct Observation {
    double margin = 0.0;    // aggregated safety margin of the segment
    double rating = 0.0;    // normalized perceived safety, in [0, 1]
    std::string segment_id; // opaque label (participant, mode, trial, ...)
};

/// How to collapse a trajectory segment into a single margin. Safety
/// judgments are risk-dominated, so the worst (minimum) margin is the
/// default; the mean is kept as an alternative.
enum class Aggregation { WorstCase, Mean };

inline const char* to_string(Aggregation a) {
    return a == Aggregation::WorstCase ? "worst_case" : "mean";
}

struct LikelihoodConfig {
    double sigma = 1.0;         // residual noise scale; cancels in the argmax
    double eta = 0.01;          // learning rate for fixed-step updates
    std::size_t max_iters = 500;
    double tol = 1e-6;          // convergence tolerance on |delta rho|
    double rho_init = 1.0;      // the live-experiment setting

    void validate() const {
        if (!(sigma > 0.0)) throw validation_error("sigma must be > 0");
        if (!(eta > 0.0)) throw validation_error("eta must be > 0");
        if (!(tol > 0.0)) throw validation_error("tol must be > 0");
        if (!(rho_init >= kRhoMin && rho_init <= kRhoMax)) {
            throw validation_error("rho_init outside rho bounds");
        }
    }
};

enum class FitMethod { QuasiNewton, FixedStep, Grid };

inline const char* to_string(FitMethod m) {
    switch (m) {
        case FitMethod::QuasiNewton: return "quasi_newton";
        case FitMethod::FixedStep: return "fixed_step";
        case FitMethod::Grid: return "grid";
    }
    return "?";
}

struct EstimationResult {
    Rho rho_hat{1.0};
    double log_lik = 0.0;      // -sse / (2 sigma^2)
    double sse = 0.0;          // sum of squared residuals at rho_hat
    std::size_t n_obs = 0;
    std::size_t iterations = 0;
    bool converged = false;
    bool at_bound = false;     // rho_hat landed on a box edge
    FitMethod method = FitMethod::QuasiNewton;
};

/// Map a k-of-N Likert response onto [0, 1].
inline double normalize_likert(int k, int scale_points) {
    if (scale_points != 5 && scale_points != 7) {
        throw validation_error("scale_points must be 5 or 7");
    }
    if (k < 1 || k > scale_points) {
        throw validation_error("likert value " + std::to_string(k) + " outside 1.." +
                               std::to_string(scale_points));
    }
    return static_cast<double>(k - 1) / static_cast<double>(scale_points - 1);
}

namespace detail {

inline void check_observations(std::span<const Observation> obs) {
    if (obs.empty()) throw validation_error("observation list is empty");
    for (const auto& o : obs) {
        if (!std::isfinite(o.margin)) throw validation_error("non-finite margin");
        if (!(o.rating >= 0.0 && o.rating <= 1.0)) {
            throw validation_error("rating " + std::to_string(o.rating) + " outside [0, 1]");
        }
    }
}

inline double sse_at(double rho_value, std::span<const Observation> obs) {
    const Rho rho = Rho::clamped(rho_value);
    double s = 0.0;
    for (const auto& o : obs) {
        const double r = o.rating - score_from_margin(o.margin, rho);
        s += r * r;
    }
    return s;
}

} // namespace detail

/// True when at least one margin lies strictly inside (0, 1). Margins at or
/// beyond the clip edges carry no information about rho.
inline bool identifiable(std::span<const Observation> obs) {
    return std::any_of(obs.begin(), obs.end(),
                       [](const Observation& o) { return o.margin > 0.0 && o.margin < 1.0; });
}

/// Gaussian-residual log-likelihood: -(1 / 2 sigma^2) * sum (rating - gsi)^2.
/// Always <= 0; 0 exactly when every residual vanishes.
inline double log_likelihood(Rho rho, std::span<const Observation> obs,
                             const LikelihoodConfig& cfg = {}) {
    cfg.validate();
    detail::check_observations(obs);
    return -detail::sse_at(rho.value, obs) / (2.0 * cfg.sigma * cfg.sigma);
}

/// Analytic d l / d rho = (1 / sigma^2) * sum (rating - gsi) * d gsi / d rho.
inline double log_likelihood_grad(Rho rho, std::span<const Observation> obs,
                                  const LikelihoodConfig& cfg = {}) {
    cfg.validate();
    detail::check_observations(obs);
    double g = 0.0;
    for (const auto& o : obs) {
        const double resid = o.rating - score_from_margin(o.margin, rho);
        g += resid * score_grad_rho(o.margin, rho);
    }
    return g / (cfg.sigma * cfg.sigma);
}

namespace detail {

inline EstimationResult make_result(double rho_value, std::span<const Observation> obs,
                                    const LikelihoodConfig& cfg, std::size_t iters,
                                    bool converged, FitMethod method) {
    EstimationResult res;
    res.rho_hat = Rho::clamped(rho_value);
    res.sse = sse_at(res.rho_hat.value, obs);
    res.log_lik = -res.sse / (2.0 * cfg.sigma * cfg.sigma);
    res.n_obs = obs.size();
    res.iterations = iters;
    res.converged = converged;
    res.at_bound = res.rho_hat.value <= kRhoMin + 1e-12 || res.rho_hat.value >= kRhoMax - 1e-12;
    res.method = method;
    return res;
}

} // namespace detail

/// Maximize the log-likelihood with a 1-D quasi-Newton (secant curvature)
/// search over xi = ln(rho), which keeps rho positive without penalties.
/// Steps use backtracking with a sufficient-decrease test and project onto
/// the rho box. Converges when the gradient or the rho step drops below tol.
inline EstimationResult fit_rho_quasi_newton(std::span<const Observation> obs,
                                             const LikelihoodConfig& cfg = {}) {
    cfg.validate();
    detail::check_observations(obs);
    if (!identifiable(obs)) {
        throw unidentifiable_rho("no margin strictly inside (0, 1); likelihood is constant in rho");
    }

    const double xi_lo = std::log(kRhoMin);
    const double xi_hi = std::log(kRhoMax);
    const auto clamp_xi = [&](double xi) { return std::clamp(xi, xi_lo, xi_hi); };
    // minimize f(xi) = sse(exp(xi)); d f / d xi = -2 sigma^2 l'(rho) * rho
    const auto f = [&](double xi) { return detail::sse_at(std::exp(xi), obs); };
    const auto fgrad = [&](double xi) {
        const double rho = std::exp(xi);
        double g = 0.0;
        for (const auto& o : obs) {
            const double resid = o.rating - score_from_margin(o.margin, Rho::clamped(rho));
            g += resid * score_grad_rho(o.margin, Rho::clamped(rho));
        }
        return -2.0 * g * rho;
    };

    double xi = clamp_xi(std::log(cfg.rho_init));
    double fx = f(xi);
    double g = fgrad(xi);
    double curv_inv = 1.0; // scalar inverse-Hessian estimate, kept positive
    const double gtol = cfg.tol;
    std::size_t it = 0;
    bool converged = std::abs(g) < gtol;

    while (!converged && it < cfg.max_iters) {
        ++it;
        const double dir = -curv_inv * g;
        double alpha = 1.0;
        double xi_new = xi;
        double f_new = fx;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const double cand = clamp_xi(xi + alpha * dir);
            if (cand == xi) break; // pinned on the box edge
            const double fc = f(cand);
            if (fc <= fx + 1e-4 * g * (cand - xi)) {
                xi_new = cand;
                f_new = fc;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) {
            // no admissible step: either at a bound with an outward gradient
            // or the step underflowed; the parameter step is below tol
            converged = true;
            break;
        }
        const double g_new = fgrad(xi_new);
        const double s = xi_new - xi;
        const double y = g_new - g;
        if (s * y > 1e-18) curv_inv = s / y;
        const double drho = std::abs(std::exp(xi_new) - std::exp(xi));
        xi = xi_new;
        fx = f_new;
        g = g_new;
        if (std::abs(g) < gtol || drho < cfg.tol) converged = true;
    }

    return detail::make_result(std::exp(xi), obs, cfg, it, converged, FitMethod::QuasiNewton);
}

/// The plain fixed-step ascent rho <- rho + eta * dl/drho, projected onto the
/// rho box each step. Stops when the projected step drops below tol. Slower
/// than the quasi-Newton search but follows the published update verbatim.
inline EstimationResult fit_rho_fixed_step(std::span<const Observation> obs,
                                           const LikelihoodConfig& cfg = {}) {
    cfg.validate();
    detail::check_observations(obs);
    if (!identifiable(obs)) {
        throw unidentifiable_rho("no margin strictly inside (0, 1); likelihood is constant in rho");
    }

    double rho = std::clamp(cfg.rho_init, kRhoMin, kRhoMax);
    std::size_t moves = 0;
    bool converged = false;
    while (moves < cfg.max_iters) {
        const double g = log_likelihood_grad(Rho::clamped(rho), obs, cfg);
        const double next = std::clamp(rho + cfg.eta * g, kRhoMin, kRhoMax);
        if (std::abs(next - rho) < cfg.tol) {
            converged = true;
            break;
        }
        rho = next;
        ++moves;
    }
    return detail::make_result(rho, obs, cfg, moves, converged, FitMethod::FixedStep);
}

/// Brute-force oracle: evaluate the likelihood on a uniform rho grid over the
/// full box and take the argmax, breaking ties toward smaller rho. A constant
/// likelihood (unidentifiable data) returns the smallest grid point with
/// converged = false rather than throwing, so the oracle stays total.
inline EstimationResult fit_rho_grid(std::span<const Observation> obs,
                                     const LikelihoodConfig& cfg, double grid_step) {
    cfg.validate();
    detail::check_observations(obs);
    if (!(grid_step > 0.0)) throw validation_error("grid_step must be > 0");

    double best_rho = kRhoMin;
    double best_sse = detail::sse_at(kRhoMin, obs);
    double worst_sse = best_sse;
    std::size_t evals = 1;
    bool done_max = false;
    for (std::size_t k = 1;; ++k) {
        double rho = kRhoMin + grid_step * static_cast<double>(k);
        if (rho >= kRhoMax - 1e-12) {
            if (done_max) break;
            rho = kRhoMax;
            done_max = true;
        }
        const double s = detail::sse_at(rho, obs);
        ++evals;
        if (s < best_sse) {
            best_sse = s;
            best_rho = rho;
        }
        worst_sse = std::max(worst_sse, s);
        if (done_max) break;
    }
    const bool constant = (worst_sse - best_sse) <= 1e-15 * std::max(1.0, worst_sse);
    return detail::make_result(best_rho, obs, cfg, evals, !constant, FitMethod::Grid);
}

/// Collapse a trajectory segment plus its rating into one Observation.
inline Observation build_observations(std::span<const TrajectorySample> samples, double rating,
                                      Aggregation agg, const SafetyParams& params,
                                      std::string segment_id = {}) {
    params.validate();
    if (samples.empty()) throw validation_error("trajectory segment is empty");
    if (!(rating >= 0.0 && rating <= 1.0)) throw validation_error("rating outside [0, 1]");
    double margin;
    if (agg == Aggregation::WorstCase) {
        margin = safety_margin(samples[0].d, samples[0].v, params);
        for (const auto& s : samples.subspan(1)) {
            margin = std::min(margin, safety_margin(s.d, s.v, params));
        }
    } else {
        double sum = 0.0;
        for (const auto& s : samples) sum += safety_margin(s.d, s.v, params);
        margin = sum / static_cast<double>(samples.size());
    }
    return Observation{margin, rating, std::move(segment_id)};
}

} // namespace gsi

#endif
