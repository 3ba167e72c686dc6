#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gsi/estimation.hpp"
#include "gsi/rng.hpp"
#include "gsi/simulate.hpp"

using namespace gsi;
using Catch::Approx;

namespace {

// noise-free observations at a known exponent
std::vector<Observation> exact_obs(double rho_star, const std::vector<double>& margins) {
    std::vector<Observation> obs;
    for (const double m : margins) {
        obs.push_back({m, score_from_margin(m, Rho::clamped(rho_star)), ""});
    }
    return obs;
}

std::vector<double> uniform_margins(std::size_t n, double lo, double hi, std::uint64_t seed) {
    rng::Random rnd(seed);
    std::vector<double> m(n);
    for (auto& x : m) x = rnd.uniform(lo, hi);
    return m;
}

} // namespace

TEST_CASE("likert normalization", "[estimation]") {
    CHECK(normalize_likert(1, 5) == 0.0);
    CHECK(normalize_likert(3, 5) == 0.5);
    CHECK(normalize_likert(5, 5) == 1.0);
    CHECK(normalize_likert(5, 7) == Approx(4.0 / 6.0));
    CHECK_THROWS_AS(normalize_likert(0, 5), validation_error);
    CHECK_THROWS_AS(normalize_likert(6, 5), validation_error);
    CHECK_THROWS_AS(normalize_likert(3, 9), validation_error);
}

TEST_CASE("log likelihood values", "[estimation]") {
    LikelihoodConfig cfg;
    std::vector<Observation> obs = {{0.5, 0.5, ""}};
    CHECK(log_likelihood(Rho(1.0), obs, cfg) == 0.0);

    obs = {{0.5, 1.0, ""}};
    CHECK(log_likelihood(Rho(1.0), obs, cfg) == Approx(-0.125));

    obs = {{0.25, 0.5, ""}};
    CHECK(log_likelihood(Rho(0.5), obs, cfg) == Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(log_likelihood(Rho(1.0), std::vector<Observation>{}, cfg), validation_error);
    CHECK_THROWS_AS(log_likelihood(Rho(1.0), std::vector<Observation>{{0.5, 1.5, ""}}, cfg),
                    validation_error);
}

TEST_CASE("log likelihood is nonpositive, zero only for perfect fit", "[estimation][property]") {
    rng::Random rnd(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Observation> obs;
        for (int i = 0; i < 10; ++i) {
            obs.push_back({rnd.uniform(-0.2, 1.2), rnd.uniform(0.0, 1.0), ""});
        }
        const double l = log_likelihood(Rho(rnd.uniform(kRhoMin, kRhoMax)), obs);
        CHECK(l <= 0.0);
    }
    const auto perfect = exact_obs(0.8, {0.2, 0.5, 0.7});
    CHECK(log_likelihood(Rho(0.8), perfect) == 0.0);
}

TEST_CASE("gradient values and finite differences", "[estimation]") {
    LikelihoodConfig cfg;
    const auto perfect = exact_obs(1.0, {0.25, 0.5, 0.75});
    CHECK(log_likelihood_grad(Rho(1.0), perfect, cfg) == 0.0);

    std::vector<Observation> one = {{0.5, 1.0, ""}};
    CHECK(log_likelihood_grad(Rho(1.0), one, cfg) == Approx(-0.17328679513998632));

    SECTION("matches central finite differences") {
        rng::Random rnd(11);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<Observation> obs;
            const std::size_t n = 3 + trial % 10;
            for (std::size_t i = 0; i < n; ++i) {
                obs.push_back({rnd.uniform(0.05, 0.95), rnd.uniform(0.0, 1.0), ""});
            }
            const double rho = rnd.uniform(0.1, 5.0);
            const double h = 1e-5;
            const double fd = (log_likelihood(Rho(rho + h), obs, cfg) -
                               log_likelihood(Rho(rho - h), obs, cfg)) /
                              (2.0 * h);
            const double an = log_likelihood_grad(Rho(rho), obs, cfg);
            REQUIRE(std::abs(an - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("quasi-Newton fit", "[estimation]") {
    SECTION("noise-free recovery at rho* = 0.75") {
        const auto obs = exact_obs(0.75, uniform_margins(20, 0.1, 0.9, 21));
        const auto res = fit_rho_quasi_newton(obs);
        CHECK(res.converged);
        CHECK(res.rho_hat.value == Approx(0.75).margin(1e-4));
        CHECK(res.method == FitMethod::QuasiNewton);
        CHECK(res.n_obs == 20);
        CHECK(res.log_lik == Approx(-res.sse / 2.0));

        // grid oracle confirms the global optimum
        const auto grid = fit_rho_grid(obs, {}, 1e-3);
        CHECK(std::abs(res.rho_hat.value - grid.rho_hat.value) <= 2e-3);
    }
    SECTION("unidentifiable data throws") {
        std::vector<Observation> sat = {{1.3, 1.0, ""}, {2.0, 1.0, ""}};
        CHECK_THROWS_AS(fit_rho_quasi_newton(sat), unidentifiable_rho);
        std::vector<Observation> zero = {{-0.5, 0.0, ""}, {0.0, 0.0, ""}};
        CHECK_THROWS_AS(fit_rho_quasi_newton(zero), unidentifiable_rho);
    }
    SECTION("single observation closed form") {
        std::vector<Observation> one = {{0.5, 0.8179, ""}};
        const auto res = fit_rho_quasi_newton(one);
        const double expected = std::log(0.8179) / std::log(0.5);
        CHECK(res.rho_hat.value == Approx(expected).margin(1e-5));
        CHECK(res.rho_hat.value == Approx(0.29).margin(1e-3));
    }
    SECTION("saturated ratings on interior margins pin the lower bound") {
        std::vector<Observation> sat = {{0.5, 1.0, ""}, {0.7, 1.0, ""}, {0.9, 1.0, ""}};
        const auto res = fit_rho_quasi_newton(sat);
        CHECK(res.at_bound);
        CHECK(res.rho_hat.value == Approx(kRhoMin));
    }
}

TEST_CASE("fixed-step fit", "[estimation]") {
    LikelihoodConfig cfg;
    cfg.max_iters = 200000;

    SECTION("agrees with quasi-Newton on the rho* = 0.75 dataset") {
        const auto obs = exact_obs(0.75, uniform_margins(20, 0.1, 0.9, 22));
        const auto fs = fit_rho_fixed_step(obs, cfg);
        const auto qn = fit_rho_quasi_newton(obs, cfg);
        CHECK(fs.converged);
        CHECK(std::abs(fs.rho_hat.value - qn.rho_hat.value) <= 1e-3);
        CHECK(fs.method == FitMethod::FixedStep);
    }
    SECTION("perfect fit at rho_init is a fixed point") {
        const auto obs = exact_obs(1.0, {0.2, 0.4, 0.6, 0.8});
        const auto res = fit_rho_fixed_step(obs, cfg);
        CHECK(res.converged);
        CHECK(res.iterations == 0);
        CHECK(res.rho_hat.value == 1.0);
    }
    SECTION("projection keeps rho inside the box") {
        // all ratings 1.0 on interior margins drives rho to the lower bound
        std::vector<Observation> sat = {{0.5, 1.0, ""}, {0.6, 1.0, ""}};
        const auto res = fit_rho_fixed_step(sat, cfg);
        CHECK(res.rho_hat.value >= kRhoMin);
        CHECK(res.at_bound);
    }
}

TEST_CASE("grid fit", "[estimation]") {
    SECTION("brute force recovery") {
        const auto obs = exact_obs(0.75, uniform_margins(20, 0.1, 0.9, 23));
        const auto res = fit_rho_grid(obs, {}, 1e-3);
        CHECK(res.rho_hat.value == Approx(0.75).margin(5e-4));
        CHECK(res.converged);
    }
    SECTION("constant likelihood returns the smallest grid point, unconverged") {
        std::vector<Observation> sat = {{1.5, 1.0, ""}, {2.0, 1.0, ""}};
        const auto res = fit_rho_grid(sat, {}, 0.1);
        CHECK(res.rho_hat.value == kRhoMin);
        CHECK_FALSE(res.converged);
    }
    SECTION("coarse grid point count") {
        std::vector<Observation> obs = {{0.5, 0.6, ""}};
        const auto res = fit_rho_grid(obs, {}, 2.0);
        CHECK(res.iterations <= 6); // 0.01, 2.01, 4.01, 6.01, 8.01, 10
    }
    SECTION("bad step") {
        std::vector<Observation> obs = {{0.5, 0.6, ""}};
        CHECK_THROWS_AS(fit_rho_grid(obs, {}, 0.0), validation_error);
    }
}

TEST_CASE("sigma rescales the likelihood but not the argmax", "[estimation][property]") {
    const auto obs = exact_obs(1.4, uniform_margins(15, 0.15, 0.85, 31));
    // perturb ratings so the optimum is interior but nontrivial
    std::vector<Observation> noisy = obs;
    rng::Random rnd(5);
    for (auto& o : noisy) o.rating = std::clamp(o.rating + rnd.normal(0.0, 0.03), 0.0, 1.0);

    LikelihoodConfig base;
    double ref = fit_rho_quasi_newton(noisy, base).rho_hat.value;
    for (const double sigma : {0.25, 0.5, 2.0, 7.0}) {
        LikelihoodConfig cfg;
        cfg.sigma = sigma;
        CHECK(fit_rho_quasi_newton(noisy, cfg).rho_hat.value == Approx(ref).margin(1e-5));
        // likelihood value itself scales by 1/sigma^2
        CHECK(log_likelihood(Rho(1.4), noisy, cfg) ==
              Approx(log_likelihood(Rho(1.4), noisy, base) / (sigma * sigma)));
    }
}

TEST_CASE("oracle agreement on noisy synthetic datasets", "[estimation][property]") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        rng::Random rnd(seed);
        const double rho_star = rnd.uniform(0.1, 2.5);
        const auto obs = sim::synth_observations(rho_star, 12, 0.05, false, 0.1, 0.9, seed * 11);
        const auto qn = fit_rho_quasi_newton(obs);
        const auto grid = fit_rho_grid(obs, {}, 1e-3);
        REQUIRE(std::abs(qn.rho_hat.value - grid.rho_hat.value) <= 2e-3);
    }
}

TEST_CASE("estimation is consistent as observations double", "[estimation][property]") {
    std::vector<double> err12, err24;
    for (std::uint64_t seed = 1; seed <= 31; ++seed) {
        rng::Random rnd(seed * 7 + 1);
        const double rho_star = rnd.uniform(0.3, 2.0);
        const auto small = sim::synth_observations(rho_star, 12, 0.05, false, 0.1, 0.9, seed);
        const auto big = sim::synth_observations(rho_star, 24, 0.05, false, 0.1, 0.9, seed + 1000);
        err12.push_back(std::abs(fit_rho_quasi_newton(small).rho_hat.value - rho_star));
        err24.push_back(std::abs(fit_rho_quasi_newton(big).rho_hat.value - rho_star));
    }
    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    CHECK(median(err24) < median(err12));
}

TEST_CASE("worst-case aggregation commutes with the exponent", "[estimation][property]") {
    rng::Random rnd(77);
    SafetyParams params;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TrajectorySample> seg;
        const std::size_t n = 2 + trial % 6;
        for (std::size_t i = 0; i < n; ++i) {
            seg.push_back({static_cast<double>(i), rnd.uniform(0.5, 3.7), rnd.uniform(-0.5, 0.5), 0.0});
        }
        const Rho rho(rnd.uniform(kRhoMin, kRhoMax));
        const Observation agg = build_observations(seg, 0.5, Aggregation::WorstCase, params);
        double min_score = 1.0;
        for (const auto& s : seg) {
            min_score = std::min(min_score, score(s.d, s.v, rho, params));
        }
        REQUIRE(score_from_margin(agg.margin, rho) == min_score);
    }
}

TEST_CASE("build_observations aggregation modes", "[estimation]") {
    SafetyParams params;
    // craft samples whose margins are exactly 0.2, 0.5, 0.8 at v = 0
    const auto d_for = [&](double m) { return params.d_min + m * (params.d_max - params.d_min); };
    std::vector<TrajectorySample> seg = {
        {0.0, d_for(0.5), 0.0, 0.0}, {1.0, d_for(0.2), 0.0, 0.0}, {2.0, d_for(0.8), 0.0, 0.0}};

    const auto worst = build_observations(seg, 0.4, Aggregation::WorstCase, params, "seg");
    CHECK(worst.margin == Approx(0.2));
    CHECK(worst.rating == 0.4);
    CHECK(worst.segment_id == "seg");

    const auto mean = build_observations(seg, 0.4, Aggregation::Mean, params);
    CHECK(mean.margin == Approx(0.5));

    const std::vector<TrajectorySample> single = {seg[0]};
    CHECK(build_observations(single, 0.0, Aggregation::WorstCase, params).margin == Approx(0.5));
    CHECK(build_observations(single, 0.0, Aggregation::Mean, params).margin == Approx(0.5));

    CHECK_THROWS_AS(build_observations(std::vector<TrajectorySample>{}, 0.5,
                                       Aggregation::WorstCase, params),
                    validation_error);
}

TEST_CASE("config validation", "[estimation]") {
    LikelihoodConfig cfg;
    cfg.sigma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = {};
    cfg.eta = -1.0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = {};
    cfg.rho_init = 0.0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
}
