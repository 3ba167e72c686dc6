#ifndef GSI_STATS_HPP
#define GSI_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "gsi/errors.hpp"

namespace gsi::stats {

struct DescriptiveSummary {
    std::size_t n = 0;
    double mean = 0.0;
    std::optional<double> sd; // unbiased; absent for n < 2
    std::optional<double> se; // sd / sqrt(n)
    double min = 0.0;
    double max = 0.0;
};

inline DescriptiveSummary describe(std::span<const double> values) {
    if (values.empty()) throw validation_error("describe: empty input");
    DescriptiveSummary s;
    s.n = values.size();
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.sd = sd;
        s.se = sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

enum class TestMethod { Pearson, MannWhitneyU, WilcoxonSignedRank };

inline const char* to_string(TestMethod m) {
    switch (m) {
        case TestMethod::Pearson: return "pearson";
        case TestMethod::MannWhitneyU: return "mann_whitney_u";
        case TestMethod::WilcoxonSignedRank: return "wilcoxon_signed_rank";
    }
    return "?";
}

struct TestResult {
    double statistic = 0.0; // r, U (first sample), or W = min(W+, W-)
    double p_value = 1.0;   // two-sided
    double effect_r = 0.0;  // r itself, or |z| / sqrt(N)
    double z = 0.0;         // standardized statistic (rank tests)
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    TestMethod method = TestMethod::Pearson;
    bool exact = false;     // p came from exact enumeration rather than the
                            // normal approximation
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Pearson correlation with a two-sided p from the t distribution on n - 2
/// degrees of freedom.
inline TestResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw validation_error("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw validation_error("pearson: need n >= 3");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw degenerate_input("pearson: constant input vector");

    TestResult res;
    res.method = TestMethod::Pearson;
    res.n_a = res.n_b = n;
    res.statistic = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    res.effect_r = res.statistic;
    const double r2 = res.statistic * res.statistic;
    if (r2 >= 1.0) {
        res.p_value = 0.0;
        res.z = std::numeric_limits<double>::infinity();
    } else {
        const double df = static_cast<double>(n - 2);
        const double t = res.statistic * std::sqrt(df / (1.0 - r2));
        boost::math::students_t dist(df);
        res.p_value = 2.0 * boost::math::cdf(dist, -std::abs(t));
        res.z = t;
    }
    return res;
}

namespace detail {

/// Midranks of the values, ties averaged. Returned doubled (2 * rank) so that
/// every entry is an exact integer even with ties.
inline std::vector<long long> double_midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<long long> out(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        // average of ranks i+1 .. j+1, doubled: (i + j + 2)
        const long long dr = static_cast<long long>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) out[idx[k]] = dr;
        i = j + 1;
    }
    return out;
}

/// Sum over tie groups of t^3 - t, for rank-test variance corrections.
inline double tie_term(std::span<const double> values) {
    std::map<double, std::size_t> counts;
    for (double v : values) ++counts[v];
    double s = 0.0;
    for (const auto& [v, t] : counts) {
        const double td = static_cast<double>(t);
        s += td * td * td - td;
    }
    return s;
}

/// Distribution of the doubled rank sum of an n_pick-subset of the given
/// doubled ranks: dist[s] = number of subsets with doubled rank sum s.
/// Counts are exact in double up to 2^53 subsets.
inline std::vector<double> subset_ranksum_counts(const std::vector<long long>& dranks,
                                                 std::size_t n_pick) {
    long long total = 0;
    for (long long r : dranks) total += r;
    std::vector<std::vector<double>> dp(n_pick + 1,
                                        std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    dp[0][0] = 1.0;
    for (long long r : dranks) {
        for (std::size_t k = std::min(n_pick, dp.size() - 1); k >= 1; --k) {
            auto& row = dp[k];
            const auto& prev = dp[k - 1];
            for (long long s = total; s >= r; --s) {
                if (prev[static_cast<std::size_t>(s - r)] != 0.0) {
                    row[static_cast<std::size_t>(s)] += prev[static_cast<std::size_t>(s - r)];
                }
            }
        }
    }
    return dp[n_pick];
}

} // namespace detail

/// Mann-Whitney U with midrank ties. The reported statistic is U for the
/// first sample. p is exact (distribution of U over all group labelings,
/// two-sided as P(|U - mu| >= |u - mu|)) when min(n) <= 8, otherwise the
/// normal approximation with tie correction and continuity correction.
/// effect_r = |z| / sqrt(n_a + n_b).
inline TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw validation_error("mann_whitney_u: empty sample");
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<long long> dranks = detail::double_midranks(pooled);

    long long dra = 0; // doubled rank sum of sample a
    for (std::size_t i = 0; i < na; ++i) dra += dranks[i];
    const double u_a = static_cast<double>(dra) / 2.0 -
                       static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;

    const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
    const double ties = detail::tie_term(pooled);
    const double nd = static_cast<double>(n);
    const double var = (static_cast<double>(na) * static_cast<double>(nb) / 12.0) *
                       ((nd + 1.0) - ties / (nd * (nd - 1.0)));
    const double sigma = var > 0.0 ? std::sqrt(var) : 0.0;

    TestResult res;
    res.method = TestMethod::MannWhitneyU;
    res.n_a = na;
    res.n_b = nb;
    res.statistic = u_a;
    res.z = sigma > 0.0 ? (u_a - mu) / sigma : 0.0;
    res.effect_r = std::abs(res.z) / std::sqrt(nd);

    // exact path: min group <= 8; the pooled-size cap keeps the rank-sum DP
    // allocation bounded (the normal approximation is indistinguishable past
    // a couple hundred pooled observations anyway)
    if (std::min(na, nb) <= 8 && n <= 200) {
        res.exact = true;
        if (sigma == 0.0) {
            res.p_value = 1.0; // every labeling gives the same U
            return res;
        }
        // work in doubled units so all comparisons are integer-exact: the
        // doubled rank sum dra = 2 R_a has mean n_a (n + 1), and
        // |2 U - 2 mu| = |2 R_a - n_a (n + 1)|
        const long long dmu_r = static_cast<long long>(na) * static_cast<long long>(n + 1);
        const long long observed_dev = std::llabs(dra - dmu_r);
        const std::vector<double> counts = detail::subset_ranksum_counts(dranks, na);
        double extreme = 0.0, total = 0.0;
        for (std::size_t s = 0; s < counts.size(); ++s) {
            if (counts[s] == 0.0) continue;
            total += counts[s];
            if (std::llabs(static_cast<long long>(s) - dmu_r) >= observed_dev) {
                extreme += counts[s];
            }
        }
        res.p_value = extreme / total;
    } else {
        double num = u_a - mu;
        if (num > 0.5) num -= 0.5;
        else if (num < -0.5) num += 0.5;
        else num = 0.0;
        const double zc = sigma > 0.0 ? num / sigma : 0.0;
        res.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(zc)));
    }
    return res;
}

/// Wilcoxon signed-rank on paired samples. Zero differences are dropped
/// (classic convention). The statistic is W = min(W+, W-). p is exact
/// (distribution of W+ over all 2^n sign assignments, two-sided tail sum)
/// for n <= 25 retained pairs, otherwise the normal approximation with tie
/// correction. effect_r = |z| / sqrt(n_pairs_used).
inline TestResult wilcoxon_signed_rank(std::span<const double> pre, std::span<const double> post) {
    if (pre.size() != post.size()) throw validation_error("wilcoxon: length mismatch");
    if (pre.empty()) throw validation_error("wilcoxon: empty input");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        const double d = post[i] - pre[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw degenerate_input("wilcoxon: all differences are zero");
    const std::size_t n = diffs.size();

    std::vector<double> absd(n);
    for (std::size_t i = 0; i < n; ++i) absd[i] = std::abs(diffs[i]);
    const std::vector<long long> dranks = detail::double_midranks(absd);

    long long dw_plus = 0, dw_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        dw_total += dranks[i];
        if (diffs[i] > 0.0) dw_plus += dranks[i];
    }
    const double w_plus = static_cast<double>(dw_plus) / 2.0;
    const double w_minus = static_cast<double>(dw_total - dw_plus) / 2.0;

    const double nd = static_cast<double>(n);
    const double mu = nd * (nd + 1.0) / 4.0;
    const double ties = detail::tie_term(absd);
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - ties / 48.0;
    const double sigma = var > 0.0 ? std::sqrt(var) : 0.0;

    TestResult res;
    res.method = TestMethod::WilcoxonSignedRank;
    res.n_a = res.n_b = n;
    res.statistic = std::min(w_plus, w_minus);
    res.z = sigma > 0.0 ? (w_plus - mu) / sigma : 0.0;
    res.effect_r = std::abs(res.z) / std::sqrt(nd);

    if (n <= 25) {
        res.exact = true;
        // distribution of doubled W+ over sign assignments: subset sums of
        // the doubled ranks
        std::vector<double> dist(static_cast<std::size_t>(dw_total) + 1, 0.0);
        dist[0] = 1.0;
        for (long long r : dranks) {
            for (long long s = dw_total; s >= r; --s) {
                if (dist[static_cast<std::size_t>(s - r)] != 0.0) {
                    dist[static_cast<std::size_t>(s)] += dist[static_cast<std::size_t>(s - r)];
                }
            }
        }
        const long long lo = std::min(dw_plus, dw_total - dw_plus);
        const long long hi = std::max(dw_plus, dw_total - dw_plus);
        double extreme = 0.0, total = 0.0;
        for (long long s = 0; s <= dw_total; ++s) {
            const double c = dist[static_cast<std::size_t>(s)];
            if (c == 0.0) continue;
            total += c;
            if (s <= lo || s >= hi) extreme += c;
        }
        res.p_value = std::min(1.0, extreme / total);
    } else {
        res.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(res.z)));
    }
    return res;
}

/// Silverman's rule-of-thumb bandwidth for 1-D data (robust variant).
inline double silverman_bandwidth(std::span<const double> values) {
    if (values.size() < 2) throw validation_error("bandwidth: need n >= 2");
    const DescriptiveSummary s = describe(values);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return i + 1 < sorted.size() ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac : sorted[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    const double sd = s.sd.value_or(0.0);
    double scale = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    if (scale <= 0.0) scale = std::max(std::abs(s.mean) * 1e-6, 1e-9);
    return 0.9 * scale * std::pow(static_cast<double>(values.size()), -0.2);
}

/// Gaussian kernel density estimate on a uniform grid. The grid spans the
/// data padded by 3.5 bandwidths on both sides (covers the +-3h window with
/// enough slack that the trapezoid integral stays within 1e-3 of 1).
inline std::vector<std::pair<double, double>> kde_1d(std::span<const double> values,
                                                     std::optional<double> bandwidth = std::nullopt,
                                                     std::size_t grid = 401) {
    if (values.size() < 2) throw validation_error("kde_1d: need n >= 2");
    if (grid < 2) throw validation_error("kde_1d: need grid >= 2");
    const double h = bandwidth ? *bandwidth : silverman_bandwidth(values);
    if (!(h > 0.0)) throw validation_error("kde_1d: bandwidth must be > 0");
    const double lo = *std::min_element(values.begin(), values.end()) - 3.5 * h;
    const double hi = *std::max_element(values.begin(), values.end()) + 3.5 * h;
    const double step = (hi - lo) / static_cast<double>(grid - 1);
    const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * M_PI));
    std::vector<std::pair<double, double>> out;
    out.reserve(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = lo + step * static_cast<double>(i);
        double dens = 0.0;
        for (double v : values) {
            const double u = (x - v) / h;
            dens += std::exp(-0.5 * u * u);
        }
        out.emplace_back(x, dens * norm);
    }
    return out;
}

} // namespace gsi::stats

#endif
