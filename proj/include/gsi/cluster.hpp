#ifndef GSI_CLUSTER_HPP
#define GSI_CLUSTER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "gsi/errors.hpp"
#include "gsi/stats.hpp"

namespace gsi::stats {

struct ClusterResult {
    std::vector<int> labels;                // per point; -1 marks an outlier
    std::vector<std::vector<double>> modes; // cluster centers, one per label
    std::vector<std::size_t> counts;        // per-cluster sizes
    std::vector<std::size_t> outliers;      // indices of singleton points
    std::optional<double> silhouette;       // absent with fewer than 2 clusters
    double bandwidth = 0.0;
};

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

inline double multivariate_bandwidth(std::span<const std::vector<double>> pts) {
    const std::size_t n = pts.size();
    const std::size_t dim = pts[0].size();
    if (dim == 1) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = pts[i][0];
        return silverman_bandwidth(v);
    }
    double sd_sum = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = pts[i][k];
        sd_sum += describe(v).sd.value_or(0.0);
    }
    const double sd = sd_sum / static_cast<double>(dim);
    const double d = static_cast<double>(dim);
    return sd * std::pow(4.0 / ((d + 2.0) * static_cast<double>(n)), 1.0 / (d + 4.0));
}

} // namespace detail

/// Mean silhouette over all points (Euclidean distance). Points in singleton
/// clusters contribute 0. Requires at least two distinct cluster labels.
inline double silhouette(std::span<const std::vector<double>> points, std::span<const int> labels) {
    if (points.size() != labels.size()) throw validation_error("silhouette: size mismatch");
    if (points.empty()) throw validation_error("silhouette: empty input");
    std::vector<int> uniq(labels.begin(), labels.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() < 2) throw degenerate_input("silhouette: need at least 2 clusters");

    std::vector<std::size_t> sizes(uniq.size(), 0);
    const auto cluster_of = [&](int lab) {
        return static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), lab) - uniq.begin());
    };
    for (int lab : labels) ++sizes[cluster_of(lab)];

    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t ci = cluster_of(labels[i]);
        if (sizes[ci] <= 1) continue; // singleton contributes 0
        std::vector<double> mean_dist(uniq.size(), 0.0);
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            mean_dist[cluster_of(labels[j])] += std::sqrt(detail::sq_dist(points[i], points[j]));
        }
        const double a = mean_dist[ci] / static_cast<double>(sizes[ci] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < uniq.size(); ++c) {
            if (c == ci || sizes[c] == 0) continue;
            b = std::min(b, mean_dist[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(points.size());
}

/// Gaussian-kernel mean shift. Every point is iterated to its density mode
/// (shift tolerance 1e-4, max 300 iterations); modes closer than bandwidth/2
/// are merged; points take the label of the nearest merged mode. Clusters
/// that end up with a single member are reported as outliers (label -1).
/// Remaining clusters are numbered by decreasing size, ties broken by mode
/// coordinate, so labeling does not depend on input order.
inline ClusterResult mean_shift(std::span<const std::vector<double>> points,
                                std::optional<double> bandwidth = std::nullopt) {
    if (points.size() < 2) throw validation_error("mean_shift: need n >= 2");
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    if (dim < 1) throw validation_error("mean_shift: need dimension >= 1");
    for (const auto& p : points) {
        if (p.size() != dim) throw validation_error("mean_shift: inconsistent dimensions");
    }
    if (bandwidth && !(*bandwidth > 0.0)) throw validation_error("mean_shift: bandwidth must be > 0");

    ClusterResult res;
    res.labels.assign(n, 0);

    const bool all_same = std::all_of(points.begin(), points.end(),
                                      [&](const auto& p) { return p == points[0]; });
    double h = bandwidth ? *bandwidth : (all_same ? 1.0 : detail::multivariate_bandwidth(points));
    if (!(h > 0.0)) h = 1.0;
    res.bandwidth = h;

    if (all_same) {
        res.modes.push_back(points[0]);
        res.counts.push_back(n);
        return res;
    }

    constexpr double kShiftTol = 1e-4;
    constexpr int kMaxIters = 300;
    const double inv2h2 = 1.0 / (2.0 * h * h);

    std::vector<std::vector<double>> converged(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = points[i];
        std::vector<double> next(dim);
        for (int it = 0; it < kMaxIters; ++it) {
            std::fill(next.begin(), next.end(), 0.0);
            double wsum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = std::exp(-detail::sq_dist(x, points[j]) * inv2h2);
                wsum += w;
                for (std::size_t k = 0; k < dim; ++k) next[k] += w * points[j][k];
            }
            for (std::size_t k = 0; k < dim; ++k) next[k] /= wsum;
            const double shift = std::sqrt(detail::sq_dist(next, x));
            x = next;
            if (shift < kShiftTol) break;
        }
        converged[i] = std::move(x);
    }

    // merge modes closer than h/2 (transitive closure, order independent)
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    const double merge_r2 = (h / 2.0) * (h / 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (detail::sq_dist(converged[i], converged[j]) < merge_r2) {
                parent[find(i)] = find(j);
            }
        }
    }

    // one merged mode per component: mean of the members' converged positions
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < n; ++i) {
        if (find(i) == i) roots.push_back(i);
    }
    std::vector<std::vector<double>> centers(roots.size(), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> member_count(roots.size(), 0);
    const auto root_index = [&](std::size_t i) {
        const std::size_t r = find(i);
        return static_cast<std::size_t>(std::lower_bound(roots.begin(), roots.end(), r) - roots.begin());
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = root_index(i);
        ++member_count[c];
        for (std::size_t k = 0; k < dim; ++k) centers[c][k] += converged[i][k];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t k = 0; k < dim; ++k) centers[c][k] /= static_cast<double>(member_count[c]);
    }

    // label every point by its nearest merged mode
    std::vector<std::size_t> sizes(centers.size(), 0);
    std::vector<std::size_t> assign(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const double d2 = detail::sq_dist(converged[i], centers[c]);
            if (d2 < best_d) {
                best_d = d2;
                best = c;
            }
        }
        assign[i] = best;
        ++sizes[best];
    }

    // singletons become outliers; survivors get ids by (size desc, mode asc)
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        if (sizes[c] > 1) keep.push_back(c);
    }
    std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
        if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
        return centers[a] < centers[b];
    });
    std::vector<int> relabel(centers.size(), -1);
    for (std::size_t c = 0; c < keep.size(); ++c) {
        relabel[keep[c]] = static_cast<int>(c);
        res.modes.push_back(centers[keep[c]]);
        res.counts.push_back(sizes[keep[c]]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        res.labels[i] = relabel[assign[i]];
        if (res.labels[i] < 0) res.outliers.push_back(i);
    }

    if (res.modes.size() >= 2) {
        std::vector<std::vector<double>> clustered;
        std::vector<int> clustered_labels;
        for (std::size_t i = 0; i < n; ++i) {
            if (res.labels[i] >= 0) {
                clustered.push_back(points[i]);
                clustered_labels.push_back(res.labels[i]);
            }
        }
        res.silhouette = silhouette(clustered, clustered_labels);
    }
    return res;
}

/// 1-D convenience wrapper.
inline ClusterResult mean_shift(std::span<const double> values,
                                std::optional<double> bandwidth = std::nullopt) {
    std::vector<std::vector<double>> pts(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) pts[i] = {values[i]};
    return mean_shift(pts, bandwidth);
}

} // namespace gsi::stats

#endif
