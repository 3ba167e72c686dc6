#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "gsi/cluster.hpp"
#include "gsi/rng.hpp"

using namespace gsi;
using namespace gsi::stats;
using Catch::Approx;

namespace {

std::vector<double> blob(double center, double spread, std::size_t n, rng::Random& rnd) {
    std::vector<double> v(n);
    for (auto& x : v) x = center + rnd.uniform(-spread, spread);
    return v;
}

} // namespace

TEST_CASE("two separated blobs", "[cluster]") {
    rng::Random rnd(1);
    std::vector<double> pts = blob(0.95, 0.005, 20, rnd);
    const auto more = blob(0.60, 0.005, 20, rnd);
    pts.insert(pts.end(), more.begin(), more.end());

    const auto res = mean_shift(pts, 0.05);
    REQUIRE(res.counts.size() == 2);
    CHECK(res.counts[0] == 20);
    CHECK(res.counts[1] == 20);
    CHECK(res.outliers.empty());
    REQUIRE(res.silhouette.has_value());
    CHECK(*res.silhouette > 0.9);

    // cluster 0 is the larger-or-first by deterministic ordering; modes land
    // on the blob centers
    std::vector<double> modes = {res.modes[0][0], res.modes[1][0]};
    std::sort(modes.begin(), modes.end());
    CHECK(modes[0] == Approx(0.60).margin(0.01));
    CHECK(modes[1] == Approx(0.95).margin(0.01));
}

TEST_CASE("identical points collapse to one cluster", "[cluster]") {
    std::vector<double> pts(7, 0.42);
    const auto res = mean_shift(pts);
    REQUIRE(res.counts.size() == 1);
    CHECK(res.counts[0] == 7);
    CHECK(res.modes[0][0] == 0.42);
    CHECK_FALSE(res.silhouette.has_value());
}

TEST_CASE("three blobs with an outlier", "[cluster]") {
    rng::Random rnd(2);
    std::vector<double> pts = blob(0.95, 0.004, 12, rnd);
    auto b2 = blob(0.75, 0.004, 9, rnd);
    auto b3 = blob(0.55, 0.004, 5, rnd);
    pts.insert(pts.end(), b2.begin(), b2.end());
    pts.insert(pts.end(), b3.begin(), b3.end());
    pts.push_back(0.2); // lone point far from everything

    const auto res = mean_shift(pts, 0.04);
    REQUIRE(res.counts.size() == 3);
    CHECK(res.counts[0] == 12);
    CHECK(res.counts[1] == 9);
    CHECK(res.counts[2] == 5);
    REQUIRE(res.outliers.size() == 1);
    CHECK(res.outliers[0] == pts.size() - 1);
    CHECK(res.labels[pts.size() - 1] == -1);
    REQUIRE(res.silhouette.has_value());
    CHECK(*res.silhouette > 0.6);

    // counts + outliers account for every point
    std::size_t total = res.outliers.size();
    for (const auto c : res.counts) total += c;
    CHECK(total == pts.size());
}

TEST_CASE("labels are input-order invariant", "[cluster]") {
    rng::Random rnd(3);
    std::vector<double> pts = blob(0.9, 0.01, 10, rnd);
    auto b2 = blob(0.5, 0.01, 6, rnd);
    pts.insert(pts.end(), b2.begin(), b2.end());

    const auto base = mean_shift(pts, 0.05);

    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng::Random shuf(4);
    shuf.shuffle(perm);
    std::vector<double> shuffled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];

    const auto mixed = mean_shift(shuffled, 0.05);
    REQUIRE(mixed.counts == base.counts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(mixed.labels[i] == base.labels[perm[i]]);
    }
}

TEST_CASE("silhouette", "[cluster]") {
    SECTION("tight far blobs approach 1") {
        std::vector<std::vector<double>> pts;
        std::vector<int> labels;
        rng::Random rnd(5);
        for (int i = 0; i < 15; ++i) {
            pts.push_back({rnd.uniform(-0.01, 0.01)});
            labels.push_back(0);
        }
        for (int i = 0; i < 15; ++i) {
            pts.push_back({10.0 + rnd.uniform(-0.01, 0.01)});
            labels.push_back(1);
        }
        CHECK(silhouette(pts, labels) > 0.95);
    }
    SECTION("interleaved identical blobs are near zero") {
        std::vector<std::vector<double>> pts;
        std::vector<int> labels;
        for (int i = 0; i < 20; ++i) {
            pts.push_back({static_cast<double>(i % 10)});
            labels.push_back(i % 2);
        }
        CHECK(std::abs(silhouette(pts, labels)) < 0.1);
    }
    SECTION("bounded in [-1, 1]") {
        rng::Random rnd(6);
        for (int t = 0; t < 20; ++t) {
            std::vector<std::vector<double>> pts;
            std::vector<int> labels;
            for (int i = 0; i < 12; ++i) {
                pts.push_back({rnd.uniform(0.0, 1.0), rnd.uniform(0.0, 1.0)});
                labels.push_back(static_cast<int>(rnd.uniform_below(3)));
            }
            if (std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels[0]; })) {
                continue;
            }
            const double s = silhouette(pts, labels);
            REQUIRE(s >= -1.0);
            REQUIRE(s <= 1.0);
        }
    }
    SECTION("single cluster is degenerate") {
        std::vector<std::vector<double>> pts = {{0.0}, {1.0}};
        std::vector<int> labels = {0, 0};
        CHECK_THROWS_AS(silhouette(pts, labels), degenerate_input);
    }
}

TEST_CASE("mean shift validation", "[cluster]") {
    std::vector<double> pts = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(mean_shift(pts, 0.0), validation_error);
    CHECK_THROWS_AS(mean_shift(pts, -1.0), validation_error);
    std::vector<double> one = {0.1};
    CHECK_THROWS_AS(mean_shift(one), validation_error);
    std::vector<std::vector<double>> ragged = {{0.1, 0.2}, {0.3}};
    CHECK_THROWS_AS(mean_shift(ragged), validation_error);
}
