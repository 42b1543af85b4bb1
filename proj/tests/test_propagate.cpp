#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sdp/error.hpp"
#include "sdp/propagate.hpp"

using namespace sdp;
using testing_support::random_image;
using testing_support::random_volume;

namespace {

// Literal loop over features in the given order, in double precision.
std::vector<double> propagate_oracle(const CostVolume& cv, const std::vector<FeatureDisparity>& feats,
                                     const Image& img, double gamma) {
    std::vector<double> out(cv.data().begin(), cv.data().end());
    const auto idx = [&](int x, int y, int d) { return (static_cast<std::size_t>(y) * cv.width() + x) * cv.dmax() + d; };
    for (const auto& f : feats) {
        out[idx(f.x, f.y, f.d)] = 0.0;
        for (int qy = f.y - 2; qy <= f.y + 2; ++qy)
            for (int qx = f.x - 2; qx <= f.x + 2; ++qx) {
                if (qx < 0 || qy < 0 || qx >= cv.width() || qy >= cv.height()) continue;
                double l1 = 0.0;
                for (int c = 0; c < img.channels(); ++c) l1 += std::abs(img.at(f.x, f.y, c) - img.at(qx, qy, c));
                out[idx(qx, qy, f.d)] *= 1.0 - std::exp(-l1 / gamma);
            }
    }
    return out;
}

SparseDisparityMap map_of(int w, int h, const std::vector<FeatureDisparity>& feats) {
    SparseDisparityMap m(w, h);
    for (const auto& f : feats) m.set(f.x, f.y, f.d);
    return m;
}

}  // namespace

TEST_CASE("support weight") {
    Image img(3, 1, 3, 0.0f);
    img.at(1, 0, 0) = 10.0f;
    img.at(2, 0, 0) = 15.0f, img.at(2, 0, 1) = 10.0f, img.at(2, 0, 2) = 5.0f;
    CHECK(support_weight(img, 0, 0, 0, 0, 10.0) == 1.0);
    CHECK(std::abs(support_weight(img, 0, 0, 1, 0, 10.0) - std::exp(-1.0)) < 1e-12);
    CHECK(std::abs(support_weight(img, 0, 0, 2, 0, 10.0) - std::exp(-3.0)) < 1e-12);
    PropagationParams p;
    p.spatial_sigma = 2.0;
    CHECK(std::abs(support_weight(img, 0, 0, 1, 0, p) - std::exp(-1.0) * std::exp(-0.5)) < 1e-12);
    CHECK_THROWS_AS(support_weight(img, 0, 0, 1, 0, 0.0), ValidationError);
}

TEST_CASE("propagation updates") {
    const PropagationParams params;
    SUBCASE("empty map leaves the volume bit-identical") {
        const CostVolume cv = random_volume(20, 15, 8, 1);
        CHECK(propagate(cv, SparseDisparityMap(20, 15), random_image(20, 15, 3, 2), params) == cv);
    }
    SUBCASE("uniform color annihilates the window") {
        const CostVolume cv = random_volume(20, 15, 8, 3);
        const CostVolume out = propagate(cv, map_of(20, 15, {{10, 7, 3}}), Image(20, 15, 3, 100.0f), params);
        for (int y = 0; y < 15; ++y)
            for (int x = 0; x < 20; ++x)
                for (int d = 0; d < 8; ++d) {
                    const bool in_window = std::abs(x - 10) <= 2 && std::abs(y - 7) <= 2 && d == 3;
                    if (in_window) CHECK(out.at(x, y, d) == 0.0f);
                    else CHECK(out.at(x, y, d) == cv.at(x, y, d));
                }
    }
    SUBCASE("quarter weight") {
        // w = 0.25 needs an L1 color distance of gamma * ln 4.
        Image img(5, 5, 1, 0.0f);
        img.at(3, 2) = static_cast<float>(10.0 * std::log(4.0));
        CostVolume cv(5, 5, 4, 0.8f);
        const CostVolume out = propagate(cv, map_of(5, 5, {{2, 2, 2}}), img, params);
        CHECK(out.at(3, 2, 2) == doctest::Approx(0.6).epsilon(1e-6));
        CHECK(out.at(2, 2, 2) == 0.0f);
        CHECK(out.at(3, 2, 1) == 0.8f);
    }
    SUBCASE("zero and out-of-range disparities") {
        const CostVolume cv = random_volume(10, 10, 4, 5);
        std::vector<std::string> warnings;
        const std::vector<FeatureDisparity> feats{{3, 3, 0}, {5, 5, 4}, {12, 1, 2}};
        CostVolume out = cv;
        propagate_in_place(out, feats, random_image(10, 10, 1, 6), params, &warnings);
        CHECK(out == cv);
        CHECK(warnings.size() == 2);
    }
    SUBCASE("mismatched dimensions") {
        const CostVolume cv = random_volume(10, 10, 4, 5);
        CHECK_THROWS_AS(propagate(cv, SparseDisparityMap(9, 10), random_image(10, 10, 1, 1), params), ValidationError);
        CHECK_THROWS_AS(propagate(cv, SparseDisparityMap(10, 10), random_image(9, 10, 1, 1), params), ValidationError);
    }
}

TEST_CASE("propagation invariants on random instances") {
    const PropagationParams params;
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 12 + trial % 7, h = 9 + trial % 5, D = 6;
        const Image img = random_image(w, h, 3, 100 + trial, 90, 130);
        const CostVolume cv = random_volume(w, h, D, 200 + trial);
        std::vector<FeatureDisparity> feats;
        SparseDisparityMap sdm(w, h);
        for (int i = 0; i < 8; ++i) {
            const int x = static_cast<int>(rng() % w), y = static_cast<int>(rng() % h), d = 1 + static_cast<int>(rng() % (D - 1));
            if (sdm.at(x, y)) continue;
            sdm.set(x, y, d);
            feats.push_back({x, y, d});
        }
        const CostVolume out = propagate(cv, sdm, img, params);

        for (std::size_t i = 0; i < cv.data().size(); ++i) CHECK(out.data()[i] <= cv.data()[i]);

        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int d = 0; d < D; ++d) {
                    bool near = false;
                    for (const auto& f : feats) near |= f.d == d && std::abs(f.x - x) <= 2 && std::abs(f.y - y) <= 2;
                    if (!near) CHECK(out.at(x, y, d) == cv.at(x, y, d));
                }

        for (const auto& f : feats) {
            const auto c = out.pixel(f.x, f.y);
            CHECK(c[f.d] == 0.0f);
            CHECK(*std::min_element(c.begin(), c.end()) == 0.0f);
        }

        std::vector<FeatureDisparity> shuffled = feats;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CostVolume alt = cv;
        propagate_in_place(alt, shuffled, img, params);
        CHECK(alt == out);

        const auto oracle = propagate_oracle(cv, feats, img, params.gamma);
        for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(out.data()[i] - oracle[i]) <= 1e-6);

        for (int t : {1, 2, 5}) CHECK(propagate(cv, sdm, img, params, nullptr, t) == out);
    }
}

TEST_CASE("second pass squares the factors") {
    const Image img = random_image(15, 15, 3, 9, 100, 120);
    const CostVolume cv = random_volume(15, 15, 5, 10);
    const auto sdm = map_of(15, 15, {{7, 7, 2}});
    const PropagationParams params;
    const CostVolume twice = propagate(propagate(cv, sdm, img, params), sdm, img, params);
    for (int y = 5; y <= 9; ++y)
        for (int x = 5; x <= 9; ++x) {
            const double f = 1.0 - support_weight(img, 7, 7, x, y, params);
            CHECK(twice.at(x, y, 2) == doctest::Approx(cv.at(x, y, 2) * f * f).epsilon(1e-5));
        }
}

TEST_CASE("propagation report") {
    const PropagationParams params;
    const CostVolume cv = random_volume(40, 30, 8, 4, 0.5f, 1.5f);
    SUBCASE("no change") {
        const auto rep = propagation_report(cv, cv);
        CHECK(rep.modified_cells == 0);
        CHECK(rep.mass_removed == 0.0);
    }
    SUBCASE("disjoint interior windows") {
        const Image img = random_image(40, 30, 3, 8, 100, 110);
        const auto sdm = map_of(40, 30, {{5, 5, 1}, {20, 10, 3}, {32, 22, 6}});
        const CostVolume out = propagate(cv, sdm, img, params);
        const auto rep = propagation_report(cv, out);
        CHECK(rep.modified_cells == 3 * 25);
        CHECK(rep.per_disparity[1] == 25);
        CHECK(rep.per_disparity[3] == 25);
        CHECK(rep.per_disparity[6] == 25);
        CHECK(rep.mass_removed > 0.0);
        const std::string lines = rep.to_json_lines();
        CHECK(std::count(lines.begin(), lines.end(), '\n') == 4);
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(propagation_report(cv, random_volume(40, 30, 7, 1)), ValidationError);
    }
}
