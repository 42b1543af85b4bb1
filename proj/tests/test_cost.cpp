#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sdp/cost.hpp"
#include "sdp/error.hpp"
#include "sdp/synthetic.hpp"

using namespace sdp;
using testing_support::random_image;

namespace {

// Census bit string built straight from the definition, as a bool vector.
std::vector<bool> census_oracle(const Image& g, int x, int y, int ww, int wh) {
    std::vector<bool> bits;
    const auto px = [&](int xx, int yy) {
        xx = std::clamp(xx, 0, g.width() - 1);
        yy = std::clamp(yy, 0, g.height() - 1);
        return g.at(xx, yy);
    };
    for (int dy = -wh / 2; dy <= wh / 2; ++dy)
        for (int dx = -ww / 2; dx <= ww / 2; ++dx)
            if (dx != 0 || dy != 0) bits.push_back(px(x + dx, y + dy) < px(x, y));
    return bits;
}

int hamming_oracle(const std::vector<bool>& a, const std::vector<bool>& b) {
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
    return n;
}

CostParams small_params(int dmax) {
    CostParams p;
    p.dmax = dmax;
    return p;
}

}  // namespace

TEST_CASE("census transform") {
    SUBCASE("constant image gives zero codes") {
        const auto f = census_transform(Image(12, 9, 1, 50.0f), {9, 7});
        CHECK(f.bits() == 62);
        CHECK(f.words() == 1);
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 12; ++x) CHECK(f.code(x, y)[0] == 0u);
    }
    SUBCASE("darker center against brighter ring") {
        Image img(3, 3, 1, 200.0f);
        img.at(1, 1) = 100.0f;
        CHECK(census_transform(img, {3, 3}).code(1, 1)[0] == 0u);
    }
    SUBCASE("5x5 image against the comparison oracle") {
        const Image img = random_image(5, 5, 1, 17, 0, 9);
        const auto f = census_transform(img, {3, 3});
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x) {
                const auto expect = census_oracle(img, x, y, 3, 3);
                for (int k = 0; k < 8; ++k) CHECK(f.bit(x, y, k) == expect[k]);
            }
    }
    SUBCASE("multi-word codes") {
        const Image img = random_image(20, 16, 1, 4);
        const auto f = census_transform(img, {11, 9});
        CHECK(f.words() == 2);
        for (int y = 0; y < 16; y += 5)
            for (int x = 0; x < 20; x += 3) {
                const auto expect = census_oracle(img, x, y, 11, 9);
                for (int k = 0; k < f.bits(); ++k) CHECK(f.bit(x, y, k) == expect[k]);
            }
    }
    SUBCASE("even window is rejected") {
        CHECK_THROWS_AS(census_transform(Image(5, 5, 1), {4, 3}), ValidationError);
        CHECK_THROWS_AS(census_transform(Image(5, 5, 3), {3, 3}), ValidationError);
    }
}

TEST_CASE("hamming distance") {
    const std::uint64_t a[] = {0b1010}, b[] = {0b0101};
    CHECK(hamming(a, a) == 0);
    CHECK(hamming(a, b) == 4);
    std::mt19937 rng(9);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t x[] = {rng() & 0xffffffu}, y[] = {rng() & 0xffffffu};
        int oracle = 0;
        for (int k = 0; k < 24; ++k) oracle += ((x[0] >> k) & 1u) != ((y[0] >> k) & 1u);
        CHECK(hamming(x, y) == oracle);
    }
    const std::uint64_t two[] = {1, 2};
    CHECK_THROWS_AS(hamming(a, two), ValidationError);
}

TEST_CASE("robust normalization") {
    CHECK(theta(0.0, 10.0) == 0.0);
    CHECK(std::abs(theta(10.0, 10.0) - (1.0 - std::exp(-1.0))) < 1e-12);
    CHECK(std::abs(theta(30.0, 10.0) - (1.0 - std::exp(-3.0))) < 1e-12);
    CHECK_THROWS_AS(theta(-1.0, 10.0), ValidationError);
    CHECK_THROWS_AS(theta(1.0, 0.0), ValidationError);
}

TEST_CASE("color and gradient term") {
    SUBCASE("identical images at d=0") {
        const auto in = make_rho_input(random_image(9, 6, 3, 1));
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 9; ++x) CHECK(rho(in, in, x, y, 0, 0.8) == 0.0);
    }
    SUBCASE("pure color difference") {
        Image l(1, 1, 3), r(1, 1, 3);
        l.at(0, 0, 0) = 10, l.at(0, 0, 1) = 20, l.at(0, 0, 2) = 30;
        r.at(0, 0, 0) = 40, r.at(0, 0, 1) = 20, r.at(0, 0, 2) = 30;
        CHECK(rho(make_rho_input(l), make_rho_input(r), 0, 0, 0, 0.0) == doctest::Approx(10.0));
    }
    SUBCASE("alpha = 1 ignores color") {
        const auto ia = make_rho_input(Image(8, 8, 3, 10.0f));
        const auto ib = make_rho_input(Image(8, 8, 3, 230.0f));
        CHECK(rho(ia, ib, 4, 4, 2, 1.0) == 0.0);
    }
    SUBCASE("out of range correspondence") {
        const auto in = make_rho_input(Image(5, 5, 1));
        CHECK_THROWS_AS(rho(in, in, 1, 1, 3, 0.5), ValidationError);
    }
}

TEST_CASE("multi-scale census cost") {
    const Image l = to_grayscale(random_image(24, 18, 3, 21));
    const Image r = to_grayscale(random_image(24, 18, 3, 22));
    SUBCASE("identical pair at d=0") {
        const auto p = census_pyramid(l, 3, 0.8, {9, 7});
        const std::vector<double> w{0.7, 0.2, 0.1};
        for (int y = 0; y < 18; y += 3)
            for (int x = 0; x < 24; x += 3) CHECK(multiscale_census_cost(p, p, x, y, 0, w) == 0.0);
    }
    SUBCASE("single scale equals plain census") {
        const auto pl = census_pyramid(l, 1, 0.8, {9, 7});
        const auto pr = census_pyramid(r, 1, 0.8, {9, 7});
        const auto cl = census_transform(l, {9, 7});
        const auto cr = census_transform(r, {9, 7});
        const std::vector<double> w{1.0};
        for (int x = 5; x < 24; x += 4)
            CHECK(multiscale_census_cost(pl, pr, x, 9, 3, w) == hamming(cl.code(x, 9), cr.code(x - 3, 9)));
    }
    SUBCASE("weighted sum over blurred scales") {
        const auto pl = census_pyramid(l, 3, 0.8, {5, 5});
        const auto pr = census_pyramid(r, 3, 0.8, {5, 5});
        const std::vector<double> w{0.7, 0.2, 0.1};
        const Image lb[3] = {l, gaussian_blur(l, 0.8), gaussian_blur(l, 1.6)};
        const Image rb[3] = {r, gaussian_blur(r, 0.8), gaussian_blur(r, 1.6)};
        for (int x = 4; x < 24; x += 5)
            for (int y = 0; y < 18; y += 4) {
                double expect = 0.0;
                for (int i = 0; i < 3; ++i)
                    expect += w[i] * hamming_oracle(census_oracle(lb[i], x, y, 5, 5), census_oracle(rb[i], x - 2, y, 5, 5));
                CHECK(multiscale_census_cost(pl, pr, x, y, 2, w) == doctest::Approx(expect).epsilon(1e-12));
            }
    }
    SUBCASE("mismatched weights are rejected") {
        const auto p = census_pyramid(l, 2, 0.8, {3, 3});
        const std::vector<double> w{1.0};
        CHECK_THROWS_AS(multiscale_census_cost(p, p, 3, 3, 0, w), ValidationError);
    }
}

TEST_CASE("cost volume") {
    SUBCASE("shifted pair has its minimum at the shift") {
        const auto s = random_dot_pair(64, 40, 5, 7, 3);
        const CostVolume cv = build_cost_volume(s.left, s.right, small_params(16));
        // Stay clear of the left border and of the right-edge columns that have no counterpart.
        for (int y = 4; y < 36; ++y)
            for (int x = 16; x < 54; ++x) {
                const auto c = cv.pixel(x, y);
                CHECK(std::min_element(c.begin(), c.end()) - c.begin() == 5);
            }
    }
    SUBCASE("identical pair costs zero at d=0") {
        const Image img = random_image(30, 20, 3, 8);
        const CostVolume cv = build_cost_volume(img, img, small_params(8));
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 30; ++x) CHECK(cv.at(x, y, 0) == 0.0f);
    }
    SUBCASE("range and border cells") {
        const CostVolume cv = build_cost_volume(random_image(30, 12, 3, 1), random_image(30, 12, 3, 2), small_params(10));
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 30; ++x)
                for (int d = 0; d < 10; ++d) {
                    if (x - d < 0) CHECK(cv.at(x, y, d) == kBorderCost);
                    else {
                        CHECK(cv.at(x, y, d) >= 0.0f);
                        CHECK(cv.at(x, y, d) < 2.0f);
                    }
                }
    }
    SUBCASE("cells follow the cost formula") {
        const Image l = random_image(26, 14, 3, 31), r = random_image(26, 14, 3, 32);
        CostParams p = small_params(6);
        const CostVolume cv = build_cost_volume(l, r, p);
        const auto il = make_rho_input(l), ir = make_rho_input(r);
        const auto pl = census_pyramid(to_grayscale(l), 3, 0.8, p.census_window);
        const auto pr = census_pyramid(to_grayscale(r), 3, 0.8, p.census_window);
        for (int y = 0; y < 14; y += 3)
            for (int x = 6; x < 26; x += 4)
                for (int d = 0; d < 6; ++d) {
                    const double expect = theta(rho(il, ir, x, y, d, 0.8), 10.0) +
                                          theta(multiscale_census_cost(pl, pr, x, y, d, p.scale_weights), 30.0);
                    CHECK(cv.at(x, y, d) == doctest::Approx(expect).epsilon(1e-6));
                }
    }
    SUBCASE("AD-Census equals the rho measure in the degenerate setting") {
        const Image l = random_image(20, 10, 3, 41), r = random_image(20, 10, 3, 42);
        CostParams p = small_params(5);
        p.n_scales = 1;
        p.scale_weights = {1.0};
        p.alpha = 0.0;
        p.lambda_rho = 10.0;
        p.lambda_ad = 10.0;
        const CostVolume a = build_cost_volume(l, r, p, CostMeasure::rho_census);
        const CostVolume b = build_cost_volume(l, r, p, CostMeasure::ad_census);
        for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-6));
    }
    SUBCASE("thread count does not change the result") {
        const Image l = random_image(40, 23, 3, 51), r = random_image(40, 23, 3, 52);
        const CostVolume one = build_cost_volume(l, r, small_params(12), CostMeasure::rho_census, 1);
        for (int t : {2, 3, 8}) CHECK(build_cost_volume(l, r, small_params(12), CostMeasure::rho_census, t) == one);
    }
    SUBCASE("invalid inputs") {
        const Image a = random_image(10, 8, 1, 1);
        CHECK_THROWS_AS(build_cost_volume(a, random_image(11, 8, 1, 2), small_params(4)), ValidationError);
        CHECK_THROWS_AS(build_cost_volume(a, a, small_params(10)), ValidationError);
        CostParams bad = small_params(4);
        bad.scale_weights = {0.5, 0.2, 0.1};
        CHECK_THROWS_AS(build_cost_volume(a, a, bad), ValidationError);
        bad = small_params(4);
        bad.census_window = {8, 7};
        CHECK_THROWS_AS(build_cost_volume(a, a, bad), ValidationError);
    }
    SUBCASE("slice image is normalized") {
        const CostVolume cv = build_cost_volume(random_image(20, 10, 1, 3), random_image(20, 10, 1, 4), small_params(4));
        const Image s = cost_slice_image(cv, 2);
        float lo = 1e9f, hi = -1e9f;
        for (float v : s.data()) lo = std::min(lo, v), hi = std::max(hi, v);
        CHECK(lo == 0.0f);
        CHECK(hi == 255.0f);
        CHECK_THROWS_AS(cost_slice_image(cv, 4), ValidationError);
    }
}
