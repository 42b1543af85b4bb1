#include "sdp/cost.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sdp/error.hpp"
#include "sdp/parallel.hpp"

namespace sdp {

CostVolume::CostVolume(int width, int height, int dmax, float fill)
    : width_(width), height_(height), dmax_(dmax) {
    if (width <= 0 || height <= 0 || dmax <= 0) {
        throw ValidationError("cost volume dimensions must be positive");
    }
    costs_.assign(static_cast<std::size_t>(width) * height * dmax, fill);
}

CensusField::CensusField(int width, int height, int bits)
    : width_(width), height_(height), bits_(bits), words_(std::max(1, (bits + 63) / 64)) {
    codes_.assign(static_cast<std::size_t>(width) * height * words_, 0);
}

CensusField census_transform(const Image& gray, CensusWindow window) {
    if (gray.channels() != 1) throw ValidationError("census_transform: expected a 1-channel image");
    if (window.width <= 0 || window.height <= 0 || window.width % 2 == 0 || window.height % 2 == 0) {
        throw ValidationError("census window dimensions must be odd and positive, got " +
                              std::to_string(window.width) + "x" + std::to_string(window.height));
    }
    const int rx = window.width / 2;
    const int ry = window.height / 2;
    CensusField field(gray.width(), gray.height(), window.width * window.height - 1);
    for (int y = 0; y < gray.height(); ++y) {
        for (int x = 0; x < gray.width(); ++x) {
            const float center = gray.at(x, y);
            auto code = field.code(x, y);
            int k = 0;
            for (int dy = -ry; dy <= ry; ++dy) {
                for (int dx = -rx; dx <= rx; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (gray.clamped(x + dx, y + dy) < center) code[k / 64] |= std::uint64_t{1} << (k % 64);
                    ++k;
                }
            }
        }
    }
    return field;
}

int hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    if (a.size() != b.size()) throw ValidationError("hamming: bit string lengths differ");
    int dist = 0;
    for (std::size_t i = 0; i < a.size(); ++i) dist += std::popcount(a[i] ^ b[i]);
    return dist;
}

double theta(double c, double lambda) {
    if (c < 0.0) throw ValidationError("theta: cost must be non-negative");
    if (!(lambda > 0.0)) throw ValidationError("theta: lambda must be positive");
    return 1.0 - std::exp(-c / lambda);
}

RhoInput make_rho_input(const Image& img) {
    return RhoInput{img, gradients(to_grayscale(img))};
}

namespace {

double color_l1_mean(const Image& l, const Image& r, int xl, int xr, int y) {
    double sum = 0.0;
    for (int c = 0; c < l.channels(); ++c) sum += std::abs(static_cast<double>(l.at(xl, y, c)) - r.at(xr, y, c));
    return sum / l.channels();
}

double rho_unchecked(const RhoInput& left, const RhoInput& right, int x, int y, int d, double alpha) {
    const int xr = x - d;
    const double color = color_l1_mean(left.color, right.color, x, xr, y);
    const double grad = std::abs(static_cast<double>(left.grad.dx(x, y)) - right.grad.dx(xr, y)) +
                        std::abs(static_cast<double>(left.grad.dy(x, y)) - right.grad.dy(xr, y));
    return (1.0 - alpha) * color + alpha * grad;
}

double census_sum_unchecked(std::span<const CensusField> left, std::span<const CensusField> right, int x, int y,
                            int d, std::span<const double> weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < left.size(); ++i) {
        s += weights[i] * hamming(left[i].code(x, y), right[i].code(x - d, y));
    }
    return s;
}

// theta(c) < 1 mathematically but rounds to 1 for large c; keep valid cells
// strictly below kBorderCost.
float store_cost(double theta_a, double theta_b) {
    static const float kMaxValid = std::nextafter(kBorderCost, 0.0f);
    return std::min(static_cast<float>(theta_a + theta_b), kMaxValid);
}

}  // namespace

double rho(const RhoInput& left, const RhoInput& right, int x, int y, int d, double alpha) {
    if (!left.color.same_shape(right.color)) throw ValidationError("rho: image shapes differ");
    if (x < 0 || x >= left.color.width() || y < 0 || y >= left.color.height()) {
        throw ValidationError("rho: pixel outside the image");
    }
    if (x - d < 0 || x - d >= left.color.width()) throw ValidationError("rho: correspondence outside the right image");
    return rho_unchecked(left, right, x, y, d, alpha);
}

std::vector<CensusField> census_pyramid(const Image& gray, int n_scales, double sigma_step, CensusWindow window) {
    if (n_scales < 1) throw ValidationError("census pyramid needs at least one scale");
    std::vector<CensusField> out;
    out.reserve(n_scales);
    out.push_back(census_transform(gray, window));
    for (int i = 1; i < n_scales; ++i) out.push_back(census_transform(gaussian_blur(gray, i * sigma_step), window));
    return out;
}

double multiscale_census_cost(std::span<const CensusField> left, std::span<const CensusField> right, int x, int y,
                              int d, std::span<const double> weights) {
    if (left.size() != right.size() || left.size() != weights.size()) {
        throw ValidationError("multiscale_census_cost: pyramid/weight length mismatch");
    }
    if (left.empty()) throw ValidationError("multiscale_census_cost: empty pyramid");
    if (x - d < 0 || x - d >= left[0].width()) {
        throw ValidationError("multiscale_census_cost: correspondence outside the right image");
    }
    return census_sum_unchecked(left, right, x, y, d, weights);
}

void CostParams::validate() const {
    if (n_scales < 1) throw ValidationError("n_scales must be >= 1");
    if (static_cast<int>(scale_weights.size()) != n_scales) {
        throw ValidationError("scale_weights must have n_scales entries");
    }
    const double sum = std::accumulate(scale_weights.begin(), scale_weights.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("scale_weights must sum to 1");
    for (double w : scale_weights) {
        if (w < 0.0) throw ValidationError("scale_weights must be non-negative");
    }
    if (!(scale_sigma_step > 0.0)) throw ValidationError("scale_sigma_step must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
    if (!(lambda_rho > 0.0)) throw ValidationError("lambda_rho must be positive");
    if (!(lambda_census > 0.0)) throw ValidationError("lambda_census must be positive");
    if (!(lambda_ad > 0.0)) throw ValidationError("lambda_ad must be positive");
    if (census_window.width <= 0 || census_window.height <= 0 || census_window.width % 2 == 0 ||
        census_window.height % 2 == 0) {
        throw ValidationError("census_window dimensions must be odd and positive");
    }
    if (dmax < 1) throw ValidationError("dmax must be >= 1");
}

CostVolume build_cost_volume(const Image& left, const Image& right, const CostParams& params, CostMeasure measure,
                             int threads) {
    params.validate();
    if (!left.same_shape(right)) throw ValidationError("left and right images differ in shape");
    if (params.dmax >= left.width()) {
        throw ValidationError("dmax (" + std::to_string(params.dmax) + ") must be smaller than the image width (" +
                              std::to_string(left.width()) + ")");
    }

    const int w = left.width();
    const int h = left.height();
    const int dmax = params.dmax;
    const Image gray_l = to_grayscale(left);
    const Image gray_r = to_grayscale(right);
    CostVolume cv(w, h, dmax);

    if (measure == CostMeasure::rho_census) {
        const auto pyr_l = census_pyramid(gray_l, params.n_scales, params.scale_sigma_step, params.census_window);
        const auto pyr_r = census_pyramid(gray_r, params.n_scales, params.scale_sigma_step, params.census_window);
        const RhoInput in_l{left, gradients(gray_l)};
        const RhoInput in_r{right, gradients(gray_r)};
        parallel_for(0, h, threads, [&](int y) {
            for (int x = 0; x < w; ++x) {
                auto cell = cv.pixel(x, y);
                for (int d = 0; d < dmax; ++d) {
                    if (x - d < 0) {
                        cell[d] = kBorderCost;
                        continue;
                    }
                    const double r = rho_unchecked(in_l, in_r, x, y, d, params.alpha);
                    const double s = census_sum_unchecked(pyr_l, pyr_r, x, y, d, params.scale_weights);
                    cell[d] = store_cost(theta(r, params.lambda_rho), theta(s, params.lambda_census));
                }
            }
        });
    } else {
        const CensusField cen_l = census_transform(gray_l, params.census_window);
        const CensusField cen_r = census_transform(gray_r, params.census_window);
        parallel_for(0, h, threads, [&](int y) {
            for (int x = 0; x < w; ++x) {
                auto cell = cv.pixel(x, y);
                for (int d = 0; d < dmax; ++d) {
                    if (x - d < 0) {
                        cell[d] = kBorderCost;
                        continue;
                    }
                    const double c = hamming(cen_l.code(x, y), cen_r.code(x - d, y));
                    const double ad = color_l1_mean(left, right, x, x - d, y);
                    cell[d] = store_cost(theta(c, params.lambda_census), theta(ad, params.lambda_ad));
                }
            }
        });
    }
    return cv;
}

Image cost_slice_image(const CostVolume& cv, int d) {
    if (d < 0 || d >= cv.dmax()) throw ValidationError("slice index out of range");
    float lo = std::numeric_limits<float>::max();
    float hi = std::numeric_limits<float>::lowest();
    for (int y = 0; y < cv.height(); ++y) {
        for (int x = 0; x < cv.width(); ++x) {
            lo = std::min(lo, cv.at(x, y, d));
            hi = std::max(hi, cv.at(x, y, d));
        }
    }
    Image out(cv.width(), cv.height(), 1);
    const float range = hi > lo ? hi - lo : 1.0f;
    for (int y = 0; y < cv.height(); ++y) {
        for (int x = 0; x < cv.width(); ++x) out.at(x, y) = 255.0f * (cv.at(x, y, d) - lo) / range;
    }
    return out;
}

}  // namespace sdp
