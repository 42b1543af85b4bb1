#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdp/image.hpp"

namespace sdp {

/// Cost assigned to (x, y, d) when x - d falls outside the right image.
/// Equals the supremum of the two-term robust costs, so such labels never win.
inline constexpr float kBorderCost = 2.0f;

/// Matching costs indexed (y, x, d) with d innermost. Element (x, y, d) is the
/// cost of matching left pixel (x, y) to right pixel (x - d, y).
class CostVolume {
public:
    CostVolume() = default;
    CostVolume(int width, int height, int dmax, float fill = 0.0f);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int dmax() const noexcept { return dmax_; }

    float at(int x, int y, int d) const noexcept { return costs_[index(x, y, d)]; }
    float& at(int x, int y, int d) noexcept { return costs_[index(x, y, d)]; }

    /// All D costs of pixel (x, y).
    std::span<const float> pixel(int x, int y) const noexcept {
        return {costs_.data() + index(x, y, 0), static_cast<std::size_t>(dmax_)};
    }
    std::span<float> pixel(int x, int y) noexcept {
        return {costs_.data() + index(x, y, 0), static_cast<std::size_t>(dmax_)};
    }

    std::span<const float> data() const noexcept { return costs_; }
    std::span<float> data() noexcept { return costs_; }

    bool same_shape(const CostVolume& o) const noexcept {
        return width_ == o.width_ && height_ == o.height_ && dmax_ == o.dmax_;
    }
    bool operator==(const CostVolume&) const = default;

private:
    std::size_t index(int x, int y, int d) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * dmax_ + d;
    }

    int width_ = 0;
    int height_ = 0;
    int dmax_ = 0;
    std::vector<float> costs_;
};

struct CensusWindow {
    int width = 9;
    int height = 7;
};

/// Per-pixel census bit strings packed into 64-bit words. Bit k (word k/64,
/// position k%64) is 1 iff the k-th neighbor, enumerated row-major with the
/// center skipped, is darker than the center.
class CensusField {
public:
    CensusField() = default;
    CensusField(int width, int height, int bits);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int bits() const noexcept { return bits_; }
    int words() const noexcept { return words_; }

    std::span<const std::uint64_t> code(int x, int y) const noexcept {
        return {codes_.data() + offset(x, y), static_cast<std::size_t>(words_)};
    }
    std::span<std::uint64_t> code(int x, int y) noexcept {
        return {codes_.data() + offset(x, y), static_cast<std::size_t>(words_)};
    }
    bool bit(int x, int y, int k) const noexcept { return (code(x, y)[k / 64] >> (k % 64)) & 1u; }

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * words_;
    }

    int width_ = 0;
    int height_ = 0;
    int bits_ = 0;
    int words_ = 0;
    std::vector<std::uint64_t> codes_;
};

CensusField census_transform(const Image& gray, CensusWindow window);

/// Number of differing bits. Throws if the word counts differ.
int hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// Robust normalization 1 - exp(-c / lambda), range [0, 1).
double theta(double c, double lambda);

/// Color image plus the gradients of its grayscale version.
struct RhoInput {
    Image color;
    GradientField grad;
};
RhoInput make_rho_input(const Image& img);

/// Color/gradient dissimilarity between left (x, y) and right (x - d, y):
/// (1 - alpha) * L1(color) / channels + alpha * (|dgx| + |dgy|).
double rho(const RhoInput& left, const RhoInput& right, int x, int y, int d, double alpha);

/// Census fields of the grayscale image at every scale. Scale 0 is the
/// original; scale i >= 1 is blurred with sigma = i * sigma_step.
std::vector<CensusField> census_pyramid(const Image& gray, int n_scales, double sigma_step, CensusWindow window);

/// Weighted sum over scales of the census Hamming distances between left
/// (x, y) and right (x - d, y). All scales share the full-resolution grid.
double multiscale_census_cost(std::span<const CensusField> left, std::span<const CensusField> right, int x, int y,
                              int d, std::span<const double> weights);

enum class CostMeasure { rho_census, ad_census };

struct CostParams {
    int n_scales = 3;
    std::vector<double> scale_weights{0.7, 0.2, 0.1};
    double scale_sigma_step = 0.8;
    double alpha = 0.8;
    double lambda_rho = 10.0;
    double lambda_census = 30.0;
    double lambda_ad = 10.0;
    CensusWindow census_window{};
    int dmax = 64;

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// Builds the initial volume. Rho-Census:
///   C = theta(rho, lambda_rho) + theta(S_census, lambda_census);
/// AD-Census (single scale):
///   C = theta(census, lambda_census) + theta(AD, lambda_ad).
/// Cells with x - d < 0 get kBorderCost.
CostVolume build_cost_volume(const Image& left, const Image& right, const CostParams& params,
                             CostMeasure measure = CostMeasure::rho_census, int threads = 0);

/// Min-max normalized heat image of one disparity slice, for debugging.
Image cost_slice_image(const CostVolume& cv, int d);

}  // namespace sdp
