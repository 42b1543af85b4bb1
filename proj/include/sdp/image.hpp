#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdp {

/// Row-major raster with 1 or 3 interleaved channels, intensities in [0, 255].
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.0f);
    Image(int width, int height, int channels, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    float at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }
    float& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

    /// Edge-replicated read: coordinates outside the raster clamp to the border.
    float clamped(int x, int y, int c = 0) const noexcept;

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<float> data_;
};

/// Horizontal and vertical intensity derivatives of a grayscale image.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<float> gx;
    std::vector<float> gy;

    float dx(int x, int y) const noexcept { return gx[static_cast<std::size_t>(y) * width + x]; }
    float dy(int x, int y) const noexcept { return gy[static_cast<std::size_t>(y) * width + x]; }
};

/// BT.601 luma. 1-channel input is returned unchanged.
Image to_grayscale(const Image& img);

/// Separable Gaussian with radius ceil(3 sigma), unit-sum kernel, edge replication.
/// Multi-channel images are blurred per channel.
Image gaussian_blur(const Image& img, double sigma);

/// Normalized 1D Gaussian taps, length 2*ceil(3 sigma)+1.
std::vector<double> gaussian_kernel(double sigma);

/// Central differences in the interior, one-sided differences on the border.
GradientField gradients(const Image& gray);

/// Blurs an arbitrary real-valued plane (no range restriction); used for
/// structure tensors and similar intermediate fields.
std::vector<float> blur_plane(std::span<const float> plane, int width, int height, double sigma);

}  // namespace sdp
