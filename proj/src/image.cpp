#include "sdp/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdp/error.hpp"

namespace sdp {

namespace {

void check_dims(int width, int height, int channels) {
    if (width <= 0 || height <= 0) {
        throw ValidationError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                              std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
        throw ValidationError("unsupported channel count " + std::to_string(channels));
    }
}

// Horizontal and vertical passes of the separable filter, edge-replicated.
void convolve_rows(std::span<const float> src, std::span<float> dst, int width, int height, int channels,
                   const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int xx = std::clamp(x + k, 0, width - 1);
                    acc += kernel[k + radius] * src[(static_cast<std::size_t>(y) * width + xx) * channels + c];
                }
                dst[(static_cast<std::size_t>(y) * width + x) * channels + c] = static_cast<float>(acc);
            }
        }
    }
}

void convolve_cols(std::span<const float> src, std::span<float> dst, int width, int height, int channels,
                   const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int yy = std::clamp(y + k, 0, height - 1);
                    acc += kernel[k + radius] * src[(static_cast<std::size_t>(yy) * width + x) * channels + c];
                }
                dst[(static_cast<std::size_t>(y) * width + x) * channels + c] = static_cast<float>(acc);
            }
        }
    }
}

}  // namespace

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    check_dims(width, height, channels);
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw ValidationError("image data length does not match width*height*channels");
    }
}

float Image::clamped(int x, int y, int c) const noexcept {
    return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1), c);
}

Image to_grayscale(const Image& img) {
    if (img.channels() == 1) return img;
    if (img.channels() != 3) {
        throw ValidationError("to_grayscale: unsupported channel count " + std::to_string(img.channels()));
    }
    Image gray(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double v = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
            gray.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 255.0));
        }
    }
    return gray;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) {
        throw ValidationError("gaussian sigma must be positive, got " + std::to_string(sigma));
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

std::vector<float> blur_plane(std::span<const float> plane, int width, int height, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    std::vector<float> tmp(plane.size());
    std::vector<float> out(plane.size());
    convolve_rows(plane, tmp, width, height, 1, kernel);
    convolve_cols(tmp, out, width, height, 1, kernel);
    return out;
}

Image gaussian_blur(const Image& img, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    std::vector<float> tmp(img.data().size());
    std::vector<float> out(img.data().size());
    convolve_rows(img.data(), tmp, img.width(), img.height(), img.channels(), kernel);
    convolve_cols(tmp, out, img.width(), img.height(), img.channels(), kernel);
    // Rounding can push a saturated value a hair past the range.
    for (float& v : out) v = std::clamp(v, 0.0f, 255.0f);
    return Image(img.width(), img.height(), img.channels(), std::move(out));
}

GradientField gradients(const Image& gray) {
    if (gray.channels() != 1) {
        throw ValidationError("gradients: expected a 1-channel image, got " + std::to_string(gray.channels()));
    }
    const int w = gray.width();
    const int h = gray.height();
    GradientField g{w, h, std::vector<float>(gray.pixel_count()), std::vector<float>(gray.pixel_count())};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float dx = 0.0f;
            if (w > 1) {
                if (x == 0) dx = gray.at(1, y) - gray.at(0, y);
                else if (x == w - 1) dx = gray.at(w - 1, y) - gray.at(w - 2, y);
                else dx = (gray.at(x + 1, y) - gray.at(x - 1, y)) * 0.5f;
            }
            float dy = 0.0f;
            if (h > 1) {
                if (y == 0) dy = gray.at(x, 1) - gray.at(x, 0);
                else if (y == h - 1) dy = gray.at(x, h - 1) - gray.at(x, h - 2);
                else dy = (gray.at(x, y + 1) - gray.at(x, y - 1)) * 0.5f;
            }
            g.gx[static_cast<std::size_t>(y) * w + x] = dx;
            g.gy[static_cast<std::size_t>(y) * w + x] = dy;
        }
    }
    return g;
}

}  // namespace sdp
