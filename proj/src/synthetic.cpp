#include "sdp/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "sdp/error.hpp"

namespace sdp {

namespace {

// Texture lookup in left-image coordinates; x may run past the right edge.
using Texture = std::function<float(int x, int y, int c)>;

struct Layer {
    int disparity;
    std::function<bool(int x, int y)> covers;  // in left-image coordinates
    Texture texture;
};

// Layers are ordered back to front; later layers must have larger disparity.
StereoScene render(const std::vector<Layer>& layers, int width, int height, int channels) {
    StereoScene s{Image(width, height, channels), Image(width, height, channels), DisparityMap(width, height),
                  std::vector<unsigned char>(static_cast<std::size_t>(width) * height, 0)};
    const auto top_left = [&](int x, int y) {
        int top = -1;
        for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
            if (layers[i].covers(x, y)) top = i;
        }
        return top;
    };
    const auto top_right = [&](int xr, int y) {
        int top = -1;
        for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
            if (layers[i].covers(xr + layers[i].disparity, y)) top = i;
        }
        return top;
    };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int l = top_left(x, y);
            if (l < 0) throw ValidationError("synthetic scene: background layer must cover the image");
            for (int c = 0; c < channels; ++c) s.left.at(x, y, c) = layers[l].texture(x, y, c);
            s.gt.at(x, y) = static_cast<float>(layers[l].disparity);
            const int xr = x - layers[l].disparity;
            s.nonocc[static_cast<std::size_t>(y) * width + x] = xr >= 0 && top_right(xr, y) == l ? 1 : 0;

            const int r = top_right(x, y);
            if (r < 0) throw ValidationError("synthetic scene: background layer must cover the image");
            for (int c = 0; c < channels; ++c) s.right.at(x, y, c) = layers[r].texture(x + layers[r].disparity, y, c);
        }
    }
    return s;
}

// Uniform random dots, stored with enough margin for any shifted lookup.
Texture dot_texture(int width, int height, int channels, int margin, std::mt19937& rng) {
    auto data = std::make_shared<std::vector<float>>(static_cast<std::size_t>(width + margin) * height * channels);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& v : *data) v = static_cast<float>(dist(rng));
    const int stride = width + margin;
    return [data, stride, channels](int x, int y, int c) {
        return (*data)[(static_cast<std::size_t>(y) * stride + x) * channels + c];
    };
}

}  // namespace

StereoScene random_dot_pair(int width, int height, int disparity, std::uint32_t seed, int channels) {
    if (disparity < 0 || disparity >= width) throw ValidationError("disparity must lie in [0, width)");
    std::mt19937 rng(seed);
    const Layer bg{disparity, [](int, int) { return true; }, dot_texture(width, height, channels, disparity + 1, rng)};
    return render({bg}, width, height, channels);
}

StereoScene two_level_pair(int width, int height, int d_bg, int d_fg, Rect fg, std::uint32_t seed, int channels) {
    if (!(d_fg > d_bg) || d_bg < 0) throw ValidationError("two_level_pair needs 0 <= d_bg < d_fg");
    std::mt19937 rng(seed);
    const int margin = d_fg + 1;
    const Layer bg{d_bg, [](int, int) { return true; }, dot_texture(width, height, channels, margin, rng)};
    const Layer front{d_fg, [fg](int x, int y) { return fg.contains(x, y); },
                      dot_texture(width, height, channels, margin, rng)};
    return render({bg, front}, width, height, channels);
}

StereoScene striped_pair(int width, int height, int period, int disparity, std::uint32_t seed) {
    if (period < 2) throw ValidationError("period must be >= 2");
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(0, 255);
    auto tile = std::make_shared<std::vector<float>>(static_cast<std::size_t>(period) * height);
    for (auto& v : *tile) v = static_cast<float>(dist(rng));
    const Texture tex = [tile, period](int x, int y, int) {
        return (*tile)[static_cast<std::size_t>(y) * period + (x % period)];
    };
    return render({Layer{disparity, [](int, int) { return true; }, tex}}, width, height, 1);
}

StereoScene layered_pair(int width, int height, std::uint32_t seed) {
    std::mt19937 rng(seed);
    const int margin = 32;
    std::vector<Layer> layers;
    const auto shaded = [&](double phase, std::array<float, 3> tint) -> Texture {
        auto noise = std::make_shared<std::vector<float>>(static_cast<std::size_t>(width + margin) * height);
        std::normal_distribution<float> gauss(0.0f, 3.0f);
        std::bernoulli_distribution dot(0.03);
        for (auto& v : *noise) v = gauss(rng) + (dot(rng) ? (gauss(rng) > 0 ? 70.0f : -70.0f) : 0.0f);
        const int stride = width + margin;
        return [noise, stride, phase, tint](int x, int y, int c) {
            const double base = 110.0 + 45.0 * std::sin(x / 9.0 + phase) + 30.0 * std::cos(y / 11.0 - phase);
            const double v = tint[c] * base + (*noise)[static_cast<std::size_t>(y) * stride + x];
            return static_cast<float>(std::clamp(v, 0.0, 255.0));
        };
    };
    layers.push_back({3, [](int, int) { return true; }, shaded(0.0, {1.0f, 0.9f, 0.8f})});
    const Rect box{width / 8, height / 5, width / 2, height * 3 / 4};
    layers.push_back({8, [box](int x, int y) { return box.contains(x, y); }, shaded(1.3, {0.7f, 1.0f, 0.8f})});
    const double cx = width * 0.68, cy = height * 0.5, rx = width * 0.18, ry = height * 0.3;
    layers.push_back({14,
                      [=](int x, int y) {
                          const double u = (x - cx) / rx, v = (y - cy) / ry;
                          return u * u + v * v <= 1.0;
                      },
                      shaded(2.1, {0.9f, 0.75f, 1.0f})});
    return render(layers, width, height, 3);
}

}  // namespace sdp
