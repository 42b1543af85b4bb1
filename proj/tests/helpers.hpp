#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "sdp/cost.hpp"
#include "sdp/image.hpp"

namespace testing_support {

inline sdp::Image random_image(int w, int h, int channels, unsigned seed, int lo = 0, int hi = 255) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(lo, hi);
    sdp::Image img(w, h, channels);
    for (float& v : img.data()) v = static_cast<float>(dist(rng));
    return img;
}

inline sdp::CostVolume random_volume(int w, int h, int d, unsigned seed, float lo = 0.0f, float hi = 1.9f) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    sdp::CostVolume cv(w, h, d);
    for (float& v : cv.data()) v = dist(rng);
    return cv;
}

// Scratch file path unique to this process.
inline std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("sdp_tests_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace testing_support
