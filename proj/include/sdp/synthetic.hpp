#pragma once

#include <cstdint>
#include <vector>

#include "sdp/image.hpp"
#include "sdp/solve.hpp"

namespace sdp {

/// A rectified pair with exact ground truth.
struct StereoScene {
    Image left;
    Image right;
    DisparityMap gt;
    std::vector<unsigned char> nonocc;  // 1 where the left pixel is visible in the right view
};

/// Random-dot pair with a constant disparity: right(x) = left(x + d).
/// Columns uncovered on the right edge get fresh dots; left columns x < d
/// are marked occluded.
StereoScene random_dot_pair(int width, int height, int disparity, std::uint32_t seed, int channels = 1);

struct Rect {
    int x0, y0, x1, y1;  // half-open
    bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

/// Two fronto-parallel layers: a background at d_bg and a foreground
/// rectangle at d_fg > d_bg, both random-dot textured, rendered with
/// occlusion so the right view hides background strips next to the
/// foreground.
StereoScene two_level_pair(int width, int height, int d_bg, int d_fg, Rect fg, std::uint32_t seed,
                           int channels = 1);

/// Texture periodic along x (period `period`), shifted by `disparity`.
/// Every location repeats within the disparity range, so matches are ambiguous.
StereoScene striped_pair(int width, int height, int period, int disparity, std::uint32_t seed);

/// Layered scene with smooth shading and weak texture on several
/// fronto-parallel layers; harder than random dots for local costs.
StereoScene layered_pair(int width, int height, std::uint32_t seed);

}  // namespace sdp
