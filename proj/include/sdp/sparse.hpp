#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdp/image.hpp"

namespace sdp {

struct Keypoint {
    float x = 0.0f;
    float y = 0.0f;
    float response = 0.0f;
};

struct DetectorParams {
    int max_points = 4000;
    int nms_radius = 2;
    double harris_k = 0.04;
    double window_sigma = 1.0;      // structure tensor smoothing
    double threshold_ratio = 0.01;  // relative to the strongest response
};

/// Harris response det(M) - k tr(M)^2, M built from `gradients` and smoothed
/// with a Gaussian window.
std::vector<float> harris_response(const Image& gray, double k, double window_sigma);

/// Harris corners above threshold_ratio * max response, non-maximum
/// suppressed within a (2r+1)^2 window, strongest max_points kept.
/// Color input is converted to grayscale first.
std::vector<Keypoint> detect(const Image& img, const DetectorParams& params);
std::vector<Keypoint> detect(const Image& img, int max_points, int nms_radius);

enum class DescriptorKind { patch, census };

struct PatchSize {
    int width = 15;
    int height = 15;
};

/// Either an L2-normalized real vector (patch) or a packed bit string (census).
struct Descriptor {
    DescriptorKind kind = DescriptorKind::patch;
    std::vector<float> values;
    std::vector<std::uint64_t> bits;
    int nbits = 0;
};

/// Patch: mean-subtracted, L2-normalized intensities over an edge-replicated
/// window (all-zero when the patch is flat). Census: center comparison bits.
Descriptor describe(const Image& img, const Keypoint& kp, PatchSize patch = {},
                    DescriptorKind kind = DescriptorKind::patch);

/// L2 for patch descriptors, Hamming for census descriptors.
double descriptor_distance(const Descriptor& a, const Descriptor& b);

struct MatchParams {
    double ratio = 0.6;
    double epipolar_tol = 1.0;
    int dmax = 64;
    double abs_tol = 0.3;  // single-candidate acceptance
};

struct MatchPair {
    Keypoint left;
    Keypoint right;
    double distance = 0.0;

    double disparity() const noexcept { return static_cast<double>(left.x) - right.x; }
};

/// Nearest/second-nearest matching restricted to the epipolar band
/// |dy| <= epipolar_tol and 0 < left.x - right.x <= dmax. A left keypoint
/// accepts its nearest candidate iff MD0 / MD1 <= ratio (or MD0 <= abs_tol
/// with a single candidate); a pair survives only if the right keypoint
/// accepts the left one under the same rule.
std::vector<MatchPair> match(std::span<const Descriptor> left_desc, std::span<const Descriptor> right_desc,
                             std::span<const Keypoint> left_kps, std::span<const Keypoint> right_kps,
                             const MatchParams& params);

/// Per-pixel optional integer disparity.
class SparseDisparityMap {
public:
    struct Entry {
        int x;
        int y;
        int d;
    };

    SparseDisparityMap() = default;
    SparseDisparityMap(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::optional<int> at(int x, int y) const noexcept;
    void set(int x, int y, int d);
    void erase(int x, int y);
    std::size_t size() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }

    /// Entries in raster order.
    std::vector<Entry> entries() const;

    bool operator==(const SparseDisparityMap&) const = default;

private:
    static constexpr int kAbsent = -1;
    int width_ = 0;
    int height_ = 0;
    std::size_t count_ = 0;
    std::vector<int> d_;
};

/// d = round(left.x - right.x) stored at (round(left.x), round(left.y)).
/// Disparities outside [1, dmax) are dropped; on collision the lower
/// descriptor distance wins (first one on a tie).
SparseDisparityMap to_sparse_map(std::span<const MatchPair> matches, int width, int height, int dmax);

struct MatchImport {
    std::vector<MatchPair> matches;
    SparseDisparityMap map;
    std::vector<std::string> warnings;
};

/// Text format: one `xl yl xr yr` per line, '#' comments and blank lines
/// ignored. Malformed lines throw ParseError; out-of-bounds lines are
/// skipped with a warning.
MatchImport import_matches(const std::string& path, int width, int height, int dmax);
void export_matches(std::span<const MatchPair> matches, const std::string& path);

/// Side-by-side RGB rendering with circles at keypoints and lines joining matches.
Image draw_matches(const Image& left, const Image& right, std::span<const Keypoint> left_kps,
                   std::span<const Keypoint> right_kps, std::span<const MatchPair> matches);

struct SparseParams {
    DetectorParams detector{};
    PatchSize patch{};
    DescriptorKind descriptor = DescriptorKind::patch;
    MatchParams matching{};
};

struct SparseResult {
    std::vector<Keypoint> left_kps;
    std::vector<Keypoint> right_kps;
    std::vector<MatchPair> matches;
    SparseDisparityMap map;
};

/// detect -> describe -> match -> to_sparse_map on a rectified pair.
SparseResult compute_sparse_disparities(const Image& left, const Image& right, const SparseParams& params,
                                        int threads = 0);

}  // namespace sdp
