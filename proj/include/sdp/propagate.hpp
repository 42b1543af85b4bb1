#pragma once

#include <span>
#include <string>
#include <vector>

#include "sdp/cost.hpp"
#include "sdp/image.hpp"
#include "sdp/sparse.hpp"

namespace sdp {

struct PropagationParams {
    int window_width = 5;
    int window_height = 5;
    double gamma = 10.0;
    /// When > 0, the color weight is multiplied by exp(-|p - q|_2 / spatial_sigma).
    double spatial_sigma = 0.0;

    void validate() const;
};

/// Contrast-sensitive support weight exp(-|I(p) - I(q)|_1 / gamma) over all
/// channels of the left image, optionally attenuated by spatial distance.
double support_weight(const Image& left, int px, int py, int qx, int qy, const PropagationParams& params);
double support_weight(const Image& left, int px, int py, int qx, int qy, double gamma);

/// A feature pixel with its integer disparity.
struct FeatureDisparity {
    int x;
    int y;
    int d;
};

/// Feature disparity propagation. For every feature p with d_p > 0:
///   CM(p, d_p) = 0, then for every q in the window around p (clipped to the
///   image) CM(q, d_p) *= 1 - w(p, q).
/// Features are grouped by disparity slice and applied in raster order
/// within a slice, so the result does not depend on the input order of
/// `features`. Features with d >= D are skipped and reported in `warnings`.
void propagate_in_place(CostVolume& cv, std::span<const FeatureDisparity> features, const Image& left,
                        const PropagationParams& params, std::vector<std::string>* warnings = nullptr,
                        int threads = 0);

CostVolume propagate(const CostVolume& cv, const SparseDisparityMap& sdm, const Image& left,
                     const PropagationParams& params, std::vector<std::string>* warnings = nullptr,
                     int threads = 0);

std::vector<FeatureDisparity> features_of(const SparseDisparityMap& sdm);

struct PropagationReport {
    std::size_t modified_cells = 0;
    double mass_removed = 0.0;
    /// Modified cell count per disparity, length D.
    std::vector<std::size_t> per_disparity;

    /// One JSON object per line: a summary line followed by one line per
    /// disparity with a non-zero count.
    std::string to_json_lines() const;
};

PropagationReport propagation_report(const CostVolume& before, const CostVolume& after);

}  // namespace sdp
