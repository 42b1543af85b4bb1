#include "sdp/propagate.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sdp/error.hpp"
#include "sdp/parallel.hpp"

namespace sdp {

void PropagationParams::validate() const {
    if (window_width < 1 || window_height < 1 || window_width % 2 == 0 || window_height % 2 == 0) {
        throw ValidationError("propagation window dimensions must be odd and >= 1");
    }
    if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    if (spatial_sigma < 0.0) throw ValidationError("spatial_sigma must be non-negative");
}

double support_weight(const Image& left, int px, int py, int qx, int qy, const PropagationParams& params) {
    if (!(params.gamma > 0.0)) throw ValidationError("gamma must be positive");
    double l1 = 0.0;
    for (int c = 0; c < left.channels(); ++c) {
        l1 += std::abs(static_cast<double>(left.at(px, py, c)) - left.at(qx, qy, c));
    }
    double w = std::exp(-l1 / params.gamma);
    if (params.spatial_sigma > 0.0) {
        const double dist = std::hypot(static_cast<double>(px - qx), static_cast<double>(py - qy));
        w *= std::exp(-dist / params.spatial_sigma);
    }
    return w;
}

double support_weight(const Image& left, int px, int py, int qx, int qy, double gamma) {
    PropagationParams p;
    p.gamma = gamma;
    return support_weight(left, px, py, qx, qy, p);
}

std::vector<FeatureDisparity> features_of(const SparseDisparityMap& sdm) {
    std::vector<FeatureDisparity> out;
    for (const auto& e : sdm.entries()) out.push_back({e.x, e.y, e.d});
    return out;
}

void propagate_in_place(CostVolume& cv, std::span<const FeatureDisparity> features, const Image& left,
                        const PropagationParams& params, std::vector<std::string>* warnings, int threads) {
    params.validate();
    if (left.width() != cv.width() || left.height() != cv.height()) {
        throw ValidationError("propagate: image and cost volume dimensions differ");
    }
    const int w = cv.width();
    const int h = cv.height();
    const int rx = params.window_width / 2;
    const int ry = params.window_height / 2;

    std::vector<std::vector<FeatureDisparity>> by_slice(cv.dmax());
    for (const auto& f : features) {
        if (f.x < 0 || f.y < 0 || f.x >= w || f.y >= h) {
            if (warnings) warnings->push_back("feature at (" + std::to_string(f.x) + "," + std::to_string(f.y) +
                                              ") lies outside the image, skipped");
            continue;
        }
        if (f.d >= cv.dmax()) {
            if (warnings) warnings->push_back("feature at (" + std::to_string(f.x) + "," + std::to_string(f.y) +
                                              ") has disparity " + std::to_string(f.d) + " >= D=" +
                                              std::to_string(cv.dmax()) + ", skipped");
            continue;
        }
        if (f.d <= 0) continue;
        by_slice[f.d].push_back(f);
    }
    for (auto& slice : by_slice) {
        std::sort(slice.begin(), slice.end(), [](const FeatureDisparity& a, const FeatureDisparity& b) {
            return a.y != b.y ? a.y < b.y : (a.x != b.x ? a.x < b.x : false);
        });
    }

    // Each worker owns whole disparity slices, so no cell is written concurrently.
    parallel_for(0, cv.dmax(), threads, [&](int d) {
        for (const auto& f : by_slice[d]) {
            cv.at(f.x, f.y, d) = 0.0f;
            for (int qy = std::max(0, f.y - ry); qy <= std::min(h - 1, f.y + ry); ++qy) {
                for (int qx = std::max(0, f.x - rx); qx <= std::min(w - 1, f.x + rx); ++qx) {
                    const double wpq = support_weight(left, f.x, f.y, qx, qy, params);
                    const float factor = static_cast<float>(1.0 - wpq);
                    cv.at(qx, qy, d) = cv.at(qx, qy, d) * factor;
                }
            }
        }
    });
}

CostVolume propagate(const CostVolume& cv, const SparseDisparityMap& sdm, const Image& left,
                     const PropagationParams& params, std::vector<std::string>* warnings, int threads) {
    if (sdm.width() != cv.width() || sdm.height() != cv.height()) {
        throw ValidationError("propagate: sparse map and cost volume dimensions differ");
    }
    CostVolume out = cv;
    const auto feats = features_of(sdm);
    propagate_in_place(out, feats, left, params, warnings, threads);
    return out;
}

PropagationReport propagation_report(const CostVolume& before, const CostVolume& after) {
    if (!before.same_shape(after)) throw ValidationError("propagation_report: volume shapes differ");
    PropagationReport rep;
    rep.per_disparity.assign(before.dmax(), 0);
    const auto b = before.data();
    const auto a = after.data();
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] != a[i]) {
            ++rep.modified_cells;
            ++rep.per_disparity[i % before.dmax()];
            rep.mass_removed += static_cast<double>(b[i]) - a[i];
        }
    }
    return rep;
}

std::string PropagationReport::to_json_lines() const {
    std::string out;
    nlohmann::json summary{{"type", "summary"}, {"modified_cells", modified_cells}, {"mass_removed", mass_removed}};
    out += summary.dump() + "\n";
    for (std::size_t d = 0; d < per_disparity.size(); ++d) {
        if (per_disparity[d] == 0) continue;
        nlohmann::json row{{"type", "disparity"}, {"d", d}, {"modified_cells", per_disparity[d]}};
        out += row.dump() + "\n";
    }
    return out;
}

}  // namespace sdp
