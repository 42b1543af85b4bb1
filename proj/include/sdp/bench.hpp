#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdp/image.hpp"
#include "sdp/solve.hpp"

namespace sdp {

/// Single-channel "Pf" files. Rows are stored bottom-to-top; a negative
/// scale means little-endian. Non-finite values read as invalid; invalid
/// pixels are written as +inf.
DisparityMap read_pfm(const std::string& path);
void write_pfm(const DisparityMap& dm, const std::string& path);

struct Calibration {
    int ndisp = 0;
    int width = 0;   // 0 when absent
    int height = 0;  // 0 when absent
    std::map<std::string, std::string> values;  // every key, verbatim
};

/// Middlebury-style `key=value` lines. Throws ParseError when ndisp is missing or malformed.
Calibration parse_calib(const std::string& path);

/// Evaluation mask: empty means "every pixel with valid ground truth".
using EvalMask = std::vector<unsigned char>;

/// Middlebury occlusion masks: 255 marks non-occluded pixels.
EvalMask nonocc_mask_from_image(const Image& mask);

/// Approximates the non-occluded set by cross-checking the left and right
/// ground-truth maps within tol.
EvalMask nonocc_mask_from_gt_pair(const DisparityMap& gt_left, const DisparityMap& gt_right, double tol = 1.0);

struct EvalResult {
    double bad_050 = 0.0;
    double bad_100 = 0.0;
    double bad_200 = 0.0;
    double avgerr = 0.0;    // over evaluated pixels with a valid estimate
    double rms = 0.0;       // over evaluated pixels with a valid estimate
    double coverage = 0.0;  // evaluated pixels / all pixels
    std::size_t evaluated = 0;
    std::size_t invalid_estimates = 0;
    /// (threshold, bad %) for every requested threshold.
    std::vector<std::pair<double, double>> bad;
};

/// Percent of evaluated pixels with |d - gt| > t. Invalid estimates count as
/// bad at every threshold; pixels with invalid ground truth are skipped.
EvalResult evaluate(const DisparityMap& dm, const DisparityMap& gt, const EvalMask& mask = {},
                    const std::vector<double>& thresholds = {0.5, 1.0, 2.0});

std::string to_json(const EvalResult& r);

/// Color-coded visualization; range [lo, hi], or the map's min/max when
/// lo >= hi. Invalid pixels are black.
Image visualize_disparity(const DisparityMap& dm, double lo = 0.0, double hi = 0.0);

}  // namespace sdp
