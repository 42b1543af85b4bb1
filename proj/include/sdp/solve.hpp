#pragma once

#include <limits>
#include <span>
#include <vector>

#include "sdp/cost.hpp"

namespace sdp {

/// Dense disparity map. Invalid pixels hold +infinity.
class DisparityMap {
public:
    static constexpr float kInvalid = std::numeric_limits<float>::infinity();

    DisparityMap() = default;
    DisparityMap(int width, int height, float fill = kInvalid);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return d_.size(); }

    float at(int x, int y) const noexcept { return d_[static_cast<std::size_t>(y) * width_ + x]; }
    float& at(int x, int y) noexcept { return d_[static_cast<std::size_t>(y) * width_ + x]; }
    bool valid(int x, int y) const noexcept { return is_valid(at(x, y)); }
    void invalidate(int x, int y) noexcept { at(x, y) = kInvalid; }

    std::span<const float> data() const noexcept { return d_; }
    std::span<float> data() noexcept { return d_; }

    std::size_t valid_count() const noexcept;

    static bool is_valid(float v) noexcept { return v < kInvalid && v == v; }

    bool operator==(const DisparityMap&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> d_;
};

struct EnergyParams {
    double lambda = 1.0;
    int tau = 2;
    int max_iterations = 5;

    void validate() const;
};

/// Argmin over d per pixel, ties to the smaller disparity.
DisparityMap wta(const CostVolume& cv, int threads = 0);

/// Parabola through (d-1, d, d+1). Skipped at d in {0, D-1}, when the
/// center is not the lowest of the three, or when the fit is not convex.
DisparityMap subpixel(const CostVolume& cv, const DisparityMap& dm);

/// Sub-pixel offset of the parabola vertex relative to the center sample,
/// or 0 when the triple is not a convex local minimum.
double parabola_offset(double c_minus, double c0, double c_plus);

/// WTA for the right view, reading cost(xr, y, d) = CM(xr + d, y, d) and
/// treating xr + d >= W as kBorderCost.
DisparityMap right_disparity(const CostVolume& cv, int threads = 0);

/// Invalidates left pixels whose right correspondence disagrees by more
/// than tol, is invalid, or falls outside the image.
DisparityMap lr_check(const DisparityMap& left, const DisparityMap& right, double tol = 1.0);

/// Background-biased fill: min of nearest valid left/right neighbor on the
/// row, global valid median for empty rows, then a 3x3 median over the
/// filled pixels only.
DisparityMap fill_invalid(const DisparityMap& dm);

/// Unary + truncated-linear 4-connected smoothness:
///   sum_p CM(p, d_p) + lambda * sum_{(p,q)} min(|d_p - d_q|, tau).
/// Labels must be valid integers inside [0, D).
double energy(const DisparityMap& dm, const CostVolume& cv, const EnergyParams& params);
double energy(std::span<const int> labels, const CostVolume& cv, const EnergyParams& params);

std::vector<int> to_labels(const DisparityMap& dm, int dmax);
DisparityMap from_labels(std::span<const int> labels, int width, int height);

struct ExpansionMove {
    std::vector<int> labels;  // labeling after the optimal binary move
    double energy = 0.0;      // constant + max-flow, i.e. the solver's own bookkeeping
};

/// Optimal alpha-expansion move from `labels`, solved exactly by min-cut.
ExpansionMove expansion_move(const CostVolume& cv, std::span<const int> labels, int alpha,
                             const EnergyParams& params);

struct ExpansionStep {
    int sweep;
    int alpha;
    double predicted;   // from the cut
    double recomputed;  // energy() on the proposed labeling
    bool accepted;
};

/// Sweeps alpha = 0..D-1 until a sweep yields no strict decrease or
/// max_iterations sweeps ran. Never increases the energy of `init`.
DisparityMap alpha_expansion(const CostVolume& cv, const DisparityMap& init, const EnergyParams& params,
                             std::vector<ExpansionStep>* trace = nullptr);

enum class Optimizer { wta, expansion };

struct SolveOptions {
    Optimizer optimizer = Optimizer::expansion;
    EnergyParams energy{};
    bool subpixel = true;
    bool lr_check = true;
    double lr_tol = 1.0;
    bool fill = true;
};

struct SolveResult {
    DisparityMap disparity;  // final output
    DisparityMap labels;     // integer labeling before refinement
    double energy_wta = 0.0;
    double energy_final = 0.0;
    std::size_t lr_invalidated = 0;
};

/// wta -> (expansion) -> (subpixel) -> (lr_check) -> (fill).
SolveResult solve_pipeline(const CostVolume& cv, const SolveOptions& options, int threads = 0);

}  // namespace sdp
