#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdp/bench.hpp"
#include "sdp/config.hpp"
#include "sdp/cost.hpp"
#include "sdp/propagate.hpp"
#include "sdp/solve.hpp"
#include "sdp/sparse.hpp"

namespace sdp {

/// Binary cost-volume interchange: 16-byte header (4-byte magic "SDC1",
/// then H, W, D as little-endian uint32) followed by H*W*D little-endian
/// float32 values in (y, x, d) order, d innermost.
void write_cost_volume(const CostVolume& cv, const std::string& path);
CostVolume read_cost_volume(const std::string& path);

/// ndisp from the explicit value when > 0, else from the calib file.
/// Throws ValidationError naming `ndisp` when neither is available.
int resolve_ndisp(int explicit_ndisp, const std::optional<std::string>& calib_path);

struct StageTiming {
    std::string stage;
    double seconds;
};

struct RunResult {
    PipelineConfig config;  // effective configuration
    SparseResult sparse;
    PropagationReport propagation;
    std::vector<std::string> warnings;
    SolveResult solve;
    std::optional<EvalResult> eval;
    std::vector<StageTiming> timings;
};

/// Optional ground truth and evaluation mask for run().
struct GroundTruth {
    DisparityMap disparity;
    EvalMask mask;
};

/// match -> cost -> propagate -> solve -> (evaluate). `external_matches`
/// replaces the built-in matcher when set. config.ndisp must be resolved.
RunResult run_pipeline(const Image& left, const Image& right, const PipelineConfig& config,
                       const std::optional<GroundTruth>& gt = std::nullopt,
                       const std::optional<SparseDisparityMap>& external_matches = std::nullopt);

/// Metrics document: configuration, stage timings, sparse/propagation
/// statistics, energies and (when present) evaluation results.
std::string metrics_json(const RunResult& r);

}  // namespace sdp
