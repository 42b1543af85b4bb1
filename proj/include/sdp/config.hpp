#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdp/cost.hpp"
#include "sdp/propagate.hpp"
#include "sdp/solve.hpp"
#include "sdp/sparse.hpp"

namespace sdp {

/// Every tunable of the pipeline. Defaults: three census scales weighted
/// {0.7, 0.2, 0.1}, alpha 0.8, lambda_rho 10, lambda_census 30, 5x5
/// propagation window with gamma 10, ratio test 0.6.
struct PipelineConfig {
    CostParams cost{};
    CostMeasure measure = CostMeasure::rho_census;
    SparseParams sparse{};
    PropagationParams propagation{};
    SolveOptions solve{};
    bool propagate = true;
    int ndisp = 0;  // 0: take it from calib.txt
    int threads = 0;

    /// Applies one `key = value` assignment. Throws ValidationError for
    /// unknown keys or unparsable values, naming the key.
    void set(const std::string& key, const std::string& value);

    /// Checks cross-field constraints; errors name the offending field.
    void validate() const;

    /// Flat, sorted key/value view of the effective configuration.
    std::map<std::string, std::string> to_map() const;
    std::string to_text() const;
};

/// Reads a flat `key = value` file ('#' comments) on top of `base`.
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

std::string to_string(CostMeasure m);
std::string to_string(Optimizer o);

}  // namespace sdp
