#include "sdp/pipeline.hpp"

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "sdp/error.hpp"

namespace sdp {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'C', '1'};

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

void write_cost_volume(const CostVolume& cv, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kMagic, 4);
    for (int v : {cv.height(), cv.width(), cv.dmax()}) {
        const std::uint32_t le = to_le(static_cast<std::uint32_t>(v));
        out.write(reinterpret_cast<const char*>(&le), 4);
    }
    std::vector<std::uint32_t> raw(cv.data().size());
    std::memcpy(raw.data(), cv.data().data(), raw.size() * 4);
    for (auto& b : raw) b = to_le(b);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (!out) throw IoError("write failed: " + path);
}

CostVolume read_cost_volume(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4] = {};
    std::uint32_t dims[3] = {};
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(dims), 12);
    if (!in) throw IoError(path + ": truncated cost volume header");
    if (std::memcmp(magic, kMagic, 3) != 0) throw IoError(path + ": not a cost volume file (bad magic)");
    if (magic[3] != kMagic[3]) {
        throw IoError(path + ": unsupported cost volume version '" + std::string(1, magic[3]) + "'");
    }
    const int h = static_cast<int>(to_le(dims[0]));
    const int w = static_cast<int>(to_le(dims[1]));
    const int d = static_cast<int>(to_le(dims[2]));
    if (h <= 0 || w <= 0 || d <= 0) throw IoError(path + ": bad cost volume dimensions");
    CostVolume cv(w, h, d);
    std::vector<std::uint32_t> raw(cv.data().size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (in.gcount() != static_cast<std::streamsize>(raw.size() * 4)) throw IoError(path + ": truncated cost volume");
    for (auto& b : raw) b = to_le(b);
    std::memcpy(cv.data().data(), raw.data(), raw.size() * 4);
    return cv;
}

int resolve_ndisp(int explicit_ndisp, const std::optional<std::string>& calib_path) {
    if (explicit_ndisp > 0) return explicit_ndisp;
    if (calib_path) return parse_calib(*calib_path).ndisp;
    throw ValidationError("ndisp: no disparity range given (pass --ndisp or --calib)");
}

RunResult run_pipeline(const Image& left, const Image& right, const PipelineConfig& config,
                       const std::optional<GroundTruth>& gt, const std::optional<SparseDisparityMap>& external_matches) {
    config.validate();
    if (config.ndisp < 1) throw ValidationError("ndisp: disparity range is not set");
    if (!left.same_shape(right)) throw ValidationError("left and right images differ in shape");

    RunResult r;
    r.config = config;
    r.config.cost.dmax = config.ndisp;
    r.config.sparse.matching.dmax = config.ndisp;
    const int threads = config.threads;
    Stopwatch sw;

    if (external_matches) {
        if (external_matches->width() != left.width() || external_matches->height() != left.height()) {
            throw ValidationError("imported match map does not match the image size");
        }
        r.sparse.map = *external_matches;
    } else if (config.propagate) {
        r.sparse = compute_sparse_disparities(left, right, r.config.sparse, threads);
    } else {
        r.sparse.map = SparseDisparityMap(left.width(), left.height());
    }
    r.timings.push_back({"match", sw.lap()});

    CostVolume cv = build_cost_volume(left, right, r.config.cost, config.measure, threads);
    r.timings.push_back({"cost", sw.lap()});

    if (config.propagate) {
        CostVolume after = propagate(cv, r.sparse.map, left, config.propagation, &r.warnings, threads);
        r.propagation = propagation_report(cv, after);
        cv = std::move(after);
    } else {
        r.propagation.per_disparity.assign(cv.dmax(), 0);
    }
    r.timings.push_back({"propagate", sw.lap()});

    r.solve = solve_pipeline(cv, config.solve, threads);
    r.timings.push_back({"solve", sw.lap()});

    if (gt) {
        r.eval = evaluate(r.solve.disparity, gt->disparity, gt->mask);
        r.timings.push_back({"evaluate", sw.lap()});
    }
    return r;
}

std::string metrics_json(const RunResult& r) {
    nlohmann::json j;
    j["config"] = r.config.to_map();
    nlohmann::json timings = nlohmann::json::object();
    double total = 0.0;
    for (const auto& t : r.timings) {
        timings[t.stage] = t.seconds;
        total += t.seconds;
    }
    timings["total"] = total;
    j["timings_s"] = timings;
    j["sparse"] = {{"left_keypoints", r.sparse.left_kps.size()},
                   {"right_keypoints", r.sparse.right_kps.size()},
                   {"matches", r.sparse.matches.size()},
                   {"feature_pixels", r.sparse.map.size()}};
    j["propagation"] = {{"modified_cells", r.propagation.modified_cells},
                        {"mass_removed", r.propagation.mass_removed}};
    j["energy"] = {{"wta", r.solve.energy_wta}, {"final", r.solve.energy_final}};
    j["lr_invalidated"] = r.solve.lr_invalidated;
    j["warnings"] = r.warnings;
    if (r.eval) j["eval"] = nlohmann::json::parse(to_json(*r.eval));
    return j.dump(2);
}

}  // namespace sdp
