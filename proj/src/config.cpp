#include "sdp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "sdp/error.hpp"

namespace sdp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ValidationError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(key + ": expected on/off, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

std::string on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

std::string to_string(CostMeasure m) { return m == CostMeasure::rho_census ? "rho-census" : "ad-census"; }
std::string to_string(Optimizer o) { return o == Optimizer::wta ? "wta" : "expansion"; }

void PipelineConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string v = trim(raw_value);
    using Setter = std::function<void()>;
    const std::map<std::string, Setter> setters = {
        {"n_scales", [&] { cost.n_scales = parse_int(key, v); }},
        {"scale_weights", [&] { cost.scale_weights = parse_list(key, v); }},
        {"scale_sigma_step", [&] { cost.scale_sigma_step = parse_double(key, v); }},
        {"alpha", [&] { cost.alpha = parse_double(key, v); }},
        {"lambda_rho", [&] { cost.lambda_rho = parse_double(key, v); }},
        {"lambda_census", [&] { cost.lambda_census = parse_double(key, v); }},
        {"lambda_ad", [&] { cost.lambda_ad = parse_double(key, v); }},
        {"census_width", [&] { cost.census_window.width = parse_int(key, v); }},
        {"census_height", [&] { cost.census_window.height = parse_int(key, v); }},
        {"measure",
         [&] {
             if (v == "rho-census") measure = CostMeasure::rho_census;
             else if (v == "ad-census") measure = CostMeasure::ad_census;
             else throw ValidationError(key + ": expected rho-census or ad-census, got '" + v + "'");
         }},
        {"ndisp", [&] { ndisp = parse_int(key, v); }},
        {"threads", [&] { threads = parse_int(key, v); }},
        {"max_points", [&] { sparse.detector.max_points = parse_int(key, v); }},
        {"nms_radius", [&] { sparse.detector.nms_radius = parse_int(key, v); }},
        {"harris_k", [&] { sparse.detector.harris_k = parse_double(key, v); }},
        {"patch_width", [&] { sparse.patch.width = parse_int(key, v); }},
        {"patch_height", [&] { sparse.patch.height = parse_int(key, v); }},
        {"descriptor",
         [&] {
             if (v == "patch") sparse.descriptor = DescriptorKind::patch;
             else if (v == "census") sparse.descriptor = DescriptorKind::census;
             else throw ValidationError(key + ": expected patch or census, got '" + v + "'");
         }},
        {"ratio", [&] { sparse.matching.ratio = parse_double(key, v); }},
        {"epipolar_tol", [&] { sparse.matching.epipolar_tol = parse_double(key, v); }},
        {"abs_tol", [&] { sparse.matching.abs_tol = parse_double(key, v); }},
        {"propagate", [&] { propagate = parse_bool(key, v); }},
        {"window_width", [&] { propagation.window_width = parse_int(key, v); }},
        {"window_height", [&] { propagation.window_height = parse_int(key, v); }},
        {"gamma", [&] { propagation.gamma = parse_double(key, v); }},
        {"spatial_sigma", [&] { propagation.spatial_sigma = parse_double(key, v); }},
        {"optimizer",
         [&] {
             if (v == "wta") solve.optimizer = Optimizer::wta;
             else if (v == "expansion") solve.optimizer = Optimizer::expansion;
             else throw ValidationError(key + ": expected wta or expansion, got '" + v + "'");
         }},
        {"lambda", [&] { solve.energy.lambda = parse_double(key, v); }},
        {"tau", [&] { solve.energy.tau = parse_int(key, v); }},
        {"iters", [&] { solve.energy.max_iterations = parse_int(key, v); }},
        {"subpixel", [&] { solve.subpixel = parse_bool(key, v); }},
        {"lr_check", [&] { solve.lr_check = parse_bool(key, v); }},
        {"lr_tol", [&] { solve.lr_tol = parse_double(key, v); }},
        {"fill", [&] { solve.fill = parse_bool(key, v); }},
    };
    const auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError("unknown configuration key '" + key + "'");
    it->second();
}

void PipelineConfig::validate() const {
    CostParams c = cost;
    c.dmax = ndisp > 0 ? ndisp : 1;
    c.validate();
    if (ndisp < 0) throw ValidationError("ndisp must be positive");
    propagation.validate();
    solve.energy.validate();
    if (!(sparse.matching.ratio > 0.0 && sparse.matching.ratio < 1.0)) {
        throw ValidationError("ratio must lie in (0, 1)");
    }
    if (sparse.matching.epipolar_tol < 0.0) throw ValidationError("epipolar_tol must be non-negative");
    if (sparse.matching.abs_tol < 0.0) throw ValidationError("abs_tol must be non-negative");
    if (sparse.detector.max_points < 0) throw ValidationError("max_points must be non-negative");
    if (sparse.detector.nms_radius < 0) throw ValidationError("nms_radius must be non-negative");
    if (sparse.patch.width < 1 || sparse.patch.height < 1 || sparse.patch.width % 2 == 0 ||
        sparse.patch.height % 2 == 0) {
        throw ValidationError("patch_width/patch_height must be odd and positive");
    }
    if (solve.lr_tol < 0.0) throw ValidationError("lr_tol must be non-negative");
    if (threads < 0) throw ValidationError("threads must be non-negative");
}

std::map<std::string, std::string> PipelineConfig::to_map() const {
    std::string weights;
    for (std::size_t i = 0; i < cost.scale_weights.size(); ++i) {
        if (i) weights += ",";
        weights += fmt(cost.scale_weights[i]);
    }
    return {
        {"n_scales", std::to_string(cost.n_scales)},
        {"scale_weights", weights},
        {"scale_sigma_step", fmt(cost.scale_sigma_step)},
        {"alpha", fmt(cost.alpha)},
        {"lambda_rho", fmt(cost.lambda_rho)},
        {"lambda_census", fmt(cost.lambda_census)},
        {"lambda_ad", fmt(cost.lambda_ad)},
        {"census_width", std::to_string(cost.census_window.width)},
        {"census_height", std::to_string(cost.census_window.height)},
        {"measure", to_string(measure)},
        {"ndisp", std::to_string(ndisp)},
        {"threads", std::to_string(threads)},
        {"max_points", std::to_string(sparse.detector.max_points)},
        {"nms_radius", std::to_string(sparse.detector.nms_radius)},
        {"harris_k", fmt(sparse.detector.harris_k)},
        {"patch_width", std::to_string(sparse.patch.width)},
        {"patch_height", std::to_string(sparse.patch.height)},
        {"descriptor", sparse.descriptor == DescriptorKind::patch ? "patch" : "census"},
        {"ratio", fmt(sparse.matching.ratio)},
        {"epipolar_tol", fmt(sparse.matching.epipolar_tol)},
        {"abs_tol", fmt(sparse.matching.abs_tol)},
        {"propagate", on_off(propagate)},
        {"window_width", std::to_string(propagation.window_width)},
        {"window_height", std::to_string(propagation.window_height)},
        {"gamma", fmt(propagation.gamma)},
        {"spatial_sigma", fmt(propagation.spatial_sigma)},
        {"optimizer", to_string(solve.optimizer)},
        {"lambda", fmt(solve.energy.lambda)},
        {"tau", std::to_string(solve.energy.tau)},
        {"iters", std::to_string(solve.energy.max_iterations)},
        {"subpixel", on_off(solve.subpixel)},
        {"lr_check", on_off(solve.lr_check)},
        {"lr_tol", fmt(solve.lr_tol)},
        {"fill", on_off(solve.fill)},
    };
}

std::string PipelineConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
    return out;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path, lineno, "expected key = value");
        try {
            base.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

}  // namespace sdp
