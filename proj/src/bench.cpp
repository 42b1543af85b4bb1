#include "sdp/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdp/error.hpp"

namespace sdp {

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

DisparityMap read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    if (!std::getline(in, magic)) throw IoError(path + ": empty PFM");
    magic = trim(magic);
    if (magic != "Pf") throw IoError(path + ": bad PFM magic '" + magic + "' (expected Pf)");
    int w = 0, h = 0;
    double scale = 0.0;
    if (!(in >> w >> h >> scale)) throw IoError(path + ": malformed PFM header");
    in.get();  // the single whitespace byte after the scale
    if (w <= 0 || h <= 0) throw IoError(path + ": bad PFM dimensions");
    if (scale == 0.0 || !std::isfinite(scale)) throw IoError(path + ": PFM scale must be non-zero");

    const bool file_le = scale < 0.0;
    const bool host_le = std::endian::native == std::endian::little;
    std::vector<std::uint32_t> raw(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (in.gcount() != static_cast<std::streamsize>(raw.size() * 4)) throw IoError(path + ": truncated PFM payload");

    DisparityMap dm(w, h);
    for (int row = 0; row < h; ++row) {
        const int y = h - 1 - row;
        for (int x = 0; x < w; ++x) {
            std::uint32_t bits = raw[static_cast<std::size_t>(row) * w + x];
            if (file_le != host_le) bits = byteswap32(bits);
            float v;
            std::memcpy(&v, &bits, 4);
            dm.at(x, y) = std::isfinite(v) ? v : DisparityMap::kInvalid;
        }
    }
    return dm;
}

void write_pfm(const DisparityMap& dm, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "Pf\n" << dm.width() << ' ' << dm.height() << "\n-1.0\n";
    const bool host_le = std::endian::native == std::endian::little;
    std::vector<std::uint32_t> raw(dm.pixel_count());
    for (int row = 0; row < dm.height(); ++row) {
        const int y = dm.height() - 1 - row;
        for (int x = 0; x < dm.width(); ++x) {
            const float v = dm.valid(x, y) ? dm.at(x, y) : DisparityMap::kInvalid;
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            raw[static_cast<std::size_t>(row) * dm.width() + x] = host_le ? bits : byteswap32(bits);
        }
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (!out) throw IoError("write failed: " + path);
}

Calibration parse_calib(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    Calibration calib;
    std::string line;
    int lineno = 0;
    int ndisp_line = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path, lineno, "expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        calib.values[key] = value;
        if (key == "ndisp") ndisp_line = lineno;
    }
    const auto as_int = [&](const std::string& key, int lineno_hint) -> int {
        const std::string& v = calib.values.at(key);
        try {
            std::size_t used = 0;
            const int parsed = std::stoi(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return parsed;
        } catch (const std::exception&) {
            throw ParseError(path, lineno_hint, key + " is not an integer: '" + v + "'");
        }
    };
    if (!calib.values.count("ndisp")) throw ParseError(path, lineno, "missing ndisp");
    calib.ndisp = as_int("ndisp", ndisp_line);
    if (calib.ndisp < 1) throw ParseError(path, ndisp_line, "ndisp must be >= 1");
    if (calib.values.count("width")) calib.width = as_int("width", 0);
    if (calib.values.count("height")) calib.height = as_int("height", 0);
    return calib;
}

EvalMask nonocc_mask_from_image(const Image& mask) {
    const Image gray = to_grayscale(mask);
    EvalMask out(gray.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = gray.data()[i] >= 254.5f ? 1 : 0;
    return out;
}

EvalMask nonocc_mask_from_gt_pair(const DisparityMap& gt_left, const DisparityMap& gt_right, double tol) {
    const DisparityMap checked = lr_check(gt_left, gt_right, tol);
    EvalMask out(checked.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = DisparityMap::is_valid(checked.data()[i]) ? 1 : 0;
    return out;
}

EvalResult evaluate(const DisparityMap& dm, const DisparityMap& gt, const EvalMask& mask,
                    const std::vector<double>& thresholds) {
    if (dm.width() != gt.width() || dm.height() != gt.height()) throw ValidationError("evaluate: dimension mismatch");
    if (!mask.empty() && mask.size() != gt.pixel_count()) throw ValidationError("evaluate: mask size mismatch");

    std::vector<double> all_thresholds = {0.5, 1.0, 2.0};
    for (double t : thresholds) {
        if (std::find(all_thresholds.begin(), all_thresholds.end(), t) == all_thresholds.end()) {
            all_thresholds.push_back(t);
        }
    }
    std::vector<std::size_t> bad_counts(all_thresholds.size(), 0);
    EvalResult r;
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    std::size_t valid_est = 0;
    for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
        const float g = gt.data()[i];
        if (!DisparityMap::is_valid(g)) continue;
        if (!mask.empty() && !mask[i]) continue;
        ++r.evaluated;
        const float e = dm.data()[i];
        if (!DisparityMap::is_valid(e)) {
            ++r.invalid_estimates;
            for (auto& c : bad_counts) ++c;
            continue;
        }
        const double err = std::abs(static_cast<double>(e) - g);
        abs_sum += err;
        sq_sum += err * err;
        ++valid_est;
        for (std::size_t k = 0; k < all_thresholds.size(); ++k) {
            if (err > all_thresholds[k]) ++bad_counts[k];
        }
    }
    const auto pct = [&](std::size_t c) { return r.evaluated ? 100.0 * static_cast<double>(c) / r.evaluated : 0.0; };
    r.bad_050 = pct(bad_counts[0]);
    r.bad_100 = pct(bad_counts[1]);
    r.bad_200 = pct(bad_counts[2]);
    for (double t : thresholds) {
        const auto k = std::find(all_thresholds.begin(), all_thresholds.end(), t) - all_thresholds.begin();
        r.bad.emplace_back(t, pct(bad_counts[k]));
    }
    r.avgerr = valid_est ? abs_sum / valid_est : 0.0;
    r.rms = valid_est ? std::sqrt(sq_sum / valid_est) : 0.0;
    r.coverage = gt.pixel_count() ? static_cast<double>(r.evaluated) / gt.pixel_count() : 0.0;
    return r;
}

std::string to_json(const EvalResult& r) {
    nlohmann::json j{{"bad_050", r.bad_050},   {"bad_100", r.bad_100},
                     {"bad_200", r.bad_200},   {"avgerr", r.avgerr},
                     {"rms", r.rms},           {"coverage", r.coverage},
                     {"evaluated", r.evaluated}, {"invalid_estimates", r.invalid_estimates}};
    nlohmann::json bad = nlohmann::json::array();
    for (const auto& [t, v] : r.bad) bad.push_back({{"threshold", t}, {"bad", v}});
    j["bad"] = bad;
    return j.dump(2);
}

Image visualize_disparity(const DisparityMap& dm, double lo, double hi) {
    if (!(lo < hi)) {
        lo = std::numeric_limits<double>::max();
        hi = std::numeric_limits<double>::lowest();
        for (float v : dm.data()) {
            if (!DisparityMap::is_valid(v)) continue;
            lo = std::min(lo, static_cast<double>(v));
            hi = std::max(hi, static_cast<double>(v));
        }
        if (!(lo < hi)) hi = lo + 1.0;
    }
    Image out(dm.width(), dm.height(), 3);
    for (int y = 0; y < dm.height(); ++y) {
        for (int x = 0; x < dm.width(); ++x) {
            if (!dm.valid(x, y)) continue;
            const double t = std::clamp((dm.at(x, y) - lo) / (hi - lo), 0.0, 1.0);
            // Blue -> cyan -> yellow -> red ramp.
            const double r = std::clamp(1.5 - std::abs(4.0 * t - 3.0), 0.0, 1.0);
            const double g = std::clamp(1.5 - std::abs(4.0 * t - 2.0), 0.0, 1.0);
            const double b = std::clamp(1.5 - std::abs(4.0 * t - 1.0), 0.0, 1.0);
            out.at(x, y, 0) = static_cast<float>(255.0 * r);
            out.at(x, y, 1) = static_cast<float>(255.0 * g);
            out.at(x, y, 2) = static_cast<float>(255.0 * b);
        }
    }
    return out;
}

}  // namespace sdp
