#include "sdp/sparse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "sdp/error.hpp"
#include "sdp/parallel.hpp"

namespace sdp {

std::vector<float> harris_response(const Image& gray, double k, double window_sigma) {
    const auto g = gradients(gray);
    const std::size_t n = gray.pixel_count();
    std::vector<float> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = g.gx[i] * g.gx[i];
        yy[i] = g.gy[i] * g.gy[i];
        xy[i] = g.gx[i] * g.gy[i];
    }
    xx = blur_plane(xx, gray.width(), gray.height(), window_sigma);
    yy = blur_plane(yy, gray.width(), gray.height(), window_sigma);
    xy = blur_plane(xy, gray.width(), gray.height(), window_sigma);
    std::vector<float> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double det = static_cast<double>(xx[i]) * yy[i] - static_cast<double>(xy[i]) * xy[i];
        const double tr = static_cast<double>(xx[i]) + yy[i];
        r[i] = static_cast<float>(det - k * tr * tr);
    }
    return r;
}

std::vector<Keypoint> detect(const Image& img, const DetectorParams& params) {
    if (params.nms_radius < 0) throw ValidationError("nms_radius must be non-negative");
    if (params.max_points < 0) throw ValidationError("max_points must be non-negative");
    const Image gray = to_grayscale(img);
    const int w = gray.width();
    const int h = gray.height();
    const auto r = harris_response(gray, params.harris_k, params.window_sigma);
    const float peak = *std::max_element(r.begin(), r.end());
    std::vector<Keypoint> kps;
    if (!(peak > 0.0f)) return kps;
    const float threshold = static_cast<float>(params.threshold_ratio * peak);
    const int rad = params.nms_radius;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float v = r[static_cast<std::size_t>(y) * w + x];
            if (v <= threshold || v <= 0.0f) continue;
            // Strict maximum, plateaus resolved toward the first pixel in raster order.
            bool is_max = true;
            for (int dy = -rad; dy <= rad && is_max; ++dy) {
                for (int dx = -rad; dx <= rad; ++dx) {
                    const int qx = x + dx;
                    const int qy = y + dy;
                    if ((dx == 0 && dy == 0) || qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                    const float q = r[static_cast<std::size_t>(qy) * w + qx];
                    const bool earlier = dy < 0 || (dy == 0 && dx < 0);
                    if (q > v || (q == v && earlier)) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) kps.push_back({static_cast<float>(x), static_cast<float>(y), v});
        }
    }
    std::stable_sort(kps.begin(), kps.end(),
                     [](const Keypoint& a, const Keypoint& b) { return a.response > b.response; });
    if (static_cast<int>(kps.size()) > params.max_points) kps.resize(params.max_points);
    return kps;
}

std::vector<Keypoint> detect(const Image& img, int max_points, int nms_radius) {
    DetectorParams p;
    p.max_points = max_points;
    p.nms_radius = nms_radius;
    return detect(img, p);
}

Descriptor describe(const Image& img, const Keypoint& kp, PatchSize patch, DescriptorKind kind) {
    if (patch.width <= 0 || patch.height <= 0 || patch.width % 2 == 0 || patch.height % 2 == 0) {
        throw ValidationError("descriptor patch dimensions must be odd and positive");
    }
    const Image gray = img.channels() == 1 ? img : to_grayscale(img);
    const int cx = static_cast<int>(std::lround(kp.x));
    const int cy = static_cast<int>(std::lround(kp.y));
    const int rx = patch.width / 2;
    const int ry = patch.height / 2;

    Descriptor desc;
    desc.kind = kind;
    if (kind == DescriptorKind::census) {
        desc.nbits = patch.width * patch.height - 1;
        desc.bits.assign((desc.nbits + 63) / 64, 0);
        const float center = gray.clamped(cx, cy);
        int k = 0;
        for (int dy = -ry; dy <= ry; ++dy) {
            for (int dx = -rx; dx <= rx; ++dx) {
                if (dx == 0 && dy == 0) continue;
                if (gray.clamped(cx + dx, cy + dy) < center) desc.bits[k / 64] |= std::uint64_t{1} << (k % 64);
                ++k;
            }
        }
        return desc;
    }

    desc.values.reserve(static_cast<std::size_t>(patch.width) * patch.height);
    double mean = 0.0;
    for (int dy = -ry; dy <= ry; ++dy) {
        for (int dx = -rx; dx <= rx; ++dx) {
            desc.values.push_back(gray.clamped(cx + dx, cy + dy));
            mean += desc.values.back();
        }
    }
    mean /= static_cast<double>(desc.values.size());
    double norm2 = 0.0;
    std::vector<double> centered(desc.values.size());
    for (std::size_t i = 0; i < centered.size(); ++i) {
        centered[i] = desc.values[i] - mean;
        norm2 += centered[i] * centered[i];
    }
    const double norm = std::sqrt(norm2);
    for (std::size_t i = 0; i < centered.size(); ++i) {
        desc.values[i] = norm > 1e-9 ? static_cast<float>(centered[i] / norm) : 0.0f;
    }
    return desc;
}

double descriptor_distance(const Descriptor& a, const Descriptor& b) {
    if (a.kind != b.kind) throw ValidationError("descriptor kinds differ");
    if (a.kind == DescriptorKind::census) {
        if (a.bits.size() != b.bits.size()) throw ValidationError("descriptor lengths differ");
        int d = 0;
        for (std::size_t i = 0; i < a.bits.size(); ++i) d += std::popcount(a.bits[i] ^ b.bits[i]);
        return d;
    }
    if (a.values.size() != b.values.size()) throw ValidationError("descriptor lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double diff = static_cast<double>(a.values[i]) - b.values[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

namespace {

constexpr int kNoMatch = -1;

// For each query keypoint, the index of the accepted nearest target, or kNoMatch.
// `query_is_left` fixes the sign of the disparity constraint.
std::vector<int> one_way_matches(std::span<const Descriptor> qd, std::span<const Descriptor> td,
                                 std::span<const Keypoint> qk, std::span<const Keypoint> tk, bool query_is_left,
                                 const MatchParams& params) {
    std::vector<int> accepted(qk.size(), kNoMatch);
    for (std::size_t i = 0; i < qk.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        double second = std::numeric_limits<double>::infinity();
        int best_j = kNoMatch;
        int candidates = 0;
        for (std::size_t j = 0; j < tk.size(); ++j) {
            if (std::abs(static_cast<double>(qk[i].y) - tk[j].y) > params.epipolar_tol) continue;
            const double dx = query_is_left ? static_cast<double>(qk[i].x) - tk[j].x
                                            : static_cast<double>(tk[j].x) - qk[i].x;
            if (!(dx > 0.0 && dx <= params.dmax)) continue;
            ++candidates;
            const double dist = descriptor_distance(qd[i], td[j]);
            if (dist < best) {
                second = best;
                best = dist;
                best_j = static_cast<int>(j);
            } else if (dist < second) {
                second = dist;
            }
        }
        if (candidates == 0) continue;
        if (candidates == 1) {
            if (best <= params.abs_tol) accepted[i] = best_j;
            continue;
        }
        // second == 0 implies an exact duplicate: ambiguous.
        if (second > 0.0 && best / second <= params.ratio) accepted[i] = best_j;
    }
    return accepted;
}

}  // namespace

std::vector<MatchPair> match(std::span<const Descriptor> left_desc, std::span<const Descriptor> right_desc,
                             std::span<const Keypoint> left_kps, std::span<const Keypoint> right_kps,
                             const MatchParams& params) {
    if (!(params.ratio > 0.0 && params.ratio < 1.0)) throw ValidationError("ratio must lie in (0, 1)");
    if (left_desc.size() != left_kps.size() || right_desc.size() != right_kps.size()) {
        throw ValidationError("descriptor and keypoint counts differ");
    }
    const auto l2r = one_way_matches(left_desc, right_desc, left_kps, right_kps, true, params);
    const auto r2l = one_way_matches(right_desc, left_desc, right_kps, left_kps, false, params);
    std::vector<MatchPair> out;
    for (std::size_t i = 0; i < l2r.size(); ++i) {
        const int j = l2r[i];
        if (j == kNoMatch || r2l[j] != static_cast<int>(i)) continue;
        out.push_back({left_kps[i], right_kps[j], descriptor_distance(left_desc[i], right_desc[j])});
    }
    return out;
}

SparseDisparityMap::SparseDisparityMap(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw ValidationError("sparse map dimensions must be positive");
    d_.assign(static_cast<std::size_t>(width) * height, kAbsent);
}

std::optional<int> SparseDisparityMap::at(int x, int y) const noexcept {
    const int v = d_[static_cast<std::size_t>(y) * width_ + x];
    if (v == kAbsent) return std::nullopt;
    return v;
}

void SparseDisparityMap::set(int x, int y, int d) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) throw ValidationError("sparse map pixel out of bounds");
    if (d < 0) throw ValidationError("sparse disparity must be non-negative");
    int& slot = d_[static_cast<std::size_t>(y) * width_ + x];
    if (slot == kAbsent) ++count_;
    slot = d;
}

void SparseDisparityMap::erase(int x, int y) {
    int& slot = d_[static_cast<std::size_t>(y) * width_ + x];
    if (slot != kAbsent) --count_;
    slot = kAbsent;
}

std::vector<SparseDisparityMap::Entry> SparseDisparityMap::entries() const {
    std::vector<Entry> out;
    out.reserve(count_);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const int v = d_[static_cast<std::size_t>(y) * width_ + x];
            if (v != kAbsent) out.push_back({x, y, v});
        }
    }
    return out;
}

SparseDisparityMap to_sparse_map(std::span<const MatchPair> matches, int width, int height, int dmax) {
    SparseDisparityMap map(width, height);
    std::vector<double> best(static_cast<std::size_t>(width) * height, std::numeric_limits<double>::infinity());
    for (const auto& m : matches) {
        const long d = std::lround(m.disparity());
        if (d < 1 || d >= dmax) continue;
        const int x = static_cast<int>(std::lround(m.left.x));
        const int y = static_cast<int>(std::lround(m.left.y));
        if (x < 0 || y < 0 || x >= width || y >= height) continue;
        double& slot = best[static_cast<std::size_t>(y) * width + x];
        if (map.at(x, y) && m.distance >= slot) continue;
        slot = m.distance;
        map.set(x, y, static_cast<int>(d));
    }
    return map;
}

MatchImport import_matches(const std::string& path, int width, int height, int dmax) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    MatchImport result;
    std::string line;
    int lineno = 0;
    const auto inside = [&](double x, double y) { return x >= 0.0 && y >= 0.0 && x <= width - 1 && y <= height - 1; };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double xl, yl, xr, yr;
        if (!(ss >> xl)) {
            std::string rest;
            ss.clear();
            if (ss >> rest) throw ParseError(path, lineno, "expected 'xl yl xr yr'");
            continue;  // blank
        }
        std::string extra;
        if (!(ss >> yl >> xr >> yr) || (ss >> extra)) throw ParseError(path, lineno, "expected 'xl yl xr yr'");
        if (!std::isfinite(xl) || !std::isfinite(yl) || !std::isfinite(xr) || !std::isfinite(yr)) {
            throw ParseError(path, lineno, "non-finite coordinate");
        }
        if (!inside(xl, yl) || !inside(xr, yr)) {
            result.warnings.push_back(path + ":" + std::to_string(lineno) + ": coordinates outside the " +
                                      std::to_string(width) + "x" + std::to_string(height) + " image, skipped");
            continue;
        }
        result.matches.push_back({{static_cast<float>(xl), static_cast<float>(yl), 0.0f},
                                  {static_cast<float>(xr), static_cast<float>(yr), 0.0f},
                                  0.0});
    }
    result.map = to_sparse_map(result.matches, width, height, dmax);
    return result;
}

void export_matches(std::span<const MatchPair> matches, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# xl yl xr yr\n";
    out.precision(9);
    for (const auto& m : matches) out << m.left.x << ' ' << m.left.y << ' ' << m.right.x << ' ' << m.right.y << '\n';
    if (!out) throw IoError("write failed: " + path);
}

namespace {

void put(Image& img, int x, int y, float r, float g, float b) {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
    img.at(x, y, 0) = r;
    img.at(x, y, 1) = g;
    img.at(x, y, 2) = b;
}

void circle(Image& img, int cx, int cy, int radius, float r, float g, float b) {
    const int steps = 8 * radius + 8;
    for (int i = 0; i < steps; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / steps;
        put(img, cx + static_cast<int>(std::lround(radius * std::cos(a))),
            cy + static_cast<int>(std::lround(radius * std::sin(a))), r, g, b);
    }
}

void line(Image& img, int x0, int y0, int x1, int y1, float r, float g, float b) {
    const int n = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
    for (int i = 0; i <= n; ++i) {
        const double t = n == 0 ? 0.0 : static_cast<double>(i) / n;
        put(img, static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))),
            r, g, b);
    }
}

}  // namespace

Image draw_matches(const Image& left, const Image& right, std::span<const Keypoint> left_kps,
                   std::span<const Keypoint> right_kps, std::span<const MatchPair> matches) {
    const Image gl = to_grayscale(left);
    const Image gr = to_grayscale(right);
    const int w = gl.width();
    Image canvas(w * 2, std::max(gl.height(), gr.height()), 3);
    for (int y = 0; y < gl.height(); ++y) {
        for (int x = 0; x < w; ++x) put(canvas, x, y, gl.at(x, y), gl.at(x, y), gl.at(x, y));
    }
    for (int y = 0; y < gr.height(); ++y) {
        for (int x = 0; x < gr.width(); ++x) put(canvas, w + x, y, gr.at(x, y), gr.at(x, y), gr.at(x, y));
    }
    for (const auto& k : left_kps) circle(canvas, std::lround(k.x), std::lround(k.y), 3, 0, 200, 255);
    for (const auto& k : right_kps) circle(canvas, w + std::lround(k.x), std::lround(k.y), 3, 0, 200, 255);
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const auto& m = matches[i];
        const float hue = static_cast<float>((i * 67) % 256);
        line(canvas, std::lround(m.left.x), std::lround(m.left.y), w + std::lround(m.right.x), std::lround(m.right.y),
             255.0f, hue, 255.0f - hue);
    }
    return canvas;
}

SparseResult compute_sparse_disparities(const Image& left, const Image& right, const SparseParams& params,
                                        int threads) {
    if (!left.same_shape(right)) throw ValidationError("left and right images differ in shape");
    SparseResult res;
    const Image gl = to_grayscale(left);
    const Image gr = to_grayscale(right);
    res.left_kps = detect(gl, params.detector);
    res.right_kps = detect(gr, params.detector);

    std::vector<Descriptor> dl(res.left_kps.size());
    std::vector<Descriptor> dr(res.right_kps.size());
    parallel_for(0, static_cast<int>(dl.size()), threads,
                 [&](int i) { dl[i] = describe(gl, res.left_kps[i], params.patch, params.descriptor); });
    parallel_for(0, static_cast<int>(dr.size()), threads,
                 [&](int i) { dr[i] = describe(gr, res.right_kps[i], params.patch, params.descriptor); });

    res.matches = match(dl, dr, res.left_kps, res.right_kps, params.matching);
    res.map = to_sparse_map(res.matches, left.width(), left.height(), params.matching.dmax);
    return res;
}

}  // namespace sdp
