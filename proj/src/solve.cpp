#include "sdp/solve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdp/error.hpp"
#include "sdp/maxflow.hpp"
#include "sdp/parallel.hpp"

namespace sdp {

DisparityMap::DisparityMap(int width, int height, float fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw ValidationError("disparity map dimensions must be positive");
    d_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::size_t DisparityMap::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(d_.begin(), d_.end(), [](float v) { return is_valid(v); }));
}

void EnergyParams::validate() const {
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be non-negative");
    if (tau < 1) throw ValidationError("tau must be >= 1");
    if (max_iterations < 0) throw ValidationError("max_iterations must be non-negative");
}

DisparityMap wta(const CostVolume& cv, int threads) {
    DisparityMap dm(cv.width(), cv.height());
    parallel_for(0, cv.height(), threads, [&](int y) {
        for (int x = 0; x < cv.width(); ++x) {
            const auto c = cv.pixel(x, y);
            int best = 0;
            for (int d = 1; d < cv.dmax(); ++d) {
                if (c[d] < c[best]) best = d;
            }
            dm.at(x, y) = static_cast<float>(best);
        }
    });
    return dm;
}

double parabola_offset(double c_minus, double c0, double c_plus) {
    const double denom = c_plus + c_minus - 2.0 * c0;
    if (!(denom > 0.0) || c0 > c_minus || c0 > c_plus) return 0.0;
    return -(c_plus - c_minus) / (2.0 * denom);
}

DisparityMap subpixel(const CostVolume& cv, const DisparityMap& dm) {
    DisparityMap out = dm;
    for (int y = 0; y < dm.height(); ++y) {
        for (int x = 0; x < dm.width(); ++x) {
            if (!dm.valid(x, y)) continue;
            const int d = static_cast<int>(std::lround(dm.at(x, y)));
            if (d <= 0 || d >= cv.dmax() - 1) continue;
            const double off = parabola_offset(cv.at(x, y, d - 1), cv.at(x, y, d), cv.at(x, y, d + 1));
            out.at(x, y) = static_cast<float>(d + off);
        }
    }
    return out;
}

DisparityMap right_disparity(const CostVolume& cv, int threads) {
    DisparityMap dm(cv.width(), cv.height());
    const int w = cv.width();
    parallel_for(0, cv.height(), threads, [&](int y) {
        for (int xr = 0; xr < w; ++xr) {
            int best = 0;
            float best_cost = kBorderCost;
            for (int d = 0; d < cv.dmax(); ++d) {
                const float c = xr + d < w ? cv.at(xr + d, y, d) : kBorderCost;
                if (d == 0 || c < best_cost) {
                    best = d;
                    best_cost = c;
                }
            }
            dm.at(xr, y) = static_cast<float>(best);
        }
    });
    return dm;
}

DisparityMap lr_check(const DisparityMap& left, const DisparityMap& right, double tol) {
    if (left.width() != right.width() || left.height() != right.height()) {
        throw ValidationError("lr_check: map dimensions differ");
    }
    DisparityMap out = left;
    for (int y = 0; y < left.height(); ++y) {
        for (int x = 0; x < left.width(); ++x) {
            if (!left.valid(x, y)) continue;
            const long xr = x - std::lround(left.at(x, y));
            if (xr < 0 || xr >= left.width() || !right.valid(static_cast<int>(xr), y) ||
                std::abs(static_cast<double>(left.at(x, y)) - right.at(static_cast<int>(xr), y)) > tol) {
                out.invalidate(x, y);
            }
        }
    }
    return out;
}

namespace {

double median_of(std::vector<float>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (static_cast<double>(v[n / 2 - 1]) + v[n / 2]);
}

}  // namespace

DisparityMap fill_invalid(const DisparityMap& dm) {
    const int w = dm.width();
    const int h = dm.height();
    std::vector<float> valid_values;
    for (float v : dm.data()) {
        if (DisparityMap::is_valid(v)) valid_values.push_back(v);
    }
    if (valid_values.empty() || valid_values.size() == dm.pixel_count()) return dm;
    const float global_median = static_cast<float>(median_of(valid_values));

    DisparityMap filled = dm;
    std::vector<unsigned char> was_invalid(dm.pixel_count(), 0);
    std::vector<float> left_seen(w), right_seen(w);
    for (int y = 0; y < h; ++y) {
        float last = DisparityMap::kInvalid;
        for (int x = 0; x < w; ++x) {
            if (dm.valid(x, y)) last = dm.at(x, y);
            left_seen[x] = last;
        }
        last = DisparityMap::kInvalid;
        for (int x = w - 1; x >= 0; --x) {
            if (dm.valid(x, y)) last = dm.at(x, y);
            right_seen[x] = last;
        }
        for (int x = 0; x < w; ++x) {
            if (dm.valid(x, y)) continue;
            was_invalid[static_cast<std::size_t>(y) * w + x] = 1;
            const bool l = DisparityMap::is_valid(left_seen[x]);
            const bool r = DisparityMap::is_valid(right_seen[x]);
            if (l && r) filled.at(x, y) = std::min(left_seen[x], right_seen[x]);
            else if (l) filled.at(x, y) = left_seen[x];
            else if (r) filled.at(x, y) = right_seen[x];
            else filled.at(x, y) = global_median;
        }
    }

    DisparityMap out = filled;
    std::vector<float> window;
    window.reserve(9);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!was_invalid[static_cast<std::size_t>(y) * w + x]) continue;
            window.clear();
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int qx = x + dx;
                    const int qy = y + dy;
                    if (qx >= 0 && qy >= 0 && qx < w && qy < h) window.push_back(filled.at(qx, qy));
                }
            }
            out.at(x, y) = static_cast<float>(median_of(window));
        }
    }
    return out;
}

std::vector<int> to_labels(const DisparityMap& dm, int dmax) {
    std::vector<int> labels(dm.pixel_count());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const float v = dm.data()[i];
        if (!DisparityMap::is_valid(v)) throw ValidationError("labeling contains invalid pixels");
        if (v != std::floor(v)) throw ValidationError("labeling contains fractional disparities");
        if (v < 0.0f || v >= static_cast<float>(dmax)) throw ValidationError("label outside [0, D)");
        labels[i] = static_cast<int>(v);
    }
    return labels;
}

DisparityMap from_labels(std::span<const int> labels, int width, int height) {
    DisparityMap dm(width, height);
    for (std::size_t i = 0; i < labels.size(); ++i) dm.data()[i] = static_cast<float>(labels[i]);
    return dm;
}

namespace {

double smooth(int a, int b, const EnergyParams& p) {
    return p.lambda * std::min(std::abs(a - b), p.tau);
}

}  // namespace

double energy(std::span<const int> labels, const CostVolume& cv, const EnergyParams& params) {
    const int w = cv.width();
    const int h = cv.height();
    if (labels.size() != static_cast<std::size_t>(w) * h) throw ValidationError("energy: label count mismatch");
    double e = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int l = labels[static_cast<std::size_t>(y) * w + x];
            if (l < 0 || l >= cv.dmax()) throw ValidationError("energy: label outside [0, D)");
            e += cv.at(x, y, l);
        }
    }
    double s = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int l = labels[static_cast<std::size_t>(y) * w + x];
            if (x + 1 < w) s += smooth(l, labels[static_cast<std::size_t>(y) * w + x + 1], params);
            if (y + 1 < h) s += smooth(l, labels[static_cast<std::size_t>(y + 1) * w + x], params);
        }
    }
    return e + s;
}

double energy(const DisparityMap& dm, const CostVolume& cv, const EnergyParams& params) {
    if (dm.width() != cv.width() || dm.height() != cv.height()) throw ValidationError("energy: dimension mismatch");
    return energy(to_labels(dm, cv.dmax()), cv, params);
}

ExpansionMove expansion_move(const CostVolume& cv, std::span<const int> labels, int alpha,
                             const EnergyParams& params) {
    const int w = cv.width();
    const int h = cv.height();
    const int n = w * h;
    if (static_cast<int>(labels.size()) != n) throw ValidationError("expansion_move: label count mismatch");
    if (alpha < 0 || alpha >= cv.dmax()) throw ValidationError("expansion_move: alpha outside [0, D)");

    // Binary variable per pixel: 0 keeps its label, 1 switches to alpha.
    std::vector<double> e0(n), e1(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int i = y * w + x;
            e0[i] = cv.at(x, y, labels[i]);
            e1[i] = cv.at(x, y, alpha);
        }
    }
    double constant = 0.0;
    MaxFlowGraph graph(n, 2 * n);
    const auto add_pair = [&](int p, int q) {
        const int fp = labels[p];
        const int fq = labels[q];
        const double a = smooth(fp, fq, params);
        const double b = smooth(fp, alpha, params);
        const double c = smooth(alpha, fq, params);
        const double d = 0.0;
        // E(xp, xq) = A + (C-A)[xp] + (D-C)[xq] + (B+C-A-D)[!xp & xq]
        constant += a;
        e1[p] += c - a;
        e1[q] += d - c;
        const double coupling = std::max(0.0, b + c - a - d);
        if (coupling > 0.0) graph.add_edge(p, q, coupling, 0.0);
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int i = y * w + x;
            if (x + 1 < w) add_pair(i, i + 1);
            if (y + 1 < h) add_pair(i, i + w);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (e1[i] >= e0[i]) {
            constant += e0[i];
            graph.add_tweights(i, e1[i] - e0[i], 0.0);
        } else {
            constant += e1[i];
            graph.add_tweights(i, 0.0, e0[i] - e1[i]);
        }
    }
    const double flow = graph.maxflow();

    ExpansionMove move;
    move.labels.assign(labels.begin(), labels.end());
    for (int i = 0; i < n; ++i) {
        if (graph.in_sink_segment(i)) move.labels[i] = alpha;
    }
    move.energy = constant + flow;
    return move;
}

DisparityMap alpha_expansion(const CostVolume& cv, const DisparityMap& init, const EnergyParams& params,
                             std::vector<ExpansionStep>* trace) {
    params.validate();
    if (init.width() != cv.width() || init.height() != cv.height()) {
        throw ValidationError("alpha_expansion: dimension mismatch");
    }
    std::vector<int> labels = to_labels(init, cv.dmax());
    double current = energy(labels, cv, params);
    // Guards against accepting moves that only differ by rounding noise.
    const double eps = 1e-9 * std::max(1.0, std::abs(current));

    for (int sweep = 0; sweep < params.max_iterations; ++sweep) {
        bool improved = false;
        for (int alpha = 0; alpha < cv.dmax(); ++alpha) {
            ExpansionMove move = expansion_move(cv, labels, alpha, params);
            const double recomputed = energy(move.labels, cv, params);
            const bool accept = recomputed < current - eps;
            if (trace) trace->push_back({sweep, alpha, move.energy, recomputed, accept});
            if (accept) {
                labels = std::move(move.labels);
                current = recomputed;
                improved = true;
            }
        }
        if (!improved) break;
    }
    return from_labels(labels, cv.width(), cv.height());
}

SolveResult solve_pipeline(const CostVolume& cv, const SolveOptions& options, int threads) {
    options.energy.validate();
    SolveResult res;
    DisparityMap labels = wta(cv, threads);
    res.energy_wta = energy(labels, cv, options.energy);
    if (options.optimizer == Optimizer::expansion) labels = alpha_expansion(cv, labels, options.energy);
    res.energy_final = energy(labels, cv, options.energy);
    res.labels = labels;

    DisparityMap dm = options.subpixel ? subpixel(cv, labels) : labels;
    if (options.lr_check) {
        const auto right = right_disparity(cv, threads);
        const std::size_t before = dm.valid_count();
        dm = lr_check(dm, right, options.lr_tol);
        res.lr_invalidated = before - dm.valid_count();
    }
    if (options.fill) dm = fill_invalid(dm);
    res.disparity = std::move(dm);
    return res;
}

}  // namespace sdp
