// Command-line front end: the full pipeline (`run`), each stage on its own
// (`match`, `cost`, `propagate`, `solve`, `eval`) and a synthetic scene
// generator (`synth`).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdp/bench.hpp"
#include "sdp/config.hpp"
#include "sdp/error.hpp"
#include "sdp/image_io.hpp"
#include "sdp/pipeline.hpp"
#include "sdp/synthetic.hpp"

namespace fs = std::filesystem;
using namespace sdp;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Flags that map 1:1 onto configuration keys. Values are applied after the
// config file so flags always win.
struct ConfigFlags {
    std::optional<std::string> config_file;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> toggles_off;

    void attach(CLI::App* app, bool solver_flags, bool cost_flags, bool match_flags, bool propagate_flags) {
        app->add_option("--config", config_file, "flat key = value configuration file");
        app->add_option_function<int>("--threads", [this](int v) { overrides["threads"] = std::to_string(v); },
                                      "worker thread cap (0 = all cores)");
        if (cost_flags) {
            add(app, "--measure", "measure", "rho-census | ad-census");
            add(app, "--alpha", "alpha", "color/gradient balance of rho");
            add(app, "--lambda-rho", "lambda_rho", "robust normalization of rho");
            add(app, "--lambda-census", "lambda_census", "robust normalization of census");
            add(app, "--lambda-ad", "lambda_ad", "robust normalization of AD (ad-census)");
            add(app, "--scales", "n_scales", "number of census scales");
            add(app, "--scale-weights", "scale_weights", "comma separated, must sum to 1");
            add(app, "--census-width", "census_width", "census window width (odd)");
            add(app, "--census-height", "census_height", "census window height (odd)");
        }
        if (match_flags) {
            add(app, "--ratio", "ratio", "nearest/second-nearest ratio threshold");
            add(app, "--epipolar-tol", "epipolar_tol", "row tolerance in pixels");
            add(app, "--abs-tol", "abs_tol", "distance bound for single-candidate matches");
            add(app, "--max-points", "max_points", "keypoints per image");
            add(app, "--nms-radius", "nms_radius", "non-maximum suppression radius");
            add(app, "--descriptor", "descriptor", "patch | census");
        }
        if (propagate_flags) {
            add(app, "--propagate", "propagate", "on | off");
            add(app, "--gamma", "gamma", "color similarity bandwidth");
            add(app, "--window", "window_width", "propagation window size (odd, square)");
            add(app, "--spatial-sigma", "spatial_sigma", "distance attenuation, 0 = off");
        }
        if (solver_flags) {
            add(app, "--optimizer", "optimizer", "wta | expansion");
            add(app, "--lambda", "lambda", "smoothness weight");
            add(app, "--tau", "tau", "truncation of |d_p - d_q|");
            add(app, "--iters", "iters", "maximum expansion sweeps");
            app->add_flag_callback("--no-lr-check", [this] { toggles_off.push_back("lr_check"); },
                                   "skip the left-right consistency check");
            app->add_flag_callback("--no-fill", [this] { toggles_off.push_back("fill"); }, "skip invalid filling");
            app->add_flag_callback("--no-subpixel", [this] { toggles_off.push_back("subpixel"); },
                                   "skip parabola refinement");
        }
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg = config_file ? load_config(*config_file) : PipelineConfig{};
        for (const auto& [k, v] : overrides) {
            cfg.set(k, v);
            if (k == "window_width") cfg.set("window_height", v);
        }
        for (const auto& k : toggles_off) cfg.set(k, "off");
        return cfg;
    }

private:
    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(flag, [this, key](const std::string& v) { overrides[key] = v; },
                                              help);
    }
};

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::optional<std::string> existing(const fs::path& p) {
    if (fs::exists(p)) return p.string();
    return std::nullopt;
}

struct RunArgs {
    std::string left, right;
    std::optional<std::string> calib, gt, gt_right, mask, matches, dump_matches;
    std::string out_dir = ".";
    int ndisp = 0;
    std::vector<double> vis_range;
    std::vector<std::string> dump_slice;
};

void run_one(const RunArgs& a, PipelineConfig cfg) {
    cfg.ndisp = resolve_ndisp(cfg.ndisp > 0 && a.ndisp == 0 ? cfg.ndisp : a.ndisp, a.calib);
    const Image left = read_image(a.left);
    const Image right = read_image(a.right);

    std::optional<GroundTruth> gt;
    if (a.gt) {
        GroundTruth g{read_pfm(*a.gt), {}};
        if (a.mask) g.mask = nonocc_mask_from_image(read_image(*a.mask));
        else if (a.gt_right) g.mask = nonocc_mask_from_gt_pair(g.disparity, read_pfm(*a.gt_right));
        gt = std::move(g);
    }
    std::optional<SparseDisparityMap> imported;
    std::vector<std::string> import_warnings;
    if (a.matches) {
        auto imp = import_matches(*a.matches, left.width(), left.height(), cfg.ndisp);
        imported = std::move(imp.map);
        import_warnings = std::move(imp.warnings);
    }

    RunResult r = run_pipeline(left, right, cfg, gt, imported);
    r.warnings.insert(r.warnings.begin(), import_warnings.begin(), import_warnings.end());
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";

    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    write_pfm(r.solve.disparity, (out / "disparity.pfm").string());
    const double lo = a.vis_range.size() == 2 ? a.vis_range[0] : 0.0;
    const double hi = a.vis_range.size() == 2 ? a.vis_range[1] : static_cast<double>(cfg.ndisp);
    write_image(visualize_disparity(r.solve.disparity, lo, hi), (out / "disparity.png").string());
    write_text(metrics_json(r), (out / "metrics.json").string());
    write_text(r.propagation.to_json_lines(), (out / "propagation.jsonl").string());
    write_text(r.config.to_text(), (out / "config.txt").string());
    if (a.dump_matches) {
        write_image(draw_matches(left, right, r.sparse.left_kps, r.sparse.right_kps, r.sparse.matches),
                    *a.dump_matches);
    }
    if (a.dump_slice.size() == 2) {
        PipelineConfig c = r.config;
        const CostVolume cv = build_cost_volume(left, right, c.cost, c.measure, c.threads);
        write_image(cost_slice_image(cv, std::stoi(a.dump_slice[0])), a.dump_slice[1]);
    }
    std::cout << "wrote " << (out / "disparity.pfm").string();
    if (r.eval) std::cout << "  bad_2.0=" << r.eval->bad_200 << "%  bad_1.0=" << r.eval->bad_100 << "%";
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stereo matching with sparse feature disparity propagation"};
    app.require_subcommand(1);

    // run
    RunArgs run_args;
    ConfigFlags run_flags;
    std::optional<std::string> dataset_dir;
    auto* run = app.add_subcommand("run", "full pipeline: match -> cost -> propagate -> solve -> eval");
    run->add_option("left", run_args.left, "left image (PNG/PGM/PPM)");
    run->add_option("right", run_args.right, "right image (PNG/PGM/PPM)");
    run->add_option("--dataset-dir", dataset_dir, "run every Middlebury-style scene directory under this path");
    run->add_option("--calib", run_args.calib, "calib.txt providing ndisp");
    run->add_option("--ndisp", run_args.ndisp, "number of disparity levels");
    run->add_option("--gt", run_args.gt, "ground-truth PFM for evaluation");
    run->add_option("--gt-right", run_args.gt_right, "right ground truth, approximates the nonocc mask");
    run->add_option("--mask", run_args.mask, "Middlebury nonocc mask (255 = evaluated)");
    run->add_option("--matches", run_args.matches, "import matches `xl yl xr yr` instead of detecting");
    run->add_option("--out-dir", run_args.out_dir, "output directory");
    run->add_option("--dump-matches", run_args.dump_matches, "write a match visualization");
    run->add_option("--dump-slice", run_args.dump_slice, "<d> <path>: write a cost slice heat image")->expected(2);
    run->add_option("--vis-range", run_args.vis_range, "<lo> <hi> color range of disparity.png")->expected(2);
    run_flags.attach(run, true, true, true, true);

    // match
    std::string m_left, m_right, m_out = "matches.txt";
    std::optional<std::string> m_calib, m_dump;
    int m_ndisp = 0;
    ConfigFlags match_flags;
    auto* matchc = app.add_subcommand("match", "detect and match features, write `xl yl xr yr` lines");
    matchc->add_option("left", m_left)->required();
    matchc->add_option("right", m_right)->required();
    matchc->add_option("--calib", m_calib);
    matchc->add_option("--ndisp", m_ndisp);
    matchc->add_option("-o,--out", m_out);
    matchc->add_option("--dump-matches", m_dump);
    match_flags.attach(matchc, false, false, true, false);

    // cost
    std::string c_left, c_right, c_out = "cost.bin";
    std::optional<std::string> c_calib;
    std::vector<std::string> c_slice;
    int c_ndisp = 0;
    ConfigFlags cost_flags;
    auto* costc = app.add_subcommand("cost", "build the initial cost volume");
    costc->add_option("left", c_left)->required();
    costc->add_option("right", c_right)->required();
    costc->add_option("--calib", c_calib);
    costc->add_option("--ndisp", c_ndisp);
    costc->add_option("-o,--out", c_out);
    costc->add_option("--dump-slice", c_slice)->expected(2);
    cost_flags.attach(costc, false, true, false, false);

    // propagate
    std::string p_cv, p_matches, p_left, p_out = "cost_propagated.bin";
    std::optional<std::string> p_report;
    ConfigFlags prop_flags;
    auto* propc = app.add_subcommand("propagate", "apply feature disparity propagation to a cost volume");
    propc->add_option("cost", p_cv)->required();
    propc->add_option("matches", p_matches)->required();
    propc->add_option("left", p_left)->required();
    propc->add_option("-o,--out", p_out);
    propc->add_option("--report", p_report, "JSON-lines propagation report");
    prop_flags.attach(propc, false, false, false, true);

    // solve
    std::string s_cv, s_out = "disparity.pfm";
    std::optional<std::string> s_vis;
    ConfigFlags solve_flags;
    auto* solvec = app.add_subcommand("solve", "extract a dense disparity map from a cost volume");
    solvec->add_option("cost", s_cv)->required();
    solvec->add_option("-o,--out", s_out);
    solvec->add_option("--vis", s_vis, "write a color visualization");
    solve_flags.attach(solvec, true, false, false, false);

    // eval
    std::string e_dm, e_gt;
    std::optional<std::string> e_mask, e_gt_right, e_json;
    auto* evalc = app.add_subcommand("eval", "compare a disparity PFM against ground truth");
    evalc->add_option("disparity", e_dm)->required();
    evalc->add_option("gt", e_gt)->required();
    evalc->add_option("--mask", e_mask, "Middlebury nonocc mask");
    evalc->add_option("--gt-right", e_gt_right, "right ground truth for an approximate nonocc mask");
    evalc->add_option("--json", e_json, "also write the metrics to this file");

    // synth
    std::string y_kind = "dots", y_out = "synthetic";
    int y_width = 128, y_height = 96, y_disp = 5;
    unsigned y_seed = 1;
    auto* synthc = app.add_subcommand("synth", "write a synthetic stereo scene with ground truth");
    synthc->add_option("--kind", y_kind, "dots | two-level | striped | layered");
    synthc->add_option("--out-dir", y_out);
    synthc->add_option("--width", y_width);
    synthc->add_option("--height", y_height);
    synthc->add_option("--disparity", y_disp);
    synthc->add_option("--seed", y_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*run) {
            const PipelineConfig cfg = run_flags.resolve();
            if (dataset_dir) {
                for (const auto& entry : fs::directory_iterator(*dataset_dir)) {
                    if (!entry.is_directory()) continue;
                    const fs::path d = entry.path();
                    RunArgs a = run_args;
                    a.left = (d / "im0.png").string();
                    a.right = (d / "im1.png").string();
                    a.calib = existing(d / "calib.txt");
                    a.gt = existing(d / "disp0GT.pfm");
                    a.mask = existing(d / "mask0nocc.png");
                    a.out_dir = (fs::path(run_args.out_dir) / d.filename()).string();
                    std::cout << d.filename().string() << ": ";
                    run_one(a, cfg);
                }
            } else {
                if (run_args.left.empty() || run_args.right.empty()) {
                    throw ValidationError("run: left and right images are required");
                }
                run_one(run_args, cfg);
            }
        } else if (*matchc) {
            PipelineConfig cfg = match_flags.resolve();
            cfg.ndisp = resolve_ndisp(m_ndisp > 0 ? m_ndisp : cfg.ndisp, m_calib);
            cfg.validate();
            cfg.sparse.matching.dmax = cfg.ndisp;
            const Image left = read_image(m_left);
            const Image right = read_image(m_right);
            const auto res = compute_sparse_disparities(left, right, cfg.sparse, cfg.threads);
            export_matches(res.matches, m_out);
            if (m_dump) write_image(draw_matches(left, right, res.left_kps, res.right_kps, res.matches), *m_dump);
            std::cout << res.matches.size() << " matches (" << res.map.size() << " feature pixels) -> " << m_out
                      << "\n";
        } else if (*costc) {
            PipelineConfig cfg = cost_flags.resolve();
            cfg.ndisp = resolve_ndisp(c_ndisp > 0 ? c_ndisp : cfg.ndisp, c_calib);
            cfg.validate();
            cfg.cost.dmax = cfg.ndisp;
            const CostVolume cv =
                build_cost_volume(read_image(c_left), read_image(c_right), cfg.cost, cfg.measure, cfg.threads);
            write_cost_volume(cv, c_out);
            if (c_slice.size() == 2) write_image(cost_slice_image(cv, std::stoi(c_slice[0])), c_slice[1]);
            std::cout << cv.height() << "x" << cv.width() << "x" << cv.dmax() << " -> " << c_out << "\n";
        } else if (*propc) {
            const PipelineConfig cfg = prop_flags.resolve();
            cfg.validate();
            const CostVolume cv = read_cost_volume(p_cv);
            const Image left = read_image(p_left);
            const auto imp = import_matches(p_matches, cv.width(), cv.height(), cv.dmax());
            std::vector<std::string> warnings = imp.warnings;
            CostVolume out = cv;
            if (cfg.propagate) out = propagate(cv, imp.map, left, cfg.propagation, &warnings, cfg.threads);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            write_cost_volume(out, p_out);
            const auto report = propagation_report(cv, out);
            if (p_report) write_text(report.to_json_lines(), *p_report);
            std::cout << report.modified_cells << " cells modified -> " << p_out << "\n";
        } else if (*solvec) {
            const PipelineConfig cfg = solve_flags.resolve();
            cfg.validate();
            const CostVolume cv = read_cost_volume(s_cv);
            const auto res = solve_pipeline(cv, cfg.solve, cfg.threads);
            write_pfm(res.disparity, s_out);
            if (s_vis) write_image(visualize_disparity(res.disparity, 0.0, cv.dmax()), *s_vis);
            std::cout << "energy " << res.energy_final << " -> " << s_out << "\n";
        } else if (*evalc) {
            const DisparityMap dm = read_pfm(e_dm);
            const DisparityMap gt = read_pfm(e_gt);
            EvalMask mask;
            if (e_mask) mask = nonocc_mask_from_image(read_image(*e_mask));
            else if (e_gt_right) mask = nonocc_mask_from_gt_pair(gt, read_pfm(*e_gt_right));
            const std::string json = to_json(evaluate(dm, gt, mask));
            if (e_json) write_text(json + "\n", *e_json);
            std::cout << json << "\n";
        } else if (*synthc) {
            StereoScene s;
            if (y_kind == "dots") s = random_dot_pair(y_width, y_height, y_disp, y_seed);
            else if (y_kind == "two-level")
                s = two_level_pair(y_width, y_height, 4, 10,
                                   Rect{y_width / 4, y_height / 4, y_width * 5 / 8, y_height * 3 / 4}, y_seed);
            else if (y_kind == "striped") s = striped_pair(y_width, y_height, 8, y_disp, y_seed);
            else if (y_kind == "layered") s = layered_pair(y_width, y_height, y_seed);
            else throw ValidationError("synth: unknown kind '" + y_kind + "'");
            fs::create_directories(y_out);
            const fs::path out(y_out);
            write_image(s.left, (out / "im0.png").string());
            write_image(s.right, (out / "im1.png").string());
            write_pfm(s.gt, (out / "disp0GT.pfm").string());
            Image mask(y_width, y_height, 1);
            for (std::size_t i = 0; i < s.nonocc.size(); ++i) mask.data()[i] = s.nonocc[i] ? 255.0f : 128.0f;
            write_image(mask, (out / "mask0nocc.png").string());
            float maxd = 0.0f;
            for (float v : s.gt.data()) maxd = std::max(maxd, v);
            write_text("width=" + std::to_string(y_width) + "\nheight=" + std::to_string(y_height) +
                           "\nndisp=" + std::to_string(std::max(16, static_cast<int>(maxd) * 2)) + "\n",
                       (out / "calib.txt").string());
            std::cout << "wrote " << y_kind << " scene to " << y_out << "\n";
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
