#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "helpers.hpp"
#include "sdp/error.hpp"
#include "sdp/pipeline.hpp"
#include "sdp/synthetic.hpp"

using namespace sdp;
using testing_support::random_volume;
using testing_support::temp_path;

TEST_CASE("configuration") {
    SUBCASE("defaults validate") {
        CHECK_NOTHROW(PipelineConfig{}.validate());
    }
    SUBCASE("keys update fields") {
        PipelineConfig c;
        c.set("lambda", "2.5");
        c.set("optimizer", "wta");
        c.set("propagate", "off");
        c.set("scale_weights", "0.5, 0.3, 0.2");
        c.set("measure", "ad-census");
        c.set("ndisp", "48");
        CHECK(c.solve.energy.lambda == 2.5);
        CHECK(c.solve.optimizer == Optimizer::wta);
        CHECK_FALSE(c.propagate);
        CHECK(c.cost.scale_weights == std::vector<double>{0.5, 0.3, 0.2});
        CHECK(c.measure == CostMeasure::ad_census);
        CHECK(c.ndisp == 48);
        CHECK(c.to_map().at("lambda") == "2.5");
    }
    SUBCASE("bad keys and values name the key") {
        PipelineConfig c;
        try {
            c.set("gamma", "fast");
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("gamma") != std::string::npos);
        }
        CHECK_THROWS_AS(c.set("no_such_key", "1"), ValidationError);
        c.set("scale_weights", "0.5,0.5,0.5");
        CHECK_THROWS_AS(c.validate(), ValidationError);
    }
    SUBCASE("file round trip") {
        PipelineConfig c;
        c.set("tau", "3");
        c.set("gamma", "12.5");
        c.set("descriptor", "census");
        const std::string path = temp_path("run.cfg");
        std::ofstream(path) << "# comment\n" << c.to_text();
        CHECK(load_config(path).to_map() == c.to_map());
        std::ofstream(path) << "tau = 3\nbogus line\n";
        CHECK_THROWS_AS(load_config(path), ParseError);
    }
}

TEST_CASE("cost volume dump") {
    const std::string path = temp_path("cv.bin");
    const CostVolume cv = random_volume(17, 11, 9, 5);
    write_cost_volume(cv, path);
    CHECK(read_cost_volume(path) == cv);
    {
        std::ifstream in(path, std::ios::binary);
        char head[16];
        in.read(head, 16);
        CHECK(std::string(head, 4) == "SDC1");
        CHECK(static_cast<unsigned char>(head[4]) == 11);
        CHECK(static_cast<unsigned char>(head[8]) == 17);
        CHECK(static_cast<unsigned char>(head[12]) == 9);
    }
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(3);
        f.put('2');
    }
    try {
        read_cost_volume(path);
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
    std::ofstream(path) << "SDC1";
    CHECK_THROWS_AS(read_cost_volume(path), IoError);
}

TEST_CASE("disparity range resolution") {
    CHECK(resolve_ndisp(32, std::nullopt) == 32);
    const std::string calib = temp_path("calib_pipeline.txt");
    std::ofstream(calib) << "ndisp=40\n";
    CHECK(resolve_ndisp(0, calib) == 40);
    CHECK(resolve_ndisp(24, calib) == 24);
    try {
        resolve_ndisp(0, std::nullopt);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("ndisp") != std::string::npos);
    }
}

TEST_CASE("full pipeline") {
    const auto scene = random_dot_pair(96, 64, 5, 3);
    PipelineConfig cfg;
    cfg.ndisp = 16;
    const GroundTruth gt{scene.gt, scene.nonocc};

    SUBCASE("shifted pair is recovered") {
        const RunResult r = run_pipeline(scene.left, scene.right, cfg, gt);
        REQUIRE(r.eval);
        CHECK(r.eval->bad_100 < 5.0);
        CHECK(r.propagation.modified_cells > 0);
        CHECK(r.sparse.map.size() > 0);
        const auto j = nlohmann::json::parse(metrics_json(r));
        CHECK(j["config"]["ndisp"] == "16");
        CHECK(j["config"]["propagate"] == "on");
        CHECK(j["timings_s"].contains("solve"));
        CHECK(j["eval"].contains("bad_100"));
    }
    SUBCASE("cost then solve equals a run without propagation") {
        PipelineConfig off = cfg;
        off.propagate = false;
        const RunResult r = run_pipeline(scene.left, scene.right, off);
        CostParams cp = cfg.cost;
        cp.dmax = 16;
        const auto direct = solve_pipeline(build_cost_volume(scene.left, scene.right, cp), cfg.solve);
        CHECK(r.solve.disparity == direct.disparity);
        CHECK(r.propagation.modified_cells == 0);
        CHECK(nlohmann::json::parse(metrics_json(r))["config"]["propagate"] == "off");
    }
    SUBCASE("imported matches drive propagation") {
        SparseDisparityMap m(96, 64);
        m.set(40, 30, 7);
        const RunResult r = run_pipeline(scene.left, scene.right, cfg, std::nullopt, m);
        CHECK(r.sparse.map.size() == 1);
        CHECK(r.propagation.per_disparity[7] > 0);
        CHECK(r.propagation.modified_cells == r.propagation.per_disparity[7]);
    }
    SUBCASE("thread count does not change the output") {
        PipelineConfig one = cfg, many = cfg;
        one.threads = 1;
        many.threads = 4;
        CHECK(run_pipeline(scene.left, scene.right, one).solve.disparity ==
              run_pipeline(scene.left, scene.right, many).solve.disparity);
    }
    SUBCASE("missing ndisp") {
        PipelineConfig none;
        CHECK_THROWS_AS(run_pipeline(scene.left, scene.right, none), ValidationError);
    }
}
