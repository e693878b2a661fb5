#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <fstream>
#include <numbers>

#include "gridline/bench.hpp"
#include "gridline/discretize.hpp"
#include "gridline/io.hpp"
#include "gridline/oracle.hpp"
#include "gridline/rng.hpp"
#include "gridline/svg.hpp"
#include "gridline/version.hpp"

using namespace gridline;
namespace fs = std::filesystem;

namespace {

PolylineFile random_polyline_file(Rng& rng, int polylines) {
  PolylineFile file;
  file.width = 640;
  file.height = 320;
  file.classes = {"dashed", "solid"};
  for (int i = 0; i < polylines; ++i) {
    Polyline p;
    p.class_id = rng.uniform_int(0, 1);
    const int n = rng.uniform_int(2, 8);
    for (int k = 0; k < n; ++k)
      p.points.push_back({rng.uniform(0.0, 640.0), rng.uniform(0.0, 320.0)});
    file.polylines.push_back(std::move(p));
  }
  return file;
}

PredictorGridFile random_grid_file(Rng& rng, Representation rep) {
  const GridSpec spec(64, 64, 32);
  PredictorGridFile file{PredictorGrid(spec, 3, 2, rep), Json()};
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 2; ++col) {
      if (row == 1 && col == 1) continue;  // leave one placeholder-only cell
      for (Predictor& p : file.grid.cell(row, col)) {
        switch (rep) {
          case Representation::kCartesian:
            p.g = CartesianPoints{{rng.uniform(), rng.uniform()},
                                  {rng.uniform(), rng.uniform()}};
            break;
          case Representation::kBorder1D:
            p.g = BorderPoints1D{rng.uniform(), rng.uniform()};
            break;
          case Representation::kEuler:
            p.g = EulerAngles::from_angles(rng.uniform(0, 2 * std::numbers::pi),
                                           rng.uniform(0, 2 * std::numbers::pi));
            break;
        }
        p.class_probs = {rng.uniform(), rng.uniform()};
        p.confidence = rng.uniform();
      }
    }
  }
  return file;
}

std::string cli_path() { return GRIDLINE_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>/tmp/cli_err.txt";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "gridline_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("polyline files round-trip byte-exactly") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    PolylineFile file = random_polyline_file(rng, 40);
    file.meta = {{"version", kVersion}, {"config", {{"seed", trial}}}};
    const std::string once = polylines_to_json(file);
    const PolylineFile back = polylines_from_json(once);
    CHECK(polylines_to_json(back) == once);
    REQUIRE(back.polylines.size() == file.polylines.size());
    for (size_t i = 0; i < file.polylines.size(); ++i) {
      CHECK(back.polylines[i].class_id == file.polylines[i].class_id);
      CHECK(back.polylines[i].points == file.polylines[i].points);
    }
  }
}

TEST_CASE("segment files round-trip byte-exactly") {
  Rng rng(2);
  SegmentsFile file;
  file.width = 640;
  file.height = 320;
  for (int i = 0; i < 500; ++i) {
    file.segments.push_back(ImageSegment{{rng.uniform(0, 640), rng.uniform(0, 320)},
                                         {rng.uniform(0, 640), rng.uniform(0, 320)},
                                         rng.uniform(),
                                         rng.uniform() < 0.5
                                             ? std::optional<int>(rng.uniform_int(0, 3))
                                             : std::nullopt});
  }
  const std::string once = segments_to_json(file);
  CHECK(segments_to_json(segments_from_json(once)) == once);
}

TEST_CASE("predictor grids round-trip byte-exactly in all representations") {
  Rng rng(3);
  for (const Representation rep :
       {Representation::kCartesian, Representation::kBorder1D,
        Representation::kEuler}) {
    for (int trial = 0; trial < 30; ++trial) {
      const PredictorGridFile file = random_grid_file(rng, rep);
      const std::string once = predgrid_to_json(file);
      const PredictorGridFile back = predgrid_from_json(once);
      CHECK(predgrid_to_json(back) == once);
      back.grid.validate();
      // Omitted cells come back as dense zero-confidence placeholders.
      for (const Predictor& p : back.grid.cell(1, 1))
        CHECK(p.confidence == 0.0);
    }
  }
}

TEST_CASE("readers reject malformed documents") {
  CHECK_THROWS_AS(polylines_from_json("{}"), std::invalid_argument);
  CHECK_THROWS_AS(polylines_from_json("not json"), std::invalid_argument);
  CHECK_THROWS_AS(
      polylines_from_json(R"({"schema":"polylines/1","image":{"width":64,"height":64},
        "classes":[],"polylines":[{"class":2,"points":[[0,0],[1,1]]}]})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      polylines_from_json(R"({"schema":"polylines/1","image":{"width":64,"height":64},
        "classes":[],"polylines":[{"class":null,"points":[[0,0],[900,1]]}]})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      predgrid_from_json(R"({"schema":"predgrid/1","grid":{"rows":2,"cols":2,
        "cell_px":32,"predictors":1,"classes":0,"representation":"euler"},
        "cells":[{"row":0,"col":0,"preds":[{"g":[0,0,0,0],"l":[],"c":1}]}]})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      predgrid_from_json(R"({"schema":"predgrid/1","grid":{"rows":2,"cols":2,
        "cell_px":32,"predictors":1,"classes":0,"representation":"border1d"},
        "cells":[{"row":0,"col":0,"preds":[{"g":[0.1,0.2,0.3],"l":[],"c":1}]}]})"),
      std::invalid_argument);
}

TEST_CASE("synthetic oracle is deterministic and respects slot limits") {
  SceneConfig scfg;
  scfg.width = 640;
  scfg.height = 320;
  scfg.seed = 9;
  const auto scene = synth_scene(scfg);
  const GridSpec spec(640, 320, 32);
  const auto cells = discretize(scene, spec, Representation::kBorder1D);

  OracleConfig ocfg;
  ocfg.jitter_sigma = 2.0;
  ocfg.duplicates_per_segment = 3;
  ocfg.spurious_rate = 0.2;
  ocfg.matched_confidence = {0.9, 1.0};
  ocfg.seed = 31;
  const OracleResult a =
      synth_oracle(cells, spec, 8, 0, Representation::kBorder1D, ocfg);
  const OracleResult b =
      synth_oracle(cells, spec, 8, 0, Representation::kBorder1D, ocfg);
  CHECK(predgrid_to_json({a.grid, Json()}) == predgrid_to_json({b.grid, Json()}));
  a.grid.validate();

  // A perfect oracle reproduces the ground truth with zero loss.
  OracleConfig perfect;
  const OracleResult p =
      synth_oracle(cells, spec, 8, 0, Representation::kBorder1D, perfect);
  CHECK(total_loss(cells, p.grid, LossWeights{}, Representation::kBorder1D).total ==
        0.0);

  // More duplicates than slots: overflow is reported, not an error.
  OracleConfig crowded;
  crowded.duplicates_per_segment = 5;
  const OracleResult c =
      synth_oracle(cells, spec, 2, 0, Representation::kBorder1D, crowded);
  CHECK(c.overflow_dropped > 0);
}

TEST_CASE("svg output is deterministic and layered") {
  SvgScene empty;
  empty.width = 64;
  empty.height = 64;
  empty.grid = GridSpec(64, 64, 32);
  const std::string svg = render_svg(empty);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<line") != std::string::npos);  // grid lines only

  SvgScene one;
  one.width = 64;
  one.height = 64;
  one.segments = {{{8, 8}, {40, 8}, 1.0, std::nullopt}};
  const std::string horizontal = render_svg(one);
  CHECK(horizontal.find("stroke=\"#ff0000\"") != std::string::npos);

  SvgScene golden;
  golden.width = 128;
  golden.height = 96;
  golden.grid = GridSpec(128, 96, 32);
  golden.segments = {{{10, 10}, {50, 10}, 1.0, std::nullopt},
                     {{20, 80}, {20, 40}, 0.8, 1},
                     {{60, 20}, {100, 60}, 0.5, 0}};
  golden.polylines = {Polyline{{{5, 90}, {40, 60}, {80, 70}, {120, 20}}, 0},
                      Polyline{{{5, 20}, {60, 90}}, 1}};
  golden.header_comment = std::string("gridline ") + kVersion;
  const std::string doc = render_svg(golden);
  CHECK(render_svg(golden) == doc);  // stable across calls

  const fs::path golden_path = fs::path(TEST_DATA_DIR) / "golden_scene.svg";
  if (std::getenv("GOLDEN_REGEN") != nullptr) {
    write_text_file(golden_path.string(), doc);
  }
  REQUIRE(fs::exists(golden_path));
  CHECK(read_text_file(golden_path.string()) == doc);
}

TEST_CASE("bench reports sane latency statistics") {
  BenchConfig tiny;
  tiny.rows = 1;
  tiny.cols = 1;
  tiny.predictors = 1;
  tiny.repetitions = 5;
  const BenchReport r = bench_nms(tiny);
  CHECK(r.repetitions == 5);
  CHECK(r.segments == 1);
  CHECK(r.median_ms > 0.0);
  CHECK(r.median_ms < 1.0);  // a handful of segments is microseconds

  BenchConfig empty;
  empty.repetitions = 0;
  CHECK_THROWS_AS(bench_nms(empty), std::invalid_argument);
}

TEST_CASE("cli subcommands chain through files") {
  const fs::path dir = temp_dir();
  const std::string scene_path = (dir / "scene.json").string();

  SceneConfig scfg;
  scfg.width = 640;
  scfg.height = 320;
  scfg.seed = 12;
  PolylineFile scene;
  scene.width = 640;
  scene.height = 320;
  scene.polylines = synth_scene(scfg);
  write_polylines(scene_path, scene);

  const std::string gt_grid = (dir / "gt_grid.json").string();
  CHECK(run_cli("discretize --gt " + scene_path +
                " --cell-px 32 --representation border1d --out " + gt_grid) == 0);

  // The ground-truth grid is a perfect predictor: total loss 0.
  const std::string loss_path = (dir / "loss.json").string();
  CHECK(run_cli("loss --gt " + scene_path + " --pred " + gt_grid + " --out " +
                loss_path) == 0);
  const Json loss = Json::parse(read_text_file(loss_path));
  CHECK(loss["total"].get<double>() == 0.0);
  CHECK(loss["meta"]["version"] == kVersion);

  const std::string grid_a = (dir / "grid_a.json").string();
  const std::string grid_b = (dir / "grid_b.json").string();
  const std::string synth_flags =
      " --cell-px 32 --representation cartesian --predictors 8 --sigma 2 "
      "--duplicates 4 --spurious-rate 0.1 --seed 5 --out ";
  CHECK(run_cli("synth --gt " + scene_path + synth_flags + grid_a) == 0);
  CHECK(run_cli("synth --gt " + scene_path + synth_flags + grid_b) == 0);
  CHECK(read_text_file(grid_a) == read_text_file(grid_b));

  const std::string segs = (dir / "segs.json").string();
  CHECK(run_cli("nms --pred " + grid_a + " --preset tusimple --out " + segs) == 0);
  CHECK(!segments_from_json(read_text_file(segs)).segments.empty());

  // tau_c = 1.0 excludes everything but still succeeds.
  const std::string none = (dir / "none.json").string();
  CHECK(run_cli("nms --pred " + grid_a + " --preset tusimple --tau-c 1.0 --out " +
                none) == 0);
  CHECK(segments_from_json(read_text_file(none)).segments.empty());

  const std::string lanes = (dir / "lanes.json").string();
  CHECK(run_cli("extract --segments " + segs + " --cell-px 32 --tau-s 4 --out " +
                lanes) == 0);

  const std::string metrics = (dir / "metrics.json").string();
  CHECK(run_cli("eval --gt " + scene_path + " --pred " + scene_path +
                " --out " + metrics) == 0);
  const Json m = Json::parse(read_text_file(metrics));
  CHECK(m["aggregate"]["f1"].get<double>() == 1.0);

  const std::string svg = (dir / "scene.svg").string();
  CHECK(run_cli("render --in " + scene_path + " --in " + segs + " --out " + svg) ==
        0);
  CHECK(read_text_file(svg).find("<svg") == 0);
}

TEST_CASE("cli pipeline is deterministic under a fixed seed") {
  const fs::path dir = temp_dir();
  const std::string out_a = (dir / "pipe_a").string();
  const std::string out_b = (dir / "pipe_b").string();
  const std::string flags =
      "pipeline --preset tusimple --seed 7 --scenes 2 --sigma 2 --duplicates 4 "
      "--spurious-rate 0.1 --tau-xy 5 --tau-alpha 0.2 --jobs 2 --out ";
  CHECK(run_cli(flags + out_a) == 0);
  CHECK(run_cli(flags + out_b) == 0);
  CHECK(read_text_file(out_a + "/metrics.json") ==
        read_text_file(out_b + "/metrics.json"));
  CHECK(read_text_file(out_a + "/scene_0.svg") ==
        read_text_file(out_b + "/scene_0.svg"));
  CHECK(read_text_file(out_a + "/metrics.json").find(kVersion) !=
        std::string::npos);
}

TEST_CASE("cli maps malformed input to exit code 2") {
  const fs::path dir = temp_dir();
  const std::string bad = (dir / "bad.json").string();
  write_text_file(bad, "{\"schema\": \"nope\"}");
  CHECK(run_cli("discretize --gt " + bad + " --out " + (dir / "x.json").string()) ==
        2);
  const std::string err = read_text_file("/tmp/cli_err.txt");
  CHECK(err.find("\"error\"") != std::string::npos);

  CHECK(run_cli("bench --reps 0 --out " + (dir / "b.json").string()) == 2);
  CHECK(run_cli("discretize --gt " + bad + " --cell-px 7 --out " +
                (dir / "y.json").string()) == 2);
}
