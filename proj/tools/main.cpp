#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "gridline/bench.hpp"
#include "gridline/discretize.hpp"
#include "gridline/eval.hpp"
#include "gridline/extract.hpp"
#include "gridline/io.hpp"
#include "gridline/loss.hpp"
#include "gridline/nms.hpp"
#include "gridline/oracle.hpp"
#include "gridline/svg.hpp"
#include "gridline/version.hpp"

using namespace gridline;

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string preset;
  int cell_px = 32;
  std::string representation = "cartesian";
  double tau_c = -1.0;
  double epsilon = -1.0;
  double lambda_m = -1.0;
  double lambda_l = -1.0;
  double lambda_d = -1.0;
  double tau_xy = -1.0;  // -1: cell_px / 2
  double tau_alpha = 0.15;
  int tau_s = 10;
  uint64_t seed = 0;
  int jobs = 1;
  std::string out;
};

NmsConfig make_nms_config(const CommonFlags& f) {
  NmsConfig cfg = f.preset.empty() ? NmsConfig{} : nms_preset(f.preset);
  if (f.tau_c >= 0.0) cfg.tau_c = f.tau_c;
  if (f.epsilon > 0.0) cfg.epsilon = f.epsilon;
  if (f.lambda_m > 0.0) cfg.lambda_m = f.lambda_m;
  if (f.lambda_l > 0.0) cfg.lambda_l = f.lambda_l;
  if (f.lambda_d > 0.0) cfg.lambda_d = f.lambda_d;
  return cfg;
}

EvalConfig make_eval_config(const CommonFlags& f) {
  EvalConfig cfg;
  cfg.tau_xy = f.tau_xy > 0.0 ? f.tau_xy : f.cell_px / 2.0;
  cfg.tau_alpha = f.tau_alpha;
  return cfg;
}

Json nms_config_json(const NmsConfig& c) {
  return {{"tau_c", c.tau_c},
          {"lambda_l", c.lambda_l},
          {"lambda_m", c.lambda_m},
          {"lambda_d", c.lambda_d},
          {"epsilon", c.epsilon},
          {"min_weight", c.min_weight},
          {"weight_exponent", c.weight_exponent},
          {"direction_mode", c.direction_mode == DirectionMode::kFormula
                                 ? "formula"
                                 : "unit_normalized"},
          {"cluster_confidence",
           c.cluster_confidence == ClusterConfidence::kMax ? "max"
                                                           : "weighted_mean"}};
}

Json meta_header(const Json& config) {
  return {{"version", kVersion}, {"config", config}};
}

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool nms_flags = true) {
  cmd->add_option("--cell-px", f.cell_px, "Grid cell size")
      ->check(CLI::IsMember({32, 16, 8}));
  cmd->add_option("--representation", f.representation,
                  "Line representation (cartesian|border1d|euler)");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--jobs", f.jobs, "Concurrent images")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output path")->required();
  if (nms_flags) {
    cmd->add_option("--preset", f.preset, "Parameter preset")
        ->check(CLI::IsMember({"tusimple", "kai", "argoverse"}));
    cmd->add_option("--tau-c", f.tau_c, "Confidence threshold");
    cmd->add_option("--epsilon", f.epsilon, "DBSCAN radius");
    cmd->add_option("--lambda-m", f.lambda_m, "Midpoint scale");
    cmd->add_option("--lambda-l", f.lambda_l, "Length scale");
    cmd->add_option("--lambda-d", f.lambda_d, "Direction scale");
  }
  cmd->add_option("--tau-xy", f.tau_xy, "Match radius in px (default cell/2)");
  cmd->add_option("--tau-alpha", f.tau_alpha, "Match radius in rad");
  cmd->add_option("--tau-s", f.tau_s, "Minimum segments per extracted lane");
}

GridSpec spec_for(const PolylineFile& file, int cell_px) {
  return GridSpec(file.width, file.height, cell_px);
}

template <typename Fn>
void parallel_for(int n, int jobs, Fn fn) {
  const int workers = std::max(1, std::min(jobs, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------

int cmd_scene(const CommonFlags& f, int scene_width, int scene_height,
              int lanes, int classes) {
  SceneConfig scfg;
  scfg.width = scene_width;
  scfg.height = scene_height;
  scfg.lanes = lanes;
  scfg.class_count = classes;
  scfg.seed = f.seed;
  PolylineFile file;
  file.width = scene_width;
  file.height = scene_height;
  for (int c = 0; c < classes; ++c)
    file.classes.push_back("class" + std::to_string(c));
  file.polylines = synth_scene(scfg);
  file.meta = meta_header({{"command", "scene"},
                           {"seed", f.seed},
                           {"lanes", lanes},
                           {"classes", classes}});
  write_polylines(f.out, file);
  return 0;
}

int cmd_discretize(const CommonFlags& f, const std::string& gt_path) {
  const PolylineFile file = read_polylines(gt_path);
  const GridSpec spec = spec_for(file, f.cell_px);
  const Representation rep = representation_from_string(f.representation);
  const auto cells = discretize(file.polylines, spec, rep);

  // Ground truth ships as a predictor grid: confidence 1, one-hot classes.
  int max_l = 1;
  for (const auto& c : cells)
    max_l = std::max(max_l, static_cast<int>(c.segments.size()));
  const int class_count = static_cast<int>(file.classes.size());
  PredictorGridFile out{PredictorGrid(spec, max_l, class_count, rep), Json()};
  for (const auto& c : cells) {
    auto& cell = out.grid.cell(c.cell_row, c.cell_col);
    int slot = 0;
    for (const auto& [geom, cls] : c.segments) {
      Predictor& p = cell[slot++];
      p.g = geom;
      p.confidence = 1.0;
      if (class_count > 0 && cls.has_value() && *cls < class_count)
        p.class_probs[*cls] = 1.0;
    }
  }
  out.meta = meta_header({{"command", "discretize"},
                          {"cell_px", f.cell_px},
                          {"representation", f.representation},
                          {"input", gt_path}});
  write_predgrid(f.out, out);
  return 0;
}

int cmd_loss(const CommonFlags& f, const std::string& gt_path,
             const std::string& pred_path, const LossWeights& weights) {
  const PolylineFile gt_file = read_polylines(gt_path);
  const PredictorGridFile pred = read_predgrid(pred_path);
  const GridSpec& spec = pred.grid.spec();
  if (spec.image_width() != gt_file.width ||
      spec.image_height() != gt_file.height)
    throw std::invalid_argument("ground truth and grid image sizes differ");
  const auto cells =
      discretize(gt_file.polylines, spec, pred.grid.representation());
  const LossBreakdown b =
      total_loss(cells, pred.grid, weights, pred.grid.representation());

  Json j;
  j["schema"] = "loss/1";
  j["meta"] = meta_header({{"command", "loss"},
                           {"weights",
                            {{"loc", weights.loc},
                             {"resp", weights.resp},
                             {"noresp", weights.noresp},
                             {"class", weights.classification}}}});
  j["loc"] = b.loc;
  j["resp"] = b.resp;
  j["noresp"] = b.noresp;
  j["class"] = b.class_term;
  j["total"] = b.total;
  j["assigned"] = b.assigned;
  j["unmatched_gt"] = b.unmatched_gt;
  write_text_file(f.out, j.dump(2) + "\n");
  std::cout << "total loss " << b.total << "\n";
  return 0;
}

int cmd_synth(const CommonFlags& f, const std::string& gt_path,
              const OracleConfig& ocfg, int predictors) {
  const PolylineFile file = read_polylines(gt_path);
  const GridSpec spec = spec_for(file, f.cell_px);
  const Representation rep = representation_from_string(f.representation);
  const auto cells = discretize(file.polylines, spec, rep);
  const OracleResult oracle = synth_oracle(
      cells, spec, predictors, static_cast<int>(file.classes.size()), rep, ocfg);
  if (oracle.overflow_dropped > 0)
    std::cerr << "{\"warning\":\"overflow\",\"dropped\":"
              << oracle.overflow_dropped << "}\n";
  PredictorGridFile out{oracle.grid, Json()};
  out.meta = meta_header({{"command", "synth"},
                          {"seed", ocfg.seed},
                          {"sigma", ocfg.jitter_sigma},
                          {"duplicates", ocfg.duplicates_per_segment},
                          {"spurious_rate", ocfg.spurious_rate},
                          {"representation", f.representation}});
  write_predgrid(f.out, out);
  return 0;
}

int cmd_nms(const CommonFlags& f, const std::string& pred_path) {
  const PredictorGridFile pred = read_predgrid(pred_path);
  const NmsConfig cfg = make_nms_config(f);
  const std::vector<ImageSegment> segments = decode_grid(pred.grid);
  const ClusterResult r = suppress(segments, cfg, pred.grid.spec());

  SegmentsFile out;
  out.width = pred.grid.spec().image_width();
  out.height = pred.grid.spec().image_height();
  out.segments = r.segments;
  out.meta = meta_header({{"command", "nms"},
                          {"nms", nms_config_json(cfg)},
                          {"noise", r.noise_count},
                          {"dropped_degenerate", r.dropped_degenerate}});
  write_segments(f.out, out);
  return 0;
}

int cmd_extract(const CommonFlags& f, const std::string& segments_path,
                const std::string& tusimple_out) {
  const SegmentsFile in = read_segments(segments_path);
  const GridSpec spec(in.width, in.height, f.cell_px);
  ExtractConfig cfg;
  cfg.min_segments = f.tau_s;
  const auto lanes = extract(in.segments, cfg, spec);

  PolylineFile out;
  out.width = in.width;
  out.height = in.height;
  for (const auto& lane : lanes) {
    // Smoothing can overshoot the frame; clamp and drop the duplicates the
    // clamp creates so the file satisfies the polyline invariants.
    Polyline p;
    for (Vec2 v : lane.spline_points) {
      v.x = std::clamp(v.x, 0.0, static_cast<double>(in.width));
      v.y = std::clamp(v.y, 0.0, static_cast<double>(in.height));
      if (p.points.empty() || distance(p.points.back(), v) > 1e-9)
        p.points.push_back(v);
    }
    if (p.points.size() >= 2) out.polylines.push_back(std::move(p));
  }
  out.meta = meta_header({{"command", "extract"},
                          {"tau_s", f.tau_s},
                          {"cell_px", f.cell_px},
                          {"lanes", lanes.size()}});
  write_polylines(f.out, out);

  if (!tusimple_out.empty()) {
    // Per-lane x positions at fixed y samples, -2 where the lane is absent.
    Json j;
    j["schema"] = "lane_samples/1";
    j["meta"] = meta_header({{"command", "extract"}});
    Json h_samples = Json::array();
    std::vector<double> ys;
    for (double y = 10; y < in.height; y += 10) {
      ys.push_back(y);
      h_samples.push_back(y);
    }
    Json lanes_json = Json::array();
    for (const auto& lane : lanes) {
      Json xs = Json::array();
      for (double y : ys) {
        double best_x = -2.0, best_dy = 5.0;
        for (const Vec2& p : lane.spline_points) {
          const double dy = std::abs(p.y - y);
          if (dy < best_dy) {
            best_dy = dy;
            best_x = p.x;
          }
        }
        xs.push_back(best_x);
      }
      lanes_json.push_back(std::move(xs));
    }
    j["h_samples"] = std::move(h_samples);
    j["lanes"] = std::move(lanes_json);
    write_text_file(tusimple_out, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_eval(const CommonFlags& f, const std::string& gt_path,
             const std::string& pred_path, bool per_class) {
  const PolylineFile gt = read_polylines(gt_path);
  EvalConfig cfg = make_eval_config(f);
  cfg.per_class = per_class;

  const std::string pred_text = read_text_file(pred_path);
  const std::string schema = peek_schema(pred_text);
  EvalResult result;
  if (schema == "polylines/1") {
    result = evaluate_polylines(gt.polylines,
                                polylines_from_json(pred_text).polylines, cfg);
  } else if (schema == "segments/1") {
    result = evaluate(gt.polylines, segments_from_json(pred_text).segments, cfg);
  } else {
    throw std::invalid_argument("eval expects polylines/1 or segments/1, got " +
                                schema);
  }

  Json j;
  j["schema"] = "metrics/1";
  j["meta"] = meta_header({{"command", "eval"},
                           {"tau_xy", cfg.tau_xy},
                           {"tau_alpha", cfg.tau_alpha},
                           {"sample_px", cfg.sample_px},
                           {"directed", cfg.directed}});
  j["aggregate"] = eval_result_to_json(result);
  write_text_file(f.out, j.dump(2) + "\n");

  std::printf("%-8s %8s %8s %8s %10s %8s %8s\n", "scope", "tp", "fp", "fn",
              "precision", "recall", "f1");
  std::printf("%-8s %8ld %8ld %8ld %10.4f %8.4f %8.4f\n", "all", result.tp,
              result.fp, result.fn, result.precision, result.recall, result.f1);
  for (const auto& [cls, counts] : result.per_class) {
    const EvalResult r = scores_from_counts(counts);
    std::printf("class %-2d %8ld %8ld %8ld %10.4f %8.4f %8.4f\n", cls, r.tp,
                r.fp, r.fn, r.precision, r.recall, r.f1);
  }
  return 0;
}

int cmd_bench(const CommonFlags& f, int rows, int cols, int predictors,
              int repetitions) {
  BenchConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.cell_px = f.cell_px;
  cfg.predictors = predictors;
  cfg.repetitions = repetitions;
  cfg.seed = f.seed;
  cfg.nms = make_nms_config(f);
  const BenchReport r = bench_nms(cfg);

  Json j;
  j["schema"] = "bench/1";
  j["meta"] = meta_header({{"command", "bench"},
                           {"rows", rows},
                           {"cols", cols},
                           {"cell_px", f.cell_px},
                           {"predictors", predictors},
                           {"repetitions", repetitions},
                           {"nms", nms_config_json(cfg.nms)}});
  j["segments"] = r.segments;
  j["above_threshold"] = r.above_threshold;
  j["median_ms"] = r.median_ms;
  j["p95_ms"] = r.p95_ms;
  j["fps_median"] = r.fps_median;
  j["clusters_last"] = r.clusters_last;
  write_text_file(f.out, j.dump(2) + "\n");
  std::cout << "median " << r.median_ms << " ms  p95 " << r.p95_ms << " ms  ("
            << r.fps_median << " fps)\n";
  return 0;
}

int cmd_render(const CommonFlags& f, const std::vector<std::string>& inputs,
               bool draw_grid) {
  SvgScene scene;
  scene.header_comment = std::string("gridline ") + kVersion + " render cell_px=" +
                         std::to_string(f.cell_px) + " inputs=" +
                         std::to_string(inputs.size());
  for (const std::string& path : inputs) {
    const std::string text = read_text_file(path);
    const std::string schema = peek_schema(text);
    if (schema == "polylines/1") {
      const PolylineFile file = polylines_from_json(text);
      scene.width = std::max(scene.width, file.width);
      scene.height = std::max(scene.height, file.height);
      scene.polylines.insert(scene.polylines.end(), file.polylines.begin(),
                             file.polylines.end());
    } else if (schema == "segments/1") {
      const SegmentsFile file = segments_from_json(text);
      scene.width = std::max(scene.width, file.width);
      scene.height = std::max(scene.height, file.height);
      scene.segments.insert(scene.segments.end(), file.segments.begin(),
                            file.segments.end());
    } else if (schema == "predgrid/1") {
      const PredictorGridFile file = predgrid_from_json(text);
      scene.width = std::max(scene.width, file.grid.spec().image_width());
      scene.height = std::max(scene.height, file.grid.spec().image_height());
      for (const ImageSegment& s : decode_grid(file.grid))
        if (s.confidence > std::max(0.0, f.tau_c)) scene.segments.push_back(s);
    } else {
      throw std::invalid_argument("cannot render schema " + schema);
    }
  }
  if (scene.width == 0) {
    scene.width = f.cell_px * 4;
    scene.height = f.cell_px * 4;
  }
  if (draw_grid && scene.width % f.cell_px == 0 && scene.height % f.cell_px == 0)
    scene.grid = GridSpec(scene.width, scene.height, f.cell_px);
  write_text_file(f.out, render_svg(scene));
  return 0;
}

int cmd_pipeline(const CommonFlags& f, int scenes, int predictors,
                 int scene_width, int scene_height,
                 const OracleConfig& base_ocfg) {
  const NmsConfig nms_cfg = make_nms_config(f);
  const EvalConfig eval_cfg = make_eval_config(f);
  const Representation rep = representation_from_string(f.representation);
  fs::create_directories(f.out);

  struct SceneOutcome {
    EvalResult before;
    EvalResult after;
    EvalResult extracted;
    int segments_after = 0;
  };
  std::vector<SceneOutcome> outcomes(scenes);
  std::string svg_first;
  std::mutex svg_mutex;

  parallel_for(scenes, f.jobs, [&](int i) {
    SceneConfig scfg;
    scfg.width = scene_width;
    scfg.height = scene_height;
    scfg.seed = f.seed + static_cast<uint64_t>(i) * 1000003;
    const std::vector<Polyline> scene = synth_scene(scfg);
    const GridSpec spec(scfg.width, scfg.height, f.cell_px);
    const auto cells = discretize(scene, spec, rep);

    OracleConfig ocfg = base_ocfg;
    ocfg.seed = scfg.seed + 17;
    const OracleResult oracle =
        synth_oracle(cells, spec, predictors, 0, rep, ocfg);
    const std::vector<ImageSegment> raw = decode_grid(oracle.grid);

    std::vector<ImageSegment> thresholded;
    for (const ImageSegment& s : raw)
      if (s.confidence > nms_cfg.tau_c && norm(s.end - s.start) > 0.0)
        thresholded.push_back(s);
    const ClusterResult nms = suppress(raw, nms_cfg, spec);

    ExtractConfig xcfg;
    xcfg.min_segments = f.tau_s;
    const auto lanes = extract(nms.segments, xcfg, spec);
    std::vector<Polyline> lane_polylines;
    for (const auto& lane : lanes)
      lane_polylines.push_back(Polyline{lane.spline_points, std::nullopt});

    outcomes[i].before = evaluate(scene, thresholded, eval_cfg);
    outcomes[i].after = evaluate(scene, nms.segments, eval_cfg);
    outcomes[i].extracted = evaluate_polylines(scene, lane_polylines, eval_cfg);
    outcomes[i].segments_after = static_cast<int>(nms.segments.size());

    if (i == 0) {
      SvgScene svg;
      svg.width = spec.image_width();
      svg.height = spec.image_height();
      svg.grid = spec;
      svg.segments = nms.segments;
      svg.polylines = lane_polylines;
      svg.header_comment = std::string("gridline ") + kVersion + " seed " +
                           std::to_string(f.seed);
      std::lock_guard<std::mutex> lock(svg_mutex);
      svg_first = render_svg(svg);
    }
  });

  auto accumulate = [&](auto pick) {
    MatchCounts total;
    for (const SceneOutcome& o : outcomes) {
      const EvalResult& r = pick(o);
      total.tp += r.tp;
      total.fp += r.fp;
      total.fn += r.fn;
    }
    return scores_from_counts(total);
  };
  const EvalResult before =
      accumulate([](const SceneOutcome& o) -> const EvalResult& { return o.before; });
  const EvalResult after =
      accumulate([](const SceneOutcome& o) -> const EvalResult& { return o.after; });
  const EvalResult extracted = accumulate(
      [](const SceneOutcome& o) -> const EvalResult& { return o.extracted; });

  Json j;
  j["schema"] = "metrics/1";
  j["meta"] = meta_header({{"command", "pipeline"},
                           {"seed", f.seed},
                           {"scenes", scenes},
                           {"cell_px", f.cell_px},
                           {"representation", f.representation},
                           {"predictors", predictors},
                           {"sigma", base_ocfg.jitter_sigma},
                           {"duplicates", base_ocfg.duplicates_per_segment},
                           {"spurious_rate", base_ocfg.spurious_rate},
                           {"nms", nms_config_json(nms_cfg)},
                           {"tau_xy", eval_cfg.tau_xy},
                           {"tau_alpha", eval_cfg.tau_alpha},
                           {"tau_s", f.tau_s}});
  j["aggregate"] = {{"before_nms", eval_result_to_json(before)},
                    {"after_nms", eval_result_to_json(after)},
                    {"extracted", eval_result_to_json(extracted)}};
  Json per_scene = Json::array();
  for (int i = 0; i < scenes; ++i) {
    per_scene.push_back({{"scene", i},
                         {"before_nms", eval_result_to_json(outcomes[i].before)},
                         {"after_nms", eval_result_to_json(outcomes[i].after)},
                         {"extracted", eval_result_to_json(outcomes[i].extracted)},
                         {"nms_segments", outcomes[i].segments_after}});
  }
  j["per_scene"] = std::move(per_scene);
  write_text_file((fs::path(f.out) / "metrics.json").string(), j.dump(2) + "\n");
  write_text_file((fs::path(f.out) / "scene_0.svg").string(), svg_first);

  std::cout << "before-NMS precision " << before.precision << " recall "
            << before.recall << "\n"
            << "after-NMS  precision " << after.precision << " recall "
            << after.recall << "  f1 " << after.f1 << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid-cell polyline detection geometry pipeline"};
  app.require_subcommand(1);

  CommonFlags f;
  std::string gt_path, pred_path, segments_path, tusimple_out;
  std::vector<std::string> render_inputs;
  LossWeights weights;
  OracleConfig ocfg;
  // The pipeline models a plausible trained predictor unless overridden.
  OracleConfig pipe_ocfg;
  pipe_ocfg.jitter_sigma = 2.0;
  pipe_ocfg.duplicates_per_segment = 4;
  pipe_ocfg.spurious_rate = 0.1;
  pipe_ocfg.matched_confidence = {0.95, 1.0};
  int predictors = 8;
  int scenes = 1;
  int scene_width = 640, scene_height = 640;
  int rows = 10, cols = 20, repetitions = 50;
  bool per_class = false;
  bool draw_grid = true;

  int scene_lanes = 5, scene_classes = 0;
  CLI::App* scene_cmd =
      app.add_subcommand("scene", "Write a synthetic lane scene as polylines");
  scene_cmd->add_option("--scene-width", scene_width, "Image width");
  scene_cmd->add_option("--scene-height", scene_height, "Image height");
  scene_cmd->add_option("--lanes", scene_lanes, "Lane count");
  scene_cmd->add_option("--classes", scene_classes, "Class count");
  add_common_flags(scene_cmd, f, false);

  CLI::App* discretize_cmd =
      app.add_subcommand("discretize", "Polylines to per-cell ground truth");
  discretize_cmd->add_option("--gt", gt_path, "Input polylines")->required();
  add_common_flags(discretize_cmd, f, false);

  CLI::App* loss_cmd = app.add_subcommand("loss", "Four-term loss breakdown");
  loss_cmd->add_option("--gt", gt_path, "Ground-truth polylines")->required();
  loss_cmd->add_option("--pred", pred_path, "Predictor grid")->required();
  loss_cmd->add_option("--w-loc", weights.loc, "Localization weight");
  loss_cmd->add_option("--w-resp", weights.resp, "Responsible weight");
  loss_cmd->add_option("--w-noresp", weights.noresp, "Non-responsible weight");
  loss_cmd->add_option("--w-class", weights.classification, "Class weight");
  add_common_flags(loss_cmd, f, false);

  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Synthetic predictor grid from ground truth");
  synth_cmd->add_option("--gt", gt_path, "Ground-truth polylines")->required();
  synth_cmd->add_option("--predictors", predictors, "Predictors per cell");
  synth_cmd->add_option("--sigma", ocfg.jitter_sigma, "Endpoint jitter in px");
  synth_cmd->add_option("--duplicates", ocfg.duplicates_per_segment,
                        "Copies per ground-truth segment");
  synth_cmd->add_option("--spurious-rate", ocfg.spurious_rate,
                        "Fill rate for unused slots");
  add_common_flags(synth_cmd, f, false);

  CLI::App* nms_cmd = app.add_subcommand("nms", "Cluster and average predictors");
  nms_cmd->add_option("--pred", pred_path, "Predictor grid")->required();
  add_common_flags(nms_cmd, f);

  CLI::App* extract_cmd =
      app.add_subcommand("extract", "Build lane polylines from segments");
  extract_cmd->add_option("--segments", segments_path, "NMS output")->required();
  extract_cmd->add_option("--tusimple-out", tusimple_out,
                          "Optional per-lane x-at-y export");
  add_common_flags(extract_cmd, f, false);

  CLI::App* eval_cmd = app.add_subcommand("eval", "Sampled-point metrics");
  eval_cmd->add_option("--gt", gt_path, "Ground-truth polylines")->required();
  eval_cmd->add_option("--pred", pred_path, "Predictions (polylines or segments)")
      ->required();
  eval_cmd->add_flag("--per-class", per_class, "Restrict matching within classes");
  add_common_flags(eval_cmd, f, false);

  CLI::App* bench_cmd = app.add_subcommand("bench", "NMS throughput benchmark");
  bench_cmd->add_option("--rows", rows, "Grid rows");
  bench_cmd->add_option("--cols", cols, "Grid cols");
  bench_cmd->add_option("--predictors", predictors, "Predictors per cell");
  bench_cmd->add_option("--reps", repetitions, "Repetitions");
  add_common_flags(bench_cmd, f);

  CLI::App* render_cmd = app.add_subcommand("render", "Render inputs to SVG");
  render_cmd->add_option("--in", render_inputs, "Input files")->required();
  render_cmd->add_flag("!--no-grid", draw_grid, "Skip the grid layer");
  add_common_flags(render_cmd, f);

  CLI::App* pipeline_cmd = app.add_subcommand(
      "pipeline", "Synthetic scenes through synth, nms, extract and eval");
  pipeline_cmd->add_option("--scenes", scenes, "Scene count");
  pipeline_cmd->add_option("--predictors", predictors, "Predictors per cell");
  pipeline_cmd->add_option("--sigma", pipe_ocfg.jitter_sigma,
                           "Endpoint jitter in px");
  pipeline_cmd->add_option("--duplicates", pipe_ocfg.duplicates_per_segment,
                           "Copies per ground-truth segment");
  pipeline_cmd->add_option("--spurious-rate", pipe_ocfg.spurious_rate,
                           "Fill rate for unused slots");
  pipeline_cmd->add_option("--scene-width", scene_width, "Synthetic image width");
  pipeline_cmd->add_option("--scene-height", scene_height, "Synthetic image height");
  add_common_flags(pipeline_cmd, f);

  try {
    app.parse(argc, argv);
    if (scene_cmd->parsed())
      return cmd_scene(f, scene_width, scene_height, scene_lanes, scene_classes);
    if (discretize_cmd->parsed()) return cmd_discretize(f, gt_path);
    if (loss_cmd->parsed()) return cmd_loss(f, gt_path, pred_path, weights);
    if (synth_cmd->parsed()) return cmd_synth(f, gt_path, ocfg, predictors);
    if (nms_cmd->parsed()) return cmd_nms(f, pred_path);
    if (extract_cmd->parsed()) return cmd_extract(f, segments_path, tusimple_out);
    if (eval_cmd->parsed()) return cmd_eval(f, gt_path, pred_path, per_class);
    if (bench_cmd->parsed())
      return cmd_bench(f, rows, cols, predictors, repetitions);
    if (render_cmd->parsed()) return cmd_render(f, render_inputs, draw_grid);
    if (pipeline_cmd->parsed()) {
      if (f.preset.empty()) f.preset = "tusimple";
      return cmd_pipeline(f, scenes, predictors, scene_width, scene_height,
                          pipe_ocfg);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << Json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << Json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", e.what()}, {"kind", "internal"}}.dump() << "\n";
    return 3;
  }
}
