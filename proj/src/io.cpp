#include "gridline/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridline {

namespace {

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
  }
}

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw std::invalid_argument(std::string(what) + " must be a number");
  return j.get<double>();
}

std::vector<double> geometry_to_array(const SegmentGeometry& g) {
  if (const auto* c = std::get_if<CartesianPoints>(&g))
    return {c->start.x, c->start.y, c->end.x, c->end.y};
  if (const auto* b = std::get_if<BorderPoints1D>(&g))
    return {b->start, b->end};
  const auto& e = std::get<EulerAngles>(g);
  return {e.cos_a, e.sin_a, e.cos_b, e.sin_b};
}

SegmentGeometry geometry_from_array(const Json& arr, Representation rep) {
  require(arr.is_array(), "geometry must be an array");
  std::vector<double> v;
  for (const auto& x : arr) v.push_back(number(x, "geometry entry"));
  for (double x : v)
    require(std::isfinite(x), "geometry entries must be finite");
  switch (rep) {
    case Representation::kCartesian:
      require(v.size() == 4, "cartesian geometry needs 4 values");
      return CartesianPoints{{v[0], v[1]}, {v[2], v[3]}};
    case Representation::kBorder1D:
      require(v.size() == 2, "border1d geometry needs 2 values");
      return BorderPoints1D{v[0], v[1]};
    case Representation::kEuler:
      require(v.size() == 4, "euler geometry needs 4 values");
      return EulerAngles(v[0], v[1], v[2], v[3]);
  }
  throw std::invalid_argument("unknown representation");
}

bool is_placeholder(const Predictor& p, const Predictor& placeholder) {
  if (p.confidence != 0.0) return false;
  if (p.class_probs != placeholder.class_probs) return false;
  return geometry_to_array(p.g) == geometry_to_array(placeholder.g);
}

}  // namespace

std::string peek_schema(const std::string& text) {
  const Json j = parse(text);
  require(j.is_object() && j.contains("schema") && j["schema"].is_string(),
          "missing schema field");
  return j["schema"].get<std::string>();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << content;
}

PolylineFile polylines_from_json(const std::string& text) {
  const Json j = parse(text);
  require(j.is_object() && j.value("schema", "") == "polylines/1",
          "expected schema polylines/1");
  PolylineFile file;
  require(j.contains("image") && j["image"].is_object(), "missing image object");
  file.width = j["image"].value("width", 0);
  file.height = j["image"].value("height", 0);
  require(file.width > 0 && file.height > 0, "invalid image dimensions");
  if (j.contains("classes")) {
    require(j["classes"].is_array(), "classes must be an array");
    for (const auto& c : j["classes"])
      file.classes.push_back(c.get<std::string>());
  }
  require(j.contains("polylines") && j["polylines"].is_array(),
          "missing polylines array");
  for (const auto& jp : j["polylines"]) {
    Polyline p;
    if (jp.contains("class") && !jp["class"].is_null()) {
      const int cls = jp["class"].get<int>();
      require(cls >= 0 && cls < static_cast<int>(file.classes.size()),
              "class index does not resolve");
      p.class_id = cls;
    }
    require(jp.contains("points") && jp["points"].is_array(), "missing points");
    for (const auto& pt : jp["points"]) {
      require(pt.is_array() && pt.size() == 2, "point must be [x, y]");
      const double x = number(pt[0], "x");
      const double y = number(pt[1], "y");
      require(x >= 0.0 && x <= file.width && y >= 0.0 && y <= file.height,
              "point outside image bounds");
      p.points.push_back({x, y});
    }
    validate_polyline(p);
    file.polylines.push_back(std::move(p));
  }
  if (j.contains("meta")) file.meta = j["meta"];
  return file;
}

std::string polylines_to_json(const PolylineFile& file) {
  Json j;
  j["schema"] = "polylines/1";
  j["image"] = {{"width", file.width}, {"height", file.height}};
  j["classes"] = file.classes;
  Json arr = Json::array();
  for (const Polyline& p : file.polylines) {
    Json jp;
    jp["class"] = p.class_id.has_value() ? Json(*p.class_id) : Json(nullptr);
    Json pts = Json::array();
    for (const Vec2& v : p.points) pts.push_back({v.x, v.y});
    jp["points"] = std::move(pts);
    arr.push_back(std::move(jp));
  }
  j["polylines"] = std::move(arr);
  if (!file.meta.is_null()) j["meta"] = file.meta;
  return j.dump(2) + "\n";
}

PolylineFile read_polylines(const std::string& path) {
  return polylines_from_json(read_text_file(path));
}

void write_polylines(const std::string& path, const PolylineFile& file) {
  write_text_file(path, polylines_to_json(file));
}

SegmentsFile segments_from_json(const std::string& text) {
  const Json j = parse(text);
  require(j.is_object() && j.value("schema", "") == "segments/1",
          "expected schema segments/1");
  SegmentsFile file;
  require(j.contains("image") && j["image"].is_object(), "missing image object");
  file.width = j["image"].value("width", 0);
  file.height = j["image"].value("height", 0);
  require(file.width > 0 && file.height > 0, "invalid image dimensions");
  require(j.contains("segments") && j["segments"].is_array(),
          "missing segments array");
  for (const auto& js : j["segments"]) {
    ImageSegment s;
    require(js.contains("start") && js["start"].is_array() &&
                js["start"].size() == 2,
            "segment start must be [x, y]");
    require(js.contains("end") && js["end"].is_array() && js["end"].size() == 2,
            "segment end must be [x, y]");
    s.start = {number(js["start"][0], "x"), number(js["start"][1], "y")};
    s.end = {number(js["end"][0], "x"), number(js["end"][1], "y")};
    s.confidence = std::clamp(number(js.value("c", Json(0.0)), "confidence"), 0.0, 1.0);
    if (js.contains("class") && !js["class"].is_null())
      s.class_id = js["class"].get<int>();
    file.segments.push_back(s);
  }
  if (j.contains("meta")) file.meta = j["meta"];
  return file;
}

std::string segments_to_json(const SegmentsFile& file) {
  Json j;
  j["schema"] = "segments/1";
  j["image"] = {{"width", file.width}, {"height", file.height}};
  Json arr = Json::array();
  for (const ImageSegment& s : file.segments) {
    Json js;
    js["start"] = {s.start.x, s.start.y};
    js["end"] = {s.end.x, s.end.y};
    js["c"] = s.confidence;
    js["class"] = s.class_id.has_value() ? Json(*s.class_id) : Json(nullptr);
    arr.push_back(std::move(js));
  }
  j["segments"] = std::move(arr);
  if (!file.meta.is_null()) j["meta"] = file.meta;
  return j.dump(2) + "\n";
}

SegmentsFile read_segments(const std::string& path) {
  return segments_from_json(read_text_file(path));
}

void write_segments(const std::string& path, const SegmentsFile& file) {
  write_text_file(path, segments_to_json(file));
}

PredictorGridFile predgrid_from_json(const std::string& text) {
  const Json j = parse(text);
  require(j.is_object() && j.value("schema", "") == "predgrid/1",
          "expected schema predgrid/1");
  require(j.contains("grid") && j["grid"].is_object(), "missing grid object");
  const Json& g = j["grid"];
  const int rows = g.value("rows", 0);
  const int cols = g.value("cols", 0);
  const int cell_px = g.value("cell_px", 0);
  const int predictors = g.value("predictors", 0);
  const int classes = g.value("classes", -1);
  require(rows > 0 && cols > 0, "invalid grid dimensions");
  require(classes >= 0, "missing class count");
  const Representation rep =
      representation_from_string(g.value("representation", ""));
  const GridSpec spec(cols * cell_px, rows * cell_px, cell_px);

  PredictorGridFile file{PredictorGrid(spec, predictors, classes, rep), Json()};
  require(j.contains("cells") && j["cells"].is_array(), "missing cells array");
  for (const auto& jc : j["cells"]) {
    const int row = jc.value("row", -1);
    const int col = jc.value("col", -1);
    require(row >= 0 && row < rows && col >= 0 && col < cols,
            "cell out of bounds");
    require(jc.contains("preds") && jc["preds"].is_array(), "missing preds");
    require(static_cast<int>(jc["preds"].size()) <= predictors,
            "cell holds more than P predictors");
    std::vector<Predictor>& cell = file.grid.cell(row, col);
    int slot = 0;
    for (const auto& jp : jc["preds"]) {
      Predictor& p = cell[slot++];
      p.g = geometry_from_array(jp.at("g"), rep);
      p.class_probs.clear();
      if (jp.contains("l"))
        for (const auto& x : jp["l"]) p.class_probs.push_back(number(x, "class prob"));
      require(static_cast<int>(p.class_probs.size()) == classes,
              "class vector length mismatch");
      p.confidence = std::clamp(number(jp.at("c"), "confidence"), 0.0, 1.0);
    }
  }
  if (j.contains("meta")) file.meta = j["meta"];
  return file;
}

std::string predgrid_to_json(const PredictorGridFile& file) {
  const PredictorGrid& grid = file.grid;
  Json j;
  j["schema"] = "predgrid/1";
  j["grid"] = {{"rows", grid.spec().rows()},
               {"cols", grid.spec().cols()},
               {"cell_px", grid.spec().cell_px()},
               {"predictors", grid.predictors_per_cell()},
               {"classes", grid.class_count()},
               {"representation", std::string(to_string(grid.representation()))}};
  Json cells = Json::array();
  const Predictor placeholder = grid.placeholder();
  for (int row = 0; row < grid.spec().rows(); ++row) {
    for (int col = 0; col < grid.spec().cols(); ++col) {
      const std::vector<Predictor>& cell = grid.cell(row, col);
      const bool all_placeholder =
          std::all_of(cell.begin(), cell.end(), [&](const Predictor& p) {
            return is_placeholder(p, placeholder);
          });
      if (all_placeholder) continue;
      Json jc;
      jc["row"] = row;
      jc["col"] = col;
      Json preds = Json::array();
      for (const Predictor& p : cell) {
        Json jp;
        jp["g"] = geometry_to_array(p.g);
        jp["l"] = p.class_probs;
        jp["c"] = p.confidence;
        preds.push_back(std::move(jp));
      }
      jc["preds"] = std::move(preds);
      cells.push_back(std::move(jc));
    }
  }
  j["cells"] = std::move(cells);
  if (!file.meta.is_null()) j["meta"] = file.meta;
  return j.dump(2) + "\n";
}

PredictorGridFile read_predgrid(const std::string& path) {
  return predgrid_from_json(read_text_file(path));
}

void write_predgrid(const std::string& path, const PredictorGridFile& file) {
  write_text_file(path, predgrid_to_json(file));
}

Json eval_result_to_json(const EvalResult& result) {
  Json j;
  j["tp"] = result.tp;
  j["fp"] = result.fp;
  j["fn"] = result.fn;
  j["precision"] = result.precision;
  j["recall"] = result.recall;
  j["f1"] = result.f1;
  if (!result.per_class.empty()) {
    Json per_class = Json::object();
    for (const auto& [cls, counts] : result.per_class) {
      per_class[std::to_string(cls)] = {
          {"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}};
    }
    j["per_class"] = std::move(per_class);
  }
  return j;
}

}  // namespace gridline
