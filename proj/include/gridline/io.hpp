#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gridline/eval.hpp"
#include "gridline/loss.hpp"
#include "gridline/polyline.hpp"

namespace gridline {

using Json = nlohmann::ordered_json;

/// polylines/1: image frame, class-name table and vertex lists.
struct PolylineFile {
  int width = 0;
  int height = 0;
  std::vector<std::string> classes;
  std::vector<Polyline> polylines;
  Json meta;  // optional header (version, config echo); copied through
};

PolylineFile polylines_from_json(const std::string& text);
std::string polylines_to_json(const PolylineFile& file);
PolylineFile read_polylines(const std::string& path);
void write_polylines(const std::string& path, const PolylineFile& file);

/// segments/1: flat image-space segments with confidence (NMS output).
struct SegmentsFile {
  int width = 0;
  int height = 0;
  std::vector<ImageSegment> segments;
  Json meta;
};

SegmentsFile segments_from_json(const std::string& text);
std::string segments_to_json(const SegmentsFile& file);
SegmentsFile read_segments(const std::string& path);
void write_segments(const std::string& path, const SegmentsFile& file);

/// predgrid/1: dense per-cell predictor lists. Cells holding only
/// zero-confidence placeholders are omitted on write and refilled on read.
struct PredictorGridFile {
  PredictorGrid grid;
  Json meta;
};

PredictorGridFile predgrid_from_json(const std::string& text);
std::string predgrid_to_json(const PredictorGridFile& file);
PredictorGridFile read_predgrid(const std::string& path);
void write_predgrid(const std::string& path, const PredictorGridFile& file);

/// Schema name of a JSON document ("polylines/1", ...); throws if absent.
std::string peek_schema(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

Json eval_result_to_json(const EvalResult& result);

}  // namespace gridline
