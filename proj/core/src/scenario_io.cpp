#include "boxloss/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace boxloss {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("scenario: " + path + ": " + what);
}

const json& require(const json& obj, const std::string& key) {
  if (!obj.contains(key)) field_error("/" + key, "missing field");
  return obj.at(key);
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number");
  return v.get<double>();
}

Box box_at(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) field_error(path, "expected an array of 4 numbers");
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    c[i] = number_at(v[i], path + "/" + std::to_string(i));
  }
  try {
    return Box(c[0], c[1], c[2], c[3]);
  } catch (const std::exception& e) {
    field_error(path, e.what());
  }
}

std::vector<Box> boxes_at(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array of boxes");
  std::vector<Box> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(box_at(v[i], path + "/" + std::to_string(i)));
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("scenario: top-level value must be an object");

  Scenario s;
  const json& name = require(doc, "name");
  if (!name.is_string()) field_error("/name", "expected a string");
  s.name = name.get<std::string>();

  s.gts.boxes = boxes_at(require(doc, "gts"), "/gts");
  s.initial_preds = boxes_at(require(doc, "initial_preds"), "/initial_preds");

  const json& matches = require(doc, "matches");
  if (!matches.is_array()) field_error("/matches", "expected an array of integers");
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const std::string path = "/matches/" + std::to_string(i);
    if (!matches[i].is_number_integer()) field_error(path, "expected an integer");
    s.matches.push_back(matches[i].get<int>());
  }

  const json& loss = require(doc, "loss");
  if (!loss.is_string()) field_error("/loss", "expected a string");
  const auto kind = parse_loss_kind(loss.get<std::string>());
  if (!kind) field_error("/loss", "unknown loss kind '" + loss.get<std::string>() + "'");
  s.loss = *kind;

  s.push_alpha = number_at(require(doc, "push_alpha"), "/push_alpha");

  const json& dyn = require(doc, "dynamic_anchor");
  if (!dyn.is_boolean()) field_error("/dynamic_anchor", "expected a boolean");
  s.use_dynamic_anchor = dyn.get<bool>();

  const json& steps = require(doc, "steps");
  if (!steps.is_number_integer()) field_error("/steps", "expected an integer");
  s.steps = steps.get<int>();

  s.learning_rate = number_at(require(doc, "learning_rate"), "/learning_rate");

  if (doc.contains("nms_threshold") && !doc.at("nms_threshold").is_null()) {
    s.nms_threshold = number_at(doc.at("nms_threshold"), "/nms_threshold");
  }

  const json& seed = require(doc, "seed");
  if (!seed.is_number_integer()) field_error("/seed", "expected an integer");
  s.seed = seed.get<std::uint64_t>();

  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string scenario_to_json(const Scenario& s) {
  const auto box_json = [](const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); };
  json doc;
  doc["name"] = s.name;
  doc["gts"] = json::array();
  for (const Box& b : s.gts.boxes) doc["gts"].push_back(box_json(b));
  doc["initial_preds"] = json::array();
  for (const Box& b : s.initial_preds) doc["initial_preds"].push_back(box_json(b));
  doc["matches"] = s.matches;
  doc["loss"] = std::string(to_string(s.loss));
  doc["push_alpha"] = s.push_alpha;
  doc["dynamic_anchor"] = s.use_dynamic_anchor;
  doc["steps"] = s.steps;
  doc["learning_rate"] = s.learning_rate;
  if (s.nms_threshold) {
    doc["nms_threshold"] = *s.nms_threshold;
  } else {
    doc["nms_threshold"] = nullptr;
  }
  doc["seed"] = s.seed;
  return doc.dump(2) + "\n";
}

std::string format_g9(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.9g", v);
  return buffer;
}

std::string format_g12(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12g", v);
  return buffer;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "step,pred_index,x1,y1,x2,y2,loss,iou_gt,iou_gt2,shape_error,conf_label\n";
  for (const TraceRow& r : rows) {
    out << r.step << ',' << r.pred_index << ',' << format_g9(r.box.x1) << ','
        << format_g9(r.box.y1) << ',' << format_g9(r.box.x2) << ',' << format_g9(r.box.y2) << ','
        << format_g9(r.loss_value) << ',' << format_g9(r.iou_to_gt) << ','
        << format_g9(r.iou_to_second_gt) << ',' << format_g9(r.shape_error) << ','
        << format_g9(r.confidence_label) << '\n';
  }
}

}  // namespace boxloss
