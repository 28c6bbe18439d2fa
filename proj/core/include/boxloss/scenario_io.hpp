#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "boxloss/simulator.hpp"

namespace boxloss {

/// Parses a scenario from JSON text. Validation failures throw
/// std::invalid_argument carrying the path of the offending field
/// (e.g. "/gts/2").
Scenario parse_scenario(const std::string& json_text);

/// Reads and parses a scenario file.
Scenario load_scenario(const std::string& path);

/// Serializes a scenario back to JSON (round-trips through parse_scenario).
std::string scenario_to_json(const Scenario& s);

/// Writes trace rows as CSV with the fixed header
/// step,pred_index,x1,y1,x2,y2,loss,iou_gt,iou_gt2,shape_error,conf_label
/// at 9 significant digits.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

/// printf-style %.9g / %.12g formatting used for all numeric output, so
/// repeated runs are byte-identical.
std::string format_g9(double v);
std::string format_g12(double v);

}  // namespace boxloss
