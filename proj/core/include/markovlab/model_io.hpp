#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "markovlab/measure.hpp"
#include "markovlab/space.hpp"

namespace markovlab {

/// Parses and validates a model document:
///
///   {"name": str,
///    "states": [{"id": int, "label": str, "coords": [float]?}],
///    "metric": {"kind": "explicit"|"coords_linf"|"real_abs", "matrix": [[float]]?},
///    "kernel": [{"from": int, "to": [{"state": int, "p": float}]}],
///    "invariant": [{"state": int, "w": float}]?}
///
/// Throws LoadError naming the offending state or row.
MetricModel load_model(const nlohmann::json& doc);
MetricModel load_model_file(const std::filesystem::path& path);

/// Writes a model back in the same schema (explicit, coords_linf and
/// real_abs metrics only; symbolic models are written as explicit).
nlohmann::json model_to_json(const MetricModel& model);

/// [{"state": int, "w": float}, ...]
nlohmann::json measure_to_json(const Measure& m);
nlohmann::json measure_to_json(const ExactMeasure& m);
Measure measure_from_json(const nlohmann::json& doc, const MetricModel& model);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace markovlab
