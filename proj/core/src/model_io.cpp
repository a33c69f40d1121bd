#include "markovlab/model_io.hpp"

#include <cmath>
#include <fstream>

#include "markovlab/error.hpp"

namespace markovlab {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw LoadError(where + ": missing field \"" + key + "\"");
  }
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw LoadError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw LoadError(where + ": value is not finite");
  return x;
}

double probability(const json& v, const std::string& where) {
  const double x = number(v, where);
  if (x < 0.0) throw LoadError(where + ": negative value");
  return x;
}

std::size_t state_index(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_number_integer()) throw LoadError(where + ": state id must be an integer");
  const auto id = v.get<long long>();
  if (id < 0 || static_cast<std::size_t>(id) >= n) {
    throw LoadError(where + ": unknown state id " + std::to_string(id));
  }
  return static_cast<std::size_t>(id);
}

}  // namespace

MetricModel load_model(const json& doc) {
  if (!doc.is_object()) throw LoadError("model document must be a JSON object");
  MetricModel::Spec spec;
  const auto& name = require(doc, "name", "model");
  if (!name.is_string()) throw LoadError("model: \"name\" must be a string");
  spec.name = name.get<std::string>();

  const auto& states = require(doc, "states", "model");
  if (!states.is_array() || states.empty()) throw LoadError("model: \"states\" must be a non-empty array");
  const std::size_t n = states.size();
  spec.states.resize(n);
  std::vector<bool> seen(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::string where = "states[" + std::to_string(k) + "]";
    const std::size_t id = state_index(require(states[k], "id", where), n, where);
    if (seen[id]) throw LoadError(where + ": duplicate state id " + std::to_string(id));
    seen[id] = true;
    auto& desc = spec.states[id];
    desc.label = std::to_string(id);
    if (states[k].contains("label")) {
      if (!states[k]["label"].is_string()) throw LoadError(where + ": \"label\" must be a string");
      desc.label = states[k]["label"].get<std::string>();
    }
    if (states[k].contains("coords")) {
      const auto& coords = states[k]["coords"];
      if (!coords.is_array()) throw LoadError(where + ": \"coords\" must be an array");
      for (const auto& c : coords) desc.coords.push_back(number(c, where + ".coords"));
    }
  }

  const auto& metric = require(doc, "metric", "model");
  const auto& kind = require(metric, "kind", "metric");
  if (!kind.is_string()) throw LoadError("metric: \"kind\" must be a string");
  const auto kind_name = kind.get<std::string>();
  if (kind_name == "explicit") {
    spec.metric = MetricKind::explicit_matrix;
    const auto& matrix = require(metric, "matrix", "metric");
    if (!matrix.is_array() || matrix.size() != n) {
      throw LoadError("metric: matrix must have " + std::to_string(n) + " rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!matrix[i].is_array() || matrix[i].size() != n) {
        throw LoadError("metric: matrix row " + std::to_string(i) + " must have " +
                        std::to_string(n) + " entries");
      }
      for (std::size_t j = 0; j < n; ++j) {
        spec.distance_matrix.push_back(
            number(matrix[i][j], "metric.matrix[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
      }
    }
  } else if (kind_name == "coords_linf") {
    spec.metric = MetricKind::coords_linf;
  } else if (kind_name == "real_abs") {
    spec.metric = MetricKind::real_abs;
  } else {
    throw LoadError("metric: unknown kind \"" + kind_name + "\"");
  }

  const auto& kernel = require(doc, "kernel", "model");
  if (!kernel.is_array()) throw LoadError("model: \"kernel\" must be an array");
  std::vector<std::vector<Atom<Rational>>> rows(n);
  std::vector<bool> has_row(n, false);
  for (std::size_t k = 0; k < kernel.size(); ++k) {
    const std::string where = "kernel[" + std::to_string(k) + "]";
    const std::size_t from = state_index(require(kernel[k], "from", where), n, where);
    if (has_row[from]) throw LoadError(where + ": duplicate row for state " + std::to_string(from));
    has_row[from] = true;
    const auto& to = require(kernel[k], "to", where);
    if (!to.is_array()) throw LoadError(where + ": \"to\" must be an array");
    for (const auto& entry : to) {
      const std::size_t target = state_index(require(entry, "state", where), n, where);
      const double p = probability(require(entry, "p", where), where + " (row of state " +
                                                                  std::to_string(from) + ")");
      rows[from].push_back({StateId(target), Rational(p)});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_row[i]) throw LoadError("kernel: missing row for state " + std::to_string(i));
    spec.kernel.push_back(ExactMeasure::from_atoms(std::move(rows[i])));
  }

  if (doc.contains("invariant")) {
    const auto& inv = doc["invariant"];
    if (!inv.is_array()) throw LoadError("model: \"invariant\" must be an array");
    std::vector<Atom<double>> atoms;
    for (const auto& entry : inv) {
      const std::size_t s = state_index(require(entry, "state", "invariant"), n, "invariant");
      atoms.push_back({StateId(s), probability(require(entry, "w", "invariant"), "invariant")});
    }
    spec.invariant = Measure::from_atoms(std::move(atoms));
  }
  spec.origin = StateId(0);
  return MetricModel(std::move(spec));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

MetricModel load_model_file(const std::filesystem::path& path) {
  return load_model(read_json_file(path));
}

json model_to_json(const MetricModel& model) {
  json doc;
  doc["name"] = model.name();
  const std::size_t n = model.num_states();
  json states = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = model.state(StateId(i));
    json entry = {{"id", i}, {"label", s.label}};
    if ((model.metric_kind() == MetricKind::coords_linf ||
         model.metric_kind() == MetricKind::real_abs) && !s.coords.empty()) {
      entry["coords"] = s.coords;
    }
    states.push_back(std::move(entry));
  }
  doc["states"] = std::move(states);
  switch (model.metric_kind()) {
    case MetricKind::coords_linf: doc["metric"] = {{"kind", "coords_linf"}}; break;
    case MetricKind::real_abs: doc["metric"] = {{"kind", "real_abs"}}; break;
    default: {
      json matrix = json::array();
      for (std::size_t i = 0; i < n; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < n; ++j) row.push_back(model.distance(StateId(i), StateId(j)));
        matrix.push_back(std::move(row));
      }
      doc["metric"] = {{"kind", "explicit"}, {"matrix", std::move(matrix)}};
    }
  }
  json kernel = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json to = json::array();
    for (const auto& a : model.kernel_row(StateId(i)).atoms()) {
      to.push_back({{"state", a.state.value}, {"p", a.weight}});
    }
    kernel.push_back({{"from", i}, {"to", std::move(to)}});
  }
  doc["kernel"] = std::move(kernel);
  if (model.invariant_measure()) doc["invariant"] = measure_to_json(*model.invariant_measure());
  return doc;
}

json measure_to_json(const Measure& m) {
  json out = json::array();
  for (const auto& a : m.atoms()) out.push_back({{"state", a.state.value}, {"w", a.weight}});
  return out;
}

json measure_to_json(const ExactMeasure& m) {
  json out = json::array();
  for (const auto& a : m.atoms()) {
    out.push_back({{"state", a.state.value},
                   {"w", a.weight.convert_to<double>()},
                   {"w_exact", a.weight.str()}});
  }
  return out;
}

Measure measure_from_json(const json& doc, const MetricModel& model) {
  if (!doc.is_array()) throw LoadError("measure must be an array of {state, w}");
  std::vector<Atom<double>> atoms;
  for (const auto& entry : doc) {
    const std::size_t s = state_index(require(entry, "state", "measure"), model.num_states(), "measure");
    atoms.push_back({StateId(s), probability(require(entry, "w", "measure"), "measure")});
  }
  return Measure::from_atoms(std::move(atoms));
}

}  // namespace markovlab
