#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "markovlab/error.hpp"
#include "markovlab/model_io.hpp"

using namespace markovlab;
using nlohmann::json;

namespace {

json two_state() {
  return json::parse(R"({
    "name": "two",
    "states": [{"id": 0, "label": "a", "coords": [0.0]}, {"id": 1, "label": "b", "coords": [1.5]}],
    "metric": {"kind": "explicit", "matrix": [[0, 1.5], [1.5, 0]]},
    "kernel": [
      {"from": 0, "to": [{"state": 0, "p": 0.5}, {"state": 1, "p": 0.5}]},
      {"from": 1, "to": [{"state": 0, "p": 0.25}, {"state": 1, "p": 0.75}]}
    ],
    "invariant": [{"state": 0, "w": 0.3333333333333333}, {"state": 1, "w": 0.6666666666666667}]
  })");
}

std::string load_error(const json& doc) {
  try {
    load_model(doc);
  } catch (const LoadError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ModelIo, LoadsTwoStateDocument) {
  const auto m = load_model(two_state());
  EXPECT_EQ(m.name(), "two");
  EXPECT_EQ(m.num_states(), 2u);
  EXPECT_EQ(m.distance(StateId(0), StateId(1)), 1.5);
  EXPECT_EQ(m.kernel_row(StateId(1)).weight(StateId(1)), 0.75);
  ASSERT_TRUE(m.invariant_measure().has_value());
  EXPECT_EQ(m.state(StateId(1)).label, "b");
}

TEST(ModelIo, RoundTrip) {
  const auto m = load_model(two_state());
  const auto again = load_model(model_to_json(m));
  EXPECT_EQ(model_to_json(again), model_to_json(m));
  const auto coords = build_doeblin3();
  EXPECT_EQ(model_to_json(load_model(model_to_json(coords))), model_to_json(coords));
}

TEST(ModelIo, RowMassError) {
  auto doc = two_state();
  doc["kernel"][1]["to"][1]["p"] = 0.7;
  const auto msg = load_error(doc);
  EXPECT_NE(msg.find("row mass"), std::string::npos) << msg;
  EXPECT_NE(msg.find("state 1"), std::string::npos) << msg;
}

TEST(ModelIo, AsymmetricMetricError) {
  auto doc = two_state();
  doc["metric"]["matrix"][0][1] = 1.0;
  const auto msg = load_error(doc);
  EXPECT_NE(msg.find("metric not symmetric"), std::string::npos) << msg;
}

TEST(ModelIo, StructuralErrors) {
  auto missing = two_state();
  missing.erase("kernel");
  EXPECT_NE(load_error(missing).find("kernel"), std::string::npos);

  auto dup = two_state();
  dup["states"][1]["id"] = 0;
  EXPECT_NE(load_error(dup).find("duplicate"), std::string::npos);

  auto unknown = two_state();
  unknown["kernel"][0]["to"][0]["state"] = 7;
  EXPECT_NE(load_error(unknown).find("unknown state id 7"), std::string::npos);

  auto negative = two_state();
  negative["kernel"][0]["to"][0]["p"] = -0.5;
  negative["kernel"][0]["to"][1]["p"] = 1.5;
  EXPECT_NE(load_error(negative).find("negative"), std::string::npos);

  auto no_row = two_state();
  no_row["kernel"].erase(1);
  EXPECT_NE(load_error(no_row).find("missing row for state 1"), std::string::npos);

  auto bad_kind = two_state();
  bad_kind["metric"]["kind"] = "taxicab";
  EXPECT_NE(load_error(bad_kind).find("unknown kind"), std::string::npos);

  auto wrong_invariant = two_state();
  wrong_invariant["invariant"] = json::parse(R"([{"state": 0, "w": 1.0}])");
  EXPECT_FALSE(load_error(wrong_invariant).empty());

  EXPECT_FALSE(load_error(json::array()).empty());
}

TEST(ModelIo, FileErrors) {
  EXPECT_THROW(load_model_file("/nonexistent/model.json"), LoadError);
  const auto path = std::filesystem::temp_directory_path() / "markovlab_bad.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_model_file(path), LoadError);
  std::filesystem::remove(path);
}

TEST(ModelIo, MeasureJson) {
  const auto m = load_model(two_state());
  const auto mu = Measure::from_atoms({{StateId(0), 0.25}, {StateId(1), 0.75}});
  EXPECT_EQ(measure_from_json(measure_to_json(mu), m), mu);
  const auto exact = ExactMeasure::from_atoms({{StateId(1), Rational(1, 3)}});
  EXPECT_EQ(measure_to_json(exact)[0]["w_exact"], "1/3");
}
