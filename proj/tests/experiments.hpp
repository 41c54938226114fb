#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace testing {

using nlohmann::json;

// Single critically loaded station with unit-mean primitives.
inline json singleStation(const json& services = {{"distribution", "exponential"}, {"mean", 1.0}}) {
  return {
      {"topology", {{"stations", 1}, {"arrival_set", {1}}, {"routing", {{0.0}}}}},
      {"rates", {{"lambda1", {1.0}}, {"mu1", {1.0}}}},
      {"primitives", {{"arrivals", {{"distribution", "exponential"}, {"mean", 1.0}}}, {"services", services}}},
      {"scaling", {{"n_values", {100, 400, 1600}}, {"convention", "conventional"}, {"x0", {0.0}}}},
      {"experiment",
       {{"replications", 1000},
        {"horizon", 1.0},
        {"evaluation_times", {0.5, 1.0}},
        {"seed", 1},
        {"engine", "direct"},
        {"limit", {{"dt", 1e-3}}}}},
      {"output", {{"dir", "out"}}}};
}

// Two stations in series; only station 1 has external arrivals.
inline json tandem() {
  json c = singleStation();
  c["topology"] = {{"stations", 2}, {"arrival_set", {1}}, {"routing", {{0.0, 1.0}, {0.0, 0.0}}}};
  c["rates"] = {{"lambda1", {1.0, 0.0}}, {"mu1", {1.0, 1.0}}};
  c["primitives"]["arrivals"] = {{{"distribution", "exponential"}, {"mean", 1.0}}, nullptr};
  c["scaling"]["x0"] = {0.0, 0.0};
  return c;
}

}  // namespace testing
