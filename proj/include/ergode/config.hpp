#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ergode/birkhoff.hpp"
#include "ergode/constructions.hpp"

namespace ergode {

using Json = nlohmann::json;

// Descriptor parsers. Every object is checked against its key list; unknown
// keys, wrong types and out-of-range values throw ValidationError.
System parse_system(const Json& j);
Flow parse_flow(const Json& j);
/// `flow` is needed for pushforward and time_average descriptors.
Measure parse_measure(const Json& j, const Flow* flow = nullptr);
Observable parse_observable(const Json& j);
SubsetSpec parse_subset(const Json& j, std::uint64_t seed = 0);
Schedule parse_schedule(const Json& j);
MistakeFunction parse_mistake(const Json& j);
/// A point descriptor, or a sample descriptor expanding to several points
/// drawn from `seed`.
std::vector<PointGenerator> parse_points(const Json& j, std::uint64_t seed);

struct ConstructionSpec {
  std::string kind;  // generic, irregular, glue
  std::optional<Measure> measure;
  GenericMode mode = GenericMode::DeterministicBlocks;
  std::uint64_t horizon = 100000;
  std::optional<Observable> observable;
  double lo = 0.0, hi = 1.0, ratio = 4.0;
  std::uint64_t first_block = 250;
  std::vector<OrbitSpecSegment> segments;
  std::optional<MistakeFunction> mistake;
  std::size_t max_connector = 8;
};

struct ExperimentConfig {
  std::string command;
  std::string id;
  Json raw;
  std::optional<System> system;
  std::optional<Flow> flow;
  std::vector<Measure> measures;
  std::optional<SubsetSpec> subset;
  std::optional<Schedule> schedule;
  std::vector<PointGenerator> points;
  std::vector<Observable> observables;
  std::optional<ConstructionSpec> construction;
  std::map<std::string, std::vector<double>> params;  // scalars stored as one-element lists
  std::uint64_t seed = 0;
  std::string output;

  double param(const std::string& key, double fallback) const;
  std::vector<double> param_list(const std::string& key, std::vector<double> fallback) const;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"entropy",      "birkhoff",     "classify",         "construct",
                                                 "verify-thm-a", "verify-thm-b", "verify-irregular", "verify-inclusions"};
  return names;
}

/// Full validation of a config: shape, per-command fields and params, every
/// descriptor. `seed_override` replaces the config seed.
ExperimentConfig parse_config(const Json& j, std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace ergode
