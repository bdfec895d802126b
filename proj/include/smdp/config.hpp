#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smdp/evaluation.hpp"
#include "smdp/model.hpp"
#include "smdp/solver.hpp"

namespace smdp {

inline constexpr int kConfigSchemaVersion = 1;

struct SweepSettings {
  std::vector<ServiceFamily> families{ServiceFamily::deterministic, ServiceFamily::uniform,
                                      ServiceFamily::exponential};
  UniformSupport support;
};

struct SimulationSettings {
  double horizon = 100000.0;
  int replications = 30;
  std::uint64_t seed = 1;
  std::vector<int> thresholds;  // empty: 0, (B-1)/2 and B-1
};

struct SolverSettings {
  double tol = 1e-10;
  long max_iter = 1'000'000;
};

/// Value vectors supplied for auditing instead of being solved for.
struct CheckValues {
  std::vector<double> values;
  std::vector<double> q_a;
  std::vector<double> q_b;
};

struct Config {
  ModelCase model_case = ModelCase::exponential;
  ModelParams params;
  std::optional<ChannelModel> channel;
  std::optional<PacketSizeModel> sizes;
  std::vector<ServiceEntry> service_table;
  ValidationOptions validation;
  SweepSettings sweep;
  SimulationSettings simulation;
  SolverSettings solver;
  std::optional<CheckValues> check_values;

  ValidatedModel model() const;
  std::vector<int> simulation_thresholds() const;
};

/// Parses and checks a schema-1 document. Syntax errors carry line and
/// column; schema errors carry the JSON pointer of the offending field and
/// its line. Unknown fields are rejected.
Config parse_config(const std::string& text);

/// Canonical JSON of the fully resolved configuration (defaults filled in).
std::string canonical_json(const Config& config);

/// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const Config& config);

}  // namespace smdp
