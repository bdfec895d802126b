#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "smdp/model.hpp"

namespace smdp {

struct SimConfig {
  ModelParams params;  // lambda, B, per-action loss
  ServicePair service;
  int threshold = 0;
  double horizon = 100000.0;
  int replications = 30;
  std::uint64_t base_seed = 1;
};

struct SimCounts {
  std::uint64_t arrivals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t blocked = 0;
  std::uint64_t success = 0;
  std::uint64_t fail = 0;
  std::uint64_t in_system = 0;  // at the horizon

  SimCounts& operator+=(const SimCounts& o);
  bool operator==(const SimCounts&) const = default;
};

struct ReplicationResult {
  double throughput = 0.0;  // successful departures per unit time
  SimCounts counts;
};

struct SimResult {
  int threshold = 0;
  std::uint64_t base_seed = 0;
  std::vector<ReplicationResult> replications;
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t
  SimCounts totals;

  bool covers(double value) const { return std::abs(value - mean) <= half_width; }
};

/// One replication; the stream depends only on (base_seed, replication).
ReplicationResult simulate_replication(const SimConfig& config, int replication);

/// All replications, run on up to `threads` workers. Results do not depend on
/// the worker count.
SimResult simulate(const SimConfig& config, unsigned threads = 1);

/// simulate() for each threshold, with the thresholds sharing the worker pool.
std::vector<SimResult> simulate_sweep(const SimConfig& config, const std::vector<int>& thresholds,
                                      unsigned threads = 1);

/// Mean and 95% Student-t half-width of the sample.
std::pair<double, double> student_t_interval(const std::vector<double>& sample);

}  // namespace smdp
