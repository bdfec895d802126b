#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smdp/mdp.hpp"
#include "smdp/policy.hpp"
#include "smdp/solver.hpp"

namespace smdp {

inline constexpr double kStructureTolerance = 1e-9;

/// `actions[i]` is the action at occupancy n = i + 1.
ThresholdDescriptor detect_threshold(std::span<const Action> actions);
ThresholdDescriptor detect_threshold(const Policy& policy, const ValidatedModel& model, int h, int k);

struct CheckResult {
  bool passed = true;
  std::vector<std::size_t> violations;  // positions in the checked vector
  /// For difference checks: +1 nondecreasing, -1 nonincreasing, 0 constant.
  int direction = 0;
};

/// Monotonicity of first[n] - second[n] in either direction. The direction
/// is fixed by the first change larger than `tol`; reversals are violations.
CheckResult check_increasing_difference(std::span<const double> first, std::span<const double> second,
                                        double tol = kStructureTolerance);

/// v[n+1] - v[n] <= v[n] - v[n-1] + tol for first < n < last.
CheckResult check_concavity(std::span<const double> v, std::size_t first, std::size_t last,
                            double tol = kStructureTolerance);

CheckResult check_monotone_nondecreasing(std::span<const double> v, double tol = kStructureTolerance);

/// Slope bound K from the departure value at 0 and the two arrival values at
/// 0.
double slope_bound_constant(const ModelParams& params, const MdpConstants& constants, double v0, double v_arrival_a0,
                            double v_arrival_b0);

CheckResult check_slope(std::span<const double> v, double bound, double tol = kStructureTolerance);

struct PropertyCheck {
  std::string property;  // increasing_difference | concave | nondecreasing | slope_bounded
  std::string subject;   // which vector and slice
  CheckResult result;
};

struct StructureReport {
  std::vector<ThresholdDescriptor> slices;
  bool single_threshold = true;  // every slice is a SingleThreshold
  bool increasing_difference = true;
  bool concave = true;
  bool nondecreasing = true;
  bool slope_bounded = true;
  std::optional<double> slope_bound_K;
  std::vector<PropertyCheck> checks;
  /// Properties are proven (and therefore enforced) only for exponential
  /// service on a single slice.
  bool enforced = false;

  bool all_passed() const {
    return single_threshold && increasing_difference && concave && nondecreasing && slope_bounded;
  }
};

/// Exponential case: checks the MDP value set and the SMDP solution.
StructureReport analyze_exponential(const ValidatedModel& model, const MdpSolution& mdp, const SolveReport& smdp);

/// Any case: per-slice checks of the SMDP solution, descriptive only.
StructureReport analyze_solution(const ValidatedModel& model, const SolveReport& smdp);

/// Checks externally supplied vectors (V over 0..B-1, state-action values over
/// 0..B-1). Used to audit values produced elsewhere.
StructureReport analyze_values(const ValidatedModel& model, std::span<const double> values,
                               std::span<const double> q_a, std::span<const double> q_b);

}  // namespace smdp
