#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "smdp/model.hpp"
#include "smdp/policy.hpp"

namespace smdp {

/// Closed-form constants of the uniformised exponential model.
struct MdpConstants {
  double delta_a = 0.0;    // 1 / (mu_a + lambda + gamma)
  double delta_b = 0.0;
  double beta_a = 0.0;     // 1 / (mu_a + gamma)
  double beta_b = 0.0;
  double c_a = 0.0;        // (1 - p_a) mu_a / (gamma + mu_a)
  double c_b = 0.0;
  double delta_bar = 0.0;  // 1 / (gamma + lambda)

  double delta(Action u) const { return u == Action::a ? delta_a : delta_b; }
  double beta(Action u) const { return u == Action::a ? beta_a : beta_b; }
  double c(Action u) const { return u == Action::a ? c_a : c_b; }
};

/// Requires a single-slice model; rates and losses come from the action
/// parameters.
MdpConstants mdp_constants(const ValidatedModel& model);
MdpConstants mdp_constants(const ModelParams& params);

/// Departure-state values V (n = 0..B-1), arrival-state values V^{u,A}
/// (n = 0..B) and state-action values at departures V^{u,D} (n = 0..B-1).
struct MdpValueSet {
  std::vector<double> V;
  std::vector<double> V_A_a;
  std::vector<double> V_A_b;
  std::vector<double> V_D_a;
  std::vector<double> V_D_b;

  static MdpValueSet zeros(int buffer_size);

  std::vector<double>& arrival(Action u) { return u == Action::a ? V_A_a : V_A_b; }
  const std::vector<double>& arrival(Action u) const { return u == Action::a ? V_A_a : V_A_b; }
  std::vector<double>& departure(Action u) { return u == Action::a ? V_D_a : V_D_b; }
  const std::vector<double>& departure(Action u) const { return u == Action::a ? V_D_a : V_D_b; }
};

class MdpOperators {
 public:
  explicit MdpOperators(const ValidatedModel& model);
  MdpOperators(const ModelParams& params);

  int buffer_size() const noexcept { return buffer_size_; }
  const MdpConstants& constants() const noexcept { return constants_; }

  /// Arrival operator at (n, u), 0 <= n <= B. At n = B the self-referential
  /// equation is solved in closed form; at n = 0 the value is the better of
  /// the two transmissions started by an arrival to the empty buffer, and
  /// does not depend on u.
  double apply_A(Action u, const MdpValueSet& values, int n) const;

  /// State-action value at the departure state n, 0 <= n <= B-1.
  double apply_D(Action u, const MdpValueSet& values, int n) const;

  /// max_u apply_D, ties to a. At n = 0 both actions coincide and `a` is
  /// reported.
  std::pair<double, Action> apply_T(const MdpValueSet& values, int n) const;

  /// One synchronous sweep over all five vectors.
  MdpValueSet sweep(const MdpValueSet& values) const;

  /// max_u (lambda + mu_u) delta_u
  double contraction_modulus() const;

 private:
  int buffer_size_;
  double lambda_;
  double mu_a_;
  double mu_b_;
  MdpConstants constants_;

  double mu(Action u) const { return u == Action::a ? mu_a_ : mu_b_; }
};

struct MdpSolution {
  MdpValueSet values;
  Policy policy;
  long iterations = 0;
  double residual = 0.0;
};

/// Fixed-point iteration over the joint vector set from zero; throws
/// ErrorCode::no_convergence after max_iter sweeps.
MdpSolution solve_mdp(const ValidatedModel& model, double tol = 1e-10, long max_iter = 1'000'000);

/// Joint sup-norm distance between two value sets of the same size.
double sup_distance(const MdpValueSet& x, const MdpValueSet& y);

struct EquivalenceReport {
  double sup_diff = 0.0;
  bool policies_match = false;
};

/// Compares MDP departure values with SMDP values over n = 0..B-1 and the
/// greedy actions over n = 1..B-1.
EquivalenceReport check_smdp_equivalence(const MdpSolution& mdp, std::span<const double> smdp_values,
                                         std::span<const Action> smdp_actions);

}  // namespace smdp
