#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "smdp/kernel.hpp"
#include "smdp/model.hpp"
#include "smdp/policy.hpp"

namespace smdp {

/// One synchronous application of a Bellman operator. Values are indexed by
/// the model's state enumeration; q_a / q_b are the per-action values
/// (equal to `values` at n = 0, where no decision is taken).
struct BellmanStep {
  std::vector<double> values;
  std::vector<double> q_a;
  std::vector<double> q_b;
  std::vector<Action> actions;
};

using BellmanOperator = std::function<BellmanStep(std::span<const double>)>;

/// Single slice, exponential service with rates mu_a, mu_b.
class ExponentialBellman {
 public:
  explicit ExponentialBellman(const ValidatedModel& model);
  BellmanStep operator()(std::span<const double> values) const;

 private:
  int buffer_size_;
  double empty_discount_;  // lambda / (lambda + gamma)
  std::array<DiscountedWeights, 2> kernels_;
  std::array<double, 2> reward_{};
};

/// Operator over (n, h, k) slices; the three specialised cases below differ
/// in which service laws they accept and how they build the kernels.
class SliceBellman {
 public:
  BellmanStep operator()(std::span<const double> values) const;

  struct Kernel {
    std::vector<double> weights;   // m = 0..B-1
    std::vector<double> overflow;  // by n: mass of more than B-n arrivals
    double reward = 0.0;
  };

 protected:
  SliceBellman(const ValidatedModel& model, const std::function<DiscountedWeights(const ServiceDistribution&)>& kernel);

 private:
  int buffer_size_;
  std::size_t slices_;
  double empty_discount_;
  std::vector<Kernel> kernels_;     // [slice][u]
  std::vector<double> transition_;  // p(h'|h) q(k'|k), slices_ x slices_
};

/// Deterministic service per (size, action), single channel state.
class DeterministicSizedBellman : public SliceBellman {
 public:
  explicit DeterministicSizedBellman(const ValidatedModel& model);
};

/// Uniform service per (channel state, action), unknown packet size.
class GeUniformBellman : public SliceBellman {
 public:
  explicit GeUniformBellman(const ValidatedModel& model);
};

/// Any service table keyed by (h, k, u).
class GeneralBellman : public SliceBellman {
 public:
  explicit GeneralBellman(const ValidatedModel& model);
};

BellmanStep bellman_exponential(std::span<const double> values, const ValidatedModel& model);
BellmanStep bellman_deterministic_sized(std::span<const double> values, const ValidatedModel& model);
BellmanStep bellman_ge_uniform(std::span<const double> values, const ValidatedModel& model);
BellmanStep bellman_general(std::span<const double> values, const ValidatedModel& model);

enum class ModelCase { exponential, deterministic_sized, ge_uniform, general };

std::string to_string(ModelCase c);
ModelCase parse_model_case(const std::string& name);

BellmanOperator make_operator(ModelCase which, const ValidatedModel& model);

/// max over service entries of E[e^{-gamma T}] and lambda / (lambda + gamma).
double contraction_bound(const ValidatedModel& model);

struct IterationOptions {
  double tol = 1e-10;
  long max_iter = 1'000'000;
  /// Called after every sweep with the iteration number and new iterate.
  std::function<void(long, std::span<const double>)> on_sweep;
};

struct SolveReport {
  std::vector<double> values;
  std::vector<double> q_a;
  std::vector<double> q_b;
  Policy policy;
  long iterations = 0;
  double final_residual = 0.0;
  double contraction_estimate = 0.0;
};

/// Jacobi value iteration until the sup-norm residual drops below `tol`.
/// Throws ErrorCode::no_convergence when max_iter is exhausted.
SolveReport value_iterate(const BellmanOperator& bellman, const ValidatedModel& model, std::vector<double> initial,
                          const IterationOptions& options = {});

SolveReport solve(ModelCase which, const ValidatedModel& model, const IterationOptions& options = {});

}  // namespace smdp
