// Independent reference computations used only by tests. Nothing here calls
// the library's quadrature, special functions or kernels.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "smdp/model.hpp"
#include "smdp/matrix.hpp"

namespace oracle {

/// Adaptive 31-point Gauss-Kronrod; `hi` may be +infinity.
double integrate(const std::function<double(double)>& f, double lo, double hi);

double poisson(int m, double mean);
/// P(N > M) for N ~ Poisson(mean).
double poisson_tail(int M, double mean);

struct Kernel {
  std::vector<double> weights;  // m = 0..M
  double overflow = 0.0;
  double total = 0.0;
};

/// E[e^{-gamma T} 1{N(T) = m}] by direct integration against the density.
Kernel kernel(const smdp::ServiceDistribution& dist, double lambda, double gamma, int M);

/// Dense solve of A x = b.
std::vector<double> solve_linear(const smdp::Matrix& A, const std::vector<double>& b);

struct Optimum {
  std::vector<double> values;          // model state order
  std::vector<smdp::Action> actions;  // best policy, idle at n = 0
  std::size_t policies = 0;
};

/// Optimal discounted SMDP values by evaluating every stationary policy with
/// an exact linear solve, coefficients from `kernel`.
Optimum enumerate_smdp(const smdp::ValidatedModel& model);

/// Same for the exponential MDP reformulation (departure and arrival
/// states); returns the departure values V_0..V_{B-1}.
Optimum enumerate_mdp(const smdp::ValidatedModel& model);

/// Stationary vector by power iteration on the lazy chain (I + P) / 2.
std::vector<double> power_stationary(const smdp::Matrix& P);

/// M/M/1 with room for B packets in total, loss p: mu (1-p) P(busy).
double mm1b_throughput(double lambda, double mu, double loss, int B);

/// Exponential service, threshold T: CTMC over (occupancy, action in
/// service), action fixed when a transmission starts. Returns sum of
/// pi(n, u) mu_u (1 - p_u).
double ctmc_threshold_throughput(const smdp::ModelParams& params, int T);

/// Random exponential model with mu_a < mu_b and p_a < p_b.
smdp::ModelParams random_exponential_params(std::mt19937_64& rng, int max_buffer, double gamma_lo = 0.01,
                                            double gamma_hi = 0.3);

}  // namespace oracle
