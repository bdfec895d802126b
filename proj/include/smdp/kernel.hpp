#pragma once

#include <vector>

#include "smdp/model.hpp"

namespace smdp {

/// Discounted arrival-count weights for one transmission:
/// weights[m] = E[e^{-gamma T} 1{m arrivals during T}] for m = 0..M, and
/// overflow = the same mass for more than M arrivals.
struct DiscountedWeights {
  std::vector<double> weights;
  double overflow = 0.0;
  double total_discount = 0.0;  // E[e^{-gamma T}]
};

/// e^{-lambda t} (lambda t)^m / m!
double poisson_count_prob(int m, double lambda, double t);

// gamma = 0 is accepted by the kernels; policy evaluation uses the
// undiscounted kernels as arrival-count distributions.
DiscountedWeights weights_exponential(double lambda, double mu, double gamma, int max_arrivals);
DiscountedWeights weights_deterministic(double lambda, double tau, double gamma, int max_arrivals);

/// Incomplete-gamma evaluation, cross-checked against adaptive 64-node
/// Gauss-Legendre; a disagreement above 1e-8 throws ErrorCode::numeric.
DiscountedWeights weights_uniform(double lambda, double alpha, double beta, double gamma, int max_arrivals);

/// Quadrature-only evaluation of the uniform weights (the cross-check path).
DiscountedWeights weights_uniform_quadrature(double lambda, double alpha, double beta, double gamma,
                                             int max_arrivals);

DiscountedWeights discounted_weights(const ServiceDistribution& dist, double lambda, double gamma,
                                     int max_arrivals);

/// size_factor * (1 - loss) * E[e^{-gamma T}]
double expected_reward(double loss, double total_discount, double size_factor);

double mean_service_time(const ServiceDistribution& dist);

}  // namespace smdp
