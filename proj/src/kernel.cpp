#include "smdp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "smdp/error.hpp"
#include "smdp/special.hpp"

namespace smdp {

namespace {

constexpr double kOverflowResidue = 1e-12;
constexpr double kCrossCheckTolerance = 1e-8;

void check_common(double lambda, double gamma, int max_arrivals) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::non_positive_rate, "arrival rate must be non-negative and finite");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::non_positive_rate, "discount rate must be non-negative and finite");
  }
  if (max_arrivals < 0) throw Error(ErrorCode::invalid_argument, "max_arrivals must be non-negative");
}

double residual_overflow(double total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  double overflow = total - sum;
  if (overflow < 0.0) {
    if (overflow < -kOverflowResidue) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "negative overflow mass " << overflow;
      throw Error(ErrorCode::numeric, msg.str());
    }
    overflow = 0.0;
  }
  return overflow;
}

// (beta - alpha)^{-1} int_alpha^beta e^{-gamma t} dt
double uniform_total_discount(double alpha, double beta, double gamma) {
  if (gamma == 0.0) return 1.0;
  const double width = beta - alpha;
  return -std::exp(-gamma * alpha) * std::expm1(-gamma * width) / (gamma * width);
}

}  // namespace

double poisson_count_prob(int m, double lambda, double t) {
  if (m < 0) return 0.0;
  return special::poisson_pmf(m, lambda * t);
}

DiscountedWeights weights_exponential(double lambda, double mu, double gamma, int max_arrivals) {
  check_common(lambda, gamma, max_arrivals);
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorCode::non_positive_rate, "service rate must be positive");

  // w[m] = mu lambda^m / (gamma + mu + lambda)^{m+1}
  const double s = gamma + mu + lambda;
  const double ratio = lambda / s;
  DiscountedWeights out;
  out.total_discount = mu / (gamma + mu);
  out.weights.resize(static_cast<std::size_t>(max_arrivals) + 1);
  double w = mu / s;
  for (auto& slot_weight : out.weights) {
    slot_weight = w;
    w *= ratio;
  }
  // Geometric tail: sum_{m > M} w[m] = mu/(gamma+mu) * ratio^{M+1}.
  out.overflow = out.total_discount * std::pow(ratio, max_arrivals + 1);
  return out;
}

DiscountedWeights weights_deterministic(double lambda, double tau, double gamma, int max_arrivals) {
  check_common(lambda, gamma, max_arrivals);
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::non_positive_rate, "service time must be positive");

  const double mean = lambda * tau;
  DiscountedWeights out;
  out.total_discount = std::exp(-gamma * tau);
  out.weights.resize(static_cast<std::size_t>(max_arrivals) + 1);
  for (int m = 0; m <= max_arrivals; ++m) {
    out.weights[static_cast<std::size_t>(m)] = out.total_discount * special::poisson_pmf(m, mean);
  }
  // P(N >= M+1) = P(M+1, lambda tau)
  out.overflow = mean == 0.0 ? 0.0 : out.total_discount * special::gamma_p(max_arrivals + 1, mean);
  return out;
}

DiscountedWeights weights_uniform_quadrature(double lambda, double alpha, double beta, double gamma,
                                             int max_arrivals) {
  check_common(lambda, gamma, max_arrivals);
  if (!(alpha >= 0.0) || !(alpha < beta)) throw Error(ErrorCode::invalid_support, "uniform support needs 0 <= alpha < beta");

  const double width = beta - alpha;
  DiscountedWeights out;
  out.total_discount = uniform_total_discount(alpha, beta, gamma);
  out.weights.resize(static_cast<std::size_t>(max_arrivals) + 1);
  for (int m = 0; m <= max_arrivals; ++m) {
    auto integrand = [&](double t) { return std::exp(-gamma * t) * special::poisson_pmf(m, lambda * t); };
    out.weights[static_cast<std::size_t>(m)] =
        special::integrate_gauss_legendre(integrand, alpha, beta, 1e-15 * width) / width;
  }
  out.overflow = residual_overflow(out.total_discount, out.weights);
  return out;
}

DiscountedWeights weights_uniform(double lambda, double alpha, double beta, double gamma, int max_arrivals) {
  check_common(lambda, gamma, max_arrivals);
  if (!(alpha >= 0.0) || !(alpha < beta) || !std::isfinite(beta)) {
    throw Error(ErrorCode::invalid_support, "uniform support needs 0 <= alpha < beta");
  }

  const double width = beta - alpha;
  const double c = gamma + lambda;
  DiscountedWeights out;
  out.total_discount = uniform_total_discount(alpha, beta, gamma);
  out.weights.assign(static_cast<std::size_t>(max_arrivals) + 1, 0.0);

  if (c == 0.0) {
    out.weights[0] = 1.0;
  } else if (lambda == 0.0) {
    out.weights[0] = out.total_discount;
  } else {
    // int_alpha^beta e^{-ct} (lambda t)^m / m! dt
    //   = lambda^m / c^{m+1} [P(m+1, c beta) - P(m+1, c alpha)]
    const double lo = c * alpha;
    const double hi = c * beta;
    const double ratio = lambda / c;
    double scale = 1.0 / c;
    for (int m = 0; m <= max_arrivals; ++m) {
      const int a = m + 1;
      const double mass = lo >= a ? special::gamma_q(a, lo) - special::gamma_q(a, hi)
                                  : special::gamma_p(a, hi) - special::gamma_p(a, lo);
      out.weights[static_cast<std::size_t>(m)] = std::max(0.0, scale * mass / width);
      scale *= ratio;
    }
  }
  out.overflow = residual_overflow(out.total_discount, out.weights);

  const auto check = weights_uniform_quadrature(lambda, alpha, beta, gamma, max_arrivals);
  for (std::size_t m = 0; m < out.weights.size(); ++m) {
    const double gap = std::abs(out.weights[m] - check.weights[m]);
    if (gap > kCrossCheckTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "uniform kernel cross-check failed at m=" << m << ": incomplete gamma " << out.weights[m]
          << " vs quadrature " << check.weights[m];
      throw Error(ErrorCode::numeric, msg.str());
    }
  }
  return out;
}

DiscountedWeights discounted_weights(const ServiceDistribution& dist, double lambda, double gamma,
                                     int max_arrivals) {
  return std::visit(
      [&](const auto& d) -> DiscountedWeights {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return weights_exponential(lambda, d.mu, gamma, max_arrivals);
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return weights_deterministic(lambda, d.tau, gamma, max_arrivals);
        } else {
          return weights_uniform(lambda, d.alpha, d.beta, gamma, max_arrivals);
        }
      },
      dist);
}

double expected_reward(double loss, double total_discount, double size_factor) {
  return size_factor * (1.0 - loss) * total_discount;
}

double mean_service_time(const ServiceDistribution& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return 1.0 / d.mu;
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return d.tau;
        } else {
          return 0.5 * (d.alpha + d.beta);
        }
      },
      dist);
}

}  // namespace smdp
