#include "smdp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "smdp/error.hpp"
#include "smdp/kernel.hpp"

namespace smdp {

std::string to_string(ServiceFamily f) {
  switch (f) {
    case ServiceFamily::exponential: return "exponential";
    case ServiceFamily::deterministic: return "deterministic";
    case ServiceFamily::uniform: return "uniform";
  }
  return "unknown";
}

ServiceFamily parse_service_family(const std::string& name) {
  if (name == "exponential") return ServiceFamily::exponential;
  if (name == "deterministic") return ServiceFamily::deterministic;
  if (name == "uniform") return ServiceFamily::uniform;
  throw Error(ErrorCode::schema, "unknown service family '" + name + "'");
}

ServiceDistribution service_from_rate(ServiceFamily family, double mu, UniformSupport support) {
  if (!(mu > 0.0)) throw Error(ErrorCode::non_positive_rate, "service rate must be positive");
  switch (family) {
    case ServiceFamily::exponential: return Exponential{mu};
    case ServiceFamily::deterministic: return Deterministic{1.0 / mu};
    case ServiceFamily::uniform: {
      ServiceDistribution d = Uniform{support.lower / mu, support.upper / mu};
      validate_distribution(d);
      return d;
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown service family");
}

ServicePair service_pair(ServiceFamily family, const ModelParams& params, UniformSupport support) {
  return {service_from_rate(family, params.action_a.mu, support), service_from_rate(family, params.action_b.mu, support)};
}

Matrix service_transition_matrix(const ServiceDistribution& dist, double lambda, int buffer_size) {
  if (buffer_size < 2) throw Error(ErrorCode::buffer_too_small, "buffer size must be at least 2");
  const auto B = static_cast<std::size_t>(buffer_size);
  const DiscountedWeights w = discounted_weights(dist, lambda, 0.0, buffer_size - 1);
  Matrix P(B, B);
  P(0, 1) = 1.0;
  for (std::size_t i = 1; i < B; ++i) {
    const std::size_t room = B - i;  // arrivals that still fit
    for (std::size_t m = 0; m < room; ++m) P(i, i - 1 + m) = w.weights[m];
    double lump = w.overflow;
    for (std::size_t m = room; m < B; ++m) lump += w.weights[m];
    P(i, B - 1) += lump;
  }
  if (P.max_stochastic_defect() > 1e-12) {
    std::ostringstream msg;
    msg << "service transition matrix rows deviate from 1 by " << P.max_stochastic_defect();
    throw Error(ErrorCode::non_stochastic_row, msg.str());
  }
  return P;
}

EmbeddedChain build_embedded_chain(int threshold, const ModelParams& params, const ServicePair& service) {
  const int B = params.buffer_size;
  if (B < 2) throw Error(ErrorCode::buffer_too_small, "buffer size must be at least 2");
  if (threshold < 0 || threshold > B - 1) throw Error(ErrorCode::out_of_range, "threshold outside 0..B-1");
  if (!(params.lambda > 0.0)) throw Error(ErrorCode::non_positive_rate, "arrival rate must be positive");

  const Matrix Pa = service_transition_matrix(service[slot(Action::a)], params.lambda, B);
  const Matrix Pb = service_transition_matrix(service[slot(Action::b)], params.lambda, B);

  const auto size = static_cast<std::size_t>(B);
  EmbeddedChain chain;
  chain.threshold = threshold;
  chain.P = Matrix(size, size);
  chain.action.assign(size, Action::idle);
  chain.tau.assign(size, 1.0 / params.lambda);
  chain.rho.assign(size, 0.0);
  chain.P(0, 1) = 1.0;
  for (std::size_t i = 1; i < size; ++i) {
    const Action u = static_cast<int>(i) <= threshold ? Action::a : Action::b;
    const Matrix& src = u == Action::a ? Pa : Pb;
    chain.action[i] = u;
    chain.tau[i] = mean_service_time(service[slot(u)]);
    chain.rho[i] = 1.0 - params.action(u).loss;
    for (std::size_t j = 0; j < size; ++j) chain.P(i, j) = src(i, j);
  }
  return chain;
}

std::vector<double> stationary_distribution(const Matrix& P) {
  const std::size_t n = P.rows();
  if (n == 0 || P.cols() != n) throw Error(ErrorCode::dimension_mismatch, "transition matrix must be square");
  if (P.max_stochastic_defect() > 1e-12) throw Error(ErrorCode::non_stochastic_row, "transition matrix is not stochastic");
  Matrix A = P;
  for (std::size_t k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += A(k, j);
    if (!(s > 0.0)) throw Error(ErrorCode::reducible_chain, "chain has no unique stationary distribution");
    for (std::size_t i = 0; i < k; ++i) A(i, k) /= s;
    for (std::size_t i = 0; i < k; ++i) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) A(i, j) += aik * A(k, j);
    }
  }
  std::vector<double> pi(n, 0.0);
  pi[0] = 1.0;
  double total = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < j; ++i) acc += pi[i] * A(i, j);
    pi[j] = acc;
    total += acc;
  }
  for (double& x : pi) x /= total;
  return pi;
}

double stationary_residual(const Matrix& P, const std::vector<double>& pi) {
  double worst = 0.0;
  for (std::size_t j = 0; j < P.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < P.rows(); ++i) acc += pi[i] * P(i, j);
    worst = std::max(worst, std::abs(acc - pi[j]));
  }
  return worst;
}

ThroughputReport throughput(const EmbeddedChain& chain, const std::vector<double>& pi, const ServicePair& service,
                            const ModelParams& params) {
  const std::size_t n = chain.tau.size();
  if (pi.size() != n) throw Error(ErrorCode::dimension_mismatch, "distribution does not match the chain");
  ThroughputReport r;
  r.threshold = chain.threshold;
  r.visit_frequencies = pi;
  for (std::size_t i = 0; i < n; ++i) r.kappa += pi[i] * chain.tau[i];
  r.time_fractions.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.time_fractions[i] = pi[i] * chain.tau[i] / r.kappa;
  for (std::size_t i = 0; i < n; ++i) r.throughput += r.time_fractions[i] * chain.rho[i] / chain.tau[i];

  double busy_a = 0.0;
  double busy_b = 0.0;
  for (std::size_t i = 1; i < n; ++i) (chain.action[i] == Action::a ? busy_a : busy_b) += r.time_fractions[i];
  r.alt_throughput = busy_a / mean_service_time(service[slot(Action::a)]) * (1.0 - params.action_a.loss) +
                     busy_b / mean_service_time(service[slot(Action::b)]) * (1.0 - params.action_b.loss);
  r.agreement_gap = std::abs(r.throughput - r.alt_throughput);
  r.stationary_residual = stationary_residual(chain.P, pi);
  if (r.agreement_gap >= kThroughputAgreementTolerance) {
    std::ostringstream msg;
    msg << "throughput formulas disagree by " << r.agreement_gap << " at T=" << chain.threshold;
    throw Error(ErrorCode::numeric, msg.str());
  }
  return r;
}

ThroughputReport evaluate_threshold(int threshold, const ModelParams& params, const ServicePair& service) {
  const EmbeddedChain chain = build_embedded_chain(threshold, params, service);
  return throughput(chain, stationary_distribution(chain.P), service, params);
}

ThresholdSweep sweep_thresholds(const ModelParams& params, const ServicePair& service, unsigned threads) {
  const int B = params.buffer_size;
  if (B < 2) throw Error(ErrorCode::buffer_too_small, "buffer size must be at least 2");
  ThresholdSweep sweep;
  sweep.points.resize(static_cast<std::size_t>(B));
  const unsigned workers = std::max(1u, std::min(threads, static_cast<unsigned>(B)));
  if (workers == 1) {
    for (int t = 0; t < B; ++t) sweep.points[static_cast<std::size_t>(t)] = evaluate_threshold(t, params, service);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (int t = static_cast<int>(w); t < B; t += static_cast<int>(workers)) {
          sweep.points[static_cast<std::size_t>(t)] = evaluate_threshold(t, params, service);
        }
      }));
    }
    for (auto& job : jobs) job.get();
  }

  double lo = sweep.points[0].throughput;
  double hi = lo;
  sweep.best_throughput = lo;
  for (const auto& p : sweep.points) {
    lo = std::min(lo, p.throughput);
    hi = std::max(hi, p.throughput);
    if (p.throughput > sweep.best_throughput) {
      sweep.best_threshold = p.threshold;
      sweep.best_throughput = p.throughput;
    }
  }
  sweep.flat = hi - lo <= kFlatCurveTolerance * std::max(1.0, std::abs(hi));
  if (sweep.flat) {
    sweep.best_threshold = 0;
    sweep.best_throughput = sweep.points[0].throughput;
  }
  // Unimodal: nondecreasing up to the peak, nonincreasing after it.
  for (std::size_t t = 1; t < sweep.points.size(); ++t) {
    const double step = sweep.points[t].throughput - sweep.points[t - 1].throughput;
    const bool before_peak = static_cast<int>(t) <= sweep.best_threshold;
    if ((before_peak && step < -kFlatCurveTolerance) || (!before_peak && step > kFlatCurveTolerance)) sweep.unimodal = false;
  }
  return sweep;
}

}  // namespace smdp
