#pragma once

#include <string>
#include <vector>

#include "smdp/matrix.hpp"
#include "smdp/model.hpp"

namespace smdp {

enum class ServiceFamily { exponential, deterministic, uniform };

std::string to_string(ServiceFamily f);
ServiceFamily parse_service_family(const std::string& name);

/// Uniform support as multiples of the mean service time 1/mu.
struct UniformSupport {
  double lower = 0.2;
  double upper = 1.8;
};

/// Service law with mean 1/mu: Exponential{mu}, Deterministic{1/mu} or
/// Uniform{lower/mu, upper/mu}.
ServiceDistribution service_from_rate(ServiceFamily family, double mu, UniformSupport support = {});
ServicePair service_pair(ServiceFamily family, const ModelParams& params, UniformSupport support = {});

/// Undiscounted arrival-count matrix over occupancies 0..B-1. Row i >= 1 is
/// the occupancy after a transmission started with i packets (excess
/// arrivals lumped at B-1); row 0 is an arrival to the empty buffer.
Matrix service_transition_matrix(const ServiceDistribution& dist, double lambda, int buffer_size);

/// Embedded chain of a threshold policy. State i is occupancy i; state 0 is
/// the empty buffer, state i >= 1 transmits via a iff i <= threshold.
struct EmbeddedChain {
  int threshold = 0;
  std::vector<Action> action;  // idle at 0
  Matrix P;
  std::vector<double> tau;     // mean holding time
  std::vector<double> rho;     // expected impulse reward
};

EmbeddedChain build_embedded_chain(int threshold, const ModelParams& params, const ServicePair& service);

/// GTH elimination; throws ErrorCode::reducible_chain on a zero pivot.
std::vector<double> stationary_distribution(const Matrix& P);

/// max_j |(pi P)_j - pi_j|
double stationary_residual(const Matrix& P, const std::vector<double>& pi);

struct ThroughputReport {
  int threshold = 0;
  std::vector<double> visit_frequencies;
  std::vector<double> time_fractions;
  double kappa = 0.0;
  double throughput = 0.0;
  double alt_throughput = 0.0;
  double agreement_gap = 0.0;
  double stationary_residual = 0.0;
};

inline constexpr double kThroughputAgreementTolerance = 1e-10;

/// Both throughput forms; throws ErrorCode::numeric if they disagree by more
/// than kThroughputAgreementTolerance.
ThroughputReport throughput(const EmbeddedChain& chain, const std::vector<double>& pi, const ServicePair& service,
                            const ModelParams& params);

ThroughputReport evaluate_threshold(int threshold, const ModelParams& params, const ServicePair& service);

struct ThresholdSweep {
  std::vector<ThroughputReport> points;  // T = 0..B-1
  int best_threshold = 0;
  double best_throughput = 0.0;
  bool unimodal = true;
  bool flat = false;
};

/// Curves whose spread is below this (relative to the peak) are reported flat
/// with best_threshold = 0.
inline constexpr double kFlatCurveTolerance = 1e-12;

ThresholdSweep sweep_thresholds(const ModelParams& params, const ServicePair& service, unsigned threads = 1);

}  // namespace smdp
