#include "smdp/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "smdp/error.hpp"

namespace smdp {

namespace {

class Stream {
 public:
  Stream(std::uint64_t base_seed, int replication) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(replication), 0x5eedu};
    engine_.seed(seq);
  }

  /// Uniform on (0, 1).
  double open01() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double exponential(double rate) { return -std::log(open01()) / rate; }

  double service(const ServiceDistribution& dist) {
    return std::visit(
        [this](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Exponential>) {
            return exponential(d.mu);
          } else if constexpr (std::is_same_v<T, Deterministic>) {
            return d.tau;
          } else {
            return d.alpha + (d.beta - d.alpha) * open01();
          }
        },
        dist);
  }

 private:
  std::mt19937_64 engine_;
};

void check_config(const SimConfig& c) {
  if (c.params.buffer_size < 1) throw Error(ErrorCode::buffer_too_small, "buffer size must be positive");
  if (c.params.lambda < 0.0) throw Error(ErrorCode::non_positive_rate, "arrival rate must be nonnegative");
  if (!(c.horizon > 0.0)) throw Error(ErrorCode::invalid_argument, "horizon must be positive");
  if (c.replications < 2) throw Error(ErrorCode::invalid_argument, "at least two replications are needed");
  if (c.threshold < 0 || c.threshold > c.params.buffer_size - 1) {
    throw Error(ErrorCode::out_of_range, "threshold outside 0..B-1");
  }
  for (const auto& d : c.service) validate_distribution(d);
  for (Action u : kActions) {
    const double p = c.params.action(u).loss;
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::invalid_probability, "loss probability outside [0, 1]");
  }
}

}  // namespace

SimCounts& SimCounts::operator+=(const SimCounts& o) {
  arrivals += o.arrivals;
  accepted += o.accepted;
  blocked += o.blocked;
  success += o.success;
  fail += o.fail;
  in_system += o.in_system;
  return *this;
}

ReplicationResult simulate_replication(const SimConfig& config, int replication) {
  check_config(config);
  constexpr double kNever = std::numeric_limits<double>::infinity();
  Stream rng(config.base_seed, replication);
  const double lambda = config.params.lambda;
  const int B = config.params.buffer_size;

  SimCounts counts;
  int n = 0;  // packets present, including the one in service
  Action active = Action::idle;
  double next_arrival = lambda > 0.0 ? rng.exponential(lambda) : kNever;
  double completion = kNever;

  auto start_service = [&](double now) {
    active = n <= config.threshold ? Action::a : Action::b;
    completion = now + rng.service(config.service[slot(active)]);
  };

  for (;;) {
    const double now = std::min(next_arrival, completion);
    if (now > config.horizon) break;
    if (next_arrival <= completion) {
      ++counts.arrivals;
      if (n < B) {
        ++counts.accepted;
        ++n;
        if (active == Action::idle) start_service(now);
      } else {
        ++counts.blocked;
      }
      next_arrival = now + rng.exponential(lambda);
    } else {
      if (rng.open01() < 1.0 - config.params.action(active).loss) {
        ++counts.success;
      } else {
        ++counts.fail;
      }
      --n;
      active = Action::idle;
      completion = kNever;
      if (n > 0) start_service(now);
    }
  }
  counts.in_system = static_cast<std::uint64_t>(n);
  return {static_cast<double>(counts.success) / config.horizon, counts};
}

std::pair<double, double> student_t_interval(const std::vector<double>& sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw Error(ErrorCode::invalid_argument, "a confidence interval needs two observations");
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return {mean, t * sd / std::sqrt(static_cast<double>(n))};
}

std::vector<SimResult> simulate_sweep(const SimConfig& config, const std::vector<int>& thresholds, unsigned threads) {
  std::vector<SimConfig> configs;
  for (int t : thresholds) {
    SimConfig c = config;
    c.threshold = t;
    check_config(c);
    configs.push_back(c);
  }
  const auto reps = static_cast<std::size_t>(config.replications);
  const std::size_t jobs = configs.size() * reps;
  std::vector<ReplicationResult> flat(jobs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    try {
      for (std::size_t j = next++; j < jobs; j = next++) {
        flat[j] = simulate_replication(configs[j / reps], static_cast<int>(j % reps));
      }
    } catch (...) {
      const std::lock_guard lock(failure_lock);
      if (!failure) failure = std::current_exception();
      next = jobs;
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs, 1))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SimResult> out;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    SimResult r;
    r.threshold = configs[c].threshold;
    r.base_seed = config.base_seed;
    std::vector<double> sample;
    for (std::size_t k = 0; k < reps; ++k) {
      const auto& rep = flat[c * reps + k];
      r.replications.push_back(rep);
      r.totals += rep.counts;
      sample.push_back(rep.throughput);
    }
    std::tie(r.mean, r.half_width) = student_t_interval(sample);
    out.push_back(std::move(r));
  }
  return out;
}

SimResult simulate(const SimConfig& config, unsigned threads) {
  return simulate_sweep(config, {config.threshold}, threads).front();
}

}  // namespace smdp
