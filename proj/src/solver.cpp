#include "smdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smdp/analysis.hpp"
#include "smdp/error.hpp"

namespace smdp {

namespace {

void require_size(std::span<const double> values, std::size_t expected) {
  if (values.size() != expected) {
    std::ostringstream msg;
    msg << "value vector has " << values.size() << " entries, the state space has " << expected;
    throw Error(ErrorCode::dimension_mismatch, msg.str());
  }
}

template <class T>
bool holds_everywhere(const ValidatedModel& model, bool over_channels, bool over_sizes) {
  for (int h = 0; h < (over_channels ? model.channel_count() : 1); ++h) {
    for (int k = 0; k < (over_sizes ? model.size_count() : 1); ++k) {
      for (Action u : kActions) {
        if (!std::holds_alternative<T>(model.service(h, k, u))) return false;
      }
    }
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exponential service: J^u(n) = c_u mu_u/(mu_u+gamma)
//   + sum_{i=n-1}^{B-1} V(i) w_u[i-n+1] + V(B-1) (mu_u/(mu_u+gamma) - sum w_u)

ExponentialBellman::ExponentialBellman(const ValidatedModel& model)
    : buffer_size_(model.buffer_size()),
      empty_discount_(model.lambda() / (model.lambda() + model.gamma())) {
  if (model.slice_count() != 1) {
    throw Error(ErrorCode::dimension_mismatch, "exponential operator needs a single channel state and packet size");
  }
  for (Action u : kActions) {
    const auto& a = model.params().action(u);
    kernels_[slot(u)] = weights_exponential(model.lambda(), a.mu, model.gamma(), buffer_size_ - 1);
    reward_[slot(u)] = expected_reward(a.loss, kernels_[slot(u)].total_discount, model.reward_factor(0));
  }
}

BellmanStep ExponentialBellman::operator()(std::span<const double> values) const {
  const auto B = static_cast<std::size_t>(buffer_size_);
  require_size(values, B);
  BellmanStep out;
  out.values.assign(B, 0.0);
  out.q_a.assign(B, 0.0);
  out.q_b.assign(B, 0.0);
  out.actions.assign(B, Action::idle);

  for (std::size_t n = 1; n < B; ++n) {
    for (Action u : kActions) {
      const auto& kernel = kernels_[slot(u)];
      double j = reward_[slot(u)];
      double mass = 0.0;
      for (std::size_t i = n - 1; i < B; ++i) {
        const double w = kernel.weights[i - n + 1];
        j += values[i] * w;
        mass += w;
      }
      j += values[B - 1] * std::max(0.0, kernel.total_discount - mass);
      (u == Action::a ? out.q_a : out.q_b)[n] = j;
    }
    const bool pick_a = out.q_a[n] >= out.q_b[n];
    out.actions[n] = pick_a ? Action::a : Action::b;
    out.values[n] = pick_a ? out.q_a[n] : out.q_b[n];
  }
  out.values[0] = empty_discount_ * out.values[1];
  out.q_a[0] = out.q_b[0] = out.values[0];
  return out;
}

// ---------------------------------------------------------------------------
// Slice operator over (n, h, k):
//   J^u(n,h,k) = r(h,k,u) + sum_m w[m] EV(n-1+m | h,k) + overflow EV(B-1 | h,k)
//   EV(j | h,k) = sum_{h',k'} p(h'|h) q(k'|k) V(j,h',k')
//   V(0,h,k)   = lambda/(lambda+gamma) EV'(1 | h,k) on the updated values.

SliceBellman::SliceBellman(const ValidatedModel& model,
                           const std::function<DiscountedWeights(const ServiceDistribution&)>& kernel)
    : buffer_size_(model.buffer_size()),
      slices_(model.slice_count()),
      empty_discount_(model.lambda() / (model.lambda() + model.gamma())) {
  const int B = buffer_size_;
  const int H = model.channel_count();
  const int K = model.size_count();
  kernels_.resize(slices_ * 2);
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < K; ++k) {
      const std::size_t slice = static_cast<std::size_t>(h * K + k);
      for (Action u : kActions) {
        const DiscountedWeights w = kernel(model.service(h, k, u));
        Kernel& out = kernels_[slice * 2 + slot(u)];
        out.weights = w.weights;
        out.reward = expected_reward(model.loss(h, u), w.total_discount, model.reward_factor(k));
        out.overflow.assign(static_cast<std::size_t>(B), 0.0);
        // tail beyond B-n arrivals = overflow(M = B-1) + sum_{m=B-n+1}^{B-1} w[m]
        double tail = w.overflow;
        for (int n = 1; n < B; ++n) {
          // n = 1 keeps the M = B-1 tail; each further n releases one weight.
          if (n > 1) tail += w.weights[static_cast<std::size_t>(B - n + 1)];
          out.overflow[static_cast<std::size_t>(n)] = tail;
        }
      }
    }
  }
  transition_.assign(slices_ * slices_, 0.0);
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < K; ++k) {
      for (int h2 = 0; h2 < H; ++h2) {
        for (int k2 = 0; k2 < K; ++k2) {
          transition_[static_cast<std::size_t>(h * K + k) * slices_ + static_cast<std::size_t>(h2 * K + k2)] =
              model.channel_transition(h, h2) * model.size_transition(k, k2);
        }
      }
    }
  }
}

BellmanStep SliceBellman::operator()(std::span<const double> values) const {
  const auto B = static_cast<std::size_t>(buffer_size_);
  const std::size_t S = slices_;
  require_size(values, B * S);

  // expected[j * S + s] = EV(j | s)
  std::vector<double> expected(B * S, 0.0);
  for (std::size_t j = 0; j < B; ++j) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = 0.0;
      for (std::size_t s2 = 0; s2 < S; ++s2) acc += transition_[s * S + s2] * values[j * S + s2];
      expected[j * S + s] = acc;
    }
  }

  BellmanStep out;
  out.values.assign(B * S, 0.0);
  out.q_a.assign(B * S, 0.0);
  out.q_b.assign(B * S, 0.0);
  out.actions.assign(B * S, Action::idle);

  for (std::size_t n = 1; n < B; ++n) {
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t idx = n * S + s;
      for (Action u : kActions) {
        const Kernel& kernel = kernels_[s * 2 + slot(u)];
        double j = kernel.reward;
        for (std::size_t m = 0; m + n - 1 < B; ++m) j += kernel.weights[m] * expected[(n - 1 + m) * S + s];
        j += kernel.overflow[n] * expected[(B - 1) * S + s];
        (u == Action::a ? out.q_a : out.q_b)[idx] = j;
      }
      const bool pick_a = out.q_a[idx] >= out.q_b[idx];
      out.actions[idx] = pick_a ? Action::a : Action::b;
      out.values[idx] = pick_a ? out.q_a[idx] : out.q_b[idx];
    }
  }
  for (std::size_t s = 0; s < S; ++s) {
    double acc = 0.0;
    for (std::size_t s2 = 0; s2 < S; ++s2) acc += transition_[s * S + s2] * out.values[S + s2];
    out.values[s] = empty_discount_ * acc;
    out.q_a[s] = out.q_b[s] = out.values[s];
  }
  return out;
}

DeterministicSizedBellman::DeterministicSizedBellman(const ValidatedModel& model)
    : SliceBellman(model, [&](const ServiceDistribution& d) {
        return weights_deterministic(model.lambda(), std::get<Deterministic>(d).tau, model.gamma(),
                                     model.buffer_size() - 1);
      }) {}

GeUniformBellman::GeUniformBellman(const ValidatedModel& model)
    : SliceBellman(model, [&](const ServiceDistribution& d) {
        const auto& uni = std::get<Uniform>(d);
        return weights_uniform(model.lambda(), uni.alpha, uni.beta, model.gamma(), model.buffer_size() - 1);
      }) {}

GeneralBellman::GeneralBellman(const ValidatedModel& model)
    : SliceBellman(model, [&](const ServiceDistribution& d) {
        return discounted_weights(d, model.lambda(), model.gamma(), model.buffer_size() - 1);
      }) {}

namespace {

const ValidatedModel& require_deterministic_sized(const ValidatedModel& model) {
  if (model.channel_count() != 1) {
    throw Error(ErrorCode::dimension_mismatch, "deterministic-sized operator needs a single channel state");
  }
  if (!holds_everywhere<Deterministic>(model, false, true)) {
    throw Error(ErrorCode::missing_service_entry, "deterministic-sized operator needs a deterministic time per (size, action)");
  }
  return model;
}

const ValidatedModel& require_ge_uniform(const ValidatedModel& model) {
  if (model.size_count() != 1) {
    throw Error(ErrorCode::dimension_mismatch, "GE/uniform operator needs a single packet size");
  }
  if (!holds_everywhere<Uniform>(model, true, false)) {
    throw Error(ErrorCode::missing_service_entry, "GE/uniform operator needs a uniform law per (channel state, action)");
  }
  return model;
}

}  // namespace

BellmanStep bellman_exponential(std::span<const double> values, const ValidatedModel& model) {
  return ExponentialBellman(model)(values);
}

BellmanStep bellman_deterministic_sized(std::span<const double> values, const ValidatedModel& model) {
  return DeterministicSizedBellman(require_deterministic_sized(model))(values);
}

BellmanStep bellman_ge_uniform(std::span<const double> values, const ValidatedModel& model) {
  return GeUniformBellman(require_ge_uniform(model))(values);
}

BellmanStep bellman_general(std::span<const double> values, const ValidatedModel& model) {
  return GeneralBellman(model)(values);
}

std::string to_string(ModelCase c) {
  switch (c) {
    case ModelCase::exponential: return "exponential";
    case ModelCase::deterministic_sized: return "deterministic_sized";
    case ModelCase::ge_uniform: return "ge_uniform";
    case ModelCase::general: return "general";
  }
  return "unknown";
}

ModelCase parse_model_case(const std::string& name) {
  if (name == "exponential") return ModelCase::exponential;
  if (name == "deterministic_sized") return ModelCase::deterministic_sized;
  if (name == "ge_uniform") return ModelCase::ge_uniform;
  if (name == "general") return ModelCase::general;
  throw Error(ErrorCode::schema, "unknown model case '" + name + "'");
}

BellmanOperator make_operator(ModelCase which, const ValidatedModel& model) {
  switch (which) {
    case ModelCase::exponential: {
      ExponentialBellman op(model);
      return [op](std::span<const double> v) { return op(v); };
    }
    case ModelCase::deterministic_sized: {
      DeterministicSizedBellman op(require_deterministic_sized(model));
      return [op](std::span<const double> v) { return op(v); };
    }
    case ModelCase::ge_uniform: {
      GeUniformBellman op(require_ge_uniform(model));
      return [op](std::span<const double> v) { return op(v); };
    }
    case ModelCase::general: {
      GeneralBellman op(model);
      return [op](std::span<const double> v) { return op(v); };
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown model case");
}

double contraction_bound(const ValidatedModel& model) {
  double bound = model.lambda() / (model.lambda() + model.gamma());
  for (int h = 0; h < model.channel_count(); ++h) {
    for (int k = 0; k < model.size_count(); ++k) {
      for (Action u : kActions) {
        bound = std::max(bound, discounted_weights(model.service(h, k, u), model.lambda(), model.gamma(), 0).total_discount);
      }
    }
  }
  return bound;
}

SolveReport value_iterate(const BellmanOperator& bellman, const ValidatedModel& model, std::vector<double> initial,
                          const IterationOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
  if (options.max_iter < 1) throw Error(ErrorCode::invalid_argument, "max_iter must be positive");
  require_size(initial, model.state_count());

  std::vector<double> current = std::move(initial);
  std::vector<double> ratios;  // last residual ratios, at most 10
  double previous_residual = 0.0;
  BellmanStep step;
  double residual = 0.0;
  long iteration = 0;
  bool converged = false;

  while (iteration < options.max_iter) {
    ++iteration;
    step = bellman(current);
    residual = 0.0;
    for (std::size_t i = 0; i < current.size(); ++i) residual = std::max(residual, std::abs(step.values[i] - current[i]));
    if (previous_residual > 0.0 && residual > 0.0) {
      if (ratios.size() == 10) ratios.erase(ratios.begin());
      ratios.push_back(residual / previous_residual);
    }
    previous_residual = residual;
    current = step.values;
    if (options.on_sweep) options.on_sweep(iteration, current);
    if (residual < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "value iteration stopped after " << iteration << " sweeps with residual " << residual
        << " (tolerance " << options.tol << ")";
    throw Error(ErrorCode::no_convergence, msg.str());
  }

  SolveReport report;
  report.values = std::move(current);
  report.q_a = std::move(step.q_a);
  report.q_b = std::move(step.q_b);
  report.policy = make_policy(model, std::move(step.actions));
  report.iterations = iteration;
  report.final_residual = residual;
  if (!ratios.empty()) {
    double log_sum = 0.0;
    for (double r : ratios) log_sum += std::log(r);
    report.contraction_estimate = std::exp(log_sum / static_cast<double>(ratios.size()));
  }
  return report;
}

SolveReport solve(ModelCase which, const ValidatedModel& model, const IterationOptions& options) {
  return value_iterate(make_operator(which, model), model, std::vector<double>(model.state_count(), 0.0), options);
}

}  // namespace smdp
