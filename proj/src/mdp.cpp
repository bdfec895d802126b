#include "smdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smdp/error.hpp"

namespace smdp {

namespace {

void require_single_slice(const ValidatedModel& model) {
  if (model.slice_count() != 1) {
    throw Error(ErrorCode::dimension_mismatch, "the MDP reformulation covers single-slice exponential models only");
  }
  for (Action u : kActions) {
    const auto* exp = std::get_if<Exponential>(&model.service(0, 0, u));
    if (exp == nullptr) {
      throw Error(ErrorCode::invalid_argument, "the MDP reformulation needs exponential service for both actions");
    }
  }
}

double sup_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

}  // namespace

MdpConstants mdp_constants(const ModelParams& p) {
  const double lambda = p.lambda;
  const double gamma = p.gamma;
  MdpConstants c;
  c.delta_a = 1.0 / (p.action_a.mu + lambda + gamma);
  c.delta_b = 1.0 / (p.action_b.mu + lambda + gamma);
  c.beta_a = 1.0 / (p.action_a.mu + gamma);
  c.beta_b = 1.0 / (p.action_b.mu + gamma);
  c.c_a = (1.0 - p.action_a.loss) * p.action_a.mu / (gamma + p.action_a.mu);
  c.c_b = (1.0 - p.action_b.loss) * p.action_b.mu / (gamma + p.action_b.mu);
  c.delta_bar = 1.0 / (gamma + lambda);
  return c;
}

MdpConstants mdp_constants(const ValidatedModel& model) {
  require_single_slice(model);
  return mdp_constants(model.params());
}

MdpValueSet MdpValueSet::zeros(int buffer_size) {
  const auto B = static_cast<std::size_t>(buffer_size);
  MdpValueSet v;
  v.V.assign(B, 0.0);
  v.V_A_a.assign(B + 1, 0.0);
  v.V_A_b.assign(B + 1, 0.0);
  v.V_D_a.assign(B, 0.0);
  v.V_D_b.assign(B, 0.0);
  return v;
}

MdpOperators::MdpOperators(const ModelParams& params)
    : buffer_size_(params.buffer_size),
      lambda_(params.lambda),
      mu_a_(params.action_a.mu),
      mu_b_(params.action_b.mu),
      constants_(mdp_constants(params)) {}

MdpOperators::MdpOperators(const ValidatedModel& model) : MdpOperators(model.params()) { require_single_slice(model); }

double MdpOperators::apply_A(Action u, const MdpValueSet& v, int n) const {
  if (n < 0 || n > buffer_size_) throw Error(ErrorCode::out_of_range, "arrival state outside 0..B");
  if (n == 0) {
    // Transmission started by an arrival to the empty buffer.
    double best = 0.0;
    bool first = true;
    for (Action w : kActions) {
      const double d = constants_.delta(w);
      const double value = mu(w) * d * v.V[0] + lambda_ * d * v.arrival(w)[1] + constants_.c(w);
      if (first || value > best) best = value;
      first = false;
    }
    return best;
  }
  const double d = constants_.delta(u);
  const auto& arrival = v.arrival(u);
  if (n == buffer_size_) return mu(u) * d * v.V[static_cast<std::size_t>(n - 1)] / (1.0 - lambda_ * d);
  return mu(u) * d * v.V[static_cast<std::size_t>(n)] + lambda_ * d * arrival[static_cast<std::size_t>(n + 1)];
}

double MdpOperators::apply_D(Action u, const MdpValueSet& v, int n) const {
  if (n < 0 || n >= buffer_size_) throw Error(ErrorCode::out_of_range, "departure state outside 0..B-1");
  if (n == 0) {
    return std::max(lambda_ * constants_.delta_bar * v.V_A_b[0], lambda_ * constants_.delta_bar * v.V_A_a[0]);
  }
  const double d = constants_.delta(u);
  const auto i = static_cast<std::size_t>(n);
  return mu(u) * d * v.V[i - 1] + lambda_ * d * v.arrival(u)[i] + constants_.c(u);
}

std::pair<double, Action> MdpOperators::apply_T(const MdpValueSet& v, int n) const {
  const double qa = apply_D(Action::a, v, n);
  const double qb = apply_D(Action::b, v, n);
  return qa >= qb ? std::pair{qa, Action::a} : std::pair{qb, Action::b};
}

MdpValueSet MdpOperators::sweep(const MdpValueSet& v) const {
  MdpValueSet next = MdpValueSet::zeros(buffer_size_);
  for (int n = buffer_size_; n >= 1; --n) {
    for (Action u : kActions) next.arrival(u)[static_cast<std::size_t>(n)] = apply_A(u, v, n);
  }
  const double empty = apply_A(Action::a, v, 0);
  next.V_A_a[0] = empty;
  next.V_A_b[0] = empty;
  for (int n = 0; n < buffer_size_; ++n) {
    const auto i = static_cast<std::size_t>(n);
    next.V_D_a[i] = apply_D(Action::a, v, n);
    next.V_D_b[i] = apply_D(Action::b, v, n);
    next.V[i] = std::max(next.V_D_a[i], next.V_D_b[i]);
  }
  return next;
}

double MdpOperators::contraction_modulus() const {
  return std::max((lambda_ + mu_a_) * constants_.delta_a, (lambda_ + mu_b_) * constants_.delta_b);
}

double sup_distance(const MdpValueSet& x, const MdpValueSet& y) {
  if (x.V.size() != y.V.size()) throw Error(ErrorCode::dimension_mismatch, "value sets differ in buffer size");
  return std::max({sup_diff(x.V, y.V), sup_diff(x.V_A_a, y.V_A_a), sup_diff(x.V_A_b, y.V_A_b),
                   sup_diff(x.V_D_a, y.V_D_a), sup_diff(x.V_D_b, y.V_D_b)});
}

MdpSolution solve_mdp(const ValidatedModel& model, double tol, long max_iter) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
  const MdpOperators ops(model);
  MdpValueSet current = MdpValueSet::zeros(model.buffer_size());
  double residual = 0.0;
  for (long it = 1; it <= max_iter; ++it) {
    MdpValueSet next = ops.sweep(current);
    residual = sup_distance(next, current);
    current = std::move(next);
    if (residual < tol) {
      std::vector<Action> actions(model.state_count(), Action::idle);
      for (int n = 1; n < model.buffer_size(); ++n) actions[static_cast<std::size_t>(n)] = ops.apply_T(current, n).second;
      MdpSolution out;
      out.policy = make_policy(model, std::move(actions));
      out.values = std::move(current);
      out.iterations = it;
      out.residual = residual;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "MDP iteration stopped after " << max_iter << " sweeps with residual " << residual;
  throw Error(ErrorCode::no_convergence, msg.str());
}

EquivalenceReport check_smdp_equivalence(const MdpSolution& mdp, std::span<const double> smdp_values,
                                         std::span<const Action> smdp_actions) {
  const auto& V = mdp.values.V;
  if (smdp_values.size() != V.size() || smdp_actions.size() != V.size()) {
    throw Error(ErrorCode::dimension_mismatch, "SMDP and MDP solutions differ in size");
  }
  EquivalenceReport report;
  for (std::size_t n = 0; n < V.size(); ++n) report.sup_diff = std::max(report.sup_diff, std::abs(V[n] - smdp_values[n]));
  report.policies_match = true;
  for (std::size_t n = 1; n < V.size(); ++n) {
    if (mdp.policy.action_of[n] != smdp_actions[n]) report.policies_match = false;
  }
  return report;
}

}  // namespace smdp
