#include "smdp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smdp/error.hpp"

namespace smdp {

namespace {

std::vector<double> slice_of(std::span<const double> values, const ValidatedModel& model, std::size_t slice) {
  const std::size_t S = model.slice_count();
  std::vector<double> out(static_cast<std::size_t>(model.buffer_size()));
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = values[n * S + slice];
  return out;
}

std::string slice_name(const ValidatedModel& model, std::size_t slice) {
  if (model.slice_count() == 1) return "";
  const int K = model.size_count();
  std::ostringstream s;
  s << "[h=" << static_cast<int>(slice) / K << " k=" << static_cast<int>(slice) % K << "]";
  return s.str();
}

std::vector<double> tail(const std::vector<double>& v, std::size_t from) {
  return {v.begin() + static_cast<std::ptrdiff_t>(from), v.end()};
}

class ReportBuilder {
 public:
  explicit ReportBuilder(StructureReport& report) : report_(report) {}

  void add(const std::string& property, const std::string& subject, CheckResult result) {
    if (!result.passed) {
      if (property == "increasing_difference") report_.increasing_difference = false;
      if (property == "concave") report_.concave = false;
      if (property == "nondecreasing") report_.nondecreasing = false;
      if (property == "slope_bounded") report_.slope_bounded = false;
    }
    report_.checks.push_back({property, subject, std::move(result)});
  }

  void descriptor(ThresholdDescriptor d) {
    if (!std::holds_alternative<SingleThreshold>(d)) report_.single_threshold = false;
    report_.slices.push_back(std::move(d));
  }

 private:
  StructureReport& report_;
};

bool exponential_single_slice(const ValidatedModel& model) {
  if (model.slice_count() != 1) return false;
  for (Action u : kActions) {
    if (!std::holds_alternative<Exponential>(model.service(0, 0, u))) return false;
  }
  return true;
}

}  // namespace

ThresholdDescriptor detect_threshold(std::span<const Action> actions) {
  std::size_t leading = 0;
  while (leading < actions.size() && actions[leading] == Action::a) ++leading;
  bool single = true;
  for (std::size_t i = leading; i < actions.size(); ++i) single = single && actions[i] == Action::b;
  if (single) return SingleThreshold{static_cast<int>(leading)};
  SwitchList list;
  for (std::size_t i = 0; i + 1 < actions.size(); ++i) {
    if (actions[i] != actions[i + 1]) list.indices.push_back(static_cast<int>(i + 1));
  }
  return list;
}

std::vector<Action> slice_actions(const Policy& policy, const ValidatedModel& model, int h, int k) {
  std::vector<Action> out;
  for (int n = 1; n < model.buffer_size(); ++n) out.push_back(policy.action_of.at(model.state_index({n, h, k})));
  return out;
}

ThresholdDescriptor detect_threshold(const Policy& policy, const ValidatedModel& model, int h, int k) {
  return detect_threshold(slice_actions(policy, model, h, k));
}

Policy make_policy(const ValidatedModel& model, std::vector<Action> actions) {
  if (actions.size() != model.state_count()) {
    throw Error(ErrorCode::dimension_mismatch, "action vector does not cover the state space");
  }
  for (std::size_t s = 0; s < model.slice_count(); ++s) actions[s] = Action::idle;
  Policy policy;
  policy.action_of = std::move(actions);
  for (int h = 0; h < model.channel_count(); ++h) {
    for (int k = 0; k < model.size_count(); ++k) policy.slices.push_back(detect_threshold(policy, model, h, k));
  }
  return policy;
}

CheckResult check_increasing_difference(std::span<const double> first, std::span<const double> second, double tol) {
  if (first.size() != second.size()) throw Error(ErrorCode::dimension_mismatch, "difference check on unequal vectors");
  CheckResult r;
  for (std::size_t n = 1; n < first.size(); ++n) {
    const double change = (first[n] - second[n]) - (first[n - 1] - second[n - 1]);
    if (std::abs(change) <= tol) continue;
    const int sign = change > 0 ? 1 : -1;
    if (r.direction == 0) {
      r.direction = sign;
    } else if (sign != r.direction) {
      r.passed = false;
      r.violations.push_back(n);
    }
  }
  return r;
}

CheckResult check_concavity(std::span<const double> v, std::size_t first, std::size_t last, double tol) {
  if (last > v.size() || first > last) throw Error(ErrorCode::out_of_range, "concavity range outside the vector");
  CheckResult r;
  for (std::size_t n = first + 1; n + 1 < last; ++n) {
    if (v[n + 1] - v[n] > v[n] - v[n - 1] + tol) {
      r.passed = false;
      r.violations.push_back(n);
    }
  }
  return r;
}

CheckResult check_monotone_nondecreasing(std::span<const double> v, double tol) {
  CheckResult r;
  for (std::size_t n = 1; n < v.size(); ++n) {
    if (v[n] < v[n - 1] - tol) {
      r.passed = false;
      r.violations.push_back(n);
    }
  }
  return r;
}

double slope_bound_constant(const ModelParams& params, const MdpConstants& c, double v0, double v_arrival_a0,
                            double v_arrival_b0) {
  const double lambda = params.lambda;
  const double gamma = params.gamma;
  const double mu_a = params.action_a.mu;
  const double mu_b = params.action_b.mu;
  const double k1 = mu_b * c.delta_b * v0 - mu_b * lambda * c.delta_b * c.delta_bar * v_arrival_b0 + c.c_b;
  const double k2 = mu_a * c.delta_a * v0 - mu_a * lambda * c.delta_a * c.delta_bar * v_arrival_a0 + c.c_a;
  return std::max(k1 / ((mu_b + gamma) * c.delta_b), k2 / ((mu_a + gamma) * c.delta_a));
}

CheckResult check_slope(std::span<const double> v, double bound, double tol) {
  CheckResult r;
  for (std::size_t n = 1; n < v.size(); ++n) {
    if (v[n] - v[n - 1] > bound + tol) {
      r.passed = false;
      r.violations.push_back(n);
    }
  }
  return r;
}

StructureReport analyze_exponential(const ValidatedModel& model, const MdpSolution& mdp, const SolveReport& smdp) {
  const MdpConstants c = mdp_constants(model);
  const auto& v = mdp.values;
  StructureReport report;
  report.enforced = true;
  ReportBuilder add(report);

  add.descriptor(smdp.policy.slices.at(0));
  if (!std::holds_alternative<SingleThreshold>(mdp.policy.slices.at(0))) report.single_threshold = false;

  add.add("increasing_difference", "mdp V_D_a - V_D_b", check_increasing_difference(tail(v.V_D_a, 1), tail(v.V_D_b, 1)));
  add.add("increasing_difference", "smdp q_a - q_b",
          check_increasing_difference(tail(smdp.q_a, 1), tail(smdp.q_b, 1)));

  // V^A_0 starts a transmission and carries its reward; the arrival vectors
  // are compared with each other from n = 1 on.
  const std::vector<double> arrival_a = tail(v.V_A_a, 1);
  const std::vector<double> arrival_b = tail(v.V_A_b, 1);
  const std::vector<std::pair<std::string, const std::vector<double>*>> curves{
      {"mdp V", &v.V}, {"mdp V_A_a[1..B]", &arrival_a}, {"mdp V_A_b[1..B]", &arrival_b}, {"smdp V", &smdp.values}};
  for (const auto& [name, curve] : curves) {
    add.add("concave", name, check_concavity(*curve, 0, curve->size()));
    add.add("nondecreasing", name, check_monotone_nondecreasing(*curve));
  }

  const double K = slope_bound_constant(model.params(), c, v.V[0], v.V_A_a[0], v.V_A_b[0]);
  report.slope_bound_K = K;
  for (const auto& [name, curve] : curves) add.add("slope_bounded", name, check_slope(*curve, K));
  return report;
}

StructureReport analyze_solution(const ValidatedModel& model, const SolveReport& smdp) {
  StructureReport report;
  report.enforced = exponential_single_slice(model);
  ReportBuilder add(report);
  for (std::size_t s = 0; s < model.slice_count(); ++s) {
    add.descriptor(smdp.policy.slices.at(s));
    const std::string name = slice_name(model, s);
    const auto values = slice_of(smdp.values, model, s);
    const auto qa = slice_of(smdp.q_a, model, s);
    const auto qb = slice_of(smdp.q_b, model, s);
    add.add("increasing_difference", "q_a - q_b" + name, check_increasing_difference(tail(qa, 1), tail(qb, 1)));
    add.add("concave", "V" + name, check_concavity(values, 0, values.size()));
    add.add("nondecreasing", "V" + name, check_monotone_nondecreasing(values));
  }
  return report;
}

StructureReport analyze_values(const ValidatedModel& model, std::span<const double> values,
                               std::span<const double> q_a, std::span<const double> q_b) {
  const auto B = static_cast<std::size_t>(model.buffer_size());
  if (model.slice_count() != 1) throw Error(ErrorCode::dimension_mismatch, "external values are checked on a single slice");
  if (values.size() != B || q_a.size() != B || q_b.size() != B) {
    throw Error(ErrorCode::dimension_mismatch, "external value vectors must have B entries");
  }
  StructureReport report;
  report.enforced = exponential_single_slice(model);
  ReportBuilder add(report);

  std::vector<Action> actions;
  for (std::size_t n = 1; n < B; ++n) actions.push_back(q_a[n] >= q_b[n] ? Action::a : Action::b);
  add.descriptor(detect_threshold(actions));
  add.add("increasing_difference", "q_a - q_b", check_increasing_difference(q_a.subspan(1), q_b.subspan(1)));
  add.add("concave", "V", check_concavity(values, 0, B));
  add.add("nondecreasing", "V", check_monotone_nondecreasing(values));
  if (report.enforced) {
    // At a fixed point V_0 = lambda / (gamma + lambda) V^A_0 for both actions.
    const MdpConstants c = mdp_constants(model);
    const double arrival0 = values[0] / (model.lambda() * c.delta_bar);
    const double K = slope_bound_constant(model.params(), c, values[0], arrival0, arrival0);
    report.slope_bound_K = K;
    add.add("slope_bounded", "V", check_slope(values, K));
  }
  return report;
}

}  // namespace smdp
