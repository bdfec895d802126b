#include "smdp/commands.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "smdp/analysis.hpp"
#include "smdp/evaluation.hpp"
#include "smdp/mdp.hpp"
#include "smdp/simulation.hpp"

namespace smdp {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_header(const std::string& hash) { return "# config_hash=" + hash + "\n"; }

std::string slice_label(const ValidatedModel& model, int h, int k) {
  std::string label;
  if (model.channel()) label += model.channel()->states[static_cast<std::size_t>(h)];
  if (model.sizes()) label += (label.empty() ? "" : "/") + std::string("k=") + std::to_string(model.sizes()->sizes[static_cast<std::size_t>(k)]);
  return label.empty() ? "all" : label;
}

json descriptor_json(const ThresholdDescriptor& d) {
  if (const auto* t = std::get_if<SingleThreshold>(&d)) return {{"kind", "single"}, {"threshold", t->t}};
  return {{"kind", "switches"}, {"switches", std::get<SwitchList>(d).indices}};
}

json check_json(const PropertyCheck& c) {
  json j{{"property", c.property}, {"subject", c.subject}, {"passed", c.result.passed},
         {"violations", c.result.violations}};
  if (c.property == "increasing_difference") j["direction"] = c.result.direction;
  return j;
}

json structure_json(const StructureReport& r) {
  json slices = json::array();
  for (const auto& d : r.slices) slices.push_back(descriptor_json(d));
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(check_json(c));
  json j{{"slices", slices},
         {"enforced", r.enforced},
         {"all_passed", r.all_passed()},
         {"properties",
          {{"single_threshold", r.single_threshold},
           {"increasing_difference", r.increasing_difference},
           {"concave", r.concave},
           {"nondecreasing", r.nondecreasing},
           {"slope_bounded", r.slope_bounded}}},
         {"checks", checks}};
  j["slope_bound_K"] = r.slope_bound_K ? json(*r.slope_bound_K) : json(nullptr);
  return j;
}

CommandResult start(const std::string& command, const Config& config) {
  CommandResult out;
  out.command = command;
  out.config_hash = config_hash(config);
  return out;
}

IterationOptions iteration_options(const Config& config) {
  IterationOptions o;
  o.tol = config.solver.tol;
  o.max_iter = config.solver.max_iter;
  return o;
}

SimConfig sim_config(const Config& config, const ServicePair& service) {
  SimConfig s;
  s.params = config.params;
  s.service = service;
  s.horizon = config.simulation.horizon;
  s.replications = config.simulation.replications;
  s.base_seed = config.simulation.seed;
  return s;
}

json sim_json(const SimResult& r) {
  std::vector<double> reps;
  for (const auto& x : r.replications) reps.push_back(x.throughput);
  return {{"threshold", r.threshold},
          {"mean", r.mean},
          {"half_width", r.half_width},
          {"replications", reps},
          {"counts",
           {{"arrivals", r.totals.arrivals},
            {"accepted", r.totals.accepted},
            {"blocked", r.totals.blocked},
            {"success", r.totals.success},
            {"fail", r.totals.fail},
            {"in_system", r.totals.in_system}}}};
}

}  // namespace

CommandResult run_solve(const Config& config, const CommandOptions&) {
  CommandResult out = start("solve", config);
  const ValidatedModel model = config.model();
  const SolveReport report = solve(config.model_case, model, iteration_options(config));
  const std::size_t S = model.slice_count();

  std::ostringstream csv;
  csv << csv_header(out.config_hash) << "slice,n,value,q_a,q_b,action,at_threshold\n";
  json slices = json::array();
  for (int h = 0; h < model.channel_count(); ++h) {
    for (int k = 0; k < model.size_count(); ++k) {
      const std::size_t s = static_cast<std::size_t>(h * model.size_count() + k);
      const std::string label = slice_label(model, h, k);
      const ThresholdDescriptor& d = report.policy.slices[s];
      const int t = std::holds_alternative<SingleThreshold>(d) ? std::get<SingleThreshold>(d).t : -1;
      std::vector<double> v, qa, qb;
      std::string actions;
      for (int n = 0; n < model.buffer_size(); ++n) {
        const std::size_t i = static_cast<std::size_t>(n) * S + s;
        v.push_back(report.values[i]);
        qa.push_back(report.q_a[i]);
        qb.push_back(report.q_b[i]);
        if (n > 0) actions += to_char(report.policy.action_of[i]);
        csv << label << ',' << n << ',' << fmt(report.values[i]) << ',' << fmt(report.q_a[i]) << ','
            << fmt(report.q_b[i]) << ',' << to_char(report.policy.action_of[i]) << ',' << (n == t ? 1 : 0) << '\n';
      }
      slices.push_back({{"label", label}, {"h", h}, {"k", k}, {"values", v}, {"q_a", qa}, {"q_b", qb},
                        {"actions", actions}, {"descriptor", descriptor_json(d)}});
      if (t >= 0) out.thresholds.emplace_back(label, t);
    }
  }
  out.values = report.values;
  json doc{{"command", "solve"},
           {"config_hash", out.config_hash},
           {"case", to_string(config.model_case)},
           {"buffer_size", model.buffer_size()},
           {"gamma", model.gamma()},
           {"iterations", report.iterations},
           {"final_residual", report.final_residual},
           {"contraction_estimate", report.contraction_estimate},
           {"contraction_bound", contraction_bound(model)},
           {"slices", slices}};
  out.json = doc.dump(2);
  out.csv = csv.str();
  return out;
}

CommandResult run_sweep(const Config& config, const CommandOptions& options) {
  CommandResult out = start("sweep", config);
  config.model();
  std::ostringstream csv;
  csv << csv_header(out.config_hash) << "distribution,threshold,throughput_analytic,throughput_alt,agreement_gap";
  if (options.simulate) csv << ",sim_mean,sim_half_width,sim_covers";
  csv << '\n';

  json curves = json::array();
  for (ServiceFamily family : config.sweep.families) {
    const ServicePair service = service_pair(family, config.params, config.sweep.support);
    const ThresholdSweep sweep = sweep_thresholds(config.params, service, options.threads);
    std::vector<SimResult> sims;
    if (options.simulate) {
      std::vector<int> all;
      for (int t = 0; t < config.params.buffer_size; ++t) all.push_back(t);
      sims = simulate_sweep(sim_config(config, service), all, options.threads);
    }
    json points = json::array();
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
      const auto& p = sweep.points[i];
      csv << to_string(family) << ',' << p.threshold << ',' << fmt(p.throughput) << ',' << fmt(p.alt_throughput) << ','
          << fmt(p.agreement_gap);
      json jp{{"threshold", p.threshold},
              {"throughput", p.throughput},
              {"throughput_alt", p.alt_throughput},
              {"agreement_gap", p.agreement_gap},
              {"stationary_residual", p.stationary_residual}};
      if (options.simulate) {
        csv << ',' << fmt(sims[i].mean) << ',' << fmt(sims[i].half_width) << ',' << (sims[i].covers(p.throughput) ? 1 : 0);
        jp["simulation"] = sim_json(sims[i]);
      }
      csv << '\n';
      points.push_back(jp);
    }
    curves.push_back({{"distribution", to_string(family)},
                      {"best_threshold", sweep.best_threshold},
                      {"best_throughput", sweep.best_throughput},
                      {"unimodal", sweep.unimodal},
                      {"flat", sweep.flat},
                      {"points", points}});
    out.thresholds.emplace_back(to_string(family), sweep.best_threshold);
  }
  json doc{{"command", "sweep"},
           {"config_hash", out.config_hash},
           {"uniform_support", {config.sweep.support.lower, config.sweep.support.upper}},
           {"curves", curves}};
  if (options.simulate) doc["seed"] = config.simulation.seed;
  out.json = doc.dump(2);
  out.csv = csv.str();
  return out;
}

CommandResult run_simulate(const Config& config, const CommandOptions& options) {
  CommandResult out = start("simulate", config);
  config.model();
  std::ostringstream csv;
  csv << csv_header(out.config_hash)
      << "distribution,threshold,sim_mean,sim_half_width,analytic,covers,arrivals,accepted,blocked,success,fail,in_system\n";
  json runs = json::array();
  const std::vector<int> thresholds = config.simulation_thresholds();
  for (ServiceFamily family : config.sweep.families) {
    const ServicePair service = service_pair(family, config.params, config.sweep.support);
    const auto sims = simulate_sweep(sim_config(config, service), thresholds, options.threads);
    for (const auto& r : sims) {
      const double analytic = evaluate_threshold(r.threshold, config.params, service).throughput;
      const auto& c = r.totals;
      csv << to_string(family) << ',' << r.threshold << ',' << fmt(r.mean) << ',' << fmt(r.half_width) << ','
          << fmt(analytic) << ',' << (r.covers(analytic) ? 1 : 0) << ',' << c.arrivals << ',' << c.accepted << ','
          << c.blocked << ',' << c.success << ',' << c.fail << ',' << c.in_system << '\n';
      json j = sim_json(r);
      j["distribution"] = to_string(family);
      j["analytic"] = analytic;
      j["covers"] = r.covers(analytic);
      runs.push_back(j);
    }
  }
  json doc{{"command", "simulate"},
           {"config_hash", out.config_hash},
           {"seed", config.simulation.seed},
           {"horizon", config.simulation.horizon},
           {"replications", config.simulation.replications},
           {"runs", runs}};
  out.json = doc.dump(2);
  out.csv = csv.str();
  return out;
}

CommandResult run_check(const Config& config, const CommandOptions&) {
  CommandResult out = start("check", config);
  const ValidatedModel model = config.model();
  json doc{{"command", "check"}, {"config_hash", out.config_hash}};
  StructureReport report;

  const bool exponential = model.slice_count() == 1 &&
                           std::holds_alternative<Exponential>(model.service(0, 0, Action::a)) &&
                           std::holds_alternative<Exponential>(model.service(0, 0, Action::b));
  if (config.check_values) {
    doc["source"] = "check_values";
    report = analyze_values(model, config.check_values->values, config.check_values->q_a, config.check_values->q_b);
    out.values = config.check_values->values;
  } else if (exponential) {
    doc["source"] = "solved";
    const SolveReport smdp = solve(ModelCase::exponential, model, iteration_options(config));
    const MdpSolution mdp = solve_mdp(model, config.solver.tol, config.solver.max_iter);
    report = analyze_exponential(model, mdp, smdp);
    const EquivalenceReport eq = check_smdp_equivalence(mdp, smdp.values, smdp.policy.action_of);
    doc["equivalence"] = {{"sup_diff", eq.sup_diff}, {"policies_match", eq.policies_match}};
    out.values = smdp.values;
  } else {
    doc["source"] = "solved";
    const SolveReport smdp = solve(config.model_case, model, iteration_options(config));
    report = analyze_solution(model, smdp);
    out.values = smdp.values;
  }
  for (std::size_t s = 0; s < report.slices.size(); ++s) {
    if (const auto* t = std::get_if<SingleThreshold>(&report.slices[s])) {
      const int K = model.size_count();
      out.thresholds.emplace_back(slice_label(model, static_cast<int>(s) / K, static_cast<int>(s) % K), t->t);
    }
  }
  doc["structure"] = structure_json(report);
  if (report.enforced && !report.all_passed()) out.status = ErrorCode::check_failed;
  doc["status"] = out.status == ErrorCode::ok ? "passed" : "failed";
  out.json = doc.dump(2);

  std::ostringstream csv;
  csv << csv_header(out.config_hash) << "property,subject,passed,violations\n";
  for (const auto& c : report.checks) {
    csv << c.property << ',' << c.subject << ',' << (c.result.passed ? 1 : 0) << ',';
    for (std::size_t i = 0; i < c.result.violations.size(); ++i) csv << (i ? ";" : "") << c.result.violations[i];
    csv << '\n';
  }
  out.csv = csv.str();
  return out;
}

CommandResult run_command(const std::string& command, const Config& config, const CommandOptions& options) {
  if (command == "solve") return run_solve(config, options);
  if (command == "sweep") return run_sweep(config, options);
  if (command == "simulate") return run_simulate(config, options);
  if (command == "check") return run_check(config, options);
  throw Error(ErrorCode::invalid_argument, "unknown command '" + command + "'");
}

}  // namespace smdp
