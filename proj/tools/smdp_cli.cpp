// Command-line driver over the C API.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smdp/smdp.h"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kNoConvergence = 2, kConfigError = 3, kFailure = 4 };

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<double> tol;
  std::optional<double> gamma;
  std::optional<std::uint64_t> seed;
  bool simulate = false;
  std::optional<unsigned> threads;
};

int exit_code(int rc) {
  switch (rc) {
    case SMDP_ERROR_NO_CONVERGENCE: return kNoConvergence;
    case SMDP_ERROR_CHECK_FAILED: return kCheckFailed;
    case SMDP_ERROR_SCHEMA:
    case SMDP_ERROR_INVALID_RATES:
    case SMDP_ERROR_NON_STOCHASTIC_ROW:
    case SMDP_ERROR_BUFFER_TOO_SMALL:
    case SMDP_ERROR_NON_POSITIVE_RATE:
    case SMDP_ERROR_INVALID_SUPPORT:
    case SMDP_ERROR_INVALID_PROBABILITY:
    case SMDP_ERROR_MISSING_SERVICE_ENTRY:
    case SMDP_ERROR_DIMENSION_MISMATCH: return kConfigError;
    default: return kFailure;
  }
}

int report(int rc, const std::string& what) {
  std::cerr << "smdp: " << what << ": " << smdp_error_description(rc) << ": " << smdp_last_error() << '\n';
  return exit_code(rc);
}

template <class F>
std::string read_text(F&& getter) {
  size_t len = 0;
  getter(nullptr, &len);
  std::string text(len, '\0');
  if (getter(text.data(), &len) != SMDP_ERROR_OK) return {};
  text.resize(len - 1);
  return text;
}

unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("SMDP_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "smdp: ignoring invalid SMDP_THREADS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run(const std::string& command, const Options& opt) {
  const auto started = std::chrono::steady_clock::now();

  smdp_config_t* config = nullptr;
  if (int rc = smdp_config_load(&config, opt.config.c_str()); rc != SMDP_ERROR_OK) return report(rc, "loading config");
  std::unique_ptr<smdp_config_t, int (*)(smdp_config_t*)> config_guard(config, smdp_config_destroy);
  if (opt.gamma) {
    if (int rc = smdp_config_set_gamma(config, *opt.gamma); rc != SMDP_ERROR_OK) return report(rc, "--gamma");
  }
  if (opt.tol) {
    if (int rc = smdp_config_set_tol(config, *opt.tol); rc != SMDP_ERROR_OK) return report(rc, "--tol");
  }
  if (opt.seed) {
    if (int rc = smdp_config_set_seed(config, *opt.seed); rc != SMDP_ERROR_OK) return report(rc, "--seed");
  }

  smdp_run_options_t run_options{resolve_threads(opt.threads), opt.simulate ? 1 : 0};
  smdp_result_t* result = nullptr;
  if (int rc = smdp_run(&result, config, command.c_str(), &run_options); rc != SMDP_ERROR_OK) {
    return report(rc, command);
  }
  std::unique_ptr<smdp_result_t, int (*)(smdp_result_t*)> result_guard(result, smdp_result_destroy);

  int status = SMDP_ERROR_OK;
  smdp_result_status(result, &status);
  const std::string hash = read_text([&](char* b, size_t* l) { return smdp_result_hash(result, b, l); });
  const std::string json = read_text([&](char* b, size_t* l) { return smdp_result_json(result, b, l); });
  const std::string csv = read_text([&](char* b, size_t* l) { return smdp_result_csv(result, b, l); });

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) {
    std::cerr << "smdp: cannot create output directory " << opt.out << ": " << ec.message() << '\n';
    return kFailure;
  }
  const fs::path json_path = fs::path(opt.out) / (command + ".json");
  const fs::path csv_path = fs::path(opt.out) / (command + ".csv");
  const fs::path manifest_path = fs::path(opt.out) / "manifest.json";
  for (const auto& [path, text] : {std::pair{json_path, json + "\n"}, std::pair{csv_path, csv}}) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) {
      std::cerr << "smdp: cannot write " << path << '\n';
      return kFailure;
    }
  }

  size_t count = 0;
  smdp_result_threshold_count(result, &count);
  nlohmann::json thresholds = nlohmann::json::object();
  for (size_t i = 0; i < count; ++i) {
    int t = 0;
    const std::string label = read_text([&](char* b, size_t* l) { return smdp_result_threshold(result, i, b, l, &t); });
    thresholds[label] = t;
    std::cout << command << ": " << label << " threshold " << t << '\n';
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const nlohmann::json manifest{{"command", command},
                                {"config_path", opt.config},
                                {"config_hash", hash},
                                {"outputs", {json_path.string(), csv_path.string()}},
                                {"thresholds", thresholds},
                                {"status", smdp_error_description(status)},
                                {"tool_version", smdp_version()},
                                {"duration_seconds", seconds}};
  std::ofstream(manifest_path, std::ios::binary) << manifest.dump(2) << '\n';

  if (status != SMDP_ERROR_OK) {
    std::cerr << "smdp: " << command << ": " << smdp_error_description(status) << '\n';
    return exit_code(status);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold-policy SMDP solver, evaluator and simulator (library " + std::string(smdp_version()) + ")"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(smdp_version()));
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON model configuration (schema 1)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory for <command>.json, <command>.csv and manifest.json")
        ->capture_default_str();
    sub->add_option("--tol", opt.tol, "Value-iteration tolerance (overrides solver.tol)");
    sub->add_option("--gamma", opt.gamma, "Discount rate (overrides gamma)");
    sub->add_option("--seed", opt.seed, "Simulation base seed (overrides simulation.seed)");
    sub->add_option("--threads", opt.threads, "Worker threads (fallback: SMDP_THREADS, then all cores)");
  };

  auto* solve = app.add_subcommand("solve", "Solve the discounted SMDP by value iteration");
  add_common(solve);
  solve->footer("CSV columns: slice,n,value,q_a,q_b,action,at_threshold");

  auto* sweep = app.add_subcommand("sweep", "Long-run throughput of every threshold policy");
  add_common(sweep);
  sweep->add_flag("--simulate", opt.simulate, "Add simulated throughput and 95% CI per threshold");
  sweep->footer(
      "CSV columns: distribution,threshold,throughput_analytic,throughput_alt,agreement_gap "
      "[,sim_mean,sim_half_width,sim_covers with --simulate]");

  auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation of threshold policies");
  add_common(simulate);
  simulate->footer(
      "CSV columns: distribution,threshold,sim_mean,sim_half_width,analytic,covers,arrivals,accepted,blocked,success,"
      "fail,in_system");

  auto* check = app.add_subcommand("check", "Structural checks of the optimal policy and value function");
  add_common(check);
  check->footer("CSV columns: property,subject,passed,violations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; usage errors count as configuration errors.
    return app.exit(e) == 0 ? 0 : kConfigError;
  }
  return run(app.get_subcommands().front()->get_name(), opt);
}
