#include "smdp/smdp.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "smdp/commands.hpp"
#include "smdp/config.hpp"
#include "smdp/error.hpp"

struct smdp_config {
  static constexpr std::uint32_t kMagic = 0x534d4346;  // "SMCF"
  std::uint32_t magic = kMagic;
  smdp::Config config;
};

struct smdp_result {
  static constexpr std::uint32_t kMagic = 0x534d5253;  // "SMRS"
  std::uint32_t magic = kMagic;
  smdp::CommandResult result;
};

namespace {

thread_local std::string last_error;

int fail(smdp::ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<int>(code);
}

template <class F>
int guard(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const smdp::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return fail(smdp::ErrorCode::internal, "out of memory");
  } catch (const std::exception& e) {
    return fail(smdp::ErrorCode::internal, e.what());
  } catch (...) {
    return fail(smdp::ErrorCode::internal, "unknown exception");
  }
}

template <class T>
T& checked(T* handle, const char* what) {
  if (handle == nullptr) throw smdp::Error(smdp::ErrorCode::null_pointer, std::string(what) + " is null");
  if (handle->magic != T::kMagic) throw smdp::Error(smdp::ErrorCode::invalid_argument, std::string(what) + " is not a valid handle");
  return *handle;
}

int write_text(const std::string& text, char* buf, size_t* len) {
  if (len == nullptr) return fail(smdp::ErrorCode::null_pointer, "length pointer is null");
  const size_t need = text.size() + 1;
  const size_t have = *len;
  *len = need;
  if (buf == nullptr || have < need) {
    if (buf != nullptr && have > 0) buf[0] = '\0';
    return fail(smdp::ErrorCode::insufficient_buffer, "output buffer needs " + std::to_string(need) + " bytes");
  }
  std::memcpy(buf, text.c_str(), need);
  return 0;
}

}  // namespace

extern "C" {

const char* smdp_version(void) { return SMDP_VERSION_STRING; }

const char* smdp_error_description(int code) { return smdp::to_string(static_cast<smdp::ErrorCode>(code)); }

const char* smdp_last_error(void) { return last_error.c_str(); }

int smdp_config_parse(smdp_config_t** out, const char* json, size_t len) {
  return guard([&] {
    if (out == nullptr || json == nullptr) throw smdp::Error(smdp::ErrorCode::null_pointer, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<smdp_config>();
    handle->config = smdp::parse_config(std::string(json, len));
    *out = handle.release();
    return 0;
  });
}

int smdp_config_load(smdp_config_t** out, const char* path) {
  return guard([&] {
    if (out == nullptr || path == nullptr) throw smdp::Error(smdp::ErrorCode::null_pointer, "null argument");
    *out = nullptr;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw smdp::Error(smdp::ErrorCode::invalid_argument, std::string("cannot open config file ") + path);
    std::ostringstream text;
    text << in.rdbuf();
    auto handle = std::make_unique<smdp_config>();
    handle->config = smdp::parse_config(text.str());
    *out = handle.release();
    return 0;
  });
}

int smdp_config_destroy(smdp_config_t* config) {
  return guard([&] {
    if (config == nullptr) return 0;
    checked(config, "config");
    config->magic = 0;
    delete config;
    return 0;
  });
}

int smdp_config_set_gamma(smdp_config_t* config, double gamma) {
  return guard([&] {
    auto& c = checked(config, "config").config;
    smdp::Config updated = c;
    updated.params.gamma = gamma;
    updated.model();
    c = std::move(updated);
    return 0;
  });
}

int smdp_config_set_tol(smdp_config_t* config, double tol) {
  return guard([&] {
    auto& c = checked(config, "config").config;
    if (!(tol > 0.0)) throw smdp::Error(smdp::ErrorCode::invalid_argument, "tolerance must be positive");
    c.solver.tol = tol;
    return 0;
  });
}

int smdp_config_set_seed(smdp_config_t* config, uint64_t seed) {
  return guard([&] {
    checked(config, "config").config.simulation.seed = seed;
    return 0;
  });
}

int smdp_config_hash(const smdp_config_t* config, char* buf, size_t* len) {
  return guard([&] { return write_text(smdp::config_hash(checked(config, "config").config), buf, len); });
}

int smdp_config_canonical_json(const smdp_config_t* config, char* buf, size_t* len) {
  return guard([&] { return write_text(smdp::canonical_json(checked(config, "config").config), buf, len); });
}

int smdp_run(smdp_result_t** out, const smdp_config_t* config, const char* command, const smdp_run_options_t* options) {
  return guard([&] {
    if (out == nullptr || command == nullptr) throw smdp::Error(smdp::ErrorCode::null_pointer, "null argument");
    *out = nullptr;
    const auto& c = checked(config, "config").config;
    smdp::CommandOptions opts;
    if (options != nullptr) {
      opts.threads = options->threads == 0 ? 1 : options->threads;
      opts.simulate = options->simulate != 0;
    }
    auto handle = std::make_unique<smdp_result>();
    handle->result = smdp::run_command(command, c, opts);
    *out = handle.release();
    return 0;
  });
}

int smdp_result_destroy(smdp_result_t* result) {
  return guard([&] {
    if (result == nullptr) return 0;
    checked(result, "result");
    result->magic = 0;
    delete result;
    return 0;
  });
}

int smdp_result_status(const smdp_result_t* result, int* status) {
  return guard([&] {
    const auto& r = checked(result, "result").result;
    if (status == nullptr) throw smdp::Error(smdp::ErrorCode::null_pointer, "status pointer is null");
    *status = static_cast<int>(r.status);
    return 0;
  });
}

int smdp_result_json(const smdp_result_t* result, char* buf, size_t* len) {
  return guard([&] { return write_text(checked(result, "result").result.json, buf, len); });
}

int smdp_result_csv(const smdp_result_t* result, char* buf, size_t* len) {
  return guard([&] { return write_text(checked(result, "result").result.csv, buf, len); });
}

int smdp_result_hash(const smdp_result_t* result, char* buf, size_t* len) {
  return guard([&] { return write_text(checked(result, "result").result.config_hash, buf, len); });
}

int smdp_result_values(const smdp_result_t* result, double* values, size_t* count) {
  return guard([&] {
    const auto& v = checked(result, "result").result.values;
    if (count == nullptr) throw smdp::Error(smdp::ErrorCode::null_pointer, "count pointer is null");
    const size_t have = *count;
    *count = v.size();
    if (values == nullptr || have < v.size()) {
      return fail(smdp::ErrorCode::insufficient_buffer, "value buffer needs " + std::to_string(v.size()) + " entries");
    }
    std::copy(v.begin(), v.end(), values);
    return 0;
  });
}

int smdp_result_threshold_count(const smdp_result_t* result, size_t* count) {
  return guard([&] {
    const auto& r = checked(result, "result").result;
    if (count == nullptr) throw smdp::Error(smdp::ErrorCode::null_pointer, "count pointer is null");
    *count = r.thresholds.size();
    return 0;
  });
}

int smdp_result_threshold(const smdp_result_t* result, size_t index, char* label, size_t* label_len, int* threshold) {
  return guard([&] {
    const auto& r = checked(result, "result").result;
    if (index >= r.thresholds.size()) throw smdp::Error(smdp::ErrorCode::out_of_range, "threshold index out of range");
    if (threshold != nullptr) *threshold = r.thresholds[index].second;
    if (label_len == nullptr) return 0;
    return write_text(r.thresholds[index].first, label, label_len);
  });
}

}  // extern "C"
