#include "smdp/config.hpp"

#include <cmath>
#include <cstdio>
#include <iterator>
#include <map>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "smdp/error.hpp"

namespace smdp {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Source positions of every key and value, keyed by JSON pointer. Collected
// with a SAX pass over an iterator that reports how far the lexer has read.

class CountingIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator() = default;
  CountingIterator(const char* base, const char* p, std::size_t* read) : base_(base), p_(p), read_(read) {}

  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    ++p_;
    if (read_ != nullptr) *read_ = static_cast<std::size_t>(p_ - base_);
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return p_ == o.p_; }

 private:
  const char* base_ = nullptr;
  const char* p_ = nullptr;
  std::size_t* read_ = nullptr;
};

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

class PositionRecorder : public json::json_sax_t {
 public:
  PositionRecorder(const char* text, const std::size_t* read) : text_(text), read_(read) {}

  std::map<std::string, std::size_t> offsets;

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override { return open(false); }
  bool start_array(std::size_t) override { return open(true); }
  bool end_object() override { return close(); }
  bool end_array() override { return close(); }
  bool key(string_t& k) override {
    frames_.back().key = k;
    offsets.emplace(child(), key_start());
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  struct Frame {
    std::string pointer;
    bool array = false;
    std::size_t index = 0;
    std::string key;
  };

  std::string child() const {
    if (frames_.empty()) return "";
    const Frame& f = frames_.back();
    return f.pointer + "/" + (f.array ? std::to_string(f.index) : escape_token(f.key));
  }
  void record(const std::string& ptr) { offsets.emplace(ptr, *read_); }
  void advance() {
    if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
  }
  bool value() {
    record(child());
    advance();
    return true;
  }
  bool open(bool array) {
    const std::string ptr = child();
    record(ptr);
    frames_.push_back({ptr, array, 0, {}});
    return true;
  }
  bool close() {
    frames_.pop_back();
    advance();
    return true;
  }

  // Offset just past the opening quote of the key the lexer has consumed.
  std::size_t key_start() const {
    std::size_t i = *read_;
    while (i > 0 && text_[i - 1] != '"') --i;
    if (i > 0) --i;  // closing quote
    while (i > 0 && !(text_[i - 1] == '"' && (i < 2 || text_[i - 2] != '\\'))) --i;
    return i;
  }

  const char* text_;
  const std::size_t* read_;
  std::vector<Frame> frames_;
};

class Positions {
 public:
  explicit Positions(const std::string& text) : text_(text) {
    std::size_t read = 0;
    const char* base = text.data();
    PositionRecorder recorder(base, &read);
    json::sax_parse(CountingIterator(base, base, &read), CountingIterator(base, base + text.size(), nullptr),
                    &recorder);
    offsets_ = std::move(recorder.offsets);
  }

  /// "line L, column C" of the pointer or its nearest recorded ancestor.
  std::string where(std::string ptr) const {
    for (;;) {
      const auto it = offsets_.find(ptr);
      if (it != offsets_.end()) return line_col(it->second);
      if (ptr.empty()) return "line 1, column 1";
      ptr.erase(ptr.rfind('/'));
    }
  }

 private:
  std::string line_col(std::size_t offset) const {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col > 1 ? col - 1 : 1);
  }

  const std::string& text_;
  std::map<std::string, std::size_t> offsets_;
};

// ---------------------------------------------------------------------------

class Reader {
 public:
  explicit Reader(const Positions& positions) : positions_(positions) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& message) const {
    throw Error(ErrorCode::schema,
                "config " + (ptr.empty() ? std::string("/") : ptr) + " (" + positions_.where(ptr) + "): " + message);
  }

  void object(const json& node, const std::string& ptr, std::initializer_list<const char*> allowed) const {
    if (!node.is_object()) fail(ptr, "expected an object");
    for (const auto& [key, value] : node.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) fail(ptr + "/" + escape_token(key), "unknown field '" + key + "'");
    }
  }

  const json* find(const json& node, const char* key) const {
    const auto it = node.find(key);
    return it == node.end() ? nullptr : &*it;
  }

  const json& require(const json& node, const std::string& ptr, const char* key) const {
    const json* v = find(node, key);
    if (v == nullptr) fail(ptr, std::string("missing required field '") + key + "'");
    return *v;
  }

  double number(const json& v, const std::string& ptr) const {
    if (!v.is_number()) fail(ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(ptr, "expected a finite number");
    return x;
  }

  long integer(const json& v, const std::string& ptr) const {
    if (!v.is_number_integer()) fail(ptr, "expected an integer");
    return v.get<long>();
  }

  std::uint64_t unsigned_integer(const json& v, const std::string& ptr) const {
    if (!v.is_number_unsigned()) fail(ptr, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const json& v, const std::string& ptr) const {
    if (!v.is_boolean()) fail(ptr, "expected true or false");
    return v.get<bool>();
  }

  std::string text(const json& v, const std::string& ptr) const {
    if (!v.is_string()) fail(ptr, "expected a string");
    return v.get<std::string>();
  }

  const json& array(const json& v, const std::string& ptr) const {
    if (!v.is_array()) fail(ptr, "expected an array");
    return v;
  }

  std::vector<double> numbers(const json& v, const std::string& ptr) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(v, ptr).size(); ++i) out.push_back(number(v[i], ptr + "/" + std::to_string(i)));
    return out;
  }

  Matrix matrix(const json& v, const std::string& ptr) const {
    const std::size_t rows = array(v, ptr).size();
    if (rows == 0) fail(ptr, "expected a nonempty matrix");
    std::vector<std::vector<double>> data;
    for (std::size_t i = 0; i < rows; ++i) {
      data.push_back(numbers(v[i], ptr + "/" + std::to_string(i)));
      if (data.back().size() != data.front().size()) fail(ptr + "/" + std::to_string(i), "ragged matrix row");
    }
    Matrix m(rows, data.front().size());
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < data[i].size(); ++j) m(i, j) = data[i][j];
    }
    return m;
  }

  ServiceDistribution distribution(const json& v, const std::string& ptr) const {
    if (!v.is_object()) fail(ptr, "expected a service distribution object");
    const std::string type = text(require(v, ptr, "type"), ptr + "/type");
    if (type == "exponential") {
      object(v, ptr, {"type", "mu"});
      return Exponential{number(require(v, ptr, "mu"), ptr + "/mu")};
    }
    if (type == "deterministic") {
      object(v, ptr, {"type", "tau"});
      return Deterministic{number(require(v, ptr, "tau"), ptr + "/tau")};
    }
    if (type == "uniform") {
      object(v, ptr, {"type", "alpha", "beta"});
      return Uniform{number(require(v, ptr, "alpha"), ptr + "/alpha"), number(require(v, ptr, "beta"), ptr + "/beta")};
    }
    fail(ptr + "/type", "unknown distribution type '" + type + "'");
  }

  std::array<double, 2> pair(const json& v, const std::string& ptr) const {
    const auto x = numbers(v, ptr);
    if (x.size() != 2) fail(ptr, "expected [a, b]");
    return {x[0], x[1]};
  }

  std::vector<ServicePair> service_pairs(const json& v, const std::string& ptr) const {
    std::vector<ServicePair> out;
    for (std::size_t i = 0; i < array(v, ptr).size(); ++i) {
      const std::string p = ptr + "/" + std::to_string(i);
      if (!array(v[i], p).is_array() || v[i].size() != 2) fail(p, "expected [service_a, service_b]");
      out.push_back({distribution(v[i][0], p + "/0"), distribution(v[i][1], p + "/1")});
    }
    return out;
  }

 private:
  const Positions& positions_;
};

Action parse_action(const Reader& r, const json& v, const std::string& ptr) {
  const std::string s = r.text(v, ptr);
  if (s == "a") return Action::a;
  if (s == "b") return Action::b;
  r.fail(ptr, "action must be \"a\" or \"b\"");
}

ActionParams parse_action_params(const Reader& r, const json& v, const std::string& ptr, bool loss_optional) {
  r.object(v, ptr, {"mu", "p"});
  ActionParams a;
  a.mu = r.number(r.require(v, ptr, "mu"), ptr + "/mu");
  if (const json* p = r.find(v, "p")) {
    a.loss = r.number(*p, ptr + "/p");
  } else if (!loss_optional) {
    r.fail(ptr, "missing required field 'p'");
  }
  return a;
}

// Validation errors name the offending section of the document.
template <class F>
auto located(const Reader& r, const std::string& ptr, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with("config /")) throw;
    r.fail(ptr, e.what());
  }
}

json to_json(const ServiceDistribution& dist) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return {{"type", "exponential"}, {"mu", d.mu}};
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          return {{"type", "deterministic"}, {"tau", d.tau}};
        } else {
          return {{"type", "uniform"}, {"alpha", d.alpha}, {"beta", d.beta}};
        }
      },
      dist);
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return out;
}

json to_json(const std::vector<ServicePair>& pairs) {
  json out = json::array();
  for (const auto& p : pairs) out.push_back({to_json(p[0]), to_json(p[1])});
  return out;
}

}  // namespace

ValidatedModel Config::model() const {
  return ValidatedModel::validate(params, channel, sizes, service_table, validation);
}

std::vector<int> Config::simulation_thresholds() const {
  if (!simulation.thresholds.empty()) return simulation.thresholds;
  const int B = params.buffer_size;
  return {0, (B - 1) / 2, B - 1};
}

Config parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, std::string("config is not valid JSON: ") + e.what());
  }
  const Positions positions(text);
  const Reader r(positions);

  r.object(doc, "",
           {"schema", "case", "lambda", "buffer_size", "gamma", "action_a", "action_b", "reward_mode", "channel", "sizes",
            "service_table", "sweep", "simulation", "solver", "validation", "check_values"});
  const long schema = r.integer(r.require(doc, "", "schema"), "/schema");
  if (schema != kConfigSchemaVersion) r.fail("/schema", "unsupported schema version " + std::to_string(schema));

  Config c;
  if (const json* v = r.find(doc, "case")) {
    c.model_case = located(r, "/case", [&] { return parse_model_case(r.text(*v, "/case")); });
  }
  c.params.lambda = r.number(r.require(doc, "", "lambda"), "/lambda");
  const long B = r.integer(r.require(doc, "", "buffer_size"), "/buffer_size");
  if (B < 2 || B > 100000) r.fail("/buffer_size", "buffer size must lie in 2..100000");
  c.params.buffer_size = static_cast<int>(B);
  if (const json* v = r.find(doc, "gamma")) c.params.gamma = r.number(*v, "/gamma");
  const bool has_channel = doc.contains("channel");
  c.params.action_a = parse_action_params(r, r.require(doc, "", "action_a"), "/action_a", has_channel);
  c.params.action_b = parse_action_params(r, r.require(doc, "", "action_b"), "/action_b", has_channel);
  if (const json* v = r.find(doc, "reward_mode")) {
    const std::string mode = r.text(*v, "/reward_mode");
    if (mode == "unit") {
      c.params.reward_mode = RewardMode::unit;
    } else if (mode == "size_proportional") {
      c.params.reward_mode = RewardMode::size_proportional;
    } else {
      r.fail("/reward_mode", "reward_mode must be \"unit\" or \"size_proportional\"");
    }
  }

  if (const json* ch = r.find(doc, "channel")) {
    r.object(*ch, "/channel", {"states", "transition", "loss", "service"});
    ChannelModel m;
    const json& states = r.array(r.require(*ch, "/channel", "states"), "/channel/states");
    for (std::size_t i = 0; i < states.size(); ++i) m.states.push_back(r.text(states[i], "/channel/states/" + std::to_string(i)));
    m.transition = r.matrix(r.require(*ch, "/channel", "transition"), "/channel/transition");
    const json& loss = r.array(r.require(*ch, "/channel", "loss"), "/channel/loss");
    for (std::size_t i = 0; i < loss.size(); ++i) m.loss.push_back(r.pair(loss[i], "/channel/loss/" + std::to_string(i)));
    if (const json* s = r.find(*ch, "service")) m.service = r.service_pairs(*s, "/channel/service");
    c.channel = std::move(m);
  }

  if (const json* sz = r.find(doc, "sizes")) {
    r.object(*sz, "/sizes", {"sizes", "transition", "rates", "service"});
    PacketSizeModel m;
    const json& sizes = r.array(r.require(*sz, "/sizes", "sizes"), "/sizes/sizes");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const long k = r.integer(sizes[i], "/sizes/sizes/" + std::to_string(i));
      if (k <= 0 || k > 1'000'000) r.fail("/sizes/sizes/" + std::to_string(i), "packet sizes must be positive");
      m.sizes.push_back(static_cast<int>(k));
    }
    m.transition = r.matrix(r.require(*sz, "/sizes", "transition"), "/sizes/transition");
    if (const json* rates = r.find(*sz, "rates")) m.rates = r.pair(*rates, "/sizes/rates");
    if (const json* s = r.find(*sz, "service")) m.service = r.service_pairs(*s, "/sizes/service");
    c.sizes = std::move(m);
  }

  if (const json* table = r.find(doc, "service_table")) {
    for (std::size_t i = 0; i < r.array(*table, "/service_table").size(); ++i) {
      const std::string p = "/service_table/" + std::to_string(i);
      const json& e = (*table)[i];
      r.object(e, p, {"h", "k", "action", "service"});
      ServiceEntry entry;
      if (const json* h = r.find(e, "h")) entry.h = static_cast<int>(r.integer(*h, p + "/h"));
      if (const json* k = r.find(e, "k")) entry.k = static_cast<int>(r.integer(*k, p + "/k"));
      entry.action = parse_action(r, r.require(e, p, "action"), p + "/action");
      entry.dist = r.distribution(r.require(e, p, "service"), p + "/service");
      c.service_table.push_back(entry);
    }
  }

  if (const json* v = r.find(doc, "validation")) {
    r.object(*v, "/validation", {"enforce_ordering"});
    if (const json* e = r.find(*v, "enforce_ordering")) {
      c.validation.enforce_ordering = r.boolean(*e, "/validation/enforce_ordering");
    }
  }

  if (const json* v = r.find(doc, "sweep")) {
    r.object(*v, "/sweep", {"distributions", "uniform_support"});
    if (const json* d = r.find(*v, "distributions")) {
      c.sweep.families.clear();
      for (std::size_t i = 0; i < r.array(*d, "/sweep/distributions").size(); ++i) {
        const std::string p = "/sweep/distributions/" + std::to_string(i);
        c.sweep.families.push_back(located(r, p, [&] { return parse_service_family(r.text((*d)[i], p)); }));
      }
      if (c.sweep.families.empty()) r.fail("/sweep/distributions", "at least one distribution is needed");
    }
    if (const json* s = r.find(*v, "uniform_support")) {
      const auto support = r.pair(*s, "/sweep/uniform_support");
      if (!(support[0] >= 0.0 && support[0] < support[1])) {
        r.fail("/sweep/uniform_support", "support must satisfy 0 <= lower < upper");
      }
      c.sweep.support = {support[0], support[1]};
    }
  }

  if (const json* v = r.find(doc, "simulation")) {
    r.object(*v, "/simulation", {"horizon", "replications", "seed", "thresholds"});
    if (const json* h = r.find(*v, "horizon")) {
      c.simulation.horizon = r.number(*h, "/simulation/horizon");
      if (!(c.simulation.horizon > 0.0)) r.fail("/simulation/horizon", "horizon must be positive");
    }
    if (const json* n = r.find(*v, "replications")) {
      const long reps = r.integer(*n, "/simulation/replications");
      if (reps < 2 || reps > 100000) r.fail("/simulation/replications", "replications must lie in 2..100000");
      c.simulation.replications = static_cast<int>(reps);
    }
    if (const json* s = r.find(*v, "seed")) c.simulation.seed = r.unsigned_integer(*s, "/simulation/seed");
    if (const json* t = r.find(*v, "thresholds")) {
      for (std::size_t i = 0; i < r.array(*t, "/simulation/thresholds").size(); ++i) {
        const std::string p = "/simulation/thresholds/" + std::to_string(i);
        const long th = r.integer((*t)[i], p);
        if (th < 0 || th > B - 1) r.fail(p, "threshold outside 0..B-1");
        c.simulation.thresholds.push_back(static_cast<int>(th));
      }
    }
  }

  if (const json* v = r.find(doc, "solver")) {
    r.object(*v, "/solver", {"tol", "max_iter"});
    if (const json* t = r.find(*v, "tol")) {
      c.solver.tol = r.number(*t, "/solver/tol");
      if (!(c.solver.tol > 0.0)) r.fail("/solver/tol", "tolerance must be positive");
    }
    if (const json* m = r.find(*v, "max_iter")) {
      c.solver.max_iter = r.integer(*m, "/solver/max_iter");
      if (c.solver.max_iter < 1) r.fail("/solver/max_iter", "max_iter must be positive");
    }
  }

  if (const json* v = r.find(doc, "check_values")) {
    r.object(*v, "/check_values", {"values", "q_a", "q_b"});
    CheckValues cv;
    cv.values = r.numbers(r.require(*v, "/check_values", "values"), "/check_values/values");
    cv.q_a = r.numbers(r.require(*v, "/check_values", "q_a"), "/check_values/q_a");
    cv.q_b = r.numbers(r.require(*v, "/check_values", "q_b"), "/check_values/q_b");
    for (const auto* vec : {&cv.values, &cv.q_a, &cv.q_b}) {
      if (vec->size() != static_cast<std::size_t>(B)) r.fail("/check_values", "value vectors must have buffer_size entries");
    }
    c.check_values = std::move(cv);
  }

  // Model-level checks, reported against the document root.
  located(r, "", [&] { return c.model(); });
  return c;
}

std::string canonical_json(const Config& c) {
  json doc;
  doc["schema"] = kConfigSchemaVersion;
  doc["case"] = to_string(c.model_case);
  doc["lambda"] = c.params.lambda;
  doc["buffer_size"] = c.params.buffer_size;
  doc["gamma"] = c.params.gamma;
  doc["action_a"] = {{"mu", c.params.action_a.mu}, {"p", c.params.action_a.loss}};
  doc["action_b"] = {{"mu", c.params.action_b.mu}, {"p", c.params.action_b.loss}};
  doc["reward_mode"] = c.params.reward_mode == RewardMode::unit ? "unit" : "size_proportional";
  if (c.channel) {
    json ch;
    ch["states"] = c.channel->states;
    ch["transition"] = to_json(c.channel->transition);
    json loss = json::array();
    for (const auto& l : c.channel->loss) loss.push_back({l[0], l[1]});
    ch["loss"] = loss;
    if (!c.channel->service.empty()) ch["service"] = to_json(c.channel->service);
    doc["channel"] = ch;
  }
  if (c.sizes) {
    json sz;
    sz["sizes"] = c.sizes->sizes;
    sz["transition"] = to_json(c.sizes->transition);
    if (c.sizes->rates) sz["rates"] = {(*c.sizes->rates)[0], (*c.sizes->rates)[1]};
    if (!c.sizes->service.empty()) sz["service"] = to_json(c.sizes->service);
    doc["sizes"] = sz;
  }
  if (!c.service_table.empty()) {
    json table = json::array();
    for (const auto& e : c.service_table) {
      table.push_back({{"h", e.h}, {"k", e.k}, {"action", std::string(1, to_char(e.action))}, {"service", to_json(e.dist)}});
    }
    doc["service_table"] = table;
  }
  doc["validation"] = {{"enforce_ordering", c.validation.enforce_ordering}};
  json families = json::array();
  for (auto f : c.sweep.families) families.push_back(to_string(f));
  doc["sweep"] = {{"distributions", families}, {"uniform_support", {c.sweep.support.lower, c.sweep.support.upper}}};
  doc["simulation"] = {{"horizon", c.simulation.horizon},
                       {"replications", c.simulation.replications},
                       {"seed", c.simulation.seed},
                       {"thresholds", c.simulation_thresholds()}};
  doc["solver"] = {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}};
  if (c.check_values) {
    doc["check_values"] = {{"values", c.check_values->values}, {"q_a", c.check_values->q_a}, {"q_b", c.check_values->q_b}};
  }
  return doc.dump();
}

std::string config_hash(const Config& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace smdp
