#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "smdp/matrix.hpp"

namespace smdp {

/// Transmission path. `a` is the slow reliable operating point, `b` the fast
/// lossy one. `idle` marks states where no decision is taken (empty buffer).
enum class Action : std::uint8_t { a = 0, b = 1, idle = 2 };

inline constexpr std::array<Action, 2> kActions{Action::a, Action::b};

inline std::size_t slot(Action u) { return static_cast<std::size_t>(u); }
char to_char(Action u) noexcept;

struct ActionParams {
  double mu = 0.0;    // service rate
  double loss = 0.0;  // packet loss probability
};

enum class RewardMode { unit, size_proportional };

struct ModelParams {
  double lambda = 0.0;
  int buffer_size = 0;
  double gamma = 0.01;
  ActionParams action_a;
  ActionParams action_b;
  RewardMode reward_mode = RewardMode::unit;

  const ActionParams& action(Action u) const { return u == Action::a ? action_a : action_b; }
};

struct Exponential {
  double mu = 0.0;
};
struct Deterministic {
  double tau = 0.0;
};
struct Uniform {
  double alpha = 0.0;
  double beta = 0.0;
};

using ServiceDistribution = std::variant<Exponential, Deterministic, Uniform>;

using ServicePair = std::array<ServiceDistribution, 2>;  // indexed by slot(Action)

std::string describe(const ServiceDistribution& dist);

/// Markov-modulated channel (Gilbert-Elliott when two states).
struct ChannelModel {
  std::vector<std::string> states;
  Matrix transition;                              // p(h'|h)
  std::vector<std::array<double, 2>> loss;        // per state, per action
  std::vector<ServicePair> service;               // optional, per state
};

struct PacketSizeModel {
  std::vector<int> sizes;
  Matrix transition;                              // q(k'|k)
  std::vector<ServicePair> service;               // optional, per size
  std::optional<std::array<double, 2>> rates;     // R_u; deterministic time k / R_u
};

/// Explicit service law for one (channel state, size, action) triple.
struct ServiceEntry {
  int h = 0;
  int k = 0;
  Action action = Action::a;
  ServiceDistribution dist;
};

struct DecisionState {
  int n = 0;
  int h = 0;
  int k = 0;

  auto operator<=>(const DecisionState&) const = default;
};

struct ValidationOptions {
  /// Require mu_a < mu_b and p_a < p_b. Disabled only for degenerate
  /// equal-action experiments.
  bool enforce_ordering = true;
};

/// Immutable model with a fixed state enumeration: lexicographic over
/// (n, h, k) with n in {0..B-1}.
class ValidatedModel {
 public:
  static ValidatedModel validate(const ModelParams& params,
                                 const std::optional<ChannelModel>& channel = std::nullopt,
                                 const std::optional<PacketSizeModel>& sizes = std::nullopt,
                                 std::span<const ServiceEntry> service_table = {},
                                 ValidationOptions options = {});

  const ModelParams& params() const noexcept { return params_; }
  int buffer_size() const noexcept { return params_.buffer_size; }
  double lambda() const noexcept { return params_.lambda; }
  double gamma() const noexcept { return params_.gamma; }

  int channel_count() const noexcept { return channel_count_; }
  int size_count() const noexcept { return size_count_; }
  std::size_t slice_count() const noexcept {
    return static_cast<std::size_t>(channel_count_) * static_cast<std::size_t>(size_count_);
  }
  std::size_t state_count() const noexcept {
    return static_cast<std::size_t>(params_.buffer_size) * slice_count();
  }

  std::size_t state_index(const DecisionState& s) const;
  DecisionState state_at(std::size_t index) const;

  const ServiceDistribution& service(int h, int k, Action u) const;
  double loss(int h, Action u) const;
  /// Reward per successful transmission of a size-k packet.
  double reward_factor(int k) const;
  double channel_transition(int h, int h_next) const;
  double size_transition(int k, int k_next) const;

  const std::optional<ChannelModel>& channel() const noexcept { return channel_; }
  const std::optional<PacketSizeModel>& sizes() const noexcept { return sizes_; }

  /// Copy with a different discount rate; everything else unchanged.
  ValidatedModel with_gamma(double gamma) const;

 private:
  ValidatedModel() = default;

  ModelParams params_;
  std::optional<ChannelModel> channel_;
  std::optional<PacketSizeModel> sizes_;
  int channel_count_ = 1;
  int size_count_ = 1;
  std::vector<ServiceDistribution> service_;  // [h][k][u]
  std::vector<double> loss_;                  // [h][u]
};

void validate_distribution(const ServiceDistribution& dist);

}  // namespace smdp
