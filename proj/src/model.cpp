#include "smdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "smdp/error.hpp"

namespace smdp {

namespace {

constexpr double kRowTolerance = 1e-12;

void require_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << what << " must lie in [0, 1), got " << p;
    throw Error(ErrorCode::invalid_probability, msg.str());
  }
}

void require_positive(double x, const std::string& what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << what << " must be positive and finite, got " << x;
    throw Error(ErrorCode::non_positive_rate, msg.str());
  }
}

void require_stochastic(const Matrix& m, std::size_t n, const std::string& what) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream msg;
    msg << what << " must be " << n << "x" << n << ", got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::dimension_mismatch, msg.str());
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (double p : m.row(i)) {
      if (!(p >= 0.0) || p > 1.0) {
        std::ostringstream msg;
        msg << what << " row " << i << " has entry outside [0, 1]: " << p;
        throw Error(ErrorCode::non_stochastic_row, msg.str());
      }
    }
    const double defect = std::abs(m.row_sum(i) - 1.0);
    if (defect > kRowTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << what << " row " << i << " sums to " << m.row_sum(i);
      throw Error(ErrorCode::non_stochastic_row, msg.str());
    }
  }
}

}  // namespace

char to_char(Action u) noexcept {
  switch (u) {
    case Action::a: return 'a';
    case Action::b: return 'b';
    case Action::idle: return '-';
  }
  return '?';
}

std::string describe(const ServiceDistribution& dist) {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          out << "exponential(mu=" << d.mu << ")";
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          out << "deterministic(tau=" << d.tau << ")";
        } else {
          out << "uniform(alpha=" << d.alpha << ", beta=" << d.beta << ")";
        }
      },
      dist);
  return out.str();
}

void validate_distribution(const ServiceDistribution& dist) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          require_positive(d.mu, "exponential service rate");
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          require_positive(d.tau, "deterministic service time");
        } else {
          if (!(d.alpha >= 0.0) || !(d.alpha < d.beta) || !std::isfinite(d.beta)) {
            std::ostringstream msg;
            msg << "uniform support requires 0 <= alpha < beta, got [" << d.alpha << ", " << d.beta << "]";
            throw Error(ErrorCode::invalid_support, msg.str());
          }
        }
      },
      dist);
}

ValidatedModel ValidatedModel::validate(const ModelParams& params,
                                        const std::optional<ChannelModel>& channel,
                                        const std::optional<PacketSizeModel>& sizes,
                                        std::span<const ServiceEntry> service_table,
                                        ValidationOptions options) {
  if (params.buffer_size < 2) {
    throw Error(ErrorCode::buffer_too_small,
                "buffer size must be at least 2, got " + std::to_string(params.buffer_size));
  }
  require_positive(params.lambda, "arrival rate lambda");
  require_positive(params.gamma, "discount rate gamma");
  require_positive(params.action_a.mu, "service rate mu_a");
  require_positive(params.action_b.mu, "service rate mu_b");
  require_probability(params.action_a.loss, "loss probability p_a");
  require_probability(params.action_b.loss, "loss probability p_b");
  if (options.enforce_ordering) {
    if (!(params.action_a.mu < params.action_b.mu)) {
      throw Error(ErrorCode::invalid_rates, "path a must be slower: require mu_a < mu_b");
    }
    if (!channel && !(params.action_a.loss < params.action_b.loss)) {
      throw Error(ErrorCode::invalid_rates, "path a must be more reliable: require p_a < p_b");
    }
  }

  ValidatedModel model;
  model.params_ = params;

  if (channel) {
    const std::size_t h_count = channel->states.size();
    if (h_count == 0) throw Error(ErrorCode::dimension_mismatch, "channel model has no states");
    require_stochastic(channel->transition, h_count, "channel transition");
    if (channel->loss.size() != h_count) {
      throw Error(ErrorCode::dimension_mismatch, "channel loss table must have one entry per state");
    }
    for (std::size_t h = 0; h < h_count; ++h) {
      const auto& [pa, pb] = channel->loss[h];
      require_probability(pa, "channel loss p_a[" + channel->states[h] + "]");
      require_probability(pb, "channel loss p_b[" + channel->states[h] + "]");
      if (options.enforce_ordering && !(pa < pb)) {
        throw Error(ErrorCode::invalid_rates,
                    "path a must be more reliable in channel state " + channel->states[h]);
      }
    }
    if (!channel->service.empty() && channel->service.size() != h_count) {
      throw Error(ErrorCode::dimension_mismatch, "channel service table must have one entry per state");
    }
    model.channel_count_ = static_cast<int>(h_count);
    model.channel_ = channel;
  }

  if (sizes) {
    const std::size_t k_count = sizes->sizes.size();
    if (k_count == 0) throw Error(ErrorCode::dimension_mismatch, "packet size model has no sizes");
    std::set<int> seen;
    for (int k : sizes->sizes) {
      if (k <= 0) throw Error(ErrorCode::invalid_argument, "packet sizes must be positive");
      if (!seen.insert(k).second) throw Error(ErrorCode::invalid_argument, "packet sizes must be distinct");
    }
    require_stochastic(sizes->transition, k_count, "packet size transition");
    if (!sizes->service.empty() && sizes->service.size() != k_count) {
      throw Error(ErrorCode::dimension_mismatch, "size service table must have one entry per size");
    }
    if (sizes->rates) {
      require_positive((*sizes->rates)[0], "size rate R_a");
      require_positive((*sizes->rates)[1], "size rate R_b");
    }
    model.size_count_ = static_cast<int>(k_count);
    model.sizes_ = sizes;
  }

  const int H = model.channel_count_;
  const int K = model.size_count_;
  model.loss_.resize(static_cast<std::size_t>(H) * 2);
  for (int h = 0; h < H; ++h) {
    for (Action u : kActions) {
      model.loss_[static_cast<std::size_t>(h) * 2 + slot(u)] =
          channel ? channel->loss[static_cast<std::size_t>(h)][slot(u)] : params.action(u).loss;
    }
  }

  // Service law resolution, most specific source first.
  const bool channel_service = channel && !channel->service.empty();
  const bool size_service = sizes && !sizes->service.empty();
  const std::size_t total = static_cast<std::size_t>(H) * static_cast<std::size_t>(K) * 2;
  std::vector<std::optional<ServiceDistribution>> resolved(total);
  auto at = [&](int h, int k, Action u) -> std::optional<ServiceDistribution>& {
    return resolved[(static_cast<std::size_t>(h) * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)) * 2 +
                    slot(u)];
  };

  if (!service_table.empty()) {
    for (const auto& entry : service_table) {
      if (entry.h < 0 || entry.h >= H || entry.k < 0 || entry.k >= K || entry.action == Action::idle) {
        throw Error(ErrorCode::out_of_range, "service table entry outside the model ranges");
      }
      at(entry.h, entry.k, entry.action) = entry.dist;
    }
  } else if (channel_service && size_service) {
    throw Error(ErrorCode::missing_service_entry,
                "joint channel and size service laws need an explicit service table");
  }

  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < K; ++k) {
      for (Action u : kActions) {
        auto& slot_value = at(h, k, u);
        if (!service_table.empty()) {
          if (!slot_value) {
            std::ostringstream msg;
            msg << "service table lacks entry for h=" << h << " k=" << k << " action=" << to_char(u);
            throw Error(ErrorCode::missing_service_entry, msg.str());
          }
        } else if (channel_service) {
          slot_value = channel->service[static_cast<std::size_t>(h)][slot(u)];
        } else if (size_service) {
          slot_value = sizes->service[static_cast<std::size_t>(k)][slot(u)];
        } else if (sizes && sizes->rates) {
          const double size = sizes->sizes[static_cast<std::size_t>(k)];
          slot_value = Deterministic{size / (*sizes->rates)[slot(u)]};
        } else {
          slot_value = Exponential{params.action(u).mu};
        }
        validate_distribution(*slot_value);
      }
    }
  }
  model.service_.reserve(total);
  for (auto& d : resolved) model.service_.push_back(*d);
  return model;
}

std::size_t ValidatedModel::state_index(const DecisionState& s) const {
  if (s.n < 0 || s.n >= params_.buffer_size || s.h < 0 || s.h >= channel_count_ || s.k < 0 ||
      s.k >= size_count_) {
    std::ostringstream msg;
    msg << "state (n=" << s.n << ", h=" << s.h << ", k=" << s.k << ") outside the model ranges";
    throw Error(ErrorCode::out_of_range, msg.str());
  }
  return (static_cast<std::size_t>(s.n) * static_cast<std::size_t>(channel_count_) +
          static_cast<std::size_t>(s.h)) *
             static_cast<std::size_t>(size_count_) +
         static_cast<std::size_t>(s.k);
}

DecisionState ValidatedModel::state_at(std::size_t index) const {
  if (index >= state_count()) {
    throw Error(ErrorCode::out_of_range, "state index " + std::to_string(index) + " outside the state space");
  }
  const auto K = static_cast<std::size_t>(size_count_);
  const auto H = static_cast<std::size_t>(channel_count_);
  DecisionState s;
  s.k = static_cast<int>(index % K);
  index /= K;
  s.h = static_cast<int>(index % H);
  s.n = static_cast<int>(index / H);
  return s;
}

const ServiceDistribution& ValidatedModel::service(int h, int k, Action u) const {
  if (h < 0 || h >= channel_count_ || k < 0 || k >= size_count_ || u == Action::idle) {
    throw Error(ErrorCode::out_of_range, "service lookup outside the model ranges");
  }
  return service_[(static_cast<std::size_t>(h) * static_cast<std::size_t>(size_count_) +
                    static_cast<std::size_t>(k)) *
                       2 +
                   slot(u)];
}

double ValidatedModel::loss(int h, Action u) const {
  if (h < 0 || h >= channel_count_ || u == Action::idle) {
    throw Error(ErrorCode::out_of_range, "loss lookup outside the model ranges");
  }
  return loss_[static_cast<std::size_t>(h) * 2 + slot(u)];
}

double ValidatedModel::reward_factor(int k) const {
  if (params_.reward_mode == RewardMode::unit) return 1.0;
  if (!sizes_) return 1.0;
  return static_cast<double>(sizes_->sizes.at(static_cast<std::size_t>(k)));
}

double ValidatedModel::channel_transition(int h, int h_next) const {
  if (!channel_) return 1.0;
  return channel_->transition(static_cast<std::size_t>(h), static_cast<std::size_t>(h_next));
}

double ValidatedModel::size_transition(int k, int k_next) const {
  if (!sizes_) return 1.0;
  return sizes_->transition(static_cast<std::size_t>(k), static_cast<std::size_t>(k_next));
}

ValidatedModel ValidatedModel::with_gamma(double gamma) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::non_positive_rate, "discount rate gamma must be positive and finite");
  }
  ValidatedModel copy = *this;
  copy.params_.gamma = gamma;
  return copy;
}

}  // namespace smdp
