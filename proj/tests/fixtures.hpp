// Model builders shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "smdp/error.hpp"
#include "smdp/model.hpp"

namespace fixture {

inline smdp::ModelParams exponential(double lambda, int B, double mu_a, double p_a, double mu_b, double p_b,
                                     double gamma = 0.01) {
  smdp::ModelParams p;
  p.lambda = lambda;
  p.buffer_size = B;
  p.gamma = gamma;
  p.action_a = {mu_a, p_a};
  p.action_b = {mu_b, p_b};
  return p;
}

inline smdp::ModelParams low_load() { return exponential(9, 10, 9, 0.25, 12, 0.42); }
inline smdp::ModelParams high_load() { return exponential(13, 10, 9, 0.25, 12, 0.42); }

inline smdp::ChannelModel gilbert_elliott(double mu_a, double mu_b, bool uniform) {
  smdp::ChannelModel c;
  c.states = {"G", "B"};
  c.transition = smdp::Matrix{{0.9, 0.1}, {0.2, 0.8}};
  c.loss = {{0.2, 0.3}, {0.35, 0.4}};
  auto law = [&](double mu) -> smdp::ServiceDistribution {
    if (uniform) return smdp::Uniform{0.2 / mu, 1.8 / mu};
    return smdp::Deterministic{1.0 / mu};
  };
  c.service = {{law(mu_a), law(mu_b)}, {law(mu_a), law(mu_b)}};
  return c;
}

inline smdp::PacketSizeModel two_sizes(double R_a, double R_b) {
  smdp::PacketSizeModel s;
  s.sizes = {1, 3};
  s.transition = smdp::Matrix{{0.7, 0.3}, {0.4, 0.6}};
  s.rates = std::array<double, 2>{R_a, R_b};
  return s;
}

inline smdp::ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const smdp::Error& e) {
    return e.code();
  }
  return smdp::ErrorCode::ok;
}

inline double sup_diff(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

}  // namespace fixture
