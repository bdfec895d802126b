#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smdp/evaluation.hpp"

using namespace smdp;

namespace {

Matrix random_stochastic(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix P(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += P(i, j) = u(rng) < 0.4 ? 0.0 : u(rng);
    if (sum == 0.0) P(i, (i + 1) % n) = sum = 1.0;
    for (std::size_t j = 0; j < n; ++j) P(i, j) /= sum;
  }
  // Keep the chain irreducible with a cycle of positive entries.
  for (std::size_t i = 0; i < n; ++i) {
    const double add = 0.05;
    for (std::size_t j = 0; j < n; ++j) P(i, j) *= 1.0 - add;
    P(i, (i + 1) % n) += add;
  }
  return P;
}

}  // namespace

TEST_CASE("service families and transition matrices") {
  CHECK(parse_service_family("uniform") == ServiceFamily::uniform);
  CHECK(to_string(ServiceFamily::deterministic) == "deterministic");
  CHECK(fixture::code_of([] { parse_service_family("gamma"); }) != ErrorCode::ok);
  const auto u = std::get<Uniform>(service_from_rate(ServiceFamily::uniform, 10.0));
  CHECK(u.alpha == doctest::Approx(0.02));
  CHECK(u.beta == doctest::Approx(0.18));
  CHECK(std::get<Deterministic>(service_from_rate(ServiceFamily::deterministic, 4.0)).tau == 0.25);

  const auto P = service_transition_matrix(Exponential{3.0}, 2.0, 5);
  CHECK(P(0, 1) == 1.0);
  CHECK(P.max_stochastic_defect() < 1e-12);
  // From i = 2: no arrivals -> 1, one -> 2.
  CHECK(P(2, 1) == doctest::Approx(3.0 / 5.0).epsilon(1e-14));
  CHECK(P(2, 2) == doctest::Approx(3.0 / 5.0 * 2.0 / 5.0).epsilon(1e-14));
  CHECK(P(2, 0) == 0.0);
  CHECK(P(1, 0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(P(4, 4) == doctest::Approx(1.0 - 0.6).epsilon(1e-14));

  for (auto family : {ServiceFamily::exponential, ServiceFamily::deterministic, ServiceFamily::uniform}) {
    const auto M = service_transition_matrix(service_from_rate(family, 9.0), 13.0, 50);
    CHECK(M.max_stochastic_defect() < 1e-12);
  }
}

TEST_CASE("evaluation needs arrivals") {
  auto p = fixture::low_load();
  p.lambda = 0.0;
  const auto service = service_pair(ServiceFamily::exponential, fixture::low_load());
  CHECK(fixture::code_of([&] { evaluate_threshold(3, p, service); }) == ErrorCode::non_positive_rate);
}

TEST_CASE("GTH stationary distribution") {
  const auto flip = stationary_distribution(Matrix{{0, 1}, {1, 0}});
  CHECK(flip[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(flip[1] == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(fixture::code_of([] { stationary_distribution(Matrix{{1, 0}, {0, 1}}); }) == ErrorCode::reducible_chain);

  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const auto P = random_stochastic(rng, 2 + rng() % 30);
    const auto pi = stationary_distribution(P);
    const auto ref = oracle::power_stationary(P);
    CHECK(fixture::sup_diff(pi, ref) < 1e-12);
    CHECK(stationary_residual(P, pi) < 1e-14);
    double sum = 0.0;
    for (double x : pi) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("equal exponential actions reduce to a finite birth-death queue") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double mu = 1 + 10 * u(rng);
    const double lambda = mu * (0.1 + 2.5 * u(rng));
    const double loss = 0.8 * u(rng);
    const int B = 2 + static_cast<int>(rng() % 40);
    auto p = fixture::exponential(lambda, B, mu, loss, mu, loss);
    const auto service = service_pair(ServiceFamily::exponential, p);
    const double expect = oracle::mm1b_throughput(lambda, mu, loss, B);
    for (int T : {0, B / 2, B - 1}) {
      const auto r = evaluate_threshold(T, p, service);
      CHECK(std::abs(r.throughput - expect) < 1e-11 * std::max(1.0, expect));
      CHECK(r.agreement_gap <= kThroughputAgreementTolerance);
    }
  }
}

TEST_CASE("exponential evaluation matches a continuous-time chain with distinct actions") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = oracle::random_exponential_params(rng, 30);
    const auto service = service_pair(ServiceFamily::exponential, p);
    for (int T = 0; T < p.buffer_size; ++T) {
      const double expect = oracle::ctmc_threshold_throughput(p, T);
      CHECK(std::abs(evaluate_threshold(T, p, service).throughput - expect) < 1e-10 * std::max(1.0, expect));
    }
  }
  const auto b10 = fixture::exponential(17, 10, 10, 0.25, 13, 0.42);
  CHECK(evaluate_threshold(6, b10, service_pair(ServiceFamily::exponential, b10)).throughput ==
        doctest::Approx(oracle::ctmc_threshold_throughput(b10, 6)).epsilon(1e-12));
}

TEST_CASE("threshold semantics at the extremes") {
  const auto p = fixture::low_load();
  const auto service = service_pair(ServiceFamily::exponential, p);
  const auto always_b = build_embedded_chain(0, p, service);
  const auto always_a = build_embedded_chain(9, p, service);
  CHECK(always_b.action[0] == Action::idle);
  for (int i = 1; i < 10; ++i) {
    CHECK(always_b.action[static_cast<std::size_t>(i)] == Action::b);
    CHECK(always_a.action[static_cast<std::size_t>(i)] == Action::a);
  }
  CHECK(evaluate_threshold(0, p, service).throughput ==
        doctest::Approx(oracle::mm1b_throughput(9, 12, 0.42, 10)).epsilon(1e-12));
  CHECK(evaluate_threshold(9, p, service).throughput ==
        doctest::Approx(oracle::mm1b_throughput(9, 9, 0.25, 10)).epsilon(1e-12));
  CHECK(fixture::code_of([&] { build_embedded_chain(10, p, service); }) == ErrorCode::out_of_range);
  CHECK(fixture::code_of([&] { build_embedded_chain(-1, p, service); }) == ErrorCode::out_of_range);
}

TEST_CASE("chains are stochastic and the throughput forms agree on every family") {
  const auto p = fixture::exponential(13, 50, 10, 0.25, 13, 0.42);
  for (auto family : {ServiceFamily::exponential, ServiceFamily::deterministic, ServiceFamily::uniform}) {
    const auto service = service_pair(family, p);
    for (int T : {0, 7, 15, 30, 49}) {
      const auto chain = build_embedded_chain(T, p, service);
      CHECK(chain.P.max_stochastic_defect() < 1e-12);
      const auto r = evaluate_threshold(T, p, service);
      CHECK(r.agreement_gap < kThroughputAgreementTolerance);
      CHECK(r.stationary_residual < 1e-12);
      double share = 0.0;
      for (double x : r.time_fractions) share += x;
      CHECK(share == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("sweeps: argmax, flat curves and thread independence") {
  const auto p = fixture::exponential(17, 10, 10, 0.25, 13, 0.42);
  const auto service = service_pair(ServiceFamily::exponential, p);
  const auto serial = sweep_thresholds(p, service, 1);
  const auto parallel = sweep_thresholds(p, service, 4);
  REQUIRE(serial.points.size() == 10);
  double best = -1.0;
  int argmax = -1;
  for (const auto& point : serial.points) {
    if (point.throughput > best) {
      best = point.throughput;
      argmax = point.threshold;
    }
  }
  CHECK(serial.best_threshold == argmax);
  CHECK(serial.best_throughput == best);
  CHECK(parallel.best_threshold == serial.best_threshold);
  for (std::size_t i = 0; i < 10; ++i) CHECK(parallel.points[i].throughput == serial.points[i].throughput);
  CHECK_FALSE(serial.flat);

  auto equal = fixture::exponential(5, 8, 6, 0.3, 6, 0.3);
  const auto flat = sweep_thresholds(equal, service_pair(ServiceFamily::deterministic, equal), 2);
  CHECK(flat.flat);
  CHECK(flat.best_threshold == 0);
}
