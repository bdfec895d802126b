#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smdp/analysis.hpp"
#include "smdp/mdp.hpp"
#include "smdp/solver.hpp"

using namespace smdp;

namespace {

constexpr Action A = Action::a;
constexpr Action Bb = Action::b;

ThresholdDescriptor detect(std::initializer_list<Action> actions) {
  const std::vector<Action> v(actions);
  return detect_threshold(v);
}

}  // namespace

TEST_CASE("threshold detection") {
  CHECK(detect({A, A, A, Bb, Bb, Bb, Bb, Bb, Bb}) == ThresholdDescriptor{SingleThreshold{3}});
  CHECK(detect({Bb, Bb, Bb}) == ThresholdDescriptor{SingleThreshold{0}});
  CHECK(detect({A, A, A}) == ThresholdDescriptor{SingleThreshold{3}});
  CHECK(detect({}) == ThresholdDescriptor{SingleThreshold{0}});
  CHECK(detect({A, Bb, A, Bb}) == ThresholdDescriptor{SwitchList{{1, 2, 3}}});
  CHECK(detect({Bb, A}) == ThresholdDescriptor{SwitchList{{1}}});
}

TEST_CASE("structure checks flag hand-made violations") {
  const std::vector<double> concave{0.0, 2.0, 3.0, 3.5, 3.6};
  const std::vector<double> convex{0.0, 0.1, 0.5, 1.5, 4.0};
  CHECK(check_concavity(concave, 0, concave.size()).passed);
  const auto bad = check_concavity(convex, 0, convex.size());
  CHECK_FALSE(bad.passed);
  CHECK(bad.violations == std::vector<std::size_t>{1, 2, 3});
  CHECK(check_concavity(convex, 3, 5).passed);
  CHECK(fixture::code_of([&] { check_concavity(convex, 0, 9); }) == ErrorCode::out_of_range);

  CHECK(check_monotone_nondecreasing(concave).passed);
  const std::vector<double> dip{1.0, 2.0, 1.5, 3.0};
  CHECK(check_monotone_nondecreasing(dip).violations == std::vector<std::size_t>{2});

  CHECK(check_slope(concave, 2.0).passed);
  CHECK(check_slope(concave, 1.5).violations == std::vector<std::size_t>{1});

  const std::vector<double> q1{1.0, 1.0, 1.0, 1.0};
  const std::vector<double> rising{0.0, 0.5, 1.5, 2.0};
  const std::vector<double> bump{0.0, 0.5, 0.2, 0.9};
  const auto up = check_increasing_difference(rising, q1);
  CHECK(up.passed);
  CHECK(up.direction == 1);
  const auto down = check_increasing_difference(q1, rising);
  CHECK(down.passed);
  CHECK(down.direction == -1);
  const auto mixed = check_increasing_difference(bump, q1);
  CHECK_FALSE(mixed.passed);
  CHECK(mixed.violations == std::vector<std::size_t>{2});
  CHECK(check_increasing_difference(q1, q1).direction == 0);
}

TEST_CASE("slope constant from the closed form") {
  const auto p = fixture::exponential(2, 3, 1, 0.1, 3, 0.5, 0.5);
  const auto c = mdp_constants(p);
  const double v0 = 1.0;
  const double a0 = 2.0;
  const double b0 = 2.5;
  const double k1 = 3 * c.delta_b * v0 - 3 * 2 * c.delta_b * c.delta_bar * b0 + c.c_b;
  const double k2 = 1 * c.delta_a * v0 - 1 * 2 * c.delta_a * c.delta_bar * a0 + c.c_a;
  const double expect = std::max(k1 / (3.5 * c.delta_b), k2 / (1.5 * c.delta_a));
  CHECK(slope_bound_constant(p, c, v0, a0, b0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("exponential solutions have the proven structure") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const auto params = oracle::random_exponential_params(rng, 20, 0.05, 0.3);
    const auto model = ValidatedModel::validate(params);
    const auto mdp = solve_mdp(model, 1e-12);
    IterationOptions options;
    options.tol = 1e-12;
    const auto smdp = solve(ModelCase::exponential, model, options);
    const auto report = analyze_exponential(model, mdp, smdp);
    CHECK(report.enforced);
    CHECK(report.all_passed());
    REQUIRE(report.slope_bound_K);
    CHECK(*report.slope_bound_K > 0.0);

    const auto audit = analyze_values(model, smdp.values, smdp.q_a, smdp.q_b);
    CHECK(audit.all_passed());
    CHECK(audit.slices[0] == smdp.policy.slices[0]);
  }
}

TEST_CASE("external convex values fail the audit") {
  const auto model = ValidatedModel::validate(fixture::exponential(3, 5, 2, 0.1, 4, 0.3, 0.1));
  const std::vector<double> values{0.0, 0.1, 0.4, 1.0, 2.5};
  const std::vector<double> q_a{0.0, 0.1, 0.4, 1.0, 2.5};
  const std::vector<double> q_b{0.0, 0.0, 0.5, 0.2, 2.6};
  const auto report = analyze_values(model, values, q_a, q_b);
  CHECK(report.enforced);
  CHECK_FALSE(report.concave);
  CHECK_FALSE(report.increasing_difference);
  CHECK_FALSE(report.single_threshold);
  CHECK_FALSE(report.all_passed());
  CHECK(fixture::code_of([&] { analyze_values(model, std::vector<double>(4), q_a, q_b); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("general models are analysed per slice without enforcement") {
  const auto model = ValidatedModel::validate(fixture::high_load(), fixture::gilbert_elliott(9, 12, true));
  const auto smdp = solve(ModelCase::ge_uniform, model);
  const auto report = analyze_solution(model, smdp);
  CHECK_FALSE(report.enforced);
  CHECK(report.slices.size() == 2);
  CHECK(report.checks.size() == 6);
  for (const auto& check : report.checks) CHECK(check.subject.find(',') == std::string::npos);
}
