#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

using smdp::Action;

double integrate(const std::function<double(double)>& f, double lo, double hi) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, 1e-12, &error);
}

double poisson(int m, double mean) {
  if (mean == 0.0) return m == 0 ? 1.0 : 0.0;
  return boost::math::pdf(boost::math::poisson_distribution<double>(mean), m);
}

double poisson_tail(int M, double mean) {
  if (mean == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(M + 1), mean);
}

Kernel kernel(const smdp::ServiceDistribution& dist, double lambda, double gamma, int M) {
  Kernel k;
  if (const auto* d = std::get_if<smdp::Deterministic>(&dist)) {
    const double disc = std::exp(-gamma * d->tau);
    for (int m = 0; m <= M; ++m) k.weights.push_back(disc * poisson(m, lambda * d->tau));
    k.overflow = disc * poisson_tail(M, lambda * d->tau);
    k.total = disc;
    return k;
  }
  std::function<double(double)> density;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  if (const auto* e = std::get_if<smdp::Exponential>(&dist)) {
    const double mu = e->mu;
    density = [mu](double t) { return mu * std::exp(-mu * t); };
  } else {
    const auto& u = std::get<smdp::Uniform>(dist);
    lo = u.alpha;
    hi = u.beta;
    const double h = 1.0 / (u.beta - u.alpha);
    density = [h](double) { return h; };
  }
  for (int m = 0; m <= M; ++m) {
    k.weights.push_back(integrate([&](double t) { return std::exp(-gamma * t) * poisson(m, lambda * t) * density(t); }, lo, hi));
  }
  k.overflow = integrate([&](double t) { return std::exp(-gamma * t) * poisson_tail(M, lambda * t) * density(t); }, lo, hi);
  k.total = integrate([&](double t) { return std::exp(-gamma * t) * density(t); }, lo, hi);
  return k;
}

std::vector<double> solve_linear(const smdp::Matrix& A, const std::vector<double>& b) {
  const auto n = static_cast<Eigen::Index>(A.rows());
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rhs(i) = b[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = A(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  const Eigen::VectorXd x = M.fullPivLu().solve(rhs);
  return {x.data(), x.data() + n};
}

namespace {

template <class Evaluate>
Optimum enumerate(std::size_t decisions, std::size_t value_count, Evaluate&& evaluate) {
  if (decisions > 16) throw std::invalid_argument("too many decision states to enumerate");
  Optimum best;
  for (std::uint32_t mask = 0; mask < (1u << decisions); ++mask) {
    std::vector<Action> choice(decisions);
    for (std::size_t d = 0; d < decisions; ++d) choice[d] = (mask >> d) & 1u ? Action::b : Action::a;
    const auto [values, actions] = evaluate(choice);
    if (best.values.empty()) {
      best.values = values;
      best.actions = actions;
    } else {
      // Optimal values dominate every policy; keep the pointwise maximum and
      // the policy that attains it everywhere.
      bool dominates = true;
      bool improves = false;
      for (std::size_t i = 0; i < value_count; ++i) {
        if (values[i] < best.values[i] - 1e-12) dominates = false;
        if (values[i] > best.values[i] + 1e-12) improves = true;
      }
      for (std::size_t i = 0; i < value_count; ++i) best.values[i] = std::max(best.values[i], values[i]);
      if (dominates && improves) best.actions = actions;
    }
    ++best.policies;
  }
  return best;
}

}  // namespace

Optimum enumerate_smdp(const smdp::ValidatedModel& model) {
  const int B = model.buffer_size();
  const int H = model.channel_count();
  const int K = model.size_count();
  const std::size_t S = model.slice_count();
  const std::size_t N = model.state_count();
  const double lambda = model.lambda();
  const double gamma = model.gamma();

  std::vector<Kernel> kernels(S * 2);
  std::vector<double> reward(S * 2);
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < K; ++k) {
      for (Action u : smdp::kActions) {
        const std::size_t s = static_cast<std::size_t>(h * K + k);
        kernels[s * 2 + smdp::slot(u)] = kernel(model.service(h, k, u), lambda, gamma, B - 1);
        reward[s * 2 + smdp::slot(u)] =
            model.reward_factor(k) * (1.0 - model.loss(h, u)) * kernels[s * 2 + smdp::slot(u)].total;
      }
    }
  }
  auto next = [&](std::size_t s, std::size_t s2) {
    const int K_ = K;
    return model.channel_transition(static_cast<int>(s) / K_, static_cast<int>(s2) / K_) *
           model.size_transition(static_cast<int>(s) % K_, static_cast<int>(s2) % K_);
  };

  return enumerate(static_cast<std::size_t>(B - 1) * S, N, [&](const std::vector<Action>& choice) {
    smdp::Matrix A = smdp::Matrix::identity(N);
    std::vector<double> r(N, 0.0);
    std::vector<Action> actions(N, Action::idle);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t s2 = 0; s2 < S; ++s2) A(s, S + s2) -= lambda / (lambda + gamma) * next(s, s2);
      for (int n = 1; n < B; ++n) {
        const std::size_t row = static_cast<std::size_t>(n) * S + s;
        const Action u = choice[static_cast<std::size_t>(n - 1) * S + s];
        actions[row] = u;
        const Kernel& kk = kernels[s * 2 + smdp::slot(u)];
        r[row] = reward[s * 2 + smdp::slot(u)];
        for (int m = 0; m <= B - 1; ++m) {
          const auto j = static_cast<std::size_t>(std::min(n - 1 + m, B - 1));
          for (std::size_t s2 = 0; s2 < S; ++s2) A(row, j * S + s2) -= kk.weights[static_cast<std::size_t>(m)] * next(s, s2);
        }
        for (std::size_t s2 = 0; s2 < S; ++s2) A(row, static_cast<std::size_t>(B - 1) * S + s2) -= kk.overflow * next(s, s2);
      }
    }
    return std::pair{solve_linear(A, r), actions};
  });
}

Optimum enumerate_mdp(const smdp::ValidatedModel& model) {
  const int B = model.buffer_size();
  const auto& p = model.params();
  const double lambda = p.lambda;
  const double gamma = p.gamma;
  auto mu = [&](Action u) { return p.action(u).mu; };
  auto delta = [&](Action u) { return 1.0 / (mu(u) + lambda + gamma); };
  auto c = [&](Action u) { return (1.0 - p.action(u).loss) * mu(u) / (gamma + mu(u)); };
  const double delta_bar = 1.0 / (gamma + lambda);

  // Unknowns: V_0..V_{B-1}, A^a_1..A^a_B, A^b_1..A^b_B, A_0.
  const auto Bz = static_cast<std::size_t>(B);
  const std::size_t N = Bz + 2 * Bz + 1;
  auto v = [](int n) { return static_cast<std::size_t>(n); };
  auto arr = [&](Action u, int n) { return Bz + smdp::slot(u) * Bz + static_cast<std::size_t>(n - 1); };
  const std::size_t a0 = N - 1;

  return enumerate(Bz - 1, Bz, [&](const std::vector<Action>& choice) {
    smdp::Matrix A = smdp::Matrix::identity(N);
    std::vector<double> r(N, 0.0);
    std::vector<Action> actions(Bz, Action::idle);
    A(v(0), a0) -= lambda * delta_bar;
    for (int n = 1; n < B; ++n) {
      const Action u = choice[static_cast<std::size_t>(n - 1)];
      actions[v(n)] = u;
      A(v(n), v(n - 1)) -= mu(u) * delta(u);
      A(v(n), arr(u, n)) -= lambda * delta(u);
      r[v(n)] = c(u);
    }
    for (Action u : smdp::kActions) {
      for (int n = 1; n < B; ++n) {
        A(arr(u, n), v(n)) -= mu(u) * delta(u);
        A(arr(u, n), arr(u, n + 1)) -= lambda * delta(u);
      }
      A(arr(u, B), v(B - 1)) -= mu(u) * delta(u);
      A(arr(u, B), arr(u, B)) -= lambda * delta(u);
    }
    const Action first = choice[0];
    A(a0, v(0)) -= mu(first) * delta(first);
    A(a0, arr(first, 1)) -= lambda * delta(first);
    r[a0] = c(first);
    auto x = solve_linear(A, r);
    x.resize(Bz);
    return std::pair{x, actions};
  });
}

std::vector<double> power_stationary(const smdp::Matrix& P) {
  const std::size_t n = P.rows();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 2'000'000; ++it) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] += 0.5 * pi[i];
      for (std::size_t j = 0; j < n; ++j) next[j] += 0.5 * pi[i] * P(i, j);
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - pi[i]));
    pi = std::move(next);
    if (change < 1e-16) break;
  }
  return pi;
}

double mm1b_throughput(double lambda, double mu, double loss, int B) {
  const double rho = lambda / mu;
  double norm = 0.0;
  for (int n = 0; n <= B; ++n) norm += std::pow(rho, n);
  return mu * (1.0 - loss) * (1.0 - 1.0 / norm);
}

double ctmc_threshold_throughput(const smdp::ModelParams& params, int T) {
  const int B = params.buffer_size;
  // State 0 is empty; (n, u) for n = 1..B maps to 1 + 2 (n - 1) + slot(u).
  const auto index = [](int n, Action u) { return static_cast<Eigen::Index>(1 + 2 * (n - 1) + smdp::slot(u)); };
  const auto action = [T](int n) { return n <= T ? Action::a : Action::b; };
  const Eigen::Index size = 1 + 2 * B;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(size, size);
  Q(0, index(1, action(1))) += params.lambda;
  for (int n = 1; n <= B; ++n) {
    for (Action u : smdp::kActions) {
      const auto i = index(n, u);
      if (n < B) Q(i, index(n + 1, u)) += params.lambda;
      Q(i, n == 1 ? 0 : index(n - 1, action(n - 1))) += params.action(u).mu;
    }
  }
  for (Eigen::Index i = 0; i < size; ++i) Q(i, i) = -Q.row(i).sum();
  // pi Q = 0 with one balance equation replaced by normalisation.
  Eigen::MatrixXd A = Q.transpose();
  A.row(size - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs(size - 1) = 1.0;
  const Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
  double out = 0.0;
  for (int n = 1; n <= B; ++n) {
    for (Action u : smdp::kActions) out += pi(index(n, u)) * params.action(u).mu * (1.0 - params.action(u).loss);
  }
  return out;
}

smdp::ModelParams random_exponential_params(std::mt19937_64& rng, int max_buffer, double gamma_lo, double gamma_hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> buffer(2, max_buffer);
  smdp::ModelParams p;
  p.buffer_size = buffer(rng);
  p.action_a.mu = 1.0 + 19.0 * unit(rng);
  p.action_b.mu = p.action_a.mu * (1.05 + 1.5 * unit(rng));
  const double load = 0.1 + 2.9 * unit(rng);  // lambda / mu_a in [0.1, 3]
  p.lambda = load * p.action_a.mu;
  p.action_a.loss = 0.01 + 0.85 * unit(rng);
  p.action_b.loss = p.action_a.loss + (0.9 - p.action_a.loss) * (0.02 + 0.98 * unit(rng));
  p.gamma = gamma_lo * std::pow(gamma_hi / gamma_lo, unit(rng));
  return p;
}

}  // namespace oracle
