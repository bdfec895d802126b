#include "smdp/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "smdp/error.hpp"

namespace smdp::special {

namespace {

// log(n!) - log(sqrt(2 pi n) (n/e)^n)
double stirling_error(int n) {
  static constexpr std::array<double, 16> kTable = {
      0.0,
      0.0810614667953272582196702,
      0.0413406959554092940938221,
      0.02767792568499833914878929,
      0.02079067210376509311152277,
      0.01664469118982119216319487,
      0.01387612882307074799874573,
      0.01189670994589177009505572,
      0.010411265261972096497478567,
      0.009255462182712732917728637,
      0.008330563433362871256469318,
      0.007573675487951840794972024,
      0.006942840107209529865664152,
      0.006408994188004207068439631,
      0.005951370112758847735624416,
      0.005554733551962801371038690,
  };
  constexpr double S0 = 1.0 / 12.0;
  constexpr double S1 = 1.0 / 360.0;
  constexpr double S2 = 1.0 / 1260.0;
  constexpr double S3 = 1.0 / 1680.0;
  constexpr double S4 = 1.0 / 1188.0;
  if (n <= 15) return kTable[static_cast<std::size_t>(n)];
  const double x = n;
  const double xx = x * x;
  if (n > 500) return (S0 - S1 / xx) / x;
  if (n > 80) return (S0 - (S1 - S2 / xx) / xx) / x;
  if (n > 35) return (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x;
  return (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x;
}

// Deviance term x log(x/np) + np - x, with a series near x = np.
double deviance(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2 * x * v;
    v = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
  }
  return x * std::log(x / np) + np - x;
}

struct LegendreRule {
  std::array<double, 64> nodes{};
  std::array<double, 64> weights{};
};

LegendreRule make_rule() {
  LegendreRule rule;
  constexpr int n = 64;
  for (int i = 0; i < n / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

const LegendreRule& rule64() {
  static const LegendreRule rule = make_rule();
  return rule;
}

double gauss_legendre_once(const std::function<double(double)>& f, double lo, double hi) {
  const auto& rule = rule64();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

double adaptive(const std::function<double(double)>& f, double lo, double hi, double whole, double tol,
                int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left = gauss_legendre_once(f, lo, mid);
  const double right = gauss_legendre_once(f, mid, hi);
  const double floor = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (depth >= 24 || std::abs(left + right - whole) <= std::max(tol, floor)) return left + right;
  return adaptive(f, lo, mid, left, 0.5 * tol, depth + 1) + adaptive(f, mid, hi, right, 0.5 * tol, depth + 1);
}

}  // namespace

double poisson_pmf(int m, double mean) {
  if (m < 0) return 0.0;
  if (mean == 0.0) return m == 0 ? 1.0 : 0.0;
  if (m == 0) return std::exp(-mean);
  const double x = m;
  return std::exp(-stirling_error(m) - deviance(x, mean)) / std::sqrt(2.0 * std::numbers::pi * x);
}

double gamma_p(int a, double x) {
  if (a < 1 || !(x >= 0.0)) throw Error(ErrorCode::invalid_argument, "gamma_p requires a >= 1 and x >= 0");
  if (x == 0.0) return 0.0;
  if (x >= a + 1.0) return 1.0 - gamma_q(a, x);
  // P(a, x) = pois(a; x) * sum_n x^n / ((a+1)...(a+n))
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (term < sum * std::numeric_limits<double>::epsilon()) break;
  }
  return std::min(1.0, poisson_pmf(a, x) * sum);
}

double gamma_q(int a, double x) {
  if (a < 1 || !(x >= 0.0)) throw Error(ErrorCode::invalid_argument, "gamma_q requires a >= 1 and x >= 0");
  if (x < a + 1.0) return 1.0 - gamma_p(a, x);
  // Modified Lentz on the continued fraction for Gamma(a, x) e^x x^{-a}.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < std::numeric_limits<double>::epsilon()) break;
  }
  // e^{-x} x^a / Gamma(a) = a * pois(a; x)
  return std::min(1.0, a * poisson_pmf(a, x) * h);
}

double integrate_gauss_legendre(const std::function<double(double)>& f, double lo, double hi, double abs_tol) {
  if (hi == lo) return 0.0;
  const double whole = gauss_legendre_once(f, lo, hi);
  return adaptive(f, lo, hi, whole, abs_tol, 0);
}

}  // namespace smdp::special
