#pragma once

#include <functional>

namespace smdp::special {

/// Poisson probability e^{-mean} mean^m / m!, evaluated with Loader's
/// saddle-point form so it stays accurate for large counts and means.
double poisson_pmf(int m, double mean);

/// Regularized lower incomplete gamma P(a, x) for integer a >= 1. Series
/// below x = a + 1, Lentz continued fraction for Q above.
double gamma_p(int a, double x);
double gamma_q(int a, double x);

/// 64-node Gauss-Legendre rule on [lo, hi], bisected until two successive
/// levels agree to `abs_tol`.
double integrate_gauss_legendre(const std::function<double(double)>& f, double lo, double hi,
                                double abs_tol = 1e-15);

}  // namespace smdp::special
