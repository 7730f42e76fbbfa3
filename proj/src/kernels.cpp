#include "ballavg/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ballavg/quadrature.hpp"

namespace ballavg::kernels {

namespace {

void require_dim(int dim) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("kernels: unsupported dimension " + std::to_string(dim));
}

// J_1 by power series, accurate to ~1e-12 absolute for r <= 12.
double j1_series(double r) {
  const double q = -0.25 * r * r;
  double term = 0.5 * r;  // k = 0 term of (r/2) sum q^k/(k!(k+1)!)
  double sum = term;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (std::abs(term) < 1e-17 * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

// Hankel asymptotic expansion for r > 12. Coefficients A_m follow
// A_m = A_{m-1} (mu - (2m-1)^2) / (8m) with mu = 4; the P series takes the
// even m with alternating sign, Q the odd ones.
double j1_asymptotic(double r) {
  static const std::vector<double> A = [] {
    std::vector<double> a(17);
    a[0] = 1.0;
    for (int m = 1; m < 17; ++m) {
      const double t = 4.0 - (2.0 * m - 1.0) * (2.0 * m - 1.0);
      a[m] = a[m - 1] * t / (8.0 * m);
    }
    return a;
  }();
  const double inv_r = 1.0 / r;
  double P = 0.0, Q = 0.0;
  double sgn = 1.0;
  for (int k = 0; k <= 7; ++k) {
    P += sgn * A[2 * k] * std::pow(inv_r, 2 * k);
    Q += sgn * A[2 * k + 1] * std::pow(inv_r, 2 * k + 1);
    sgn = -sgn;
  }
  const double w = r - 0.75 * M_PI;
  return std::sqrt(2.0 / (M_PI * r)) * (P * std::cos(w) - Q * std::sin(w));
}

// sum_{k>=1} prod_{i<=k} (-r^2/2)/(i (n+2i)); equals chi_hat - 1, no
// cancellation. Converges fast for r <= 1/2.
double cm1_series(int dim, double r) {
  const double q = -0.5 * r * r;
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k < 24; ++k) {
    term *= q / (static_cast<double>(k) * (dim + 2 * k));
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum;
}

double chi_hat_closed(int dim, double r) {
  switch (dim) {
    case 1:
      return std::sin(r) / r;
    case 2:
      return 2.0 * bessel_j1(r) / r;
    default:
      return 3.0 * (std::sin(r) - r * std::cos(r)) / (r * r * r);
  }
}

}  // namespace

double bessel_j1(double r) {
  const double a = std::abs(r);
  const double v = (a <= 12.0) ? j1_series(a) : j1_asymptotic(a);
  return r < 0 ? -v : v;
}

double chi_hat(int dim, double r) {
  require_dim(dim);
  if (!(r >= 0.0)) throw std::invalid_argument("chi_hat: requires r >= 0");
  if (r <= 0.5) return 1.0 + cm1_series(dim, r);
  return chi_hat_closed(dim, r);
}

double chi_hat_minus_one(int dim, double r) {
  require_dim(dim);
  if (r <= 0.5) return cm1_series(dim, r);
  return chi_hat_closed(dim, r) - 1.0;
}

double chi_hat_decay_check(int dim, double r_max) {
  require_dim(dim);
  if (!(r_max >= 10.0)) throw std::invalid_argument("chi_hat_decay_check: requires r_max >= 10");
  const double expo = 0.5 * (dim + 1);
  double sup = 1.0;  // r = 0 gives chi_hat = 1, weight 1
  const int per_decade = 512;
  const double lo = 1e-2;
  const long steps = std::lround(std::ceil(per_decade * std::log10(r_max / lo)));
  for (long i = 0; i <= steps; ++i) {
    const double r = lo * std::pow(r_max / lo, static_cast<double>(i) / steps);
    const double v = std::abs(chi_hat(dim, r)) * std::pow(1.0 + r, expo);
    if (v > sup) sup = v;
  }
  return sup;
}

double chi_hat_limit_coeff(int dim) {
  require_dim(dim);
  // Neville extrapolation to r^2 = 0 on nodes r in [0.6, 1.2]; all nodes sit
  // on the closed-form branch so the small-r series is not consulted.
  constexpr int m = 7;
  double x[m], f[m];
  for (int i = 0; i < m; ++i) {
    const double r = 0.6 + 0.1 * i;
    x[i] = r * r;
    f[i] = (chi_hat(dim, r) - 1.0) / (r * r);
  }
  double prev = f[0];
  for (int level = 1; level < m; ++level) {
    for (int i = 0; i < m - level; ++i) {
      f[i] = f[i + 1] + x[i + level] * (f[i] - f[i + 1]) / (x[i + level] - x[i]);
    }
    prev = (level == m - 2) ? f[0] : prev;
  }
  if (std::abs(f[0] - prev) > 1e-8 * std::max(1.0, std::abs(f[0])))
    throw std::runtime_error("chi_hat_limit_coeff: extrapolation did not converge");
  return f[0];
}

KernelFamily KernelFamily::fractional(int dim, double alpha) {
  require_dim(dim);
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("KernelFamily: fractional alpha must lie in (0,2)");
  return {Order::fractional, alpha, dim};
}

KernelFamily KernelFamily::second_order(int dim) {
  require_dim(dim);
  return {Order::second, 2.0, dim};
}

double K_hat_fractional(int dim, double alpha, double r) {
  if (r <= 0.0) return 0.0;
  return chi_hat_minus_one(dim, r) / std::pow(r, alpha);
}

double K2_hat(int dim, double r) {
  if (r <= 0.0) return 0.0;
  const double cm1 = chi_hat_minus_one(dim, r);
  return cm1 / (r * r) + (1.0 + cm1) / (2.0 * dim + 4.0);
}

double family_symbol(const KernelFamily& fam, double r) {
  return fam.order == KernelFamily::Order::fractional
             ? K_hat_fractional(fam.dim, fam.alpha, r)
             : K2_hat(fam.dim, r);
}

double envelope_ratio_sup(const KernelFamily& fam, double r_lo, double r_hi,
                          int points_per_decade) {
  const double a = fam.order == KernelFamily::Order::fractional ? fam.alpha : 2.0;
  double sup = 0.0;
  const long steps = std::lround(std::ceil(points_per_decade * std::log10(r_hi / r_lo)));
  for (long i = 0; i <= steps; ++i) {
    const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / steps);
    const double env = std::min(std::pow(r, 2.0 - a), std::pow(r, -a));
    const double v = std::abs(family_symbol(fam, r)) / env;
    if (v > sup) sup = v;
  }
  return sup;
}

double eval_gamma_n(int dim) {
  require_dim(dim);
  // int_0^1 (1-u^2)^{(n-1)/2} du = int_0^{pi/2} cos^n(theta) dtheta
  auto f = [dim](double th) { return std::pow(std::cos(th), dim); };
  QuadResult q = adaptive_simpson(f, 0.0, 0.5 * M_PI, 1e-13);
  if (!q.converged) throw std::runtime_error("eval_gamma_n: quadrature did not converge");
  return 1.0 / q.value;
}

double eval_A(int dim, double s) {
  require_dim(dim);
  if (!(s >= 0.0)) throw std::invalid_argument("eval_A: requires s >= 0");
  if (s == 0.0) return 0.0;
  const double gn = eval_gamma_n(dim);
  auto f = [dim, s](double th) {
    const double x = std::sin(0.5 * s * std::sin(th));
    return std::pow(std::cos(th), dim) * x * x;
  };
  QuadResult q = adaptive_simpson(f, 0.0, 0.5 * M_PI, 1e-12);
  if (!q.converged) throw std::runtime_error("eval_A: quadrature did not converge");
  return -2.0 * gn * q.value;
}

WindowPair::WindowPair(double steepness) : c_(steepness) {
  if (!(steepness > 0.0)) throw std::invalid_argument("WindowPair: steepness must be positive");
}

double WindowPair::theta(double r) const {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = std::exp(-c_ / (2.0 - r));
  const double b = std::exp(-c_ / (r - 1.0));
  return a / (a + b);
}

double WindowPair::phi_hat(double r) const { return theta(r) - theta(2.0 * r); }

double WindowPair::psi_hat(double r) const { return theta(0.5 * r) * (1.0 - theta(4.0 * r)); }

}  // namespace ballavg::kernels
