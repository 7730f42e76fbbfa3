#pragma once
// Radial symbols: the ball-indicator transform chi_hat (a Bessel profile),
// the fractional kernel symbol K_hat(r) = (chi_hat(r)-1)/r^alpha, the
// second-order symbol K2_hat(r) = (chi_hat(r)-1)/r^2 + chi_hat(r)/(2n+4),
// the auxiliary A(s)/gamma_n pair, and the smooth dyadic window pair.

#include <string>

namespace ballavg::kernels {

// Mean of e^{-i x_1 r} over the unit ball in dimension n; chi_hat(0) = 1.
// n=1: sin r / r, n=3: 3(sin r - r cos r)/r^3, n=2: 2 J_1(r)/r with a
// series/asymptotic split at r = 12.
double chi_hat(int dim, double r);

// chi_hat(r) - 1 evaluated without cancellation (series branch for r <= 1/2).
double chi_hat_minus_one(int dim, double r);

// Bessel J_1, exposed for cross-checks of the n=2 profile.
double bessel_j1(double r);

// sup over a log grid of |chi_hat(r)| (1+r)^{(n+1)/2} on [0, r_max].
double chi_hat_decay_check(int dim, double r_max);

// lim_{r->0} (chi_hat(r)-1)/r^2, extrapolated from nodes r >= 0.6 so the
// series branch is not consulted. Must equal -1/(2n+4).
double chi_hat_limit_coeff(int dim);

struct KernelFamily {
  enum class Order { fractional, second };
  Order order = Order::fractional;
  double alpha = 1.0;  // in (0,2) for the fractional family
  int dim = 1;

  static KernelFamily fractional(int dim, double alpha);
  static KernelFamily second_order(int dim);
};

// (chi_hat(r)-1)/r^alpha, value 0 at r = 0.
double K_hat_fractional(int dim, double alpha, double r);

// (chi_hat(r)-1)/r^2 + chi_hat(r)/(2n+4), value 0 at r = 0.
double K2_hat(int dim, double r);

// Symbol of the family kernel at radius r.
double family_symbol(const KernelFamily& fam, double r);

// sup over a log grid of r in [r_lo, r_hi] of |symbol(r)| / envelope(r),
// envelope = min{r^{2-a}, r^{-a}} (fractional) or min{r^2, r^{-2}} (second).
double envelope_ratio_sup(const KernelFamily& fam, double r_lo = 1e-4,
                          double r_hi = 1e4, int points_per_decade = 512);

// gamma_n = [int_0^1 (1-u^2)^{(n-1)/2} du]^{-1}, by adaptive quadrature.
double eval_gamma_n(int dim);

// A(s) = -2 gamma_n int_0^1 (1-u^2)^{(n-1)/2} sin^2(us/2) du = chi_hat(s)-1.
double eval_A(int dim, double s);

// Smooth radial cutoff pair. Theta = 1 on [0,1], 0 on [2,inf), built from
// h(s) = exp(-c/s) for s > 0. phi_hat telescopes to a dyadic partition of
// unity; psi_hat = 1 on [1/2,2] and vanishes outside [1/4,4].
class WindowPair {
 public:
  explicit WindowPair(double steepness = 1.0);
  double theta(double r) const;
  double phi_hat(double r) const;  // theta(r) - theta(2r)
  double psi_hat(double r) const;  // theta(r/2)(1 - theta(4r))
  double steepness() const { return c_; }

 private:
  double c_;
};

}  // namespace ballavg::kernels
