#pragma once
// The ball-average operator B_t and the square functions built from it:
// g-function, Lusin area function, g*_lambda function (first- and
// second-order variants) and the composite operator S-tilde, all sharing one
// t-quadrature and spectral convolution engine.

#include <string>
#include <vector>

#include "ballavg/grid.hpp"
#include "ballavg/kernels.hpp"
#include "ballavg/quadrature.hpp"

namespace ballavg {

enum class SquareFunctionKind {
  g_alpha,
  s_alpha,
  gstar_alpha_lambda,
  g_second,
  s_second,
  gstar_second,
  s_tilde_fractional,
  s_tilde_second,
};

bool is_fractional(SquareFunctionKind k);
bool is_gstar(SquareFunctionKind k);
bool is_second_order(SquareFunctionKind k);
bool needs_pair(SquareFunctionKind k);

struct SquareFunctionSpec {
  SquareFunctionKind kind = SquareFunctionKind::g_alpha;
  double alpha = 1.0;   // fractional kinds only, in (0,2)
  double lambda = 2.0;  // g*-kinds only, > 1
  TQuadrature quad;
  // B_t as a multiplier stays exact on the torus for any t; radii beyond L/2
  // average across periodic images. Experiments that need the full t-range
  // (Plancherel content) opt in explicitly.
  bool allow_periodic_wrap = false;
  int workers = 1;

  void validate(int dim) const;
};

struct SecondOrderPair {
  Field f;
  Field g;  // same grid
};

struct SquareFunctionResult {
  Field value;
  // share of the accumulated L2 mass carried by the first/last t-node
  double boundary_share_low = 0.0;
  double boundary_share_high = 0.0;
  bool window_warning = false;  // true when either share exceeds 1%
  // g* kernels are renormalized to unit discrete mass; this records the
  // largest |discrete mass / continuum mass - 1| across nodes
  double gstar_mass_deviation = 0.0;
  std::vector<std::string> warnings;
};

double unit_ball_volume(int dim);

// Spectral ball average: multiply coefficients by chi_hat(t |xi|).
Field ball_average(const Field& f, double t, bool allow_periodic_wrap = false);

// Physical-space Riemann sum over lattice points inside the ball; oracle
// path, O(points * ball volume). Requires 2h <= t <= L/2.
Field ball_average_direct(const Field& f, double t);

// (B_t f - f) / t^alpha, alpha in (0,2].
Field difference_field(const Field& f, double t, double alpha);

// (B_t f - f) / t^2 - B_t g.
Field second_order_integrand(const SecondOrderPair& p, double t);

SquareFunctionResult g_function(const Field& f, const SquareFunctionSpec& spec);
SquareFunctionResult g_function(const SecondOrderPair& p, const SquareFunctionSpec& spec);
SquareFunctionResult area_function(const Field& f, const SquareFunctionSpec& spec);
SquareFunctionResult area_function(const SecondOrderPair& p, const SquareFunctionSpec& spec);
SquareFunctionResult gstar_function(const Field& f, const SquareFunctionSpec& spec);
SquareFunctionResult gstar_function(const SecondOrderPair& p, const SquareFunctionSpec& spec);

// S-tilde(f) = { int avg_{B(0,t)} |f * K_t(x+y)|^2 dy dt/t }^{1/2} with the
// family kernel (fractional K or second-order variant).
SquareFunctionResult s_tilde(const Field& f, const kernels::KernelFamily& family,
                             const TQuadrature& quad, int workers = 1,
                             bool allow_periodic_wrap = false);

}  // namespace ballavg
