#include <cmath>
#include <random>

#include "ballavg/kernels.hpp"
#include "ballavg/quadrature.hpp"
#include "ballavg/square_functions.hpp"
#include "doctest.h"

using namespace ballavg;
using kernels::KernelFamily;

namespace {

Field plane_wave(const Grid& g, int k_axis0) {
  Field f{g, CplxVec(g.point_count())};
  const double xi = M_PI * k_axis0 / g.half_width();
  const int N = g.samples_per_axis();
  const std::size_t slab = g.point_count() / N;
  for (int j = 0; j < N; ++j) {
    const cplx v = std::exp(cplx(0.0, g.coord(j) * xi));
    for (std::size_t i = j * slab; i < (j + 1) * slab; ++i) f.values[i] = v;
  }
  return f;
}

Field apply_power(const Field& f, double power) {
  SpectralField F = transform(f);
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
    const double r = f.grid.radius()[i];
    F.coeffs[i] *= r > 0.0 ? std::pow(r, power) : 0.0;
  }
  return inverse_transform(F);
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

// independent 1-D quadrature of C(a,n) = int |chihat-1|^2 s^{-2a-1} ds over
// the window [t_min*xi, t_max*xi]; test-only oracle for plane-wave values
double window_constant(int dim, double alpha, double xi, double t_min, double t_max) {
  auto f = [&](double t) {
    const double d = kernels::chi_hat_minus_one(dim, t * xi);
    return d * d * std::pow(t, -2.0 * alpha - 1.0);
  };
  double total = 0.0;
  double a = t_min;
  while (a < t_max) {
    const double b = std::min(2.0 * a, t_max);
    total += adaptive_simpson(f, a, b, 1e-12).value;
    a = b;
  }
  return total;
}

}  // namespace

TEST_CASE("ball average of constants and plane waves") {
  Grid g = make_grid(1, 256, 8.0);
  Field c{g, CplxVec(g.point_count(), cplx(2.5, -1.0))};
  for (double t : {0.3, 1.0, 3.9}) {
    Field b = ball_average(c, t);
    CHECK(max_abs_diff(b, c) <= 1e-12);
  }
  Field pw = plane_wave(g, 10);
  const double xi = M_PI * 10 / 8.0;
  const double t = 1.7;
  Field b = ball_average(pw, t);
  Field expect = pw;
  const double eig = kernels::chi_hat(1, t * xi);
  for (auto& v : expect.values) v *= eig;
  CHECK(max_abs_diff(b, expect) <= 1e-12);

  CHECK_THROWS(ball_average(c, 4.1));  // beyond L/2
  CHECK_THROWS(ball_average(c, -1.0));
}

TEST_CASE("spectral vs direct ball average") {
  // The count-normalized lattice rule carries an O(h t f'') boundary-window
  // error, so agreement is tested at its true order together with mutual
  // convergence under grid refinement.
  Grid g = make_grid(1, 512, 8.0);
  Field f = sample_gaussian(g, 1.0);
  for (double t : {0.5, 1.0}) {
    REQUIRE(t >= 8.0 * g.spacing());
    Field s = ball_average(f, t);
    Field d = ball_average_direct(f, t);
    CHECK(max_abs_diff(s, d) <= 8e-3);
  }
  CHECK_THROWS(ball_average_direct(f, 1.5 * g.spacing()));

  // refinement shrinks the gap (both paths converge to the same operator)
  Grid g_fine = make_grid(1, 2048, 8.0);
  Field f_fine = sample_gaussian(g_fine, 1.0);
  const double gap_coarse = max_abs_diff(ball_average(f, 0.5), ball_average_direct(f, 0.5));
  const double gap_fine =
      max_abs_diff(ball_average(f_fine, 0.5), ball_average_direct(f_fine, 0.5));
  CHECK(gap_fine <= 0.5 * gap_coarse);

  // 2-D agreement on a smooth field
  Grid g2 = make_grid(2, 64, 4.0);
  Field f2 = sample_gaussian(g2, 1.0);
  const double t2 = 1.0;
  CHECK(max_abs_diff(ball_average(f2, t2), ball_average_direct(f2, t2)) <= 8e-3);

  // constant passes through the direct path exactly
  Field c{g, CplxVec(g.point_count(), 3.0)};
  CHECK(max_abs_diff(ball_average_direct(c, 1.0), c) <= 1e-13);
}

TEST_CASE("direct ball average preserves odd symmetry around interior points") {
  // f(x) = x on the periodic box; away from the wrap the average of a linear
  // function over a symmetric point set is the function itself
  Grid g = make_grid(1, 512, 8.0);
  Field f{g, CplxVec(g.point_count())};
  for (int j = 0; j < 512; ++j) f.values[j] = g.coord(j);
  Field d = ball_average_direct(f, 0.5);
  for (int j = 200; j < 312; ++j)
    CHECK(std::abs(d.values[j] - f.values[j]) <= 1e-12);
}

TEST_CASE("difference field") {
  Grid g = make_grid(1, 256, 8.0);
  Field c{g, CplxVec(g.point_count(), 1.0)};
  Field d = difference_field(c, 1.0, 0.7);
  for (const auto& v : d.values) CHECK(std::abs(v) <= 1e-13);

  Field pw = plane_wave(g, 12);
  const double xi = M_PI * 12 / 8.0;
  const double t = 0.9, alpha = 1.3;
  Field dd = difference_field(pw, t, alpha);
  const double factor = kernels::chi_hat_minus_one(1, t * xi) / std::pow(t, alpha);
  Field expect = pw;
  for (auto& v : expect.values) v *= factor;
  CHECK(max_abs_diff(dd, expect) <= 1e-12);

  CHECK_THROWS(difference_field(c, 1.0, 2.5));
}

TEST_CASE("alpha=2 difference converges to laplacian/(2n+4)") {
  Grid g = make_grid(1, 1 << 12, 16.0);
  Field f = sample_gaussian(g, 1.0);
  Field lap6 = apply_power(f, 2.0);  // |xi|^2 f, i.e. -lap f
  for (auto& v : lap6.values) v *= -1.0 / 6.0;
  std::vector<double> lt, le;
  for (double t : {0.2, 0.1, 0.05, 0.025}) {
    Field d = difference_field(f, t, 2.0);
    le.push_back(std::log2(max_abs_diff(d, lap6)));
    lt.push_back(std::log2(t));
  }
  // O(t^2): slope 2 +- 0.1
  const double slope = (le.back() - le.front()) / (lt.back() - lt.front());
  CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
  // at x = 0 the limit is lap f(0)/6 = -1/6
  Field d = difference_field(f, 0.05, 2.0);
  CHECK(d.values[1 << 11].real() == doctest::Approx(-1.0 / 6.0).epsilon(2e-3));
}

TEST_CASE("second-order integrand special cases") {
  Grid g = make_grid(1, 1 << 11, 16.0);
  Field f = sample_gaussian(g, 1.0);
  Field lap = apply_power(f, 2.0);
  for (auto& v : lap.values) v *= -1.0;
  Field gtrue = lap;
  for (auto& v : gtrue.values) v /= 6.0;

  // with g the Taylor coefficient the integrand is O(t^2)
  std::vector<double> lt, le;
  for (double t : {0.2, 0.1, 0.05}) {
    Field r = second_order_integrand({f, gtrue}, t);
    double m = 0.0;
    for (const auto& v : r.values) m = std::max(m, std::abs(v));
    lt.push_back(std::log2(t));
    le.push_back(std::log2(m));
  }
  const double slope = (le.back() - le.front()) / (lt.back() - lt.front());
  CHECK(slope == doctest::Approx(2.0).epsilon(0.05));

  // g = 0 reduces to difference_field(f, t, 2)
  Field zero{g, CplxVec(g.point_count(), 0.0)};
  Field a = second_order_integrand({f, zero}, 0.3);
  Field b = difference_field(f, 0.3, 2.0);
  CHECK(max_abs_diff(a, b) <= 1e-12);

  // f = 0, g a plane wave: integrand is -chi_hat(t|xi|) e^{i x xi}
  Field pw = plane_wave(g, 40);
  Field r = second_order_integrand({zero, pw}, 0.5);
  const double xi = M_PI * 40 / 16.0;
  Field expect = pw;
  for (auto& v : expect.values) v *= -kernels::chi_hat(1, 0.5 * xi);
  CHECK(max_abs_diff(r, expect) <= 1e-12);
}

TEST_CASE("g-function of a plane wave matches the window constant") {
  Grid g = make_grid(1, 1 << 11, 32.0);
  Field pw = plane_wave(g, 64);  // xi = 2 pi
  const double xi = M_PI * 64 / 32.0;
  SquareFunctionSpec spec;
  spec.kind = SquareFunctionKind::g_alpha;
  spec.alpha = 0.6;
  spec.quad = TQuadrature::make(4 * g.spacing(), 16.0, 16);
  SquareFunctionResult r = g_function(pw, spec);
  // per-node eigenvalues integrate to the window constant
  const double expect =
      std::sqrt(window_constant(1, spec.alpha, xi, spec.quad.t_min, spec.quad.t_max));
  for (std::size_t i = 0; i < r.value.values.size(); i += 97)
    CHECK(r.value.values[i].real() == doctest::Approx(expect).epsilon(2e-3));

  Field zero{g, CplxVec(g.point_count(), 0.0)};
  SquareFunctionResult z = g_function(zero, spec);
  for (const auto& v : z.value.values) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("g-function dilation covariance") {
  // f_d(x) = f(d x) gives G_a(f_d)(x) = d^a G_a(f)(d x); with d = 2 realized
  // by halving the box and the t-window
  const double alpha = 0.5;
  Grid g1 = make_grid(1, 1 << 11, 16.0);
  Grid g2 = make_grid(1, 1 << 11, 8.0);
  Field f1 = sample_gaussian(g1, 1.0);
  Field f2 = sample_gaussian(g2, 0.5);
  SquareFunctionSpec s1;
  s1.kind = SquareFunctionKind::g_alpha;
  s1.alpha = alpha;
  s1.quad = TQuadrature::make(0.01, 8.0, 8);
  SquareFunctionSpec s2 = s1;
  s2.quad = TQuadrature::make(0.005, 4.0, 8);
  Field r1 = g_function(f1, s1).value;
  Field r2 = g_function(f2, s2).value;
  // at matching physical points x2 = x1/2 (same index), r2 = 2^a r1
  double max_rel = 0.0;
  for (std::size_t i = 0; i < r1.values.size(); i += 53) {
    const double a = r1.values[i].real(), b = r2.values[i].real();
    if (a > 1e-6) max_rel = std::max(max_rel, std::abs(b / (std::pow(2.0, alpha) * a) - 1.0));
  }
  CHECK(max_rel <= 0.01);
}

TEST_CASE("area function: Fubini identity and positivity") {
  Grid g = make_grid(1, 1 << 12, 32.0);
  Field f = sample_gaussian(g, 1.0);
  SquareFunctionSpec spec;
  spec.alpha = 0.5;
  spec.quad = TQuadrature::make(4 * g.spacing(), 16.0, 8);
  spec.kind = SquareFunctionKind::s_alpha;
  Field s = area_function(f, spec).value;
  spec.kind = SquareFunctionKind::g_alpha;
  Field gg = g_function(f, spec).value;
  const double ns = lp_norm(s, 2.0), ng = lp_norm(gg, 2.0);
  CHECK(ns * ns == doctest::Approx(2.0 * ng * ng).epsilon(1e-3));
  for (const auto& v : s.values) CHECK(v.real() >= 0.0);
}

TEST_CASE("second-order Fubini identity") {
  Grid g = make_grid(1, 1 << 11, 16.0);
  Field f = sample_gaussian(g, 1.0);
  Field lap = apply_power(f, 2.0);
  for (auto& v : lap.values) v *= -1.0 / 6.0;
  SecondOrderPair pair{f, lap};
  SquareFunctionSpec spec;
  spec.quad = TQuadrature::make(4 * g.spacing(), 8.0, 8);
  spec.kind = SquareFunctionKind::s_second;
  const double ns = lp_norm(area_function(pair, spec).value, 2.0);
  spec.kind = SquareFunctionKind::g_second;
  const double ng = lp_norm(g_function(pair, spec).value, 2.0);
  CHECK(ns * ns == doctest::Approx(2.0 * ng * ng).epsilon(1e-3));
}

TEST_CASE("area function sublinearity on random pairs") {
  Grid g = make_grid(1, 512, 8.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  SquareFunctionSpec spec;
  spec.kind = SquareFunctionKind::s_alpha;
  spec.alpha = 0.8;
  spec.quad = TQuadrature::make(4 * g.spacing(), 4.0, 8);
  for (int trial = 0; trial < 3; ++trial) {
    Field f1{g, CplxVec(g.point_count())}, f2{g, CplxVec(g.point_count())};
    for (auto& v : f1.values) v = {gauss(rng), gauss(rng)};
    for (auto& v : f2.values) v = {gauss(rng), gauss(rng)};
    Field sum = f1;
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += f2.values[i];
    Field s12 = area_function(sum, spec).value;
    Field s1 = area_function(f1, spec).value;
    Field s2 = area_function(f2, spec).value;
    for (std::size_t i = 0; i < s12.values.size(); ++i)
      CHECK(s12.values[i].real() <= s1.values[i].real() + s2.values[i].real() + 1e-10);
  }
}

TEST_CASE("gstar function: zero input, domination, mass bookkeeping") {
  Grid g = make_grid(1, 1 << 11, 16.0);
  SquareFunctionSpec spec;
  spec.alpha = 0.5;
  spec.lambda = 2.0;
  spec.quad = TQuadrature::make(4 * g.spacing(), 8.0, 8);

  Field zero{g, CplxVec(g.point_count(), 0.0)};
  spec.kind = SquareFunctionKind::gstar_alpha_lambda;
  SquareFunctionResult z = gstar_function(zero, spec);
  for (const auto& v : z.value.values) CHECK(std::abs(v) == 0.0);

  Field f = sample_gaussian(g, 1.0);
  SquareFunctionResult gs = gstar_function(f, spec);
  // at t near L/2 the slowly decaying weight keeps visible mass at the box
  // boundary; the deviation is reported and warned about, then normalized out
  CHECK(gs.gstar_mass_deviation < 0.5);
  CHECK(!gs.warnings.empty());

  spec.kind = SquareFunctionKind::s_alpha;
  Field s = area_function(f, spec).value;
  // kernel lower bound on the ball: w_t(y) >= 2^{-ln} t^{-n} for |y| <= t,
  // after unit-mass renormalization the constant picks up 1/(discrete mass)
  const double vn = unit_ball_volume(1);
  const double mass_hi = (1.0 + gs.gstar_mass_deviation) * 2.0 / (spec.lambda * 1 - 1.0);
  const double c = std::pow(2.0, -spec.lambda * 1) * vn / mass_hi;
  for (std::size_t i = 0; i < s.values.size(); i += 31)
    CHECK(gs.value.values[i].real() >= std::sqrt(c) * s.values[i].real() * (1.0 - 1e-9));

  CHECK_THROWS([&] {
    SquareFunctionSpec bad = spec;
    bad.kind = SquareFunctionKind::gstar_alpha_lambda;
    bad.lambda = 0.9;
    gstar_function(f, bad);
  }());
}

TEST_CASE("s-tilde reproduces the area function through the kernel identity") {
  Grid g = make_grid(1, 1 << 12, 32.0);
  kernels::WindowPair w(1.0);
  // band-limited input keeps every multiplier exact on the lattice
  Field f = sample_bump_j(g, 3, w);
  TQuadrature quad = TQuadrature::make(4 * g.spacing(), 16.0, 8);
  const double vn = unit_ball_volume(1);

  SUBCASE("fractional") {
    const double alpha = 0.5;
    Field ftilde = apply_power(f, alpha);
    SquareFunctionResult st = s_tilde(ftilde, KernelFamily::fractional(1, alpha), quad);
    SquareFunctionSpec spec;
    spec.kind = SquareFunctionKind::s_alpha;
    spec.alpha = alpha;
    spec.quad = quad;
    Field s = area_function(f, spec).value;
    double max_dev = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i)
      max_dev = std::max(max_dev, std::abs(std::sqrt(vn) * st.value.values[i].real() -
                                           s.values[i].real()));
    CHECK(max_dev <= 1e-8);
  }

  SUBCASE("second order") {
    Field ftilde = apply_power(f, 2.0);  // -lap f
    Field gpart = ftilde;
    for (auto& v : gpart.values) v *= -1.0 / 6.0;  // lap f / (2n+4)
    SquareFunctionResult st = s_tilde(ftilde, KernelFamily::second_order(1), quad);
    SquareFunctionSpec spec;
    spec.kind = SquareFunctionKind::s_second;
    spec.quad = quad;
    Field s = area_function({f, gpart}, spec).value;
    double max_dev = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i)
      max_dev = std::max(max_dev, std::abs(std::sqrt(vn) * st.value.values[i].real() -
                                           s.values[i].real()));
    CHECK(max_dev <= 1e-8);
  }

  SUBCASE("zero field") {
    Field zero{g, CplxVec(g.point_count(), 0.0)};
    SquareFunctionResult st = s_tilde(zero, KernelFamily::fractional(1, 0.5), quad);
    for (const auto& v : st.value.values) CHECK(std::abs(v) == 0.0);
  }
}

TEST_CASE("quadrature refinement and window extension stability") {
  Grid g = make_grid(1, 1 << 12, 32.0);
  Field f = sample_gaussian(g, 1.0);
  SquareFunctionSpec spec;
  spec.kind = SquareFunctionKind::s_alpha;
  spec.alpha = 0.5;
  spec.quad = TQuadrature::make(4 * g.spacing(), 16.0, 8);
  const double base = lp_norm(area_function(f, spec).value, 2.0);

  SquareFunctionSpec fine = spec;
  fine.quad = TQuadrature::make(4 * g.spacing(), 16.0, 16);
  CHECK(lp_norm(area_function(f, fine).value, 2.0) ==
        doctest::Approx(base).epsilon(0.005));

  // window sufficiency is judged from a window that already covers the
  // integrand's t-content; beyond that, one extra octave on each side moves
  // the norm by well under 1%
  SquareFunctionSpec covering = spec;
  covering.quad = TQuadrature::make(4 * g.spacing(), 512.0, 8);
  covering.allow_periodic_wrap = true;
  const double cov = lp_norm(area_function(f, covering).value, 2.0);
  SquareFunctionSpec wide = covering;
  wide.quad = TQuadrature::make(2 * g.spacing(), 1024.0, 8);
  CHECK(lp_norm(area_function(f, wide).value, 2.0) == doctest::Approx(cov).epsilon(0.01));
}

TEST_CASE("engine results are worker-count invariant") {
  Grid g = make_grid(1, 1 << 11, 16.0);
  Field f = sample_gaussian(g, 1.0);
  SquareFunctionSpec s1;
  s1.kind = SquareFunctionKind::s_alpha;
  s1.alpha = 0.7;
  s1.quad = TQuadrature::make(4 * g.spacing(), 8.0, 8);
  s1.workers = 1;
  SquareFunctionSpec s2 = s1;
  s2.workers = 3;
  Field a = area_function(f, s1).value;
  Field b = area_function(f, s2).value;
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("boundary-contribution warning fires on narrow windows") {
  Grid g = make_grid(1, 1 << 11, 16.0);
  Field f = sample_gaussian(g, 1.0);
  SquareFunctionSpec spec;
  spec.kind = SquareFunctionKind::g_alpha;
  spec.alpha = 0.5;
  spec.quad = TQuadrature::make(0.5, 2.0, 8);  // far too narrow
  SquareFunctionResult r = g_function(f, spec);
  CHECK(r.window_warning);
  CHECK(!r.warnings.empty());
}
