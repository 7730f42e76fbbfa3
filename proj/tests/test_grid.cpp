#include <cmath>
#include <random>

#include "ballavg/grid.hpp"
#include "ballavg/kernels.hpp"
#include "doctest.h"

using namespace ballavg;

namespace {

Field plane_wave(const Grid& g, int k_axis0) {
  // e^{i x xi} with xi = pi k / L on the first axis
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

}  // namespace

TEST_CASE("make_grid validates its arguments") {
  Grid g = make_grid(1, 16, 8.0);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.freq(1) == doctest::Approx(M_PI / 8.0));
  CHECK(g.freq(8) == doctest::Approx(-M_PI));  // k = -N/2
  CHECK(g.nyquist() == doctest::Approx(M_PI));

  Grid g2 = make_grid(2, 8, 4.0);
  CHECK(g2.spacing() == doctest::Approx(1.0));
  CHECK(g2.point_count() == 64);

  CHECK_THROWS(make_grid(1, 10, 8.0));  // not a power of two
  CHECK_THROWS(make_grid(1, 4, 8.0));   // below 8
  CHECK_THROWS(make_grid(0, 16, 8.0));
  CHECK_THROWS(make_grid(4, 16, 8.0));
  CHECK_THROWS(make_grid(1, 16, -1.0));
  // h N = 2L exactly
  CHECK(g.spacing() * 16 == 2.0 * 8.0);
}

TEST_CASE("transform of constants and plane waves") {
  Grid g = make_grid(1, 64, 8.0);
  Field one{g, CplxVec(g.point_count(), 1.0)};
  SpectralField F = transform(one);
  CHECK(F.coeffs[0].real() == doctest::Approx(16.0).epsilon(1e-13));  // 2L at xi=0
  for (std::size_t i = 1; i < F.coeffs.size(); ++i) CHECK(std::abs(F.coeffs[i]) <= 1e-12 * 16.0);

  Field pw = plane_wave(g, 5);
  SpectralField P = transform(pw);
  CHECK(P.coeffs[5].real() == doctest::Approx(16.0).epsilon(1e-13));
  double off = 0.0;
  for (std::size_t i = 0; i < P.coeffs.size(); ++i)
    if (i != 5) off = std::max(off, std::abs(P.coeffs[i]));
  CHECK(off <= 1e-12 * 16.0);
}

TEST_CASE("gaussian transform pair") {
  Grid g = make_grid(1, 1 << 12, 32.0);
  Field f = sample_gaussian(g, 1.0);
  SpectralField F = transform(f);
  // hat f(xi) = sqrt(2 pi) exp(-xi^2/2)
  for (int m : {0, 1, 7, 100, 300}) {
    const double xi = g.freq(m);
    const double expect = std::sqrt(2.0 * M_PI) * std::exp(-0.5 * xi * xi);
    CHECK(std::abs(F.coeffs[m] - expect) <= 1e-10 * std::sqrt(2.0 * M_PI));
  }
}

TEST_CASE("round trip and Plancherel on random fields") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  for (int dim : {1, 2, 3}) {
    Grid g = make_grid(dim, dim == 3 ? 16 : 64, 5.0);
    Field f{g, CplxVec(g.point_count())};
    for (auto& v : f.values) v = {gauss(rng), gauss(rng)};
    SpectralField F = transform(f);
    Field back = inverse_transform(F);
    double max_err = 0.0, max_val = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      max_err = std::max(max_err, std::abs(back.values[i] - f.values[i]));
      max_val = std::max(max_val, std::abs(f.values[i]));
    }
    CHECK(max_err <= 1e-12 * max_val);

    const double hn = std::pow(g.spacing(), dim);
    const double dxin = std::pow(M_PI / g.half_width(), dim);
    double phys = 0.0, spec = 0.0;
    for (const auto& v : f.values) phys += std::norm(v) * hn;
    for (const auto& v : F.coeffs) spec += std::norm(v) * dxin;
    spec /= std::pow(2.0 * M_PI, dim);
    CHECK(phys == doctest::Approx(spec).epsilon(1e-10));
  }
}

TEST_CASE("real fields stay real through a spectral round trip") {
  Grid g = make_grid(2, 32, 4.0);
  Field f = sample_gaussian(g, 0.7);
  Field back = inverse_transform(transform(f));
  double max_imag = 0.0, max_mod = 0.0;
  for (const auto& v : back.values) {
    max_imag = std::max(max_imag, std::abs(v.imag()));
    max_mod = std::max(max_mod, std::abs(v));
  }
  CHECK(max_imag <= 1e-12 * max_mod);
}

TEST_CASE("radial multiplier identities") {
  Grid g = make_grid(1, 128, 8.0);
  Field pw = plane_wave(g, 9);
  SpectralField P = transform(pw);

  RadialSymbol ident{[](double) { return 1.0; }, "one"};
  SpectralField Q = apply_radial_multiplier(P, ident);
  for (std::size_t i = 0; i < Q.coeffs.size(); ++i) CHECK(Q.coeffs[i] == P.coeffs[i]);

  RadialSymbol rsq{[](double r) { return r * r; }, "laplace_symbol"};
  SpectralField R = apply_radial_multiplier(P, rsq);
  const double xi = M_PI * 9 / 8.0;
  CHECK(R.coeffs[9].real() == doctest::Approx(xi * xi * 16.0).epsilon(1e-12));

  // diagonal composition: applying m1 then m2 equals applying m1*m2
  RadialSymbol m1{[](double r) { return std::cos(r); }, "m1"};
  RadialSymbol m2{[](double r) { return 1.0 / (1.0 + r * r); }, "m2"};
  RadialSymbol m12{[](double r) { return std::cos(r) / (1.0 + r * r); }, "m12"};
  Field f = sample_gaussian(g, 1.0);
  SpectralField A = apply_radial_multiplier(apply_radial_multiplier(transform(f), m1), m2);
  SpectralField B = apply_radial_multiplier(transform(f), m12);
  for (std::size_t i = 0; i < A.coeffs.size(); ++i)
    CHECK(std::abs(A.coeffs[i] - B.coeffs[i]) <= 1e-12);

  RadialSymbol narrow{[](double r) { return r; }, "narrow", 1.0};
  CHECK_THROWS(apply_radial_multiplier(P, narrow));
}

TEST_CASE("bump sampling: support, reality, norm band") {
  Grid g = make_grid(1, 1 << 13, 32.0);
  kernels::WindowPair w(1.0);

  CHECK(max_bump_index(g) == 6);  // 2^{j+2} <= 0.9 pi/h with h = 2^-7
  CHECK_THROWS(sample_bump_j(g, max_bump_index(g) + 1, w));

  for (int j : {3, 4, 5, 6}) {
    Field phi = sample_bump_j(g, j, w);
    SpectralField F = transform(phi);
    double leak = 0.0;
    for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
      const double r = g.radius()[i];
      const double lo = std::pow(2.0, j - 2), hi = std::pow(2.0, j + 2);
      if (r < lo * (1 - 1e-9) || r > hi * (1 + 1e-9)) leak = std::max(leak, std::abs(F.coeffs[i]));
    }
    CHECK(leak <= 1e-12);
    double max_imag = 0.0, max_mod = 0.0;
    for (const auto& v : phi.values) {
      max_imag = std::max(max_imag, std::abs(v.imag()));
      max_mod = std::max(max_mod, std::abs(v));
    }
    CHECK(max_imag <= 1e-12 * max_mod);
  }

  // ||phi_j||_p / 2^{jn(1-1/p)} stays within a fixed band over admissible j
  for (double p : {1.3, 2.0}) {
    double lo = 1e300, hi = 0.0;
    for (int j : {2, 3, 4, 5, 6}) {
      Field phi = sample_bump_j(g, j, w);
      const double scaled = lp_norm(phi, p) / std::pow(2.0, j * (1.0 - 1.0 / p));
      lo = std::min(lo, scaled);
      hi = std::max(hi, scaled);
    }
    CHECK(hi / lo <= 1.05);
  }
}

TEST_CASE("lp norms") {
  Grid g = make_grid(1, 64, 8.0);
  Field one{g, CplxVec(g.point_count(), 1.0)};
  CHECK(lp_norm(one, 1.0) == doctest::Approx(16.0).epsilon(1e-14));

  Field pw = plane_wave(g, 3);
  for (double p : {1.0, 2.0, 3.5}) {
    CHECK(lp_norm(pw, p) == doctest::Approx(std::pow(16.0, 1.0 / p)).epsilon(1e-13));
  }
  CHECK(lp_norm(pw, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));

  Grid gf = make_grid(1, 1 << 12, 32.0);
  Field gauss = sample_gaussian(gf, 1.0);
  CHECK(lp_norm(gauss, 2.0) == doctest::Approx(std::pow(M_PI, 0.25)).epsilon(1e-8));

  // absolute homogeneity
  Field scaled = gauss;
  for (auto& v : scaled.values) v *= -2.5;
  CHECK(lp_norm(scaled, 1.7) == doctest::Approx(2.5 * lp_norm(gauss, 1.7)).epsilon(1e-13));

  CHECK_THROWS(lp_norm(one, 0.5));
}

TEST_CASE("grid center and gaussian peak") {
  Grid g = make_grid(1, 16, 8.0);
  CHECK(g.coord(8) == doctest::Approx(0.0));
  Field f = sample_gaussian(g, 1.0);
  CHECK(f.values[8].real() == doctest::Approx(1.0));
}
