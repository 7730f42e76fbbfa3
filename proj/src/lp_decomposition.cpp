#include "ballavg/lp_decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ballavg/parallel.hpp"
#include "ballavg/simd.hpp"
#include "ballavg/square_functions.hpp"

namespace ballavg {

namespace {

// Octaves [2^{-k}, 2^{-k+1}] contained in [t_min, t_max].
std::pair<int, int> octave_range(const TQuadrature& quad) {
  const double eps = 1e-9;
  const int k_lo = static_cast<int>(std::ceil(1.0 - std::log2(quad.t_max) - eps));
  const int k_hi = static_cast<int>(std::floor(std::log2(1.0 / quad.t_min) + eps));
  return {k_lo, k_hi};
}

}  // namespace

Field BandProjection::apply(const Field& f) const { return project_band(f, j, window); }

bool band_intersects_lattice(const Grid& g, int j) {
  const double band_lo = std::pow(2.0, j - 1);
  const double band_hi = std::pow(2.0, j + 1);
  const double lattice_lo = M_PI / g.half_width();  // smallest nonzero |xi|
  const double lattice_hi = std::sqrt(static_cast<double>(g.dim())) * g.nyquist();
  return band_hi >= lattice_lo && band_lo <= lattice_hi;
}

Field project_band(const Field& f, int j, const kernels::WindowPair& w) {
  SpectralField F = transform(f);
  const RealVec& rad = f.grid.radius();
  const double scale = std::pow(2.0, -j);
  for (std::size_t i = 0; i < F.coeffs.size(); ++i)
    F.coeffs[i] *= w.phi_hat(scale * rad[i]);
  return inverse_transform(F);
}

Field apply_T_j(const Field& f, int j, const kernels::KernelFamily& family,
                const TQuadrature& quad, const kernels::WindowPair& w) {
  const Grid& g = f.grid;
  if (family.dim != g.dim())
    throw std::invalid_argument("apply_T_j: kernel family dimension mismatch");
  if (quad.t_max > 0.5 * g.half_width() * (1.0 + 1e-12))
    throw std::invalid_argument("apply_T_j: quadrature t_max exceeds L/2");
  auto [k_lo, k_hi] = octave_range(quad);
  if (k_lo > k_hi) throw std::invalid_argument("apply_T_j: empty admissible k-range");

  const std::size_t n = g.point_count();
  const int dim = g.dim();
  const RealVec& rad = g.radius();
  SpectralField fhat = transform(f);

  RealVec acc(n, 0.0);
  CplxVec banded(n), c1(n), c2(n), scratch(n);
  for (int k = k_lo; k <= k_hi; ++k) {
    if (!band_intersects_lattice(g, j + k)) continue;  // off-lattice band: zero
    const double band_scale = std::pow(2.0, -(j + k));
    double band_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double b = w.phi_hat(band_scale * rad[i]);
      banded[i] = fhat.coeffs[i] * b;
      band_max = std::max(band_max, b);
    }
    if (band_max == 0.0) continue;
    const double t_octave = std::pow(2.0, -k);
    const double ball_radius = 2.0 * t_octave;  // 2^{-k+1}
    TQuadrature oct = TQuadrature::make(t_octave, 2.0 * t_octave, quad.nodes_per_octave);
    for (double t : oct.nodes) {
      for (std::size_t i = 0; i < n; ++i)
        c1[i] = banded[i] * kernels::family_symbol(family, t * rad[i]);
      g.dft_backward(c1.data(), c2.data(), scratch);
      for (std::size_t i = 0; i < n; ++i) {
        const double re = c2[i].real(), im = c2[i].imag();
        c1[i] = re * re + im * im;
      }
      g.dft_forward(c1.data(), c2.data());
      for (std::size_t i = 0; i < n; ++i)
        c2[i] *= kernels::chi_hat(dim, ball_radius * rad[i]);
      g.dft_backward(c2.data(), c1.data(), scratch);
      simd::accum_real(acc.data(), c1.data(), oct.weight, n);
    }
  }
  Field out{g, CplxVec(n)};
  for (std::size_t i = 0; i < n; ++i) out.values[i] = std::sqrt(std::max(0.0, acc[i]));
  return out;
}

Field random_band_limited(const Grid& g, double band_lo, double band_hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField F{g, CplxVec(g.point_count())};
  const RealVec& rad = g.radius();
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
    if (rad[i] >= band_lo && rad[i] < band_hi) {
      const double re = gauss(rng), im = gauss(rng);
      F.coeffs[i] = cplx(re, im);
    }
  }
  return inverse_transform(F);
}

DecayReport measure_decay(const Grid& g, const kernels::KernelFamily& family,
                          const TQuadrature& quad, const kernels::WindowPair& w,
                          const DecayConfig& cfg, const std::vector<Field>* dictionary) {
  const bool p2 = cfg.p == 2.0;
  if (!(cfg.p > 1.0) || std::isinf(cfg.p))
    throw std::invalid_argument("measure_decay: requires p in (1, inf)");
  if (p2 && cfg.trials < 10)
    throw std::invalid_argument("measure_decay: requires trials >= 10");
  if (!p2 && (!dictionary || dictionary->empty()))
    throw std::invalid_argument("measure_decay: p != 2 requires a dictionary");
  if (cfg.j_hi - cfg.j_lo + 1 < 3)
    throw std::invalid_argument("measure_decay: fewer than 3 j values");

  const bool frac = family.order == kernels::KernelFamily::Order::fractional;
  DecayReport rep;
  rep.p = cfg.p;
  rep.seed = cfg.seed;
  rep.predicted_slope_pos = frac ? -family.alpha : -2.0;
  rep.predicted_slope_neg = frac ? (2.0 - family.alpha) : 2.0;

  std::vector<Field> inputs;
  if (p2) {
    inputs.reserve(cfg.trials);
    for (int t = 0; t < cfg.trials; ++t)
      inputs.push_back(random_band_limited(g, cfg.band_lo, cfg.band_hi,
                                           cfg.seed + 0x9e3779b97f4a7c15ULL * (t + 1)));
  } else {
    inputs = *dictionary;
  }
  std::vector<double> input_norms(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) input_norms[i] = lp_norm(inputs[i], cfg.p);

  const int n_j = cfg.j_hi - cfg.j_lo + 1;
  rep.rows.resize(n_j);
  // (j, input) jobs are independent; rows are filled by index so results are
  // identical at any worker count.
  std::vector<std::vector<double>> ratios(n_j, std::vector<double>(inputs.size(), 0.0));
  run_chunks(static_cast<std::size_t>(n_j) * inputs.size(), cfg.workers, [&](std::size_t job) {
    const int jj = static_cast<int>(job / inputs.size());
    const std::size_t fi = job % inputs.size();
    const int j = cfg.j_lo + jj;
    Field tj = apply_T_j(inputs[fi], j, family, quad, w);
    ratios[jj][fi] = lp_norm(tj, cfg.p) / input_norms[fi];
  });

  double env_const = 0.0;
  for (int jj = 0; jj < n_j; ++jj) {
    const int j = cfg.j_lo + jj;
    const auto& rs = ratios[jj];
    DecayRow row;
    row.j = j;
    row.ratio_min = *std::min_element(rs.begin(), rs.end());
    row.ratio_max = *std::max_element(rs.begin(), rs.end());
    double s = 0.0;
    for (double r : rs) s += r;
    row.ratio_mean = p2 ? s / rs.size() : row.ratio_max;  // dictionary: lower-bound max
    row.envelope = frac ? std::min(std::pow(2.0, -family.alpha * j),
                                   std::pow(2.0, (2.0 - family.alpha) * j))
                        : std::pow(2.0, -2.0 * std::abs(j));
    env_const = std::max(env_const, row.ratio_max / row.envelope);
    rep.rows[jj] = row;
  }
  rep.envelope_constant = env_const;

  std::vector<double> xp, yp, xn, yn;
  for (const DecayRow& r : rep.rows) {
    if (r.ratio_mean <= 0.0) continue;
    if (r.j > 0) {
      xp.push_back(r.j);
      yp.push_back(std::log2(r.ratio_mean));
    } else if (r.j < 0) {
      xn.push_back(r.j);
      yn.push_back(std::log2(r.ratio_mean));
    }
  }
  if (xp.size() < 3 || xn.size() < 3)
    throw std::runtime_error("measure_decay: fewer than 3 usable j values per side (fit degeneracy)");
  rep.slope_pos = fit_line(xp, yp);
  rep.slope_neg = fit_line(xn, yn);
  return rep;
}

}  // namespace ballavg
