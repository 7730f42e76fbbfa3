#include "ballavg/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "ballavg/kernels.hpp"
#include "ballavg/simd.hpp"

namespace ballavg {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

constexpr std::size_t kNormBlock = 8192;

}  // namespace

Grid::Data::~Data() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd));
  if (plan_bwd) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd));
}

Grid Grid::make(int dim, int samples_per_axis, double half_width) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("grid: dim must be 1, 2 or 3, got " + std::to_string(dim));
  if (!is_power_of_two(samples_per_axis) || samples_per_axis < 8)
    throw std::invalid_argument("grid: samples_per_axis must be a power of two >= 8, got " +
                                std::to_string(samples_per_axis));
  if (!(half_width > 0.0))
    throw std::invalid_argument("grid: half_width must be positive");

  auto d = std::make_shared<Data>();
  d->dim = dim;
  d->n_axis = samples_per_axis;
  d->half_width = half_width;
  d->spacing = 2.0 * half_width / samples_per_axis;
  d->nyquist = M_PI / d->spacing;
  std::size_t count = 1;
  for (int a = 0; a < dim; ++a) count *= static_cast<std::size_t>(samples_per_axis);
  d->count = count;

  const int N = samples_per_axis;
  const double dxi = M_PI / half_width;
  std::vector<double> axis_freq(N);
  for (int m = 0; m < N; ++m) {
    const int k = (m <= N / 2 - 1) ? m : m - N;
    axis_freq[m] = dxi * k;
  }

  d->radius.resize(count);
  d->fwd_scale.resize(count);
  d->inv_scale.resize(count);
  const double hn = std::pow(d->spacing, dim);
  const double inv_hn_Nn = 1.0 / (hn * static_cast<double>(count));
  std::size_t idx = 0;
  int mi[3] = {0, 0, 0};
  for (;;) {
    double r2 = 0.0;
    int ksum = 0;
    for (int a = 0; a < dim; ++a) {
      const double f = axis_freq[mi[a]];
      r2 += f * f;
      ksum += mi[a];
    }
    const double sgn = (ksum & 1) ? -1.0 : 1.0;
    d->radius[idx] = std::sqrt(r2);
    d->fwd_scale[idx] = sgn * hn;
    d->inv_scale[idx] = sgn * inv_hn_Nn;
    ++idx;
    int a = dim - 1;
    while (a >= 0 && ++mi[a] == N) mi[a--] = 0;
    if (a < 0) break;
  }

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    CplxVec in(count), out(count);
    int dims[3] = {N, N, N};
    d->plan_fwd = fftw_plan_dft(dim, dims, reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE);
    d->plan_bwd = fftw_plan_dft(dim, dims, reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                FFTW_ESTIMATE);
    if (!d->plan_fwd || !d->plan_bwd) throw std::runtime_error("grid: fftw planning failed");
  }
  return Grid(std::move(d));
}

double Grid::freq(int m) const {
  const int N = d_->n_axis;
  const int k = (m <= N / 2 - 1) ? m : m - N;
  return M_PI * k / d_->half_width;
}

const RealVec& Grid::coord_radius() const {
  std::call_once(d_->coord_once, [this] {
    const Data& d = *d_;
    RealVec cr(d.count);
    const int N = d.n_axis;
    std::vector<double> ax(N);
    for (int j = 0; j < N; ++j) ax[j] = -d.half_width + d.spacing * j;
    std::size_t idx = 0;
    int mi[3] = {0, 0, 0};
    for (;;) {
      double r2 = 0.0;
      for (int a = 0; a < d.dim; ++a) r2 += ax[mi[a]] * ax[mi[a]];
      cr[idx++] = std::sqrt(r2);
      int a = d.dim - 1;
      while (a >= 0 && ++mi[a] == N) mi[a--] = 0;
      if (a < 0) break;
    }
    d.coord_radius = std::move(cr);
  });
  return d_->coord_radius;
}

void Grid::dft_forward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(d_->plan_fwd),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  simd::mul_real(out, d_->fwd_scale.data(), d_->count);
}

void Grid::dft_backward(const cplx* coeffs, cplx* out, CplxVec& scratch) const {
  scratch.resize(d_->count);
  if (scratch.data() != coeffs) {
    std::copy(coeffs, coeffs + d_->count, scratch.begin());
  }
  simd::mul_real(scratch.data(), d_->inv_scale.data(), d_->count);
  fftw_execute_dft(static_cast<fftw_plan>(d_->plan_bwd),
                   reinterpret_cast<fftw_complex*>(scratch.data()),
                   reinterpret_cast<fftw_complex*>(out));
}

Grid make_grid(int dim, int samples_per_axis, double half_width) {
  return Grid::make(dim, samples_per_axis, half_width);
}

SpectralField transform(const Field& f) {
  if (f.values.size() != f.grid.point_count())
    throw std::invalid_argument("transform: field size does not match grid");
  SpectralField F{f.grid, CplxVec(f.grid.point_count())};
  f.grid.dft_forward(f.values.data(), F.coeffs.data());
  return F;
}

Field inverse_transform(const SpectralField& F) {
  if (F.coeffs.size() != F.grid.point_count())
    throw std::invalid_argument("inverse_transform: coefficient count does not match grid");
  Field f{F.grid, CplxVec(F.grid.point_count())};
  CplxVec scratch;
  F.grid.dft_backward(F.coeffs.data(), f.values.data(), scratch);
  return f;
}

SpectralField apply_radial_multiplier(const SpectralField& F, const RadialSymbol& m) {
  const Grid& g = F.grid;
  const double needed = std::sqrt(static_cast<double>(g.dim())) * g.nyquist();
  if (m.max_radius < needed)
    throw std::invalid_argument("apply_radial_multiplier: symbol '" + m.name +
                                "' not defined up to lattice radius " + std::to_string(needed));
  SpectralField out{g, F.coeffs};
  const RealVec& rad = g.radius();
  RealVec sym(g.point_count());
  for (std::size_t i = 0; i < sym.size(); ++i) {
    const double v = m.eval(rad[i]);
    if (!std::isfinite(v))
      throw std::runtime_error("apply_radial_multiplier: symbol '" + m.name +
                               "' evaluated non-finite at r = " + std::to_string(rad[i]));
    sym[i] = v;
  }
  simd::mul_real(out.coeffs.data(), sym.data(), out.coeffs.size());
  return out;
}

Field sample_gaussian(const Grid& g, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("sample_gaussian: width must be positive");
  Field f{g, CplxVec(g.point_count())};
  const RealVec& cr = g.coord_radius();
  const double inv2w2 = 1.0 / (2.0 * width * width);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = std::exp(-cr[i] * cr[i] * inv2w2);
  return f;
}

int max_bump_index(const Grid& g) {
  // 2^{j+2} <= 0.9 pi/h
  return static_cast<int>(std::floor(std::log2(0.9 * g.nyquist()))) - 2;
}

Field sample_bump_j(const Grid& g, int j, const kernels::WindowPair& w) {
  if (j > max_bump_index(g))
    throw std::invalid_argument(
        "sample_bump_j: frequency support of bump j=" + std::to_string(j) +
        " overflows the lattice (max admissible j = " + std::to_string(max_bump_index(g)) + ")");
  const double scale = std::pow(2.0, -j);
  SpectralField F{g, CplxVec(g.point_count())};
  const RealVec& rad = g.radius();
  for (std::size_t i = 0; i < F.coeffs.size(); ++i)
    F.coeffs[i] = w.psi_hat(scale * rad[i]);
  return inverse_transform(F);
}

double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: requires p >= 1");
  const std::size_t n = f.values.size();
  const cplx* z = f.values.data();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t lo = 0; lo < n; lo += kNormBlock)
      m = std::max(m, simd::max_sqmag(z + lo, std::min(kNormBlock, n - lo)));
    return std::sqrt(m);
  }
  const double hn = std::pow(f.grid.spacing(), f.grid.dim());
  double total = 0.0;
  if (p == 2.0) {
    for (std::size_t lo = 0; lo < n; lo += kNormBlock)
      total += simd::sum_sqmag(z + lo, std::min(kNormBlock, n - lo));
  } else if (p == 1.0) {
    for (std::size_t lo = 0; lo < n; lo += kNormBlock)
      total += simd::sum_abs(z + lo, std::min(kNormBlock, n - lo));
  } else {
    for (std::size_t lo = 0; lo < n; lo += kNormBlock)
      total += simd::sum_abs_pow(z + lo, p, std::min(kNormBlock, n - lo));
  }
  return std::pow(total * hn, 1.0 / p);
}

cplx mean_value(const Field& f) {
  cplx s = 0.0;
  for (const cplx& v : f.values) s += v;
  return s / static_cast<double>(f.values.size());
}

}  // namespace ballavg
