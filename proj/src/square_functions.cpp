#include "ballavg/square_functions.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <stdexcept>

#include "ballavg/parallel.hpp"
#include "ballavg/simd.hpp"

namespace ballavg {

namespace {

using kernels::KernelFamily;

double sum_real(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

// Continuum mass of the g* weight, int_{R^n} (1+|u|)^{-lambda n} du.
double gstar_continuum_mass(int dim, double lambda) {
  const double ln = lambda * dim;
  switch (dim) {
    case 1:
      return 2.0 / (ln - 1.0);
    case 2:
      // 2 pi int_0^inf r (1+r)^{-ln} dr = 2 pi [1/((ln-1)(ln-2)) ... ]
      return 2.0 * M_PI * (1.0 / ((ln - 1.0) * (ln - 2.0)));
    default:
      // 4 pi int_0^inf r^2 (1+r)^{-ln} dr
      return 4.0 * M_PI * 2.0 / ((ln - 1.0) * (ln - 2.0) * (ln - 3.0));
  }
}

struct NodeSlot {
  CplxVec c1, c2, c3;
  RealVec contrib;
};

// One engine pass: contributions are computed per node (parallel over a
// window of slots) and accumulated strictly in node order, so results do not
// depend on the worker count.
struct EnginePass {
  const Grid& grid;
  const TQuadrature& quad;
  int workers;
  // fills slot.contrib with the node's (unweighted) integrand contribution
  std::function<void(double t, NodeSlot& slot)> node_fn;

  void run(RealVec& acc, std::vector<double>& node_share, double outer_weight) {
    const std::size_t n = grid.point_count();
    const std::size_t n_nodes = quad.nodes.size();
    acc.assign(n, 0.0);
    node_share.assign(n_nodes, 0.0);
    const int w = std::max(1, workers);
    std::vector<NodeSlot> slots(std::min<std::size_t>(w, n_nodes));
    for (auto& s : slots) {
      s.c1.resize(n);
      s.c2.resize(n);
      s.c3.resize(n);
      s.contrib.resize(n);
    }
    for (std::size_t base = 0; base < n_nodes; base += slots.size()) {
      const std::size_t count = std::min(slots.size(), n_nodes - base);
      run_chunks(count, w, [&](std::size_t s) {
        node_fn(quad.nodes[base + s], slots[s]);
      });
      for (std::size_t s = 0; s < count; ++s) {
        const double wgt = quad.weight * outer_weight;
        simd::accum_scaled(acc.data(), slots[s].contrib.data(), wgt, n);
        node_share[base + s] = wgt * sum_real(slots[s].contrib.data(), n);
      }
    }
  }
};

enum class Integrand { fractional, second, family };

struct ComputeConfig {
  Integrand integrand;
  double alpha = 0.0;           // fractional
  KernelFamily family;          // family integrand
  enum class Outer { pointwise, ball, gstar } outer;
  double lambda = 0.0;          // gstar
  double outer_weight = 1.0;    // e.g. |B(0,1)| for area functions
  bool allow_wrap = false;
};

SquareFunctionResult compute(const Field& f, const Field* gpart, const TQuadrature& quad,
                             int workers, const ComputeConfig& cfg) {
  const Grid& grid = f.grid;
  if (f.values.size() != grid.point_count())
    throw std::invalid_argument("square function: field size mismatch");
  if (gpart && !gpart->grid.same_as(grid))
    throw std::invalid_argument("square function: pair fields live on different grids");
  if (!cfg.allow_wrap && quad.t_max > 0.5 * grid.half_width() * (1.0 + 1e-12))
    throw std::invalid_argument("square function: t_max exceeds L/2 (periodic wrap not allowed)");

  SpectralField fhat = transform(f);
  std::optional<SpectralField> ghat;
  if (gpart) ghat = transform(*gpart);

  const RealVec& rad = grid.radius();
  const RealVec& crad = grid.coord_radius();
  const std::size_t n = grid.point_count();
  const int dim = grid.dim();
  const double hn = std::pow(grid.spacing(), dim);
  const double cont_mass =
      cfg.outer == ComputeConfig::Outer::gstar ? gstar_continuum_mass(dim, cfg.lambda) : 0.0;

  double mass_dev = 0.0;

  EnginePass pass{grid, quad, workers, {}};
  pass.node_fn = [&](double t, NodeSlot& slot) {
    // spectral integrand
    switch (cfg.integrand) {
      case Integrand::fractional: {
        const double ta = std::pow(t, -cfg.alpha);
        for (std::size_t i = 0; i < n; ++i)
          slot.c1[i] = fhat.coeffs[i] * (kernels::chi_hat_minus_one(dim, t * rad[i]) * ta);
        break;
      }
      case Integrand::second: {
        const double t2 = 1.0 / (t * t);
        for (std::size_t i = 0; i < n; ++i) {
          const double cm1 = kernels::chi_hat_minus_one(dim, t * rad[i]);
          slot.c1[i] = fhat.coeffs[i] * (cm1 * t2) - ghat->coeffs[i] * (1.0 + cm1);
        }
        break;
      }
      case Integrand::family: {
        for (std::size_t i = 0; i < n; ++i)
          slot.c1[i] = fhat.coeffs[i] * kernels::family_symbol(cfg.family, t * rad[i]);
        break;
      }
    }
    grid.dft_backward(slot.c1.data(), slot.c2.data(), slot.c3);  // F_t in c2

    if (cfg.outer == ComputeConfig::Outer::pointwise) {
      simd::sqmag(slot.contrib.data(), slot.c2.data(), n);
      return;
    }
    // |F_t|^2 as a complex field for the second transform
    for (std::size_t i = 0; i < n; ++i) {
      const double re = slot.c2[i].real(), im = slot.c2[i].imag();
      slot.c1[i] = re * re + im * im;
    }
    grid.dft_forward(slot.c1.data(), slot.c3.data());
    if (cfg.outer == ComputeConfig::Outer::ball) {
      for (std::size_t i = 0; i < n; ++i)
        slot.c3[i] *= kernels::chi_hat(dim, t * rad[i]);
    } else {
      // sampled g* weight, renormalized to unit discrete mass
      const double ln = cfg.lambda * dim;
      const double tn = std::pow(t, -dim);
      for (std::size_t i = 0; i < n; ++i)
        slot.c2[i] = tn * std::pow(1.0 + crad[i] / t, -ln);
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) mass += slot.c2[i].real();
      mass *= hn;
      {
        static std::mutex m;
        std::lock_guard<std::mutex> lock(m);
        mass_dev = std::max(mass_dev, std::abs(mass / cont_mass - 1.0));
      }
      grid.dft_forward(slot.c2.data(), slot.c1.data());
      const double inv_mass = 1.0 / mass;
      for (std::size_t i = 0; i < n; ++i) slot.c3[i] *= slot.c1[i] * inv_mass;
    }
    grid.dft_backward(slot.c3.data(), slot.c2.data(), slot.c1);
    for (std::size_t i = 0; i < n; ++i) slot.contrib[i] = slot.c2[i].real();
  };

  RealVec acc;
  std::vector<double> shares;
  pass.run(acc, shares, cfg.outer_weight);

  SquareFunctionResult res{Field{grid, CplxVec(n)}, 0.0, 0.0, false, 0.0, {}};
  for (std::size_t i = 0; i < n; ++i)
    res.value.values[i] = std::sqrt(std::max(0.0, acc[i]));
  const double total = sum_real(shares.data(), shares.size());
  if (total > 0.0 && shares.size() >= 2) {
    res.boundary_share_low = shares.front() / total;
    res.boundary_share_high = shares.back() / total;
    res.window_warning = res.boundary_share_low > 0.01 || res.boundary_share_high > 0.01;
    if (res.window_warning)
      res.warnings.push_back("quadrature window: boundary t-nodes carry " +
                             std::to_string(100.0 * std::max(res.boundary_share_low,
                                                             res.boundary_share_high)) +
                             "% of the accumulated mass");
  }
  res.gstar_mass_deviation = mass_dev;
  if (mass_dev > 0.01)
    res.warnings.push_back("g* kernel: discrete mass deviates from continuum mass by " +
                           std::to_string(100.0 * mass_dev) + "% (box-boundary mass)");
  return res;
}

void check_ball_radius(const Grid& g, double t, bool allow_wrap) {
  if (!(t > 0.0)) throw std::invalid_argument("ball_average: requires t > 0");
  if (!allow_wrap && t > 0.5 * g.half_width() * (1.0 + 1e-12))
    throw std::invalid_argument("ball_average: t = " + std::to_string(t) +
                                " exceeds L/2 = " + std::to_string(0.5 * g.half_width()));
}

}  // namespace

bool is_fractional(SquareFunctionKind k) {
  return k == SquareFunctionKind::g_alpha || k == SquareFunctionKind::s_alpha ||
         k == SquareFunctionKind::gstar_alpha_lambda ||
         k == SquareFunctionKind::s_tilde_fractional;
}

bool is_gstar(SquareFunctionKind k) {
  return k == SquareFunctionKind::gstar_alpha_lambda || k == SquareFunctionKind::gstar_second;
}

bool is_second_order(SquareFunctionKind k) { return !is_fractional(k); }

bool needs_pair(SquareFunctionKind k) {
  return k == SquareFunctionKind::g_second || k == SquareFunctionKind::s_second ||
         k == SquareFunctionKind::gstar_second;
}

void SquareFunctionSpec::validate(int) const {
  if (is_fractional(kind) && kind != SquareFunctionKind::s_tilde_fractional &&
      !(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("SquareFunctionSpec: alpha must lie in (0,2)");
  if (is_gstar(kind) && !(lambda > 1.0))
    throw std::invalid_argument("SquareFunctionSpec: lambda must exceed 1");
  if (quad.nodes.empty()) throw std::invalid_argument("SquareFunctionSpec: empty quadrature");
}

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1:
      return 2.0;
    case 2:
      return M_PI;
    default:
      return 4.0 * M_PI / 3.0;
  }
}

Field ball_average(const Field& f, double t, bool allow_periodic_wrap) {
  check_ball_radius(f.grid, t, allow_periodic_wrap);
  const int dim = f.grid.dim();
  SpectralField F = transform(f);
  const RealVec& rad = f.grid.radius();
  for (std::size_t i = 0; i < F.coeffs.size(); ++i)
    F.coeffs[i] *= kernels::chi_hat(dim, t * rad[i]);
  return inverse_transform(F);
}

Field ball_average_direct(const Field& f, double t) {
  const Grid& g = f.grid;
  if (t < 2.0 * g.spacing())
    throw std::invalid_argument("ball_average_direct: ball radius below 2h");
  check_ball_radius(g, t, false);
  const int N = g.samples_per_axis();
  const int dim = g.dim();
  const double h = g.spacing();
  const int R = static_cast<int>(std::floor(t / h));
  const long stride[3] = {1, N, static_cast<long>(N) * N};

  struct Off {
    int d[3];
  };
  std::vector<Off> offsets;
  const int lo1 = dim >= 2 ? -R : 0, lo2 = dim >= 3 ? -R : 0;
  const int hi1 = dim >= 2 ? R : 0, hi2 = dim >= 3 ? R : 0;
  for (int o0 = -R; o0 <= R; ++o0)
    for (int o1 = lo1; o1 <= hi1; ++o1)
      for (int o2 = lo2; o2 <= hi2; ++o2) {
        const double r2 = static_cast<double>(o0) * o0 + static_cast<double>(o1) * o1 +
                          static_cast<double>(o2) * o2;
        if (r2 * h * h <= t * t) offsets.push_back({{o0, o1, o2}});
      }

  Field out{g, CplxVec(g.point_count())};
  const double inv_count = 1.0 / static_cast<double>(offsets.size());
  int idx[3] = {0, 0, 0};
  std::size_t flat = 0;
  for (;;) {
    cplx s = 0.0;
    for (const Off& o : offsets) {
      long src = 0;
      for (int a = 0; a < dim; ++a) {
        const int ja = ((idx[a] + o.d[a]) % N + N) % N;
        src += ja * stride[dim - 1 - a];
      }
      s += f.values[static_cast<std::size_t>(src)];
    }
    out.values[flat++] = s * inv_count;
    int a = dim - 1;
    while (a >= 0 && ++idx[a] == N) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

Field difference_field(const Field& f, double t, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("difference_field: alpha must lie in (0,2]");
  check_ball_radius(f.grid, t, false);
  const int dim = f.grid.dim();
  SpectralField F = transform(f);
  const RealVec& rad = f.grid.radius();
  const double ta = std::pow(t, -alpha);
  for (std::size_t i = 0; i < F.coeffs.size(); ++i)
    F.coeffs[i] *= kernels::chi_hat_minus_one(dim, t * rad[i]) * ta;
  return inverse_transform(F);
}

Field second_order_integrand(const SecondOrderPair& p, double t) {
  if (!p.f.grid.same_as(p.g.grid))
    throw std::invalid_argument("second_order_integrand: grids differ");
  check_ball_radius(p.f.grid, t, false);
  const int dim = p.f.grid.dim();
  SpectralField F = transform(p.f);
  SpectralField G = transform(p.g);
  const RealVec& rad = p.f.grid.radius();
  const double t2 = 1.0 / (t * t);
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
    const double cm1 = kernels::chi_hat_minus_one(dim, t * rad[i]);
    F.coeffs[i] = F.coeffs[i] * (cm1 * t2) - G.coeffs[i] * (1.0 + cm1);
  }
  return inverse_transform(F);
}

namespace {

SquareFunctionResult dispatch_single(const Field& f, const SquareFunctionSpec& spec,
                                     ComputeConfig::Outer outer) {
  spec.validate(f.grid.dim());
  ComputeConfig cfg;
  cfg.integrand = Integrand::fractional;
  cfg.alpha = spec.alpha;
  cfg.outer = outer;
  cfg.lambda = spec.lambda;
  cfg.allow_wrap = spec.allow_periodic_wrap;
  cfg.outer_weight =
      outer == ComputeConfig::Outer::ball ? unit_ball_volume(f.grid.dim()) : 1.0;
  return compute(f, nullptr, spec.quad, spec.workers, cfg);
}

SquareFunctionResult dispatch_pair(const SecondOrderPair& p, const SquareFunctionSpec& spec,
                                   ComputeConfig::Outer outer) {
  spec.validate(p.f.grid.dim());
  ComputeConfig cfg;
  cfg.integrand = Integrand::second;
  cfg.outer = outer;
  cfg.lambda = spec.lambda;
  cfg.allow_wrap = spec.allow_periodic_wrap;
  cfg.outer_weight =
      outer == ComputeConfig::Outer::ball ? unit_ball_volume(p.f.grid.dim()) : 1.0;
  return compute(p.f, &p.g, spec.quad, spec.workers, cfg);
}

}  // namespace

SquareFunctionResult g_function(const Field& f, const SquareFunctionSpec& spec) {
  if (spec.kind != SquareFunctionKind::g_alpha)
    throw std::invalid_argument("g_function: spec.kind must be g_alpha for a single field");
  return dispatch_single(f, spec, ComputeConfig::Outer::pointwise);
}

SquareFunctionResult g_function(const SecondOrderPair& p, const SquareFunctionSpec& spec) {
  if (spec.kind != SquareFunctionKind::g_second)
    throw std::invalid_argument("g_function: spec.kind must be g_second for a pair");
  return dispatch_pair(p, spec, ComputeConfig::Outer::pointwise);
}

SquareFunctionResult area_function(const Field& f, const SquareFunctionSpec& spec) {
  if (spec.kind != SquareFunctionKind::s_alpha)
    throw std::invalid_argument("area_function: spec.kind must be s_alpha for a single field");
  return dispatch_single(f, spec, ComputeConfig::Outer::ball);
}

SquareFunctionResult area_function(const SecondOrderPair& p, const SquareFunctionSpec& spec) {
  if (spec.kind != SquareFunctionKind::s_second)
    throw std::invalid_argument("area_function: spec.kind must be s_second for a pair");
  return dispatch_pair(p, spec, ComputeConfig::Outer::ball);
}

SquareFunctionResult gstar_function(const Field& f, const SquareFunctionSpec& spec) {
  if (spec.kind != SquareFunctionKind::gstar_alpha_lambda)
    throw std::invalid_argument("gstar_function: spec.kind must be gstar_alpha_lambda");
  return dispatch_single(f, spec, ComputeConfig::Outer::gstar);
}

SquareFunctionResult gstar_function(const SecondOrderPair& p, const SquareFunctionSpec& spec) {
  if (spec.kind != SquareFunctionKind::gstar_second)
    throw std::invalid_argument("gstar_function: spec.kind must be gstar_second");
  return dispatch_pair(p, spec, ComputeConfig::Outer::gstar);
}

SquareFunctionResult s_tilde(const Field& f, const kernels::KernelFamily& family,
                             const TQuadrature& quad, int workers, bool allow_periodic_wrap) {
  if (family.dim != f.grid.dim())
    throw std::invalid_argument("s_tilde: kernel family dimension does not match grid");
  ComputeConfig cfg;
  cfg.integrand = Integrand::family;
  cfg.family = family;
  cfg.outer = ComputeConfig::Outer::ball;
  cfg.outer_weight = 1.0;  // S-tilde carries the normalized ball mean
  cfg.allow_wrap = allow_periodic_wrap;
  return compute(f, nullptr, quad, workers, cfg);
}

}  // namespace ballavg
