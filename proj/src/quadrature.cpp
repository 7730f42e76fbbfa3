#include "ballavg/quadrature.hpp"

#include <cmath>

namespace ballavg {

TQuadrature TQuadrature::make(double t_min, double t_max, int nodes_per_octave) {
  if (!(t_min > 0.0) || !(t_max > t_min))
    throw std::invalid_argument("TQuadrature: requires 0 < t_min < t_max");
  if (nodes_per_octave < 4)
    throw std::invalid_argument("TQuadrature: requires nodes_per_octave >= 4");
  TQuadrature q;
  q.t_min = t_min;
  q.nodes_per_octave = nodes_per_octave;
  const double m = nodes_per_octave;
  const long K = std::max<long>(1, std::lround(m * std::log2(t_max / t_min)));
  q.t_max = t_min * std::pow(2.0, static_cast<double>(K) / m);
  q.weight = std::log(2.0) / m;
  q.nodes.resize(K);
  for (long k = 0; k < K; ++k) q.nodes[k] = t_min * std::pow(2.0, static_cast<double>(k) / m);
  return q;
}

namespace {

struct SimpsonCtx {
  const std::function<double(double)>& f;
  double tol;
  int max_depth;
  long evals = 0;
  bool converged = true;
  double err = 0.0;
};

double simpson_step(SimpsonCtx& ctx, double a, double b, double fa, double fm, double fb,
                    double whole, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = ctx.f(lm), frm = ctx.f(rm);
  ctx.evals += 2;
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= ctx.max_depth) {
    ctx.converged = false;
    ctx.err += std::abs(delta);
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * ctx.tol) {
    ctx.err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_step(ctx, a, m, fa, flm, fm, left, depth + 1) +
         simpson_step(ctx, m, b, fm, frm, fb, right, depth + 1);
}

}  // namespace

QuadResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                            double tol, int max_depth) {
  SimpsonCtx ctx{f, tol, max_depth};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  ctx.evals = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double v = simpson_step(ctx, a, b, fa, fm, fb, whole, 0);
  return {v, ctx.err, ctx.converged, ctx.evals};
}

}  // namespace ballavg
