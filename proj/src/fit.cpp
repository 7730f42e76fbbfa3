#include "ballavg/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace ballavg {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  const int n = static_cast<int>(x.size());
  if (n < 3) throw std::invalid_argument("fit_line: needs at least 3 points");
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  f.slope_stderr = (n > 2) ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace ballavg
