#pragma once
// Least-squares line fit used for the log-log scaling measurements.

#include <vector>

namespace ballavg {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double slope_stderr = 0.0;
  int n = 0;
};

// y ~ intercept + slope * x; requires at least 3 points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ballavg
