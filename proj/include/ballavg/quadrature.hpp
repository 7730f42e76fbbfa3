#pragma once
// Geometric discretization of int_0^inf (.) dt/t plus a small adaptive
// Simpson rule for the scalar 1-D integrals.

#include <functional>
#include <stdexcept>
#include <vector>

namespace ballavg {

// Nodes t_k = t_min 2^{k/m}, k = 0..K-1, each carrying weight ln2/m; the cell
// of node k is [t_k, t_k 2^{1/m}], so the cells tile [t_min, t_max] exactly
// after t_max is snapped to t_min 2^{K/m}.
struct TQuadrature {
  double t_min = 0.0;
  double t_max = 0.0;  // snapped
  int nodes_per_octave = 8;
  std::vector<double> nodes;
  double weight = 0.0;  // ln2 / m, same for every node

  static TQuadrature make(double t_min, double t_max, int nodes_per_octave);
  double total_weight() const { return weight * static_cast<double>(nodes.size()); }
};

struct QuadResult {
  double value = 0.0;
  double err_estimate = 0.0;
  bool converged = false;
  long evals = 0;
};

QuadResult adaptive_simpson(const std::function<double(double)>& f, double a,
                            double b, double tol, int max_depth = 40);

}  // namespace ballavg
