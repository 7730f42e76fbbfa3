#pragma once
// Dyadic Littlewood-Paley projections, the band-restricted operators T_j,
// and measurement of their operator-norm decay.

#include <cstdint>
#include <vector>

#include "ballavg/fit.hpp"
#include "ballavg/grid.hpp"
#include "ballavg/kernels.hpp"
#include "ballavg/quadrature.hpp"

namespace ballavg {

// f * phi_{2^{-j}} realized as the multiplier phihat(2^{-j}|xi|).
struct BandProjection {
  int j = 0;
  kernels::WindowPair window;
  Field apply(const Field& f) const;
};

// True when the dyadic band 2^j [1/2, 2] meets the lattice frequency range.
bool band_intersects_lattice(const Grid& g, int j);

// Empty bands give a zero field (a warning situation, not an error).
Field project_band(const Field& f, int j, const kernels::WindowPair& w);

// T_j f = [ sum_k int_{2^{-k}}^{2^{-k+1}} avg_{B(0,2^{-k+1})}
//           |f * phi_{2^{-j-k}} * K_t(x+y)|^2 dy dt/t ]^{1/2},
// with k ranging over octaves contained in [t_min, t_max] and off-lattice
// bands contributing zero.
Field apply_T_j(const Field& f, int j, const kernels::KernelFamily& family,
                const TQuadrature& quad, const kernels::WindowPair& w);

struct DecayRow {
  int j = 0;
  double ratio_mean = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double envelope = 0.0;  // min{2^{-aj}, 2^{(2-a)j}} or 2^{-2|j|}
};

struct DecayReport {
  std::vector<DecayRow> rows;  // sorted by j
  LineFit slope_pos;           // fit of log2(mean ratio) vs j on j > 0
  LineFit slope_neg;           // and on j < 0
  double predicted_slope_pos = 0.0;
  double predicted_slope_neg = 0.0;
  double envelope_constant = 0.0;  // max measured ratio / envelope over all j
  double p = 2.0;
  std::uint64_t seed = 0;
};

struct DecayConfig {
  int j_lo = -6;
  int j_hi = 6;
  double p = 2.0;
  int trials = 10;
  std::uint64_t seed = 0x5eed5eedULL;
  // Target band for the random trial spectra. It must be narrow enough that
  // every octave T_j consults stays inside the quadrature window for all
  // tested j, otherwise window truncation contaminates the measured slopes.
  double band_lo = 8.0;
  double band_hi = 16.0;
  int workers = 1;
};

// For p = 2 the trials are random complex Gaussian coefficients on the target
// band; for p != 2 a caller-supplied dictionary is evaluated instead and the
// reported ratios are dictionary maxima (lower-bound estimates).
DecayReport measure_decay(const Grid& g, const kernels::KernelFamily& family,
                          const TQuadrature& quad, const kernels::WindowPair& w,
                          const DecayConfig& cfg,
                          const std::vector<Field>* dictionary = nullptr);

// Random complex-Gaussian field with spectrum supported on band_lo<=|xi|<band_hi.
Field random_band_limited(const Grid& g, double band_lo, double band_hi, std::uint64_t seed);

}  // namespace ballavg
