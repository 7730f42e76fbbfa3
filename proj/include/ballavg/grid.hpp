#pragma once
// Periodic sampling lattice on [-L,L)^n, n in {1,2,3}, with a
// continuum-normalized Fourier transform:
//   coeffs[xi_k] ~ integral f(x) e^{-i x.xi_k} dx   (discrete sum times h^n)
//   f(x_j) = (2pi)^{-n} sum_k coeffs[xi_k] e^{i x_j.xi_k} (pi/L)^n
// Frequencies are xi_k = pi k / L per axis, k in {-N/2,...,N/2-1}.

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ballavg {

using cplx = std::complex<double>;

// 64-byte aligned storage so FFTW new-array execution sees one alignment class.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) {
    void* p = std::aligned_alloc(64, ((n * sizeof(T) + 63) / 64) * 64);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { std::free(p); }
  bool operator==(const AlignedAllocator&) const { return true; }
};

using CplxVec = std::vector<cplx, AlignedAllocator<cplx>>;
using RealVec = std::vector<double, AlignedAllocator<double>>;

class Grid {
 public:
  // dim in {1,2,3}; samples_per_axis a power of two >= 8; half_width > 0.
  static Grid make(int dim, int samples_per_axis, double half_width);

  int dim() const { return d_->dim; }
  int samples_per_axis() const { return d_->n_axis; }
  double half_width() const { return d_->half_width; }
  double spacing() const { return d_->spacing; }           // h = 2L/N
  double nyquist() const { return d_->nyquist; }           // pi/h per axis
  std::size_t point_count() const { return d_->count; }    // N^n

  // Signed frequency for DFT bin m on one axis: pi*k/L with k = m or m-N.
  double freq(int m) const;
  // Physical coordinate of sample index j on one axis: -L + j h.
  double coord(int j) const { return -d_->half_width + d_->spacing * j; }

  // |xi| per lattice point, row-major.
  const RealVec& radius() const { return d_->radius; }
  // Physical radius (min-image |x|) per lattice point.
  const RealVec& coord_radius() const;

  bool same_as(const Grid& o) const { return d_ == o.d_; }

  // Raw transforms used by the pipeline; in and out must be distinct buffers
  // of point_count() elements. forward writes continuum-normalized
  // coefficients; backward consumes them (scratch is clobbered).
  void dft_forward(const cplx* in, cplx* out) const;
  void dft_backward(const cplx* coeffs, cplx* out, CplxVec& scratch) const;

 private:
  struct Data;
  std::shared_ptr<const Data> d_;
  explicit Grid(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  struct Data {
    int dim;
    int n_axis;
    double half_width;
    double spacing;
    double nyquist;
    std::size_t count;
    RealVec radius;          // |xi_k|
    RealVec fwd_scale;       // (-1)^{sum k} h^n
    RealVec inv_scale;       // (-1)^{sum k} / (h^n N^n)
    mutable RealVec coord_radius;  // lazily built
    mutable std::once_flag coord_once;
    void* plan_fwd = nullptr;  // fftw plans, owned
    void* plan_bwd = nullptr;
    ~Data();
  };
};

struct Field {
  Grid grid;
  CplxVec values;  // one per lattice point, row-major
};

struct SpectralField {
  Grid grid;
  CplxVec coeffs;  // indexed by lattice frequency, row-major in DFT bin order
};

// A scalar radial profile r -> m(r) applied as a radial Fourier multiplier.
// Every symbol the pipeline uses is real-valued.
struct RadialSymbol {
  std::function<double(double)> eval;
  std::string name;
  double max_radius = std::numeric_limits<double>::infinity();  // declared validity
};

Grid make_grid(int dim, int samples_per_axis, double half_width);

SpectralField transform(const Field& f);
Field inverse_transform(const SpectralField& F);

// coeffs[xi] <- m(|xi|) coeffs[xi]. Requires m valid on [0, sqrt(n) pi/h].
SpectralField apply_radial_multiplier(const SpectralField& F, const RadialSymbol& m);

// exp(-|x|^2 / (2 width^2)) sampled on the lattice (real field).
Field sample_gaussian(const Grid& g, double width);

// (sum |f|^p h^n)^{1/p}; max modulus for p = inf. Requires p >= 1.
double lp_norm(const Field& f, double p);

cplx mean_value(const Field& f);

// Largest j whose bump spectrum fits the lattice: 2^{j+2} <= 0.9 pi/h.
int max_bump_index(const Grid& g);

namespace kernels {
class WindowPair;
}

// Inverse transform of xi -> psi_hat(2^{-j}|xi|): a real even field whose
// spectrum lives on the annulus 2^{j-2} <= |xi| <= 2^{j+2}. Errors out if the
// annulus does not fit strictly inside the frequency lattice.
Field sample_bump_j(const Grid& g, int j, const kernels::WindowPair& w);

}  // namespace ballavg
