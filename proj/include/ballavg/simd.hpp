#pragma once
// Data-parallel inner loops shared by the spectral pipeline: pointwise
// complex-by-real-symbol multiplication, squared-modulus accumulation and
// block reductions for norms. Each op has a scalar reference implementation
// and an AVX2 variant selected once at runtime; non-x86 builds fall back to
// scalar. Scalar and AVX2 variants are equivalence-tested against each other.

#include <complex>
#include <cstddef>

namespace ballavg::simd {

using cplx = std::complex<double>;

// Name of the instruction set the dispatcher selected ("scalar" or "avx2").
const char* active_isa();

// z[i] *= s[i]
void mul_real(cplx* z, const double* s, std::size_t n);

// acc[i] += w * |z[i]|^2
void accum_sqmag(double* acc, const cplx* z, double w, std::size_t n);

// acc[i] += w * Re(z[i])
void accum_real(double* acc, const cplx* z, double w, std::size_t n);

// acc[i] += w * x[i]
void accum_scaled(double* acc, const double* x, double w, std::size_t n);

// out[i] = |z[i]|^2
void sqmag(double* out, const cplx* z, std::size_t n);

// sum_i |z[i]|^2 over one block (callers chunk into fixed-size blocks and
// reduce block results in index order so totals are worker-count invariant)
double sum_sqmag(const cplx* z, std::size_t n);

// sum_i |z[i]|
double sum_abs(const cplx* z, std::size_t n);

// max_i |z[i]|^2
double max_sqmag(const cplx* z, std::size_t n);

// sum_i |z[i]|^p, general p (scalar only; std::pow per element)
double sum_abs_pow(const cplx* z, double p, std::size_t n);

namespace detail {
bool have_avx2();

void mul_real_scalar(cplx* z, const double* s, std::size_t n);
void accum_sqmag_scalar(double* acc, const cplx* z, double w, std::size_t n);
void accum_real_scalar(double* acc, const cplx* z, double w, std::size_t n);
void accum_scaled_scalar(double* acc, const double* x, double w, std::size_t n);
void sqmag_scalar(double* out, const cplx* z, std::size_t n);
double sum_sqmag_scalar(const cplx* z, std::size_t n);
double sum_abs_scalar(const cplx* z, std::size_t n);
double max_sqmag_scalar(const cplx* z, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
void mul_real_avx2(cplx* z, const double* s, std::size_t n);
void accum_sqmag_avx2(double* acc, const cplx* z, double w, std::size_t n);
void accum_real_avx2(double* acc, const cplx* z, double w, std::size_t n);
void accum_scaled_avx2(double* acc, const double* x, double w, std::size_t n);
void sqmag_avx2(double* out, const cplx* z, std::size_t n);
double sum_sqmag_avx2(const cplx* z, std::size_t n);
double sum_abs_avx2(const cplx* z, std::size_t n);
double max_sqmag_avx2(const cplx* z, std::size_t n);
#endif
}  // namespace detail

}  // namespace ballavg::simd
