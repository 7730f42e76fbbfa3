#include "ballavg/simd.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define BALLAVG_X86 1
#else
#define BALLAVG_X86 0
#endif

namespace ballavg::simd {

namespace detail {

bool have_avx2() {
#if BALLAVG_X86
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

void mul_real_scalar(cplx* z, const double* s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] *= s[i];
}

void accum_sqmag_scalar(double* acc, const cplx* z, double w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    acc[i] += w * (re * re + im * im);
  }
}

void accum_real_scalar(double* acc, const cplx* z, double w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += w * z[i].real();
}

void accum_scaled_scalar(double* acc, const double* x, double w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += w * x[i];
}

void sqmag_scalar(double* out, const cplx* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    out[i] = re * re + im * im;
  }
}

double sum_sqmag_scalar(const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    s += re * re + im * im;
  }
  return s;
}

double sum_abs_scalar(const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(z[i]);
  return s;
}

double max_sqmag_scalar(const cplx* z, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    const double v = re * re + im * im;
    if (v > m) m = v;
  }
  return m;
}

#if BALLAVG_X86

// Complex arrays are [re,im] interleaved, so a 256-bit lane holds 2 values.

__attribute__((target("avx2,fma")))
void mul_real_avx2(cplx* z, const double* s, std::size_t n) {
  double* zd = reinterpret_cast<double*>(z);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d zv = _mm256_loadu_pd(zd + 2 * i);
    __m256d sv = _mm256_setr_pd(s[i], s[i], s[i + 1], s[i + 1]);
    _mm256_storeu_pd(zd + 2 * i, _mm256_mul_pd(zv, sv));
  }
  for (; i < n; ++i) z[i] *= s[i];
}

__attribute__((target("avx2,fma")))
void accum_sqmag_avx2(double* acc, const cplx* z, double w, std::size_t n) {
  const double* zd = reinterpret_cast<const double*>(z);
  const __m256d wv = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(zd + 2 * i);      // re0 im0 re1 im1
    __m256d b = _mm256_loadu_pd(zd + 2 * i + 4);  // re2 im2 re3 im3
    __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    // h = |z0|^2 |z2|^2 |z1|^2 |z3|^2 -> reorder
    h = _mm256_permute4x64_pd(h, 0xD8);
    __m256d av = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(wv, h, av));
  }
  for (; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    acc[i] += w * (re * re + im * im);
  }
}

__attribute__((target("avx2,fma")))
void accum_real_avx2(double* acc, const cplx* z, double w, std::size_t n) {
  const double* zd = reinterpret_cast<const double*>(z);
  const __m256d wv = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(zd + 2 * i);
    __m256d b = _mm256_loadu_pd(zd + 2 * i + 4);
    // gather even lanes (real parts) of a,b
    __m256d re = _mm256_unpacklo_pd(a, b);          // re0 re2 re1 re3
    re = _mm256_permute4x64_pd(re, 0xD8);           // re0 re1 re2 re3
    __m256d av = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(wv, re, av));
  }
  for (; i < n; ++i) acc[i] += w * z[i].real();
}

__attribute__((target("avx2,fma")))
void accum_scaled_avx2(double* acc, const double* x, double w, std::size_t n) {
  const __m256d wv = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d av = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(wv, xv, av));
  }
  for (; i < n; ++i) acc[i] += w * x[i];
}

__attribute__((target("avx2,fma")))
void sqmag_avx2(double* out, const cplx* z, std::size_t n) {
  const double* zd = reinterpret_cast<const double*>(z);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(zd + 2 * i);
    __m256d b = _mm256_loadu_pd(zd + 2 * i + 4);
    __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0xD8));
  }
  for (; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    out[i] = re * re + im * im;
  }
}

__attribute__((target("avx2,fma")))
double sum_sqmag_avx2(const cplx* z, std::size_t n) {
  const double* zd = reinterpret_cast<const double*>(z);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_loadu_pd(zd + 2 * i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double lanes[4];
  _mm256_storeu_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    s += re * re + im * im;
  }
  return s;
}

__attribute__((target("avx2,fma")))
double sum_abs_avx2(const cplx* z, std::size_t n) {
  const double* zd = reinterpret_cast<const double*>(z);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(zd + 2 * i);
    __m256d b = _mm256_loadu_pd(zd + 2 * i + 4);
    __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_permute4x64_pd(h, 0xD8)));
  }
  double lanes[4];
  _mm256_storeu_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += std::abs(z[i]);
  return s;
}

__attribute__((target("avx2,fma")))
double max_sqmag_avx2(const cplx* z, std::size_t n) {
  const double* zd = reinterpret_cast<const double*>(z);
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(zd + 2 * i);
    __m256d b = _mm256_loadu_pd(zd + 2 * i + 4);
    __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    hi = _mm256_max_pd(hi, h);
  }
  double lanes[4];
  _mm256_storeu_pd(lanes, hi);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    m = std::max(m, re * re + im * im);
  }
  return m;
}

#endif  // BALLAVG_X86

}  // namespace detail

namespace {

struct Dispatch {
  void (*mul_real)(cplx*, const double*, std::size_t);
  void (*accum_sqmag)(double*, const cplx*, double, std::size_t);
  void (*accum_real)(double*, const cplx*, double, std::size_t);
  void (*accum_scaled)(double*, const double*, double, std::size_t);
  void (*sqmag)(double*, const cplx*, std::size_t);
  double (*sum_sqmag)(const cplx*, std::size_t);
  double (*sum_abs)(const cplx*, std::size_t);
  double (*max_sqmag)(const cplx*, std::size_t);
  const char* isa;
};

Dispatch make_dispatch() {
  using namespace detail;
#if BALLAVG_X86
  if (have_avx2()) {
    return {mul_real_avx2, accum_sqmag_avx2, accum_real_avx2, accum_scaled_avx2,
            sqmag_avx2, sum_sqmag_avx2, sum_abs_avx2, max_sqmag_avx2, "avx2"};
  }
#endif
  return {mul_real_scalar, accum_sqmag_scalar, accum_real_scalar, accum_scaled_scalar,
          sqmag_scalar, sum_sqmag_scalar, sum_abs_scalar, max_sqmag_scalar, "scalar"};
}

const Dispatch& table() {
  static const Dispatch d = make_dispatch();
  return d;
}

}  // namespace

const char* active_isa() { return table().isa; }

void mul_real(cplx* z, const double* s, std::size_t n) { table().mul_real(z, s, n); }
void accum_sqmag(double* acc, const cplx* z, double w, std::size_t n) {
  table().accum_sqmag(acc, z, w, n);
}
void accum_real(double* acc, const cplx* z, double w, std::size_t n) {
  table().accum_real(acc, z, w, n);
}
void accum_scaled(double* acc, const double* x, double w, std::size_t n) {
  table().accum_scaled(acc, x, w, n);
}
void sqmag(double* out, const cplx* z, std::size_t n) { table().sqmag(out, z, n); }
double sum_sqmag(const cplx* z, std::size_t n) { return table().sum_sqmag(z, n); }
double sum_abs(const cplx* z, std::size_t n) { return table().sum_abs(z, n); }
double max_sqmag(const cplx* z, std::size_t n) { return table().max_sqmag(z, n); }

double sum_abs_pow(const cplx* z, double p, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    s += std::pow(re * re + im * im, 0.5 * p);
  }
  return s;
}

}  // namespace ballavg::simd
