#include "dtsurv/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cfloat>
#include <cmath>
#include <cstdint>

namespace dtsurv::kernels {
namespace {

// ---------------------------------------------------------------------------
// Vector math primitives. exp and log follow the classic Cephes rational
// approximations (~1 ulp over the reduced range); reduction constants are the
// usual two-part split of log 2 so the reduction itself is exact.
// ---------------------------------------------------------------------------

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// int64 lanes known to fit in [0, 2^51) -> double
inline __m256d small_int64_to_double(__m256i v) {
  const __m256d magic = _mm256_set1_pd(0x1.0p52);
  __m256d d = _mm256_castsi256_pd(_mm256_or_si256(v, _mm256_castpd_si256(magic)));
  return _mm256_sub_pd(d, magic);
}

// exp(x): flushes to 0 below -708, saturates to +inf above the IEEE overflow
// threshold. NaN propagates.
inline __m256d vexp(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

  __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-708.0), _CMP_LT_OQ);
  __m256d overflow = _mm256_cmp_pd(x, _mm256_set1_pd(709.782712893384), _CMP_GT_OQ);

  // n = round(x / ln 2); r = x - n ln 2
  __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, c1, x);
  r = _mm256_fnmadd_pd(n, c2, r);

  // e^r = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)) on r in [-ln2/2, ln2/2]
  __m256d rr = _mm256_mul_pd(r, r);
  __m256d pn = _mm256_fmadd_pd(p0, rr, p1);
  pn = _mm256_fmadd_pd(pn, rr, p2);
  pn = _mm256_mul_pd(pn, r);
  __m256d qn = _mm256_fmadd_pd(q0, rr, q1);
  qn = _mm256_fmadd_pd(qn, rr, q2);
  qn = _mm256_fmadd_pd(qn, rr, q3);
  __m256d m = _mm256_div_pd(pn, _mm256_sub_pd(qn, pn));
  m = _mm256_fmadd_pd(_mm256_set1_pd(2.0), m, _mm256_set1_pd(1.0));

  // scale by 2^n, split in two halves so n = 1024 stays representable
  __m128i ni = _mm256_cvtpd_epi32(n);
  __m128i nh32 = _mm_srai_epi32(ni, 1);
  __m128i nl32 = _mm_sub_epi32(ni, nh32);
  const __m256i bias = _mm256_set1_epi64x(1023);
  __m256i nh = _mm256_cvtepi32_epi64(nh32);
  __m256i nl = _mm256_cvtepi32_epi64(nl32);
  __m256d s1 = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(nh, bias), 52));
  __m256d s2 = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(nl, bias), 52));
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(m, s1), s2);

  result = _mm256_andnot_pd(underflow, result);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(HUGE_VAL), overflow);
  return result;
}

// log(x) for x in [0.5, 4]: covers log1p on [0, 1] with headroom.
inline __m256d vlog_restricted(__m256d x) {
  const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
  const __m256d one = _mm256_set1_pd(1.0);

  const __m256d p0 = _mm256_set1_pd(1.01875663804580931796e-4);
  const __m256d p1 = _mm256_set1_pd(4.97494994976747001425e-1);
  const __m256d p2 = _mm256_set1_pd(4.70579119878881725854e0);
  const __m256d p3 = _mm256_set1_pd(1.44989225341610930846e1);
  const __m256d p4 = _mm256_set1_pd(1.79368678507819816313e1);
  const __m256d p5 = _mm256_set1_pd(7.70838733755885391666e0);
  const __m256d q0 = _mm256_set1_pd(1.12873587189167450590e1);
  const __m256d q1 = _mm256_set1_pd(4.52279145837532221105e1);
  const __m256d q2 = _mm256_set1_pd(8.29875266912776603211e1);
  const __m256d q3 = _mm256_set1_pd(7.11544750618563894466e1);
  const __m256d q4 = _mm256_set1_pd(2.31251620126765340583e1);

  // frexp: x = m * 2^e with m in [0.5, 1)
  const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
  const __m256i half_bits = _mm256_set1_epi64x(0x3fe0000000000000LL);
  __m256i bits = _mm256_castpd_si256(x);
  __m256i expo = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
  __m256d e = _mm256_sub_pd(small_int64_to_double(expo), _mm256_set1_pd(1022.0));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));

  __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, one));
  __m256d z = _mm256_blendv_pd(_mm256_sub_pd(m, one),
                               _mm256_sub_pd(_mm256_add_pd(m, m), one), below);

  __m256d zz = _mm256_mul_pd(z, z);
  __m256d pn = _mm256_fmadd_pd(p0, z, p1);
  pn = _mm256_fmadd_pd(pn, z, p2);
  pn = _mm256_fmadd_pd(pn, z, p3);
  pn = _mm256_fmadd_pd(pn, z, p4);
  pn = _mm256_fmadd_pd(pn, z, p5);
  __m256d qn = _mm256_add_pd(z, q0);
  qn = _mm256_fmadd_pd(qn, z, q1);
  qn = _mm256_fmadd_pd(qn, z, q2);
  qn = _mm256_fmadd_pd(qn, z, q3);
  qn = _mm256_fmadd_pd(qn, z, q4);

  __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, zz), _mm256_div_pd(pn, qn));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, y);
  __m256d res = _mm256_add_pd(z, y);
  res = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);
  return res;
}

inline __m256d vexpit(__m256d x) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);

  __m256d neg_abs = _mm256_min_pd(x, _mm256_sub_pd(zero, x));
  __m256d t = vexp(neg_abs);
  __m256d num = _mm256_blendv_pd(t, one, _mm256_cmp_pd(x, zero, _CMP_GE_OQ));
  __m256d r = _mm256_div_pd(num, _mm256_add_pd(one, t));
  return _mm256_min_pd(_mm256_max_pd(r, _mm256_set1_pd(DBL_MIN)),
                       _mm256_set1_pd(1.0 - 0x1p-53));
}

// softplus(x) = max(x, 0) + log(1 + exp(-|x|))
inline __m256d vsoftplus(__m256d x) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d neg_abs = _mm256_min_pd(x, _mm256_sub_pd(zero, x));
  __m256d t = vexp(neg_abs);
  return _mm256_add_pd(_mm256_max_pd(x, zero),
                       vlog_restricted(_mm256_add_pd(_mm256_set1_pd(1.0), t)));
}

// ---------------------------------------------------------------------------
// Kernel entry points
// ---------------------------------------------------------------------------

void exp_array_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vexp(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = x[i] < -708.0 ? 0.0 : std::exp(x[i]);
}

void expit_array_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vexpit(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = expit(x[i]);
}

double sum_expit_shift_avx2(double shift, const double* s, std::size_t n) {
  const __m256d vshift = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, vexpit(_mm256_add_pd(vshift, _mm256_loadu_pd(s + i))));
  double total = hsum(acc);
  for (; i < n; ++i) total += expit(shift + s[i]);
  return total;
}

double bernoulli_loglik_avx2(const double* eta, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d e = _mm256_loadu_pd(eta + i);
    __m256d yy = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_fmsub_pd(yy, e, vsoftplus(e)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    double t = std::exp(eta[i] < 0 ? eta[i] : -eta[i]);
    double sp = (eta[i] > 0 ? eta[i] : 0.0) + std::log1p(t);
    total += y[i] * eta[i] - sp;
  }
  return total;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void syr_lower_avx2(double w, const double* x, std::size_t q, double* h, std::size_t ldh) {
  for (std::size_t i = 0; i < q; ++i) {
    const double wxi = w * x[i];
    const __m256d vw = _mm256_set1_pd(wxi);
    double* row = h + i * ldh;
    const std::size_t len = i + 1;
    std::size_t j = 0;
    for (; j + 4 <= len; j += 4)
      _mm256_storeu_pd(row + j,
                       _mm256_fmadd_pd(vw, _mm256_loadu_pd(x + j), _mm256_loadu_pd(row + j)));
    for (; j < len; ++j) row[j] += wxi * x[j];
  }
}

}  // namespace

const Ops* avx2_ops_table() {
  static const Ops ops = {
      "avx2",
      exp_array_avx2,
      expit_array_avx2,
      sum_expit_shift_avx2,
      bernoulli_loglik_avx2,
      dot_avx2,
      axpy_avx2,
      syr_lower_avx2,
  };
  return &ops;
}

}  // namespace dtsurv::kernels

#else

namespace dtsurv::kernels {
const Ops* avx2_ops_table() { return nullptr; }
}  // namespace dtsurv::kernels

#endif
