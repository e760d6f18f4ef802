// Hot inner loops of every alpha probe: one fused pass per element, lane
// parallel via GNU vector extensions on gcc/clang, with a scalar fallback
// that keeps the identical (striped) accumulation order.
//
// Rounding here must agree with round_half_away() for every value that can
// survive the clip. Nearest-even comes from the 1.5 * 2^52 addition trick,
// exact for |x| < 2^51; a tie that nearest-even resolved toward zero is
// detected by x - r_even == copysign(0.5, x) and pushed one step outward.
// Beyond 2^51 the trick may be off by a few ulp of x, but |x| >= 2^51 is
// astronomically past the code range, so the clamp erases the difference.

#include "loss_kernels.hpp"

#include <cmath>

#if defined(__GNUC__)
#define REQUANT_HAVE_VECTOR_EXT 1
#pragma GCC diagnostic ignored "-Wpsabi"
#endif

namespace requant::detail {
namespace {

constexpr double kRoundShift = 6755399441055744.0;  // 1.5 * 2^52

inline double scalar_round_half_away(double x) {
  const double t = std::trunc(x);
  return t + std::trunc(2.0 * (x - t));
}

#if REQUANT_HAVE_VECTOR_EXT

#if defined(__AVX512F__)
constexpr int kLanes = 8;
#else
constexpr int kLanes = 4;
#endif
constexpr int kUnroll = 4;

typedef double vdouble __attribute__((vector_size(kLanes * sizeof(double))));
typedef long long vmask __attribute__((vector_size(kLanes * sizeof(double))));

inline vdouble vsplat(double x) {
  vdouble v;
  for (int k = 0; k < kLanes; ++k) v[k] = x;
  return v;
}

inline vdouble vload(const double* p) {
  vdouble v;
  __builtin_memcpy(&v, p, sizeof v);
  return v;
}

inline vdouble vround_half_away(vdouble x) {
  const vdouble big = vsplat(kRoundShift);
  const vmask signbits = reinterpret_cast<vmask&>(x) & (vmask)vsplat(-0.0);
  const vdouble half_s = (vdouble)(((vmask)vsplat(0.5)) | signbits);
  const vdouble one_s = (vdouble)(((vmask)vsplat(1.0)) | signbits);
  const vdouble r_even = (x + big) - big;
  const vmask tie = (x - r_even) == half_s;
  return r_even + (tie ? one_s : vsplat(0.0));
}

inline vdouble vclamp(vdouble v, vdouble lo, vdouble hi) {
  v = (v < lo) ? lo : v;
  v = (v > hi) ? hi : v;
  return v;
}

inline double reduce(vdouble a0, vdouble a1, vdouble a2, vdouble a3, double tail) {
  const vdouble acc = (a0 + a1) + (a2 + a3);
  double total = 0.0;
  for (int k = 0; k < kLanes; ++k) total += acc[k];
  return total + tail;
}

double uniform_mse_impl(const double* w, size_t n, double s, double inv_s, double qmax) {
  const vdouble vlo = vsplat(-(qmax + 1.0)), vhi = vsplat(qmax);
  const vdouble vinv = vsplat(inv_s), vs = vsplat(s);
  vdouble acc0 = vsplat(0.0), acc1 = acc0, acc2 = acc0, acc3 = acc0;
  constexpr size_t kStep = size_t(kUnroll) * kLanes;
  size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const vdouble w0 = vload(w + i), w1 = vload(w + i + kLanes);
    const vdouble w2 = vload(w + i + 2 * kLanes), w3 = vload(w + i + 3 * kLanes);
    const vdouble r0 = vclamp(vround_half_away(w0 * vinv), vlo, vhi);
    const vdouble r1 = vclamp(vround_half_away(w1 * vinv), vlo, vhi);
    const vdouble r2 = vclamp(vround_half_away(w2 * vinv), vlo, vhi);
    const vdouble r3 = vclamp(vround_half_away(w3 * vinv), vlo, vhi);
    const vdouble d0 = w0 - r0 * vs, d1 = w1 - r1 * vs;
    const vdouble d2 = w2 - r2 * vs, d3 = w3 - r3 * vs;
    acc0 += d0 * d0;
    acc1 += d1 * d1;
    acc2 += d2 * d2;
    acc3 += d3 * d3;
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double lo = -(qmax + 1.0);
    double r = scalar_round_half_away(w[i] * inv_s);
    r = std::min(std::max(r, lo), qmax);
    const double d = w[i] - r * s;
    tail += d * d;
  }
  return reduce(acc0, acc1, acc2, acc3, tail) / static_cast<double>(n);
}

double reshape_mse_impl(const double* w, const double* t, size_t n, double inv_sq, double c,
                        double qmax) {
  const vdouble vlo = vsplat(-(qmax + 1.0)), vhi = vsplat(qmax);
  const vdouble vinv = vsplat(inv_sq), vc = vsplat(c);
  const vmask absmask = ~(vmask)vsplat(-0.0);
  vdouble acc0 = vsplat(0.0), acc1 = acc0, acc2 = acc0, acc3 = acc0;
  constexpr size_t kStep = size_t(kUnroll) * kLanes;
  size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const vdouble w0 = vload(w + i), w1 = vload(w + i + kLanes);
    const vdouble w2 = vload(w + i + 2 * kLanes), w3 = vload(w + i + 3 * kLanes);
    const vdouble r0 = vclamp(vround_half_away(vload(t + i) * vinv), vlo, vhi);
    const vdouble r1 = vclamp(vround_half_away(vload(t + i + kLanes) * vinv), vlo, vhi);
    const vdouble r2 = vclamp(vround_half_away(vload(t + i + 2 * kLanes) * vinv), vlo, vhi);
    const vdouble r3 = vclamp(vround_half_away(vload(t + i + 3 * kLanes) * vinv), vlo, vhi);
    // sign(r) * r^2 as r * |r|; both factors are exact small integers
    const vdouble m0 = r0 * (vdouble)((vmask)r0 & absmask);
    const vdouble m1 = r1 * (vdouble)((vmask)r1 & absmask);
    const vdouble m2 = r2 * (vdouble)((vmask)r2 & absmask);
    const vdouble m3 = r3 * (vdouble)((vmask)r3 & absmask);
    const vdouble d0 = w0 - m0 * vc, d1 = w1 - m1 * vc;
    const vdouble d2 = w2 - m2 * vc, d3 = w3 - m3 * vc;
    acc0 += d0 * d0;
    acc1 += d1 * d1;
    acc2 += d2 * d2;
    acc3 += d3 * d3;
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double lo = -(qmax + 1.0);
    double r = scalar_round_half_away(t[i] * inv_sq);
    r = std::min(std::max(r, lo), qmax);
    const double d = w[i] - r * std::fabs(r) * c;
    tail += d * d;
  }
  return reduce(acc0, acc1, acc2, acc3, tail) / static_cast<double>(n);
}

#else  // scalar fallback, same striped accumulation order

constexpr int kLanes = 4;
constexpr int kUnroll = 4;

double uniform_mse_impl(const double* w, size_t n, double s, double inv_s, double qmax) {
  const double lo = -(qmax + 1.0);
  constexpr size_t kStep = size_t(kUnroll) * kLanes;
  double acc[kStep] = {};
  size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    for (size_t k = 0; k < kStep; ++k) {
      double r = scalar_round_half_away(w[i + k] * inv_s);
      r = std::min(std::max(r, lo), qmax);
      const double d = w[i + k] - r * s;
      acc[k] += d * d;
    }
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    double r = scalar_round_half_away(w[i] * inv_s);
    r = std::min(std::max(r, lo), qmax);
    const double d = w[i] - r * s;
    tail += d * d;
  }
  // combine per-lane across the four accumulators first, then across lanes,
  // mirroring the vector path's reduction order
  double total = 0.0;
  for (int k = 0; k < kLanes; ++k)
    total += (acc[0 * kLanes + k] + acc[1 * kLanes + k]) +
             (acc[2 * kLanes + k] + acc[3 * kLanes + k]);
  return (total + tail) / static_cast<double>(n);
}

double reshape_mse_impl(const double* w, const double* t, size_t n, double inv_sq, double c,
                        double qmax) {
  const double lo = -(qmax + 1.0);
  constexpr size_t kStep = size_t(kUnroll) * kLanes;
  double acc[kStep] = {};
  size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    for (size_t k = 0; k < kStep; ++k) {
      double r = scalar_round_half_away(t[i + k] * inv_sq);
      r = std::min(std::max(r, lo), qmax);
      const double d = w[i + k] - r * std::fabs(r) * c;
      acc[k] += d * d;
    }
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    double r = scalar_round_half_away(t[i] * inv_sq);
    r = std::min(std::max(r, lo), qmax);
    const double d = w[i] - r * std::fabs(r) * c;
    tail += d * d;
  }
  double total = 0.0;
  for (int k = 0; k < kLanes; ++k)
    total += (acc[0 * kLanes + k] + acc[1 * kLanes + k]) +
             (acc[2 * kLanes + k] + acc[3 * kLanes + k]);
  return (total + tail) / static_cast<double>(n);
}

#endif  // REQUANT_HAVE_VECTOR_EXT

}  // namespace

double uniform_mse(const double* w, size_t n, double alpha, double w_max, double qmax) {
  const double s = alpha * w_max / qmax;
  const double inv_s = qmax / (alpha * w_max);
  return uniform_mse_impl(w, n, s, inv_s, qmax);
}

double reshape_mse(const double* w, const double* t, size_t n, double alpha, double w_max,
                   double qmax) {
  const double inv_sq = qmax / std::sqrt(alpha * w_max);
  const double c = alpha * w_max / (qmax * qmax);
  return reshape_mse_impl(w, t, n, inv_sq, c, qmax);
}

}  // namespace requant::detail
