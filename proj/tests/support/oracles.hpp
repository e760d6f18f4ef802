#pragma once

// Independent reference implementations and deterministic fixtures for the
// test suites. Everything here recomputes results from first principles
// (std::round, explicit clipping, two-pass loss evaluation) and must never
// call into the quantizer code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "requant/tensor.hpp"

namespace oracles {

inline std::vector<double> gaussian_values(uint64_t seed, size_t n, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> values(n);
  for (auto& v : values) v = dist(rng);
  return values;
}

inline std::vector<double> laplacian_values(uint64_t seed, size_t n, double scale) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> magnitude(1.0 / scale);
  std::bernoulli_distribution flip(0.5);
  std::vector<double> values(n);
  for (auto& v : values) v = (flip(rng) ? 1.0 : -1.0) * magnitude(rng);
  return values;
}

inline std::vector<double> uniform_values(uint64_t seed, size_t n, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> values(n);
  for (auto& v : values) v = dist(rng);
  return values;
}

// sigma = 0.05 body with a single outlier at 1.0; the outlier forces the
// full-range scale to waste levels on empty space
inline std::vector<double> outlier_values(uint64_t seed, size_t n) {
  auto values = gaussian_values(seed, n, 0.05);
  values[n / 2] = 1.0;
  return values;
}

inline requant::WeightTensor make_tensor(std::string name, std::vector<double> values) {
  const int64_t n = static_cast<int64_t>(values.size());
  return requant::WeightTensor(std::move(name), {n}, std::move(values));
}

inline double ref_max_abs(const std::vector<double>& values) {
  double m = 0.0;
  for (double v : values) {
    const double a = v < 0.0 ? -v : v;
    if (a > m) m = a;
  }
  return m;
}

inline int64_t ref_clip(double x, int64_t lo, int64_t hi) {
  if (x < static_cast<double>(lo)) return lo;
  if (x > static_cast<double>(hi)) return hi;
  return static_cast<int64_t>(x);
}

// linear quantizer written the straightforward way: divide by the step,
// std::round (which is half-away-from-zero), clip
inline int64_t ref_quantize(double w, double alpha, double w_max, int bits) {
  const int64_t qmax = (int64_t{1} << (bits - 1)) - 1;
  const double s = alpha * w_max / static_cast<double>(qmax);
  return ref_clip(std::round(w / s), -(qmax + 1), qmax);
}

inline double ref_loss_uniform(const std::vector<double>& values, double alpha, int bits) {
  const double w_max = ref_max_abs(values);
  if (w_max == 0.0) return 0.0;
  const int64_t qmax = (int64_t{1} << (bits - 1)) - 1;
  const double s = alpha * w_max / static_cast<double>(qmax);
  std::vector<int64_t> codes(values.size());
  for (size_t i = 0; i < values.size(); ++i) codes[i] = ref_quantize(values[i], alpha, w_max, bits);
  std::vector<double> recon(values.size());
  for (size_t i = 0; i < values.size(); ++i) recon[i] = static_cast<double>(codes[i]) * s;
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - recon[i];
    sum += d * d;
  }
  return sum / static_cast<double>(values.size());
}

inline double ref_sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline int64_t ref_quantize_reshaped(double w, double alpha, double w_max, int bits) {
  const int64_t qmax = (int64_t{1} << (bits - 1)) - 1;
  const double x =
      ref_sign(w) * std::sqrt(std::fabs(w)) * static_cast<double>(qmax) / std::sqrt(alpha * w_max);
  return ref_clip(std::round(x), -(qmax + 1), qmax);
}

inline double ref_dequantize_reshaped(int64_t code, double alpha, double w_max, int bits) {
  const int64_t qmax = (int64_t{1} << (bits - 1)) - 1;
  const double mag = std::fabs(static_cast<double>(code)) * std::sqrt(alpha * w_max) /
                     static_cast<double>(qmax);
  return ref_sign(static_cast<double>(code)) * mag * mag;
}

inline double ref_loss_reshaped(const std::vector<double>& values, double alpha, int bits) {
  const double w_max = ref_max_abs(values);
  if (w_max == 0.0) return 0.0;
  double sum = 0.0;
  for (double w : values) {
    const int64_t code = ref_quantize_reshaped(w, alpha, w_max, bits);
    const double d = w - ref_dequantize_reshaped(code, alpha, w_max, bits);
    sum += d * d;
  }
  return sum / static_cast<double>(values.size());
}

// central second difference, the convexity probe of the acceptance suite
template <class F>
double second_central_difference(F&& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// per-bit-width weight scales of the seeded acceptance fixtures; chosen so
// the loss magnitudes sit in the regime of real conv layers at that width
inline double sigma_for_bits(int bits) {
  if (bits == 4) return 0.001;
  if (bits == 6) return 0.003;
  return 0.007;
}

}  // namespace oracles
