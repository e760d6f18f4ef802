#pragma once

#include <cstddef>

namespace requant::detail {

// Fused quantize -> dequantize -> squared-error accumulation for the linear
// quantizer. qmax = 2^(b-1) - 1; the low clip bound is -(qmax + 1).
// Requires alpha > 0, w_max > 0.
double uniform_mse(const double* w, size_t n, double alpha, double w_max, double qmax);

// Same for the square-root-reshaped quantizer. t must hold the precomputed
// transform sign(w) * sqrt(|w|) of the same weights.
double reshape_mse(const double* w, const double* t, size_t n, double alpha, double w_max,
                   double qmax);

}  // namespace requant::detail
