#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "requant/tensor.hpp"

namespace requant {

/// Round to nearest integer, ties away from zero, exact for every finite x.
/// The fractional part f = x - trunc(x) is computed exactly, and trunc(2f)
/// is +/-1 precisely when |f| >= 0.5, so no double-rounding case exists.
inline double round_half_away(double x) noexcept {
  const double t = std::trunc(x);
  return t + std::trunc(2.0 * (x - t));
}

/// Step size alpha * w_max / (2^(b-1) - 1). Returns 0 for a degenerate
/// (all-zero) tensor, signalled by w_max == 0.
double scale_factor(double alpha, double w_max, BitWidth bits);

/// Linear quantizer: clip(round(w / s)) into [-2^(b-1), 2^(b-1)-1].
int32_t quantize(double w, double alpha, double w_max, BitWidth bits);

/// Whole-tensor quantization; element i equals quantize(values[i], ...).
std::vector<int32_t> quantize_all(const WeightTensor& tensor, double alpha, double w_max,
                                  BitWidth bits);

/// code * scale. Throws kCodeOutOfRange when the code does not fit params.bits.
double dequantize(int32_t code, const QuantParams& params);

/// Element-wise dequantize(quantize(w)) with the linear quantizer; the
/// all-zero tensor comes back unchanged.
WeightTensor fake_quantize(const WeightTensor& tensor, double alpha, BitWidth bits);

/// Mean squared error between the tensor and its linear fake-quantization,
/// fused into a single pass per element. Accepts any alpha > 0 so the loss
/// can be probed outside (0, 1] (e.g. curvature checks at the right edge);
/// returns 0 for the all-zero tensor.
double loss_f(const WeightTensor& tensor, double alpha, BitWidth bits);

/// loss_f bound to one tensor, for use as a search objective.
std::function<double(double)> uniform_loss_objective(const WeightTensor& tensor, BitWidth bits);

}  // namespace requant
