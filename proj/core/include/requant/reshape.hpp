#pragma once

#include <cstdint>
#include <functional>

#include "requant/tensor.hpp"

namespace requant {

/// Square-root-reshaped quantizer:
/// clip(round(sign(w) * sqrt(|w|) * (2^(b-1)-1) / sqrt(alpha * w_max))).
/// sign(0) = 0, so zero always maps to code 0.
int32_t quantize_reshaped(double w, double alpha, double w_max, BitWidth bits);

/// Whole-tensor form; element i equals quantize_reshaped(values[i], ...).
std::vector<int32_t> quantize_all_reshaped(const WeightTensor& tensor, double alpha,
                                           double w_max, BitWidth bits);

/// Inverse map sign(code) * (|code| * sqrt(alpha * w_max) / (2^(b-1)-1))^2.
/// Reconstruction levels grow quadratically in |code|: spacing widens with
/// magnitude, so small weights get the finer resolution.
double dequantize_reshaped(int32_t code, const QuantParams& params);

/// Element-wise reshaped round trip; the all-zero tensor comes back unchanged.
WeightTensor fake_quantize_reshaped(const WeightTensor& tensor, double alpha, BitWidth bits);

/// Mean squared error of the reshaped round trip, one fused pass.
/// Same extended alpha > 0 domain as loss_f.
double loss_g(const WeightTensor& tensor, double alpha, BitWidth bits);

/// loss_g bound to one tensor. The square-root transform of the weights is
/// precomputed once and shared by every probe, so repeated evaluations cost
/// the same as loss_f probes.
std::function<double(double)> reshape_loss_objective(const WeightTensor& tensor, BitWidth bits);

}  // namespace requant
