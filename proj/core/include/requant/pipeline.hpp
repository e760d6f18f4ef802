#pragma once

#include <span>
#include <vector>

#include "requant/search.hpp"
#include "requant/tensor.hpp"

namespace requant {

/// Which artifacts a run writes; the per-layer report is always produced.
struct Emit {
  bool codes = true;
  bool fake = false;
};

struct PipelineConfig {
  BitWidth bits_weights{8};
  Strategy strategy = Strategy::kReshapeClip;
  SearchSettings search;
  BitWidth first_last_bits{8};  // first and last layers stay at this width
  Emit emit;

  void validate() const;  // first_last_bits >= bits_weights
};

struct LayerResult {
  QuantizedTensor quantized;
  LayerReport report;
};

struct ModelResult {
  std::vector<QuantizedTensor> quantized;
  std::vector<LayerReport> reports;
};

/// Quantize one tensor under the configured strategy. Searched strategies
/// minimize their loss over alpha and then apply the fallback guard: if the
/// searched loss exceeds the loss at alpha = 1, alpha = 1 wins, so a clipped
/// strategy never does worse than its unclipped counterpart. The all-zero
/// tensor short-circuits to zero codes with a report marked "degenerate".
LayerResult quantize_layer(const WeightTensor& tensor, const PipelineConfig& config);

/// Quantize an ordered model. The first and last tensors use
/// config.first_last_bits; everything else uses config.bits_weights.
/// Reports come back in input order. Throws kDuplicateName on name reuse.
ModelResult quantize_model(std::span<const WeightTensor> tensors, const PipelineConfig& config);

/// Run golden-section, bisection and Nelder-Mead on the tensor's linear loss
/// and report each (alpha, loss, time, evals) row.
std::vector<LayerReport> compare_searches(const WeightTensor& tensor, BitWidth bits,
                                          const SearchSettings& settings);

/// Reconstruct the fake-quantized tensor from stored codes; identical to
/// fake_quantize(_reshaped) at the same parameters by construction.
WeightTensor dequantize_tensor(const QuantizedTensor& tensor);

}  // namespace requant
