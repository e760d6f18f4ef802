#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace requant {

/// Signed symmetric code range for b bits: codes live in [-2^(b-1), 2^(b-1)-1].
class BitWidth {
 public:
  BitWidth() = default;
  explicit BitWidth(int bits);  // throws kInvalidInput outside [2, 16]

  int bits() const noexcept { return bits_; }
  int32_t min_code() const noexcept { return -(int32_t{1} << (bits_ - 1)); }
  int32_t max_code() const noexcept { return (int32_t{1} << (bits_ - 1)) - 1; }

  friend bool operator==(BitWidth a, BitWidth b) noexcept { return a.bits_ == b.bits_; }

 private:
  int bits_ = 8;
};

/// How a tensor was quantized: fixed or searched clipping, linear or
/// square-root-reshaped levels.
enum class Strategy {
  kUniformFull,  // alpha fixed at 1, linear levels
  kUniformClip,  // alpha searched on the linear loss
  kReshapeFull,  // alpha fixed at 1, reshaped levels
  kReshapeClip,  // alpha searched on the reshaped loss
};

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);  // canonical names only
bool strategy_is_reshaped(Strategy s);
bool strategy_is_searched(Strategy s);

/// One named layer of finite real weights. Immutable after construction;
/// shareable across threads without synchronization.
class WeightTensor {
 public:
  WeightTensor(std::string name, std::vector<int64_t> shape, std::vector<double> values);

  const std::string& name() const noexcept { return name_; }
  const std::vector<int64_t>& shape() const noexcept { return shape_; }
  std::span<const double> values() const noexcept { return values_; }
  size_t size() const noexcept { return values_.size(); }

 private:
  std::string name_;
  std::vector<int64_t> shape_;
  std::vector<double> values_;
};

/// Everything needed to dequantize a tensor. Scale is tied to alpha by
/// scale = alpha * w_max / (2^(b-1) - 1); a zero w_max forces scale 0.
struct QuantParams {
  double alpha = 1.0;   // clipping fraction in (0, 1]
  double scale = 0.0;   // step size; 0 only for the all-zero tensor
  BitWidth bits;
  Strategy strategy = Strategy::kUniformFull;
  double w_max = 0.0;   // max |w| of the source tensor
  double loss = 0.0;    // achieved mean squared error

  void validate() const;  // throws kInvalidInput on violated invariants
};

/// Integer codes plus the parameters that decode them.
class QuantizedTensor {
 public:
  QuantizedTensor(std::string name, std::vector<int64_t> shape, std::vector<int32_t> codes,
                  QuantParams params);

  const std::string& name() const noexcept { return name_; }
  const std::vector<int64_t>& shape() const noexcept { return shape_; }
  std::span<const int32_t> codes() const noexcept { return codes_; }
  const QuantParams& params() const noexcept { return params_; }

 private:
  std::string name_;
  std::vector<int64_t> shape_;
  std::vector<int32_t> codes_;
  QuantParams params_;
};

/// One row of the per-layer result table.
struct LayerReport {
  std::string layer;
  std::string method;   // "golden" | "bisection" | "nelder-mead" | "grid" | "fixed" | "degenerate"
  double alpha = 1.0;
  double loss = 0.0;
  double wall_time_ms = 0.0;  // search time only, I/O excluded
  int64_t evals = 0;          // objective evaluations; >= 1 whenever a search ran
  int bits = 8;
  Strategy strategy = Strategy::kUniformFull;

  bool degenerate() const noexcept { return method == "degenerate"; }
};

/// Max absolute value; 0 only for an all-zero input. Throws on empty input.
double max_abs(std::span<const double> values);
double max_abs(const WeightTensor& tensor);

/// Product of dimensions; throws kInvalidInput on empty shape or
/// non-positive dims.
int64_t element_count(std::span<const int64_t> shape);

}  // namespace requant
