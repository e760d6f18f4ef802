#include "requant/reshape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "loss_kernels.hpp"
#include "requant/error.hpp"
#include "requant/uniform.hpp"

namespace requant {
namespace {

void check_alpha_unit(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw Error(ErrorCode::kInvalidInput, "alpha must be in (0, 1]");
}

// sign(w) * sqrt(|w|); copysign keeps sign(0) * 0 = 0
inline double sqrt_transform(double w) { return std::copysign(std::sqrt(std::fabs(w)), w); }

inline int32_t quantize_transformed(double t, double inv_sq, double lo, double hi) {
  const double r = std::clamp(round_half_away(t * inv_sq), lo, hi);
  return static_cast<int32_t>(r);
}

}  // namespace

int32_t quantize_reshaped(double w, double alpha, double w_max, BitWidth bits) {
  check_alpha_unit(alpha);
  if (!std::isfinite(w)) throw Error(ErrorCode::kNonFinite, "cannot quantize a non-finite value");
  if (w_max <= 0.0) return 0;
  const double qmax = static_cast<double>(bits.max_code());
  const double inv_sq = qmax / std::sqrt(alpha * w_max);
  return quantize_transformed(sqrt_transform(w), inv_sq, static_cast<double>(bits.min_code()),
                              qmax);
}

double dequantize_reshaped(int32_t code, const QuantParams& params) {
  if (code < params.bits.min_code() || code > params.bits.max_code())
    throw Error(ErrorCode::kCodeOutOfRange,
                "code " + std::to_string(code) + " does not fit " +
                    std::to_string(params.bits.bits()) + " bits");
  if (code == 0 || params.w_max == 0.0) return 0.0;
  const double qmax = static_cast<double>(params.bits.max_code());
  const double step = std::sqrt(params.alpha * params.w_max) / qmax;
  const double mag = std::fabs(static_cast<double>(code)) * step;
  return std::copysign(mag * mag, static_cast<double>(code));
}

WeightTensor fake_quantize_reshaped(const WeightTensor& tensor, double alpha, BitWidth bits) {
  check_alpha_unit(alpha);
  const double w_max = max_abs(tensor);
  if (w_max == 0.0) return tensor;
  const double qmax = static_cast<double>(bits.max_code());
  const double lo = static_cast<double>(bits.min_code());
  const double inv_sq = qmax / std::sqrt(alpha * w_max);
  const double step = std::sqrt(alpha * w_max) / qmax;
  std::vector<double> out(tensor.size());
  auto src = tensor.values();
  for (size_t i = 0; i < out.size(); ++i) {
    const int32_t code = quantize_transformed(sqrt_transform(src[i]), inv_sq, lo, qmax);
    const double mag = std::fabs(static_cast<double>(code)) * step;
    out[i] = std::copysign(mag * mag, static_cast<double>(code));
  }
  return WeightTensor(tensor.name(), tensor.shape(), std::move(out));
}

double loss_g(const WeightTensor& tensor, double alpha, BitWidth bits) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidInput, "alpha must be positive");
  const double w_max = max_abs(tensor);
  if (w_max == 0.0) return 0.0;
  auto src = tensor.values();
  std::vector<double> transformed(src.size());
  for (size_t i = 0; i < src.size(); ++i) transformed[i] = sqrt_transform(src[i]);
  return detail::reshape_mse(src.data(), transformed.data(), src.size(), alpha, w_max,
                             static_cast<double>(bits.max_code()));
}

std::function<double(double)> reshape_loss_objective(const WeightTensor& tensor, BitWidth bits) {
  const double w_max = max_abs(tensor);
  const double qmax = static_cast<double>(bits.max_code());
  auto values = std::make_shared<std::vector<double>>(tensor.values().begin(),
                                                      tensor.values().end());
  auto transformed = std::make_shared<std::vector<double>>(values->size());
  for (size_t i = 0; i < values->size(); ++i) (*transformed)[i] = sqrt_transform((*values)[i]);
  return [values, transformed, w_max, qmax](double alpha) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidInput, "alpha must be positive");
    if (w_max == 0.0) return 0.0;
    return detail::reshape_mse(values->data(), transformed->data(), values->size(), alpha,
                               w_max, qmax);
  };
}

}  // namespace requant
