#include "requant/uniform.hpp"

#include <algorithm>
#include <memory>

#include "loss_kernels.hpp"
#include "requant/error.hpp"

namespace requant {
namespace {

void check_alpha_unit(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw Error(ErrorCode::kInvalidInput, "alpha must be in (0, 1]");
}

void check_alpha_positive(double alpha) {
  if (!(alpha > 0.0))
    throw Error(ErrorCode::kInvalidInput, "alpha must be positive");
}

// shared by the scalar quantizer and fake_quantize so codes agree bit for bit
// with the fused kernel, which precomputes the same inv_s
inline int32_t quantize_with(double w, double inv_s, double lo, double hi) {
  const double r = std::clamp(round_half_away(w * inv_s), lo, hi);
  return static_cast<int32_t>(r);
}

}  // namespace

double scale_factor(double alpha, double w_max, BitWidth bits) {
  check_alpha_unit(alpha);
  if (w_max < 0.0 || !std::isfinite(w_max))
    throw Error(ErrorCode::kInvalidInput, "w_max must be finite and nonnegative");
  if (w_max == 0.0) return 0.0;
  return alpha * w_max / static_cast<double>(bits.max_code());
}

int32_t quantize(double w, double alpha, double w_max, BitWidth bits) {
  check_alpha_unit(alpha);
  if (!std::isfinite(w)) throw Error(ErrorCode::kNonFinite, "cannot quantize a non-finite value");
  if (w_max <= 0.0) return 0;
  const double qmax = static_cast<double>(bits.max_code());
  const double inv_s = qmax / (alpha * w_max);
  return quantize_with(w, inv_s, static_cast<double>(bits.min_code()), qmax);
}

std::vector<int32_t> quantize_all(const WeightTensor& tensor, double alpha, double w_max,
                                  BitWidth bits) {
  check_alpha_unit(alpha);
  std::vector<int32_t> codes(tensor.size(), 0);
  if (w_max <= 0.0) return codes;
  const double qmax = static_cast<double>(bits.max_code());
  const double lo = static_cast<double>(bits.min_code());
  const double inv_s = qmax / (alpha * w_max);
  auto src = tensor.values();
  for (size_t i = 0; i < codes.size(); ++i) codes[i] = quantize_with(src[i], inv_s, lo, qmax);
  return codes;
}

double dequantize(int32_t code, const QuantParams& params) {
  if (code < params.bits.min_code() || code > params.bits.max_code())
    throw Error(ErrorCode::kCodeOutOfRange,
                "code " + std::to_string(code) + " does not fit " +
                    std::to_string(params.bits.bits()) + " bits");
  return static_cast<double>(code) * params.scale;
}

WeightTensor fake_quantize(const WeightTensor& tensor, double alpha, BitWidth bits) {
  check_alpha_unit(alpha);
  const double w_max = max_abs(tensor);
  if (w_max == 0.0) return tensor;
  const double qmax = static_cast<double>(bits.max_code());
  const double lo = static_cast<double>(bits.min_code());
  const double inv_s = qmax / (alpha * w_max);
  const double s = alpha * w_max / qmax;
  std::vector<double> out(tensor.size());
  auto src = tensor.values();
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(quantize_with(src[i], inv_s, lo, qmax)) * s;
  return WeightTensor(tensor.name(), tensor.shape(), std::move(out));
}

double loss_f(const WeightTensor& tensor, double alpha, BitWidth bits) {
  check_alpha_positive(alpha);
  const double w_max = max_abs(tensor);
  if (w_max == 0.0) return 0.0;
  return detail::uniform_mse(tensor.values().data(), tensor.size(), alpha, w_max,
                             static_cast<double>(bits.max_code()));
}

std::function<double(double)> uniform_loss_objective(const WeightTensor& tensor, BitWidth bits) {
  const double w_max = max_abs(tensor);
  const double qmax = static_cast<double>(bits.max_code());
  // keep the values alive independently of the caller's tensor
  auto values = std::make_shared<std::vector<double>>(tensor.values().begin(),
                                                      tensor.values().end());
  return [values, w_max, qmax](double alpha) {
    check_alpha_positive(alpha);
    if (w_max == 0.0) return 0.0;
    return detail::uniform_mse(values->data(), values->size(), alpha, w_max, qmax);
  };
}

}  // namespace requant
