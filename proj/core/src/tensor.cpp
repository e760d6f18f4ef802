#include "requant/tensor.hpp"

#include <cmath>
#include <limits>

#include "requant/error.hpp"

namespace requant {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kManifest: return "manifest";
    case ErrorCode::kMissingFile: return "missing-file";
    case ErrorCode::kSizeMismatch: return "size-mismatch";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kDuplicateName: return "duplicate-name";
    case ErrorCode::kCodeOutOfRange: return "code-out-of-range";
    case ErrorCode::kSearchAborted: return "search-aborted";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUsage: return "usage";
  }
  return "unknown";
}

BitWidth::BitWidth(int bits) : bits_(bits) {
  if (bits < 2 || bits > 16)
    throw Error(ErrorCode::kInvalidInput,
                "bit-width must be in [2, 16], got " + std::to_string(bits));
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kUniformFull: return "uniform-full";
    case Strategy::kUniformClip: return "uniform-clip";
    case Strategy::kReshapeFull: return "reshape-full";
    case Strategy::kReshapeClip: return "reshape-clip";
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view name) {
  if (name == "uniform-full") return Strategy::kUniformFull;
  if (name == "uniform-clip") return Strategy::kUniformClip;
  if (name == "reshape-full") return Strategy::kReshapeFull;
  if (name == "reshape-clip") return Strategy::kReshapeClip;
  throw Error(ErrorCode::kInvalidInput, "unknown strategy: " + std::string(name));
}

bool strategy_is_reshaped(Strategy s) {
  return s == Strategy::kReshapeFull || s == Strategy::kReshapeClip;
}

bool strategy_is_searched(Strategy s) {
  return s == Strategy::kUniformClip || s == Strategy::kReshapeClip;
}

int64_t element_count(std::span<const int64_t> shape) {
  if (shape.empty())
    throw Error(ErrorCode::kInvalidInput, "tensor shape must have at least one dimension");
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0)
      throw Error(ErrorCode::kInvalidInput,
                  "tensor dimensions must be positive, got " + std::to_string(d));
    if (n > std::numeric_limits<int64_t>::max() / d)
      throw Error(ErrorCode::kInvalidInput, "tensor shape overflows element count");
    n *= d;
  }
  return n;
}

WeightTensor::WeightTensor(std::string name, std::vector<int64_t> shape,
                           std::vector<double> values)
    : name_(std::move(name)), shape_(std::move(shape)), values_(std::move(values)) {
  if (name_.empty())
    throw Error(ErrorCode::kInvalidInput, "tensor name must not be empty");
  const int64_t n = element_count(shape_);
  if (n != static_cast<int64_t>(values_.size()))
    throw Error(ErrorCode::kSizeMismatch,
                "tensor '" + name_ + "': shape wants " + std::to_string(n) + " values, got " +
                    std::to_string(values_.size()),
                name_);
  for (double v : values_)
    if (!std::isfinite(v))
      throw Error(ErrorCode::kNonFinite, "tensor '" + name_ + "' contains a non-finite value",
                  name_);
}

void QuantParams::validate() const {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw Error(ErrorCode::kInvalidInput, "alpha must be in (0, 1]");
  if (w_max < 0.0 || !std::isfinite(w_max))
    throw Error(ErrorCode::kInvalidInput, "w_max must be finite and nonnegative");
  if (loss < 0.0 || !std::isfinite(loss))
    throw Error(ErrorCode::kInvalidInput, "loss must be finite and nonnegative");
  if (w_max == 0.0) {
    if (scale != 0.0)
      throw Error(ErrorCode::kInvalidInput, "degenerate tensor must carry scale 0");
    return;
  }
  const double expected = alpha * w_max / static_cast<double>(bits.max_code());
  if (scale != expected)
    throw Error(ErrorCode::kInvalidInput, "scale is not alpha * w_max / (2^(b-1) - 1)");
}

QuantizedTensor::QuantizedTensor(std::string name, std::vector<int64_t> shape,
                                 std::vector<int32_t> codes, QuantParams params)
    : name_(std::move(name)), shape_(std::move(shape)), codes_(std::move(codes)),
      params_(params) {
  if (name_.empty())
    throw Error(ErrorCode::kInvalidInput, "tensor name must not be empty");
  params_.validate();
  const int64_t n = element_count(shape_);
  if (n != static_cast<int64_t>(codes_.size()))
    throw Error(ErrorCode::kSizeMismatch,
                "tensor '" + name_ + "': shape wants " + std::to_string(n) + " codes, got " +
                    std::to_string(codes_.size()),
                name_);
  const int32_t lo = params_.bits.min_code();
  const int32_t hi = params_.bits.max_code();
  for (int32_t c : codes_)
    if (c < lo || c > hi)
      throw Error(ErrorCode::kCodeOutOfRange,
                  "tensor '" + name_ + "': code " + std::to_string(c) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]",
                  name_);
}

double max_abs(std::span<const double> values) {
  if (values.empty())
    throw Error(ErrorCode::kInvalidInput, "max_abs of an empty tensor is undefined");
  // four running maxima break the dependence chain; max is exact, so the
  // result matches a plain left-to-right scan bit for bit
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
  size_t i = 0;
  for (; i + 4 <= values.size(); i += 4) {
    m0 = std::max(m0, std::fabs(values[i]));
    m1 = std::max(m1, std::fabs(values[i + 1]));
    m2 = std::max(m2, std::fabs(values[i + 2]));
    m3 = std::max(m3, std::fabs(values[i + 3]));
  }
  for (; i < values.size(); ++i) m0 = std::max(m0, std::fabs(values[i]));
  return std::max(std::max(m0, m1), std::max(m2, m3));
}

double max_abs(const WeightTensor& tensor) { return max_abs(tensor.values()); }

}  // namespace requant
