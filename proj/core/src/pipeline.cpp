#include "requant/pipeline.hpp"

#include <chrono>
#include <unordered_set>
#include <utility>

#include "requant/error.hpp"
#include "requant/reshape.hpp"
#include "requant/uniform.hpp"

namespace requant {
namespace {

using Clock = std::chrono::steady_clock;

std::vector<int32_t> emit_codes(const WeightTensor& tensor, double alpha, double w_max,
                                BitWidth bits, Strategy strategy) {
  std::vector<int32_t> codes(tensor.size());
  auto src = tensor.values();
  if (strategy_is_reshaped(strategy)) {
    for (size_t i = 0; i < codes.size(); ++i)
      codes[i] = quantize_reshaped(src[i], alpha, w_max, bits);
  } else {
    for (size_t i = 0; i < codes.size(); ++i) codes[i] = quantize(src[i], alpha, w_max, bits);
  }
  return codes;
}

LayerResult degenerate_layer(const WeightTensor& tensor, const PipelineConfig& config,
                             BitWidth bits) {
  QuantParams params{.alpha = 1.0,
                     .scale = 0.0,
                     .bits = bits,
                     .strategy = config.strategy,
                     .w_max = 0.0,
                     .loss = 0.0};
  LayerReport report{.layer = tensor.name(),
                     .method = "degenerate",
                     .alpha = 1.0,
                     .loss = 0.0,
                     .wall_time_ms = 0.0,
                     .evals = 0,
                     .bits = bits.bits(),
                     .strategy = config.strategy};
  return LayerResult{
      QuantizedTensor(tensor.name(), tensor.shape(),
                      std::vector<int32_t>(tensor.size(), 0), params),
      std::move(report)};
}

}  // namespace

void PipelineConfig::validate() const {
  search.validate();
  if (first_last_bits.bits() < bits_weights.bits())
    throw Error(ErrorCode::kInvalidInput,
                "first/last layer bit-width must be at least the weight bit-width");
}

LayerResult quantize_layer(const WeightTensor& tensor, const PipelineConfig& config) {
  config.validate();
  const BitWidth bits = config.bits_weights;
  const double w_max = max_abs(tensor);
  if (w_max == 0.0) return degenerate_layer(tensor, config, bits);

  const bool reshaped = strategy_is_reshaped(config.strategy);
  const Objective objective = reshaped ? reshape_loss_objective(tensor, bits)
                                       : uniform_loss_objective(tensor, bits);

  double alpha = 1.0;
  double loss = 0.0;
  std::string method;
  int64_t evals = 0;
  double wall_ms = 0.0;

  if (strategy_is_searched(config.strategy)) {
    const auto start = Clock::now();
    SearchResult searched = run_search(objective, config.search);
    // fallback guard: never do worse than the unclipped alpha = 1
    const double loss_at_one = objective(1.0);
    wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (searched.loss > loss_at_one) {
      alpha = 1.0;
      loss = loss_at_one;
    } else {
      alpha = searched.alpha;
      loss = searched.loss;
    }
    evals = searched.evals + 1;
    method = std::string(to_string(config.search.method));
  } else {
    const auto start = Clock::now();
    loss = objective(1.0);
    wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    alpha = 1.0;
    evals = 1;
    method = "fixed";
  }

  QuantParams params{.alpha = alpha,
                     .scale = scale_factor(alpha, w_max, bits),
                     .bits = bits,
                     .strategy = config.strategy,
                     .w_max = w_max,
                     .loss = loss};
  LayerReport report{.layer = tensor.name(),
                     .method = std::move(method),
                     .alpha = alpha,
                     .loss = loss,
                     .wall_time_ms = wall_ms,
                     .evals = evals,
                     .bits = bits.bits(),
                     .strategy = config.strategy};
  return LayerResult{QuantizedTensor(tensor.name(), tensor.shape(),
                                     emit_codes(tensor, alpha, w_max, bits, config.strategy),
                                     params),
                     std::move(report)};
}

ModelResult quantize_model(std::span<const WeightTensor> tensors, const PipelineConfig& config) {
  config.validate();
  if (tensors.empty())
    throw Error(ErrorCode::kInvalidInput, "a model needs at least one tensor");
  std::unordered_set<std::string> seen;
  for (const auto& t : tensors)
    if (!seen.insert(t.name()).second)
      throw Error(ErrorCode::kDuplicateName, "duplicate tensor name '" + t.name() + "'",
                  t.name());

  ModelResult result;
  result.quantized.reserve(tensors.size());
  result.reports.reserve(tensors.size());
  for (size_t i = 0; i < tensors.size(); ++i) {
    PipelineConfig layer_config = config;
    if (i == 0 || i + 1 == tensors.size()) layer_config.bits_weights = config.first_last_bits;
    LayerResult layer = quantize_layer(tensors[i], layer_config);
    result.quantized.push_back(std::move(layer.quantized));
    result.reports.push_back(std::move(layer.report));
  }
  return result;
}

std::vector<LayerReport> compare_searches(const WeightTensor& tensor, BitWidth bits,
                                          const SearchSettings& settings) {
  settings.validate();
  const Objective objective = uniform_loss_objective(tensor, bits);

  std::vector<LayerReport> rows;
  rows.reserve(3);
  for (SearchMethod m :
       {SearchMethod::kGolden, SearchMethod::kBisection, SearchMethod::kNelderMead}) {
    SearchSettings s = settings;
    s.method = m;
    SearchResult r = run_search(objective, s);
    rows.push_back(LayerReport{.layer = tensor.name(),
                               .method = std::string(to_string(m)),
                               .alpha = r.alpha,
                               .loss = r.loss,
                               .wall_time_ms = r.wall_time_ms,
                               .evals = r.evals,
                               .bits = bits.bits(),
                               .strategy = Strategy::kUniformClip});
  }
  return rows;
}

WeightTensor dequantize_tensor(const QuantizedTensor& tensor) {
  const QuantParams& params = tensor.params();
  std::vector<double> values(tensor.codes().size());
  auto codes = tensor.codes();
  if (strategy_is_reshaped(params.strategy)) {
    for (size_t i = 0; i < values.size(); ++i) values[i] = dequantize_reshaped(codes[i], params);
  } else {
    for (size_t i = 0; i < values.size(); ++i) values[i] = dequantize(codes[i], params);
  }
  return WeightTensor(tensor.name(), tensor.shape(), std::move(values));
}

}  // namespace requant
