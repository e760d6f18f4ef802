#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "requant/pipeline.hpp"
#include "requant/tensor.hpp"

namespace requant {

/// On-disk model description. Tensor payloads are raw little-endian IEEE-754
/// float32, row-major, no header, and live next to the manifest.
struct ManifestEntry {
  std::string name;
  std::vector<int64_t> shape;
  std::string file;  // path relative to the manifest
};

struct ModelManifest {
  int version = 1;
  std::vector<ManifestEntry> tensors;
};

/// Parse and validate a manifest, then load every tensor in order, widening
/// float32 payloads to double. Errors carry the offending tensor name and a
/// distinct code: kMissingFile, kSizeMismatch, kNonFinite, kDuplicateName;
/// an unreadable or malformed manifest itself is kManifest.
std::vector<WeightTensor> load_model(const std::filesystem::path& manifest_path);

/// Write tensors as float32 payloads plus a manifest.json in the input
/// format, so the result can be re-loaded with load_model.
void save_model(const std::filesystem::path& dir, std::span<const WeightTensor> tensors);

/// Write per-tensor codes (raw little-endian int32) with a JSON parameter
/// sidecar each, a result manifest tying them together, and optionally the
/// fake-quantized tensors in the input model format under dir/fake.
void save_quantized(const std::filesystem::path& dir, std::span<const QuantizedTensor> quantized,
                    const std::vector<WeightTensor>* fake = nullptr);

/// Load codes + params back; inverse of save_quantized for the codes set.
std::vector<QuantizedTensor> load_quantized(const std::filesystem::path& dir);

/// Phase settings echoed into reports plus the per-layer rows.
struct ReportDocument {
  std::string tool;
  std::string version;
  int bits = 8;
  Strategy strategy = Strategy::kReshapeClip;
  std::string method;
  double epsilon = 1e-4;
  double phi = 0.618;
  double alpha_min = 1e-3;
  int first_last_bits = 8;
  std::vector<LayerReport> rows;
};

ReportDocument make_report(const PipelineConfig& config, std::vector<LayerReport> rows);

/// JSON with canonically sorted keys. Times are rounded to two decimals in
/// both formats; every other value round-trips exactly.
std::string report_to_json(const ReportDocument& doc);

/// CSV with header row: layer,method,alpha,loss,time_ms,evals,bits,strategy
std::string report_to_csv(const ReportDocument& doc);

ReportDocument report_from_json(const std::string& text);

/// Write-to-temp-then-rename, so readers never observe a truncated file.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

}  // namespace requant
