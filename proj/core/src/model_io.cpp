#include "requant/model_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "requant/error.hpp"
#include "requant/version.hpp"

namespace requant {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double round_2dp(double ms) { return std::round(ms * 100.0) / 100.0; }

// tensor names become file stems; anything outside [A-Za-z0-9._-] flattens to '_'
std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-'))
      c = '_';
  return out;
}

std::string read_file(const fs::path& path, ErrorCode missing_code, const std::string& subject) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(missing_code, "cannot open '" + path.string() + "'", subject);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof())
    throw Error(ErrorCode::kIo, "failed reading '" + path.string() + "'", subject);
  return std::move(buf).str();
}

std::vector<double> decode_f32_le(const std::string& bytes) {
  std::vector<double> out(bytes.size() / 4);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (size_t i = 0; i < out.size(); ++i, p += 4) {
    const uint32_t u = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                       static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
    out[i] = static_cast<double>(std::bit_cast<float>(u));
  }
  return out;
}

std::string encode_f32_le(std::span<const double> values) {
  std::string bytes(values.size() * 4, '\0');
  auto* p = reinterpret_cast<unsigned char*>(bytes.data());
  for (double v : values) {
    const uint32_t u = std::bit_cast<uint32_t>(static_cast<float>(v));
    *p++ = static_cast<unsigned char>(u & 0xff);
    *p++ = static_cast<unsigned char>((u >> 8) & 0xff);
    *p++ = static_cast<unsigned char>((u >> 16) & 0xff);
    *p++ = static_cast<unsigned char>((u >> 24) & 0xff);
  }
  return bytes;
}

std::string encode_i32_le(std::span<const int32_t> codes) {
  std::string bytes(codes.size() * 4, '\0');
  auto* p = reinterpret_cast<unsigned char*>(bytes.data());
  for (int32_t c : codes) {
    const uint32_t u = static_cast<uint32_t>(c);
    *p++ = static_cast<unsigned char>(u & 0xff);
    *p++ = static_cast<unsigned char>((u >> 8) & 0xff);
    *p++ = static_cast<unsigned char>((u >> 16) & 0xff);
    *p++ = static_cast<unsigned char>((u >> 24) & 0xff);
  }
  return bytes;
}

std::vector<int32_t> decode_i32_le(const std::string& bytes) {
  std::vector<int32_t> out(bytes.size() / 4);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (size_t i = 0; i < out.size(); ++i, p += 4) {
    const uint32_t u = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                       static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
    out[i] = static_cast<int32_t>(u);
  }
  return out;
}

json parse_json(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kManifest, what + " is not valid JSON");
  return doc;
}

ModelManifest manifest_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("version") || !doc.contains("tensors"))
    throw Error(ErrorCode::kManifest, "manifest must carry 'version' and 'tensors'");
  ModelManifest manifest;
  manifest.version = doc.at("version").get<int>();
  if (manifest.version != 1)
    throw Error(ErrorCode::kManifest,
                "unsupported manifest version " + std::to_string(manifest.version));
  for (const auto& entry : doc.at("tensors")) {
    ManifestEntry e;
    e.name = entry.at("name").get<std::string>();
    e.shape = entry.at("shape").get<std::vector<int64_t>>();
    e.file = entry.at("file").get<std::string>();
    if (entry.value("dtype", "f32") != "f32")
      throw Error(ErrorCode::kManifest, "tensor '" + e.name + "': dtype must be f32", e.name);
    if (entry.value("byte_order", "little") != "little")
      throw Error(ErrorCode::kManifest, "tensor '" + e.name + "': byte_order must be little",
                  e.name);
    manifest.tensors.push_back(std::move(e));
  }
  return manifest;
}

}  // namespace

void atomic_write(const fs::path& path, std::string_view bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot create '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out.good()) throw Error(ErrorCode::kIo, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    throw Error(ErrorCode::kIo,
                "cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::vector<WeightTensor> load_model(const fs::path& manifest_path) {
  const json doc = parse_json(read_file(manifest_path, ErrorCode::kManifest, {}),
                              "manifest '" + manifest_path.string() + "'");
  ModelManifest manifest;
  try {
    manifest = manifest_from_json(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kManifest,
                "manifest '" + manifest_path.string() + "': " + e.what());
  }

  const fs::path base = manifest_path.parent_path();
  std::unordered_set<std::string> seen;
  std::vector<WeightTensor> tensors;
  tensors.reserve(manifest.tensors.size());
  for (const auto& entry : manifest.tensors) {
    if (!seen.insert(entry.name).second)
      throw Error(ErrorCode::kDuplicateName, "duplicate tensor name '" + entry.name + "'",
                  entry.name);
    const int64_t n = element_count(entry.shape);
    const fs::path file = base / entry.file;
    std::error_code ec;
    const auto size = fs::file_size(file, ec);
    if (ec)
      throw Error(ErrorCode::kMissingFile,
                  "tensor '" + entry.name + "': missing file '" + file.string() + "'",
                  entry.name);
    if (size != static_cast<uintmax_t>(n) * 4)
      throw Error(ErrorCode::kSizeMismatch,
                  "tensor '" + entry.name + "': expected " + std::to_string(n * 4) +
                      " bytes, file has " + std::to_string(size),
                  entry.name);
    std::vector<double> values =
        decode_f32_le(read_file(file, ErrorCode::kMissingFile, entry.name));
    for (double v : values)
      if (!std::isfinite(v))
        throw Error(ErrorCode::kNonFinite,
                    "tensor '" + entry.name + "' contains NaN or Inf", entry.name);
    tensors.emplace_back(entry.name, entry.shape, std::move(values));
  }
  return tensors;
}

void save_model(const fs::path& dir, std::span<const WeightTensor> tensors) {
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = 1;
  manifest["tensors"] = json::array();
  std::unordered_set<std::string> used_files;
  for (const auto& tensor : tensors) {
    const std::string file = sanitize(tensor.name()) + ".bin";
    if (!used_files.insert(file).second)
      throw Error(ErrorCode::kInvalidInput,
                  "tensor names collide after sanitizing: '" + file + "'", tensor.name());
    atomic_write(dir / file, encode_f32_le(tensor.values()));
    manifest["tensors"].push_back({{"name", tensor.name()},
                                   {"shape", tensor.shape()},
                                   {"dtype", "f32"},
                                   {"byte_order", "little"},
                                   {"file", file}});
  }
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

void save_quantized(const fs::path& dir, std::span<const QuantizedTensor> quantized,
                    const std::vector<WeightTensor>* fake) {
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = 1;
  manifest["tensors"] = json::array();
  std::unordered_set<std::string> used_files;
  for (const auto& tensor : quantized) {
    const std::string stem = sanitize(tensor.name());
    if (!used_files.insert(stem).second)
      throw Error(ErrorCode::kInvalidInput,
                  "tensor names collide after sanitizing: '" + stem + "'", tensor.name());
    const std::string codes_file = stem + ".codes.bin";
    const std::string params_file = stem + ".params.json";
    atomic_write(dir / codes_file, encode_i32_le(tensor.codes()));

    const QuantParams& p = tensor.params();
    json params{{"alpha", p.alpha},        {"scale", p.scale},
                {"bits", p.bits.bits()},   {"strategy", std::string(to_string(p.strategy))},
                {"w_max", p.w_max},        {"loss", p.loss}};
    atomic_write(dir / params_file, params.dump(2) + "\n");

    manifest["tensors"].push_back({{"name", tensor.name()},
                                   {"shape", tensor.shape()},
                                   {"dtype", "i32"},
                                   {"byte_order", "little"},
                                   {"codes", codes_file},
                                   {"params", params_file}});
  }
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
  if (fake != nullptr) save_model(dir / "fake", *fake);
}

std::vector<QuantizedTensor> load_quantized(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const json doc = parse_json(read_file(manifest_path, ErrorCode::kManifest, {}),
                              "manifest '" + manifest_path.string() + "'");
  std::vector<QuantizedTensor> tensors;
  try {
    for (const auto& entry : doc.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<int64_t>>();
      const json params_doc = parse_json(
          read_file(dir / entry.at("params").get<std::string>(), ErrorCode::kMissingFile, name),
          "params of '" + name + "'");
      QuantParams params{.alpha = params_doc.at("alpha").get<double>(),
                         .scale = params_doc.at("scale").get<double>(),
                         .bits = BitWidth(params_doc.at("bits").get<int>()),
                         .strategy =
                             strategy_from_string(params_doc.at("strategy").get<std::string>()),
                         .w_max = params_doc.at("w_max").get<double>(),
                         .loss = params_doc.at("loss").get<double>()};
      std::vector<int32_t> codes = decode_i32_le(
          read_file(dir / entry.at("codes").get<std::string>(), ErrorCode::kMissingFile, name));
      tensors.emplace_back(name, shape, std::move(codes), params);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kManifest, "result manifest: " + std::string(e.what()));
  }
  return tensors;
}

ReportDocument make_report(const PipelineConfig& config, std::vector<LayerReport> rows) {
  ReportDocument doc;
  doc.tool = std::string(kToolName);
  doc.version = std::string(kToolVersion);
  doc.bits = config.bits_weights.bits();
  doc.strategy = config.strategy;
  doc.method = std::string(to_string(config.search.method));
  doc.epsilon = config.search.epsilon;
  doc.phi = config.search.phi;
  doc.alpha_min = config.search.alpha_min;
  doc.first_last_bits = config.first_last_bits.bits();
  doc.rows = std::move(rows);
  return doc;
}

std::string report_to_json(const ReportDocument& doc) {
  json layers = json::array();
  double loss_sum = 0.0;
  double time_sum = 0.0;
  for (const auto& row : doc.rows) {
    loss_sum += row.loss;
    time_sum += row.wall_time_ms;
    layers.push_back({{"layer", row.layer},
                      {"method", row.method},
                      {"alpha", row.alpha},
                      {"loss", row.loss},
                      {"time_ms", round_2dp(row.wall_time_ms)},
                      {"evals", row.evals},
                      {"bits", row.bits},
                      {"strategy", std::string(to_string(row.strategy))}});
  }
  json out{{"tool", doc.tool},
           {"version", doc.version},
           {"config",
            {{"bits", doc.bits},
             {"strategy", std::string(to_string(doc.strategy))},
             {"method", doc.method},
             {"epsilon", doc.epsilon},
             {"phi", doc.phi},
             {"alpha_min", doc.alpha_min},
             {"first_last_bits", doc.first_last_bits}}},
           {"layers", layers},
           {"totals",
            {{"layers", doc.rows.size()},
             {"loss_sum", loss_sum},
             {"time_ms_sum", round_2dp(time_sum)}}}};
  return out.dump(2) + "\n";
}

std::string report_to_csv(const ReportDocument& doc) {
  std::string out = "layer,method,alpha,loss,time_ms,evals,bits,strategy\n";
  for (const auto& row : doc.rows) {
    out += row.layer;
    out += ',';
    out += row.method;
    out += ',';
    out += shortest(row.alpha);
    out += ',';
    out += shortest(row.loss);
    out += ',';
    out += shortest(round_2dp(row.wall_time_ms));
    out += ',';
    out += std::to_string(row.evals);
    out += ',';
    out += std::to_string(row.bits);
    out += ',';
    out += std::string(to_string(row.strategy));
    out += '\n';
  }
  return out;
}

ReportDocument report_from_json(const std::string& text) {
  const json doc = parse_json(text, "report");
  ReportDocument out;
  try {
    out.tool = doc.at("tool").get<std::string>();
    out.version = doc.at("version").get<std::string>();
    const json& config = doc.at("config");
    out.bits = config.at("bits").get<int>();
    out.strategy = strategy_from_string(config.at("strategy").get<std::string>());
    out.method = config.at("method").get<std::string>();
    out.epsilon = config.at("epsilon").get<double>();
    out.phi = config.at("phi").get<double>();
    out.alpha_min = config.at("alpha_min").get<double>();
    out.first_last_bits = config.at("first_last_bits").get<int>();
    for (const auto& row : doc.at("layers")) {
      out.rows.push_back(
          LayerReport{.layer = row.at("layer").get<std::string>(),
                      .method = row.at("method").get<std::string>(),
                      .alpha = row.at("alpha").get<double>(),
                      .loss = row.at("loss").get<double>(),
                      .wall_time_ms = row.at("time_ms").get<double>(),
                      .evals = row.at("evals").get<int64_t>(),
                      .bits = row.at("bits").get<int>(),
                      .strategy = strategy_from_string(row.at("strategy").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kManifest, "report: " + std::string(e.what()));
  }
  return out;
}

}  // namespace requant
