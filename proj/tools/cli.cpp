#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "requant/error.hpp"
#include "requant/model_io.hpp"
#include "requant/pipeline.hpp"
#include "requant/version.hpp"

namespace requant::cli {
namespace {

namespace fs = std::filesystem;

struct QuantizeArgs {
  std::string manifest;
  std::string out;
  int bits = 8;
  std::string strategy = "requant";
  std::string method = "golden";
  double epsilon = 1e-4;
  double phi = 0.618;
  double alpha_min = 1e-3;
  int first_last_bits = 8;
  std::vector<std::string> emit{"codes", "report"};
};

struct CompareArgs {
  std::string manifest;
  std::string layer;
  int bits = 8;
  double epsilon = 1e-4;
  double phi = 0.618;
  double alpha_min = 1e-3;
};

struct ReportArgs {
  std::string in;
  std::string format = "csv";
  std::string out;
};

Strategy strategy_from_flag(const std::string& flag) {
  if (flag == "full") return Strategy::kUniformFull;
  if (flag == "clip") return Strategy::kUniformClip;
  if (flag == "reshape") return Strategy::kReshapeFull;
  if (flag == "requant") return Strategy::kReshapeClip;
  throw Error(ErrorCode::kUsage, "unknown strategy '" + flag + "'");
}

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void error_line(std::string_view code, std::string_view message, std::string_view subject = {}) {
  nlohmann::json line{{"error", std::string(code)}, {"message", std::string(message)}};
  if (!subject.empty()) line["subject"] = std::string(subject);
  std::cerr << line.dump() << "\n";
}

int exit_code_for(ErrorCode code) {
  return (code == ErrorCode::kUsage || code == ErrorCode::kManifest) ? 2 : 1;
}

PipelineConfig config_from(const QuantizeArgs& args) {
  PipelineConfig config;
  config.bits_weights = BitWidth(args.bits);
  config.strategy = strategy_from_flag(args.strategy);
  config.first_last_bits = BitWidth(args.first_last_bits);
  config.search.epsilon = args.epsilon;
  config.search.phi = args.phi;
  config.search.alpha_min = args.alpha_min;
  config.search.method = search_method_from_string(args.method);
  config.emit = Emit{.codes = false, .fake = false};
  for (const auto& item : args.emit) {
    if (item == "codes") config.emit.codes = true;
    if (item == "fake") config.emit.fake = true;
  }
  config.validate();
  return config;
}

int run_quantize(const QuantizeArgs& args) {
  const PipelineConfig config = config_from(args);
  const std::vector<WeightTensor> tensors = load_model(args.manifest);
  const ModelResult result = quantize_model(tensors, config);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  const ReportDocument report = make_report(config, result.reports);
  atomic_write(out_dir / "report.json", report_to_json(report));
  atomic_write(out_dir / "report.csv", report_to_csv(report));

  if (config.emit.codes) save_quantized(out_dir / "codes", result.quantized);
  if (config.emit.fake) {
    std::vector<WeightTensor> fake;
    fake.reserve(result.quantized.size());
    for (const auto& q : result.quantized) fake.push_back(dequantize_tensor(q));
    save_model(out_dir / "fake", fake);
  }

  std::cout << report_to_csv(report);
  std::cout << "report: " << (out_dir / "report.json").string() << "\n";
  return 0;
}

int run_compare(const CompareArgs& args) {
  SearchSettings settings;
  settings.epsilon = args.epsilon;
  settings.phi = args.phi;
  settings.alpha_min = args.alpha_min;

  const std::vector<WeightTensor> tensors = load_model(args.manifest);
  const WeightTensor* tensor = nullptr;
  for (const auto& t : tensors)
    if (t.name() == args.layer) tensor = &t;
  if (tensor == nullptr)
    throw Error(ErrorCode::kInvalidInput, "no tensor named '" + args.layer + "' in the model",
                args.layer);

  const auto rows = compare_searches(*tensor, BitWidth(args.bits), settings);
  std::cout << "layer,method,alpha,loss,time_ms\n";
  for (const auto& row : rows) {
    std::cout << row.layer << ',' << row.method << ',' << shortest(row.alpha) << ','
              << shortest(row.loss) << ','
              << shortest(std::round(row.wall_time_ms * 100.0) / 100.0) << "\n";
  }
  return 0;
}

int run_report(const ReportArgs& args) {
  std::ifstream in(args.in, std::ios::binary);
  if (!in) throw Error(ErrorCode::kManifest, "cannot open report '" + args.in + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const ReportDocument doc = report_from_json(buf.str());
  const std::string rendered = args.format == "json" ? report_to_json(doc) : report_to_csv(doc);
  if (args.out.empty()) {
    std::cout << rendered;
  } else {
    atomic_write(args.out, rendered);
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Per-tensor post-training quantization with searched clipping ranges"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  QuantizeArgs qargs;
  CLI::App* quantize = app.add_subcommand("quantize", "Quantize every tensor of a model");
  quantize->add_option("--manifest", qargs.manifest, "Model manifest (JSON)")->required();
  quantize->add_option("--bits", qargs.bits, "Weight bit-width")
      ->check(CLI::Range(2, 16))
      ->capture_default_str();
  quantize->add_option("--strategy", qargs.strategy, "Quantization strategy")
      ->check(CLI::IsMember({"full", "clip", "reshape", "requant"}))
      ->capture_default_str();
  quantize->add_option("--epsilon", qargs.epsilon, "Search termination width")
      ->capture_default_str();
  quantize->add_option("--phi", qargs.phi, "Golden contraction factor")->capture_default_str();
  quantize->add_option("--alpha-min", qargs.alpha_min, "Left edge of the search interval")
      ->capture_default_str();
  quantize->add_option("--method", qargs.method, "Search method for clipped strategies")
      ->check(CLI::IsMember({"golden", "bisection", "nelder-mead"}))
      ->capture_default_str();
  quantize->add_option("--first-last-bits", qargs.first_last_bits,
                       "Bit-width of the first and last layers")
      ->check(CLI::Range(2, 16))
      ->capture_default_str();
  quantize->add_option("--out", qargs.out, "Output directory")->required();
  quantize->add_option("--emit", qargs.emit, "Artifacts to write (codes,fake,report)")
      ->delimiter(',')
      ->check(CLI::IsMember({"codes", "fake", "report"}));

  CompareArgs cargs;
  CLI::App* compare =
      app.add_subcommand("compare-searches", "Race the three search methods on one layer");
  compare->add_option("--manifest", cargs.manifest, "Model manifest (JSON)")->required();
  compare->add_option("--layer", cargs.layer, "Tensor name to search")->required();
  compare->add_option("--bits", cargs.bits, "Weight bit-width")
      ->check(CLI::Range(2, 16))
      ->capture_default_str();
  compare->add_option("--epsilon", cargs.epsilon, "Search termination width")
      ->capture_default_str();
  compare->add_option("--phi", cargs.phi, "Golden contraction factor")->capture_default_str();
  compare->add_option("--alpha-min", cargs.alpha_min, "Left edge of the search interval")
      ->capture_default_str();

  ReportArgs rargs;
  CLI::App* report = app.add_subcommand("report", "Re-render a report document");
  report->add_option("--in", rargs.in, "report.json produced by quantize")->required();
  report->add_option("--format", rargs.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  report->add_option("--out", rargs.out, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    error_line("usage", e.what());
    return 2;
  }

  try {
    if (quantize->parsed()) return run_quantize(qargs);
    if (compare->parsed()) return run_compare(cargs);
    if (report->parsed()) return run_report(rargs);
    error_line("usage", "no subcommand given");
    return 2;
  } catch (const Error& e) {
    error_line(to_string(e.code()), e.what(), e.subject());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
}

}  // namespace requant::cli
