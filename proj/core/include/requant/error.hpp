#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace requant {

/// Stable error codes; the CLI maps them to exit status and emits them in
/// machine-readable error lines.
enum class ErrorCode {
  kInvalidInput,    // bad argument, violated precondition, broken invariant
  kManifest,        // manifest missing, unreadable, or not valid JSON/schema
  kMissingFile,     // tensor payload file referenced by the manifest is absent
  kSizeMismatch,    // payload byte length disagrees with the declared shape
  kNonFinite,       // NaN or Inf in a tensor payload
  kDuplicateName,   // two tensors share a name within one model
  kCodeOutOfRange,  // quantized code outside [l, r] for its bit-width
  kSearchAborted,   // objective returned a non-finite value during a search
  kIo,              // filesystem write/read failure
  kUsage,           // bad command line
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string subject = {})
      : std::runtime_error(std::move(message)), code_(code), subject_(std::move(subject)) {}

  ErrorCode code() const noexcept { return code_; }

  /// Name of the offending tensor/file when one exists, else empty.
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace requant
