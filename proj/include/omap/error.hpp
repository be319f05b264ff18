#ifndef OMAP_ERROR_HPP_
#define OMAP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace omap {

/// Stable error identifiers. Every failure raised by the library carries one;
/// the CLI prints it as the first token of its diagnostic line.
enum class ErrorCode {
  kParse,             // malformed taxonomy, edge list, CSV or JSON
  kDuplicateId,       // repeated node id or class column
  kDanglingReference, // child_id or class id that names no vertex
  kSelfLoop,
  kDisconnected,      // two evaluated classes with no connecting path
  kRange,             // value outside its admissible interval
  kShape,             // dimension disagreement between inputs
  kBinarity,          // label that is neither 0 nor 1
  kNonFinite,
  kFormat,            // bad magic, kind byte, truncated payload
  kVersion,           // unknown format or schema version
  kIntegrity,         // stored aggregate disagrees with recomputation
  kEmptyLabels,       // sample without any positive label
  kNoPositives,       // class without any positive label
  kDegenerateLevel,   // thresholded distance matrix with zero mean
  kMismatch,          // reports built from different ontologies or levels
  kArgument,          // invalid caller-supplied parameter
  kIo,
  kInternal,
};

/// Coarse failure category, used for process exit codes.
enum class ErrorCategory { kValidation = 2, kIo = 3, kInternal = 4 };

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "E_PARSE";
    case ErrorCode::kDuplicateId: return "E_DUPLICATE_ID";
    case ErrorCode::kDanglingReference: return "E_DANGLING";
    case ErrorCode::kSelfLoop: return "E_SELF_LOOP";
    case ErrorCode::kDisconnected: return "E_DISCONNECTED";
    case ErrorCode::kRange: return "E_RANGE";
    case ErrorCode::kShape: return "E_SHAPE";
    case ErrorCode::kBinarity: return "E_BINARITY";
    case ErrorCode::kNonFinite: return "E_NONFINITE";
    case ErrorCode::kFormat: return "E_FORMAT";
    case ErrorCode::kVersion: return "E_VERSION";
    case ErrorCode::kIntegrity: return "E_INTEGRITY";
    case ErrorCode::kEmptyLabels: return "E_EMPTY_LABELS";
    case ErrorCode::kNoPositives: return "E_NO_POSITIVES";
    case ErrorCode::kDegenerateLevel: return "E_DEGENERATE_LEVEL";
    case ErrorCode::kMismatch: return "E_MISMATCH";
    case ErrorCode::kArgument: return "E_ARGUMENT";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kInternal: return "E_INTERNAL";
  }
  return "E_INTERNAL";
}

constexpr ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return ErrorCategory::kIo;
    case ErrorCode::kInternal: return ErrorCategory::kInternal;
    default: return ErrorCategory::kValidation;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return error_category(code_); }
  int exit_code() const noexcept { return static_cast<int>(category()); }

  /// Single-line form "E_CODE: message" with newlines flattened.
  std::string diagnostic() const {
    std::string line(error_code_name(code_));
    line += ": ";
    for (char ch : std::string_view(what())) {
      line += (ch == '\n' || ch == '\r') ? ' ' : ch;
    }
    return line;
  }

 private:
  ErrorCode code_;
};

}  // namespace omap

#endif  // OMAP_ERROR_HPP_
