#pragma once
// Error types shared by every module.
//
// All library failures are reported as ius::Error carrying an ErrorKind.
// The CLI maps kinds onto process exit codes (see exit_code_for).

#include <map>
#include <stdexcept>
#include <string>

namespace ius {

enum class ErrorKind {
  Type,              // wrong image modality / color space for an operation
  Size,              // input too small or a subset that would be empty
  Structure,         // malformed wavelet pyramid
  Shape,             // tensor/parameter shape mismatch
  Numeric,           // NaN/Inf encountered
  Config,            // PFM config or scope mismatch, bad configuration values
  Label,             // label outside {0,1} or missing when required
  DegenerateData,    // e.g. single-class training split
  EmptySet,          // empty input where at least one element is required
  MissingClass,      // per-class request for a class with no members
  DegenerateProfile, // zero-norm vector in a cosine similarity
  Range,             // scalar outside its admissible interval
  Io,                // file could not be read or written
  Format,            // unsupported or unparsable file content
  Version,           // persisted format version not supported
  Checksum,          // persisted payload failed integrity check
  Deficit,           // curation could not satisfy the requested class counts
  Protocol,          // experiment preconditions violated
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Type: return "type error";
    case ErrorKind::Size: return "size error";
    case ErrorKind::Structure: return "structure error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Label: return "label error";
    case ErrorKind::DegenerateData: return "degenerate-data error";
    case ErrorKind::EmptySet: return "empty-set error";
    case ErrorKind::MissingClass: return "missing-class error";
    case ErrorKind::DegenerateProfile: return "degenerate-profile error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Version: return "version error";
    case ErrorKind::Checksum: return "checksum error";
    case ErrorKind::Deficit: return "deficit error";
    case ErrorKind::Protocol: return "protocol error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by curation when some classes do not hold enough eligible entries.
class DeficitError : public Error {
 public:
  DeficitError(std::map<std::string, int> shortfall)
      : Error(ErrorKind::Deficit, describe(shortfall)), shortfall_(std::move(shortfall)) {}

  // class key -> number of missing entries
  const std::map<std::string, int>& shortfall() const noexcept { return shortfall_; }

 private:
  static std::string describe(const std::map<std::string, int>& shortfall) {
    std::string out = "insufficient entries per class {";
    bool first = true;
    for (const auto& [key, missing] : shortfall) {
      if (!first) out += ", ";
      out += key + ": " + std::to_string(missing);
      first = false;
    }
    return out + "}";
  }

  std::map<std::string, int> shortfall_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

// 0 success, 1 usage, 2 data/config, 3 numeric.
inline int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::Numeric ? 3 : 2;
}

}  // namespace ius
