#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tnt {

// Every failure the library reports is a tnt::Error carrying one of these
// categories. The CLI maps categories to exit codes and message prefixes.
enum class ErrorKind {
  kInsufficientData,
  kDegenerateGeometry,
  kDegenerateLine,
  kCollapse,
  kRankDeficient,
  kDegenerateFeature,
  kAssembly,
  kShape,
  kFormat,
  kParse,
  kCoverage,
  kIo,
  kConfig,
  kUndefinedMetric,
  kFeasibility,
  kSamplerExhausted,
  kInvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace tnt
