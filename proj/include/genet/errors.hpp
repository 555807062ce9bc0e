#pragma once

#include <stdexcept>
#include <string>

namespace genet {

enum class Errc {
  MalformedRepresentation,
  DanglingReference,
  DuplicateDevice,
  MissingDelimiter,
  AuthError,
  TransportError,
  MissingTranscript,
  RateLimited,
  InvalidRequest,
  UnsupportedImageFormat,
  UnparseableModelOutput,
  ModelRefused,
  MissingConfigSection,
  DuplicateSection,
  MalformedSolution,
  EmptyTruth,
  MissingManualAward,
  UnknownPredicate,
  LengthMismatch,
  DegenerateInput,
  PooledVarianceZero,
  InvalidManifest,
  JoinError,
  NotAGns3Project,
  UnsupportedVersion,
  InvalidConfig,
  IoError,
};

const char* errc_name(Errc code) noexcept;

/// Domain error carrying a stable machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  const char* code_name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace genet
