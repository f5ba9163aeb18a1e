#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace insar {

/// Failure categories shared by every module. The CLI maps these onto exit
/// codes and the `code` field of its JSON error object.
enum class Errc {
  Io,
  MissingSidecar,
  MalformedSidecar,
  DimensionMismatch,
  NonFiniteSample,
  GridMismatch,
  OutOfBounds,
  InvalidArgument,
  InvalidDate,
  DuplicateId,
  DuplicateDate,
  NotEnoughData,
  MaskedReference,
  UnbalancedFlow,
  NoSeed,
  Schema,
  ContractViolation,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// An Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, Errc code, const std::string& message)
      : Error(code, message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace insar
