#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bivmap {

enum class ErrorCode {
  NotAvailable,
  RuleTableInvalid,
  GeometryParse,
  JoinKeyMissing,
  MixedGeometryKinds,
  MissingAttribute,
  DuplicateFeatureId,
  ZeroMean,
  NegativeDeviation,
  NonMonotonicEdges,
  BadK,
  EmptyValues,
  UnavailableVariable,
  EmptyTaskList,
  InvalidRequest,
  NoCandidates,
  UnsupportedImplantation,
  LadderEndpointInvalid,
  FeatureMissingBin,
  StyleDatasetMismatch,
  BinningViolation,
  Io,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as bivmap::Error. `details` carries
// structured diagnostics (offending ids, field paths) for callers that
// render them individually.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace bivmap
