#include "bivmap/error.hpp"

namespace bivmap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAvailable: return "NotAvailable";
    case ErrorCode::RuleTableInvalid: return "RuleTableInvalid";
    case ErrorCode::GeometryParse: return "GeometryParse";
    case ErrorCode::JoinKeyMissing: return "JoinKeyMissing";
    case ErrorCode::MixedGeometryKinds: return "MixedGeometryKinds";
    case ErrorCode::MissingAttribute: return "MissingAttribute";
    case ErrorCode::DuplicateFeatureId: return "DuplicateFeatureId";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::NegativeDeviation: return "NegativeDeviation";
    case ErrorCode::NonMonotonicEdges: return "NonMonotonicEdges";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::EmptyValues: return "EmptyValues";
    case ErrorCode::UnavailableVariable: return "UnavailableVariable";
    case ErrorCode::EmptyTaskList: return "EmptyTaskList";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::UnsupportedImplantation: return "UnsupportedImplantation";
    case ErrorCode::LadderEndpointInvalid: return "LadderEndpointInvalid";
    case ErrorCode::FeatureMissingBin: return "FeatureMissingBin";
    case ErrorCode::StyleDatasetMismatch: return "StyleDatasetMismatch";
    case ErrorCode::BinningViolation: return "BinningViolation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace bivmap
