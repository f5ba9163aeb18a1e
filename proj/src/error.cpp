#include "insar/error.hpp"

namespace insar {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::Io: return "io";
    case Errc::MissingSidecar: return "missing_sidecar";
    case Errc::MalformedSidecar: return "malformed_sidecar";
    case Errc::DimensionMismatch: return "dimension_mismatch";
    case Errc::NonFiniteSample: return "non_finite_sample";
    case Errc::GridMismatch: return "grid_mismatch";
    case Errc::OutOfBounds: return "out_of_bounds";
    case Errc::InvalidArgument: return "invalid_argument";
    case Errc::InvalidDate: return "invalid_date";
    case Errc::DuplicateId: return "duplicate_id";
    case Errc::DuplicateDate: return "duplicate_date";
    case Errc::NotEnoughData: return "not_enough_data";
    case Errc::MaskedReference: return "masked_reference";
    case Errc::UnbalancedFlow: return "unbalanced_flow";
    case Errc::NoSeed: return "no_seed";
    case Errc::Schema: return "schema";
    case Errc::ContractViolation: return "contract_violation";
  }
  return "unknown";
}

}  // namespace insar
