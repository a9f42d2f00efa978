#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdc {

enum class ErrorCode {
  parse_error,
  unregistered_domain,
  delta_inconsistent,
  no_greatest_lower_bound,
  cyclic_order,
  not_meta_tier,
  tier_violation,
  session_sealed,
  cyclic_requires,
  incomparable_domains,
  unknown_concept,
  self_bridge,
  mapping_conflict,
  empty_domain_of_definition,
  domain_mismatch,
  hypothesis_not_assertable,
  height_bound_reached,
  unauthorized,
  missing_embeddings,
  dimension_mismatch,
  non_finite_value,
  invalid_argument,
  missing_fiber,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::unregistered_domain: return "UnregisteredDomain";
    case ErrorCode::delta_inconsistent: return "DeltaInconsistent";
    case ErrorCode::no_greatest_lower_bound: return "NoGreatestLowerBound";
    case ErrorCode::cyclic_order: return "CyclicOrder";
    case ErrorCode::not_meta_tier: return "NotMetaTier";
    case ErrorCode::tier_violation: return "TierViolation";
    case ErrorCode::session_sealed: return "SessionSealed";
    case ErrorCode::cyclic_requires: return "CyclicRequires";
    case ErrorCode::incomparable_domains: return "IncomparableDomains";
    case ErrorCode::unknown_concept: return "UnknownConcept";
    case ErrorCode::self_bridge: return "SelfBridge";
    case ErrorCode::mapping_conflict: return "MappingConflict";
    case ErrorCode::empty_domain_of_definition: return "EmptyDomainOfDefinition";
    case ErrorCode::domain_mismatch: return "DomainMismatch";
    case ErrorCode::hypothesis_not_assertable: return "HypothesisNotAssertable";
    case ErrorCode::height_bound_reached: return "HeightBoundReached";
    case ErrorCode::unauthorized: return "Unauthorized";
    case ErrorCode::missing_embeddings: return "MissingEmbeddings";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::missing_fiber: return "MissingFiber";
  }
  return "Unknown";
}

/// Every failure raised by the engine carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cdc
