#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ustar {

enum class ErrorKind {
  DomainViolation,
  DegenerateMetric,
  NotKilling,
  ZeroMoment,
  NotMomentMap,
  OffLevelSet,
  GaugeDegenerate,
  OddDimension,
  Singular,
  ToleranceNotMet,
  UnknownEntry,
  NoKillingField,
  InvalidInput,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above.
class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ustar
