#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flattri/errors.hpp"
#include "flattri/flatness/theorem.hpp"

namespace flattri::flatness {

using geom::Codistribution;

struct FlatOutputRequest {
  std::optional<Expr> phi1;
  std::optional<Expr> phi2;
  /// Extra functions tried by the integration heuristic after single coordinates.
  std::vector<Expr> candidates;
};

struct FlatOutputCandidate {
  Expr phi1;
  std::optional<Expr> phi2;
  int case_tag = 0;
  /// Chain lengths of phi1, phi2 in the x1 block (case 1 and 3).
  std::size_t len1 = 0, len2 = 0;
  Codistribution L_perp;
  std::vector<CrossCheck> conditions;
  bool verified = false;
  bool suggested = false;  // false in verification mode

  /// First violated condition, or empty.
  std::string violation() const;
};

class IntegrationFailed : public Error {
 public:
  using Error::Error;
};

/// Suggests a flat output compatible with the triangular form (filling in
/// whichever of phi1/phi2 the request leaves open) or, when both are given,
/// verifies them. Throws IntegrationFailed when the coordinate heuristic finds
/// no basis.
FlatOutputCandidate flat_output(const AffineSystem& sys, const StructureReport& report, const ZeroTestConfig& cfg,
                                const FlatOutputRequest& request = {});

/// The conditions for the case of `report`, checked on a given pair.
FlatOutputCandidate verify_flat_output(const AffineSystem& sys, const StructureReport& report, const Expr& phi1,
                                       const Expr& phi2, const ZeroTestConfig& cfg);

}  // namespace flattri::flatness
