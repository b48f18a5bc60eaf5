#pragma once

#include <string>
#include <vector>

#include "flattri/flatness/system.hpp"
#include "flattri/symx/solve.hpp"

namespace flattri::transform {

using flatness::AffineSystem;
using geom::Coordinates;
using geom::VectorField;
using symx::Expr;
using symx::Symbol;
using symx::ZeroTestConfig;

/// fresh = definition, replacing `replaced`; `inverse` expresses `replaced`
/// through `fresh` and the remaining coordinates.
struct ElementaryStep {
  Symbol fresh;
  Expr definition;
  Symbol replaced;
  Expr inverse;

  std::string str() const;
};

class CoordChange {
 public:
  CoordChange() = default;
  explicit CoordChange(Coordinates source);

  const Coordinates& source() const noexcept { return source_; }
  const Coordinates& target() const noexcept { return target_; }
  const std::vector<ElementaryStep>& steps() const noexcept { return steps_; }
  bool is_identity() const noexcept { return steps_.empty() && source_ == target_; }

  /// Solves `definition` (over the current target coordinates) for
  /// `replaced`; throws NotInvertible when that fails.
  const ElementaryStep& push(Symbol fresh, const Expr& definition, Symbol replaced, const ZeroTestConfig& cfg,
                             symx::InversionPolicy policy = symx::InversionPolicy::principal_root);
  /// Appends an already solved step.
  void push(ElementaryStep step);
  /// Reorders the target coordinates (must be a permutation).
  void reorder(const Coordinates& order);

  /// Target coordinates as functions of the source coordinates.
  const fieldla::Vector& forward() const noexcept { return forward_; }
  /// Source coordinates as functions of the target coordinates.
  const fieldla::Vector& inverse() const noexcept { return inverse_; }
  /// Rewrites an expression over the source coordinates in target coordinates.
  Expr to_target(const Expr& e) const;
  Expr to_source(const Expr& e) const;

  /// The change followed by `next` (whose source must be our target).
  CoordChange then(const CoordChange& next) const;
  CoordChange inverted() const;

 private:
  Coordinates source_;
  Coordinates target_;
  std::vector<ElementaryStep> steps_;
  fieldla::Vector forward_;
  fieldla::Vector inverse_;
};

/// Transforms the fields by the Jacobian of the forward map, then expresses
/// them in the target coordinates through the inverse map.
AffineSystem pushforward(const AffineSystem& sys, const CoordChange& phi, const ZeroTestConfig& cfg);

/// One elementary step applied directly to a system in the step's source
/// coordinates: the new row is L_f(definition), all rows substituted.
AffineSystem apply_step(const AffineSystem& sys, const ElementaryStep& step, const ZeroTestConfig& cfg);

/// Componentwise is_zero of the differences (same state names and order).
bool same_system(const AffineSystem& a, const AffineSystem& b, const ZeroTestConfig& cfg);

}  // namespace flattri::transform
