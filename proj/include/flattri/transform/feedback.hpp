#pragma once

#include <array>
#include <string>

#include "flattri/transform/coord_change.hpp"

namespace flattri::transform {

/// ubar = g + M u.
struct Feedback {
  std::array<Expr, 2> g{Expr(), Expr()};
  std::array<std::array<Expr, 2>, 2> M{{{Expr(1), Expr()}, {Expr(), Expr(1)}}};

  static Feedback identity() { return {}; }
  Expr det() const;
  /// Zero test on det M.
  bool invertible(const ZeroTestConfig& cfg) const;
  /// u = -M^-1 g + M^-1 ubar.
  Feedback inverse(const ZeroTestConfig& cfg) const;
  /// This feedback followed by `next`.
  Feedback then(const Feedback& next) const;
  /// Rewrites g and M after a coordinate step.
  Feedback substituted(const symx::Bindings& b) const;
  std::string str() const;
};

/// x' = a + B u with u = M^-1 (ubar - g): drift a - B M^-1 g, inputs B M^-1.
AffineSystem apply_feedback(const AffineSystem& sys, const Feedback& f, const ZeroTestConfig& cfg);

}  // namespace flattri::transform
