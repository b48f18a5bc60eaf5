#pragma once

#include <string>
#include <vector>

#include "flattri/transform/feedback.hpp"

namespace flattri::transform {

/// Block assignment of the states for the triangular normal form.
struct TriangularPattern {
  std::vector<Symbol> x11, x12;  // x1 integrator chains, top first
  std::vector<Symbol> x2;        // x2^1..x2^n2
  std::vector<Symbol> x31, x32;  // x3 integrator chains, top first

  /// x11_k, x12_k, x2_k, x31_k, x32_k.
  static TriangularPattern canonical(std::size_t n11, std::size_t n12, std::size_t n2, std::size_t n3);

  std::size_t n11() const noexcept { return x11.size(); }
  std::size_t n12() const noexcept { return x12.size(); }
  std::size_t n2() const noexcept { return x2.size(); }
  std::size_t n3() const noexcept { return x31.size(); }
  /// Block order: x11, x12, x2, x31, x32.
  Coordinates states() const;
  std::string str() const;
};

struct TriangularCheck {
  bool ok = true;
  std::vector<std::string> diagnostics;  // one per failed equation
};

/// Checks every equation of the normal form by zero tests of residuals and
/// the dependence rules of the x2 drift terms.
TriangularCheck verify_triangular_form(const AffineSystem& sys, const TriangularPattern& pattern,
                                       const ZeroTestConfig& cfg);

}  // namespace flattri::transform
