#pragma once

#include <string>
#include <vector>

#include "flattri/geom/distribution.hpp"

namespace flattri::flatness {

using geom::Coordinates;
using geom::Distribution;
using geom::VectorField;
using symx::Expr;
using symx::Symbol;
using symx::ZeroTestConfig;

/// x' = a(x) + b1(x) u1 + b2(x) u2
struct AffineSystem {
  std::string name;
  Coordinates states;
  symx::Symbols params;
  VectorField drift;
  VectorField b1;
  VectorField b2;

  std::size_t n() const noexcept { return states.size(); }
  /// Component counts, and b1, b2 independent at generic points.
  void validate(const ZeroTestConfig& cfg) const;
  bool transcendental() const;
  /// Index of `s` in the state list, or npos.
  std::size_t index_of(Symbol s) const;
  Distribution input_distribution(const ZeroTestConfig& cfg) const;
};

}  // namespace flattri::flatness
