#pragma once

#include <vector>

#include "flattri/fieldla/matrix.hpp"
#include "flattri/symx/expr.hpp"
#include "flattri/symx/sampling.hpp"

namespace flattri::geom {

using fieldla::Vector;
using symx::Expr;
using symx::Symbol;
using symx::ZeroTestConfig;
using Coordinates = symx::Symbols;

/// Components in declared coordinate order.
struct VectorField {
  Vector components;

  VectorField() = default;
  explicit VectorField(Vector c) : components(std::move(c)) {}
  static VectorField zero(std::size_t n);
  /// The coordinate field d/dx_k.
  static VectorField coordinate(std::size_t n, std::size_t k);

  std::size_t size() const noexcept { return components.size(); }
  const Expr& operator[](std::size_t i) const { return components[i]; }
  bool literally_zero() const;
  std::string str(const Coordinates& coords) const;
};

bool operator==(const VectorField& a, const VectorField& b);
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(const Expr& f, const VectorField& v);

/// Coefficients of dx_i in declared coordinate order.
struct OneForm {
  Vector coefficients;

  OneForm() = default;
  explicit OneForm(Vector c) : coefficients(std::move(c)) {}
  /// The differential df.
  static OneForm differential(const Expr& f, const Coordinates& coords);
  static OneForm coordinate(std::size_t n, std::size_t k);

  std::size_t size() const noexcept { return coefficients.size(); }
  const Expr& operator[](std::size_t i) const { return coefficients[i]; }
  std::string str(const Coordinates& coords) const;
};

Expr pairing(const OneForm& w, const VectorField& v);

VectorField lie_bracket(const VectorField& v, const VectorField& w, const Coordinates& coords);
/// k-fold Lie derivative L_v^k f.
Expr lie_derivative(const Expr& f, const VectorField& v, const Coordinates& coords, int k = 1);

/// Replaces identically zero components by literal zeros and constant
/// components by their values.
VectorField settle(const VectorField& v, const ZeroTestConfig& cfg);
OneForm settle(const OneForm& w, const ZeroTestConfig& cfg);

}  // namespace flattri::geom
