#pragma once

// Systems shared by unit and acceptance tests.

#include <random>
#include <string>

#include "flattri/cli/system_file.hpp"
#include "flattri/flatness/system.hpp"
#include "flattri/transform/feedback.hpp"
#include "oracle.hpp"

namespace fixtures {

using flattri::flatness::AffineSystem;
using flattri::geom::VectorField;
using flattri::symx::Expr;
using flattri::symx::Symbol;

inline flattri::cli::SystemFile file(const std::string& name) {
  return flattri::cli::load_system(std::string(FLATTRI_TEST_DATA) + "/" + name + ".sys");
}

inline AffineSystem load(const std::string& name) { return file(name).system; }

inline Expr X(const char* name) { return Expr(Symbol(name)); }

/// x1' = u2, xk' = x(k+1) u2 for k = 2..n-1, xn' = u1.
inline AffineSystem chained(std::size_t n) {
  AffineSystem s;
  s.name = "chained" + std::to_string(n);
  for (std::size_t i = 1; i <= n; ++i) s.states.emplace_back("x" + std::to_string(i));
  s.drift = VectorField::zero(n);
  s.b1 = VectorField::coordinate(n, n - 1);
  flattri::fieldla::Vector b2(n, Expr());
  b2[0] = Expr(1);
  for (std::size_t k = 1; k + 1 < n; ++k) b2[k] = Expr(s.states[k + 1]);
  s.b2 = VectorField(b2);
  return s;
}

struct TriangularShape {
  std::size_t n11 = 0, n12 = 0, n2 = 3, n3 = 0;
};

struct Triangular {
  AffineSystem sys;
  std::vector<Symbol> x11, x12, x2, x31, x32;
};

/// A random system in the triangular normal form with degree <= 2 drift
/// entries a2^j(x1, x2^1..x2^(j+1)).
inline Triangular triangular(const TriangularShape& shape, std::uint64_t seed) {
  Triangular t;
  auto block = [&](std::vector<Symbol>& out, const std::string& prefix, std::size_t len) {
    for (std::size_t k = 1; k <= len; ++k) {
      out.emplace_back(prefix + std::to_string(k));
      t.sys.states.push_back(out.back());
    }
  };
  block(t.x11, "x11_", shape.n11);
  block(t.x12, "x12_", shape.n12);
  block(t.x2, "x2_", shape.n2);
  block(t.x31, "x31_", shape.n3);
  block(t.x32, "x32_", shape.n3);
  const std::size_t n = t.sys.states.size();
  t.sys.name = "triangular";
  auto idx = [&](Symbol s) { return t.sys.index_of(s); };
  flattri::fieldla::Vector a(n, Expr());

  auto chain = [&](const std::vector<Symbol>& c, const Expr& top) {
    for (std::size_t k = 0; k < c.size(); ++k) a[idx(c[k])] = k + 1 < c.size() ? Expr(c[k + 1]) : top;
  };
  chain(t.x11, Expr(t.x2[0]));
  chain(t.x12, Expr(t.x2[1]));

  // x3 tops act as inputs of the x2 block; without an x3 block the inputs do.
  std::vector<Symbol> x1 = t.x11;
  x1.insert(x1.end(), t.x12.begin(), t.x12.end());
  const std::size_t n2 = shape.n2;
  flattri::fieldla::Vector b1(n, Expr()), b2(n, Expr());
  auto in1 = [&](std::size_t k, const Expr& coef) {
    if (shape.n3 == 0) b1[k] = coef; else a[k] = a[k] + coef * Expr(t.x31[0]);
  };
  auto in2 = [&](std::size_t k, const Expr& coef) {
    if (shape.n3 == 0) b2[k] = coef; else a[k] = a[k] + coef * Expr(t.x32[0]);
  };
  in2(idx(t.x2[0]), Expr(1));
  for (std::size_t j = 1; j + 1 < n2; ++j) {
    std::vector<Symbol> vars = x1;
    for (std::size_t m = 0; m <= j + 1; ++m) vars.push_back(t.x2[m]);
    oracle::ExprGen gen(seed * 7919 + j, vars);
    a[idx(t.x2[j])] = gen.polynomial(2, 2);
    in2(idx(t.x2[j]), Expr(t.x2[j + 1]));
  }
  in1(idx(t.x2[n2 - 1]), Expr(1));
  if (shape.n3 > 0) {
    chain(t.x31, Expr());
    chain(t.x32, Expr());
    b1[idx(t.x31.back())] = Expr(1);
    b2[idx(t.x32.back())] = Expr(1);
  }
  t.sys.drift = VectorField(a);
  t.sys.b1 = VectorField(b1);
  t.sys.b2 = VectorField(b2);
  return t;
}

/// y_k = c x_k + p(x_(k+1), ..., x_n), named x_k + "_t"; affine in the
/// replaced variable, hence invertible. p is quadratic in the last three rows
/// and linear above them, which keeps the inverse at degree <= 8.
inline flattri::transform::CoordChange random_triangular_change(const AffineSystem& sys, std::uint64_t seed,
                                                                const flattri::symx::ZeroTestConfig& cfg) {
  flattri::transform::CoordChange phi(sys.states);
  const std::size_t n = sys.n();
  for (std::size_t k = 0; k < n; ++k) {
    Expr def = Expr(sys.states[k]);
    if (k + 1 < n) {
      std::vector<Symbol> below(sys.states.begin() + static_cast<std::ptrdiff_t>(k + 1), sys.states.end());
      oracle::ExprGen gen(seed * 131 + k, below);
      def = gen.small_int(1, 3) * def + gen.polynomial(k + 4 > n ? 2 : 1, 2);
    }
    phi.push(Symbol(sys.states[k].name() + "_t"), def, sys.states[k], cfg);
  }
  return phi;
}

/// ubar = g + M u with M = [[c1, p], [0, c2]] [[1, 0], [q, 1]].
inline flattri::transform::Feedback random_feedback(const AffineSystem& sys, std::uint64_t seed) {
  oracle::ExprGen gen(seed, sys.states);
  flattri::transform::Feedback f;
  f.g = {gen.polynomial(2, 2), gen.polynomial(2, 2)};
  const Expr c1 = gen.small_int(), c2 = gen.small_int(), p = gen.polynomial(1, 2), q = gen.polynomial(1, 2);
  f.M = {{{c1 + p * q, p}, {c2 * q, c2}}};
  return f;
}

}  // namespace fixtures
