#include "flattri/transform/feedback.hpp"

#include "flattri/errors.hpp"

namespace flattri::transform {

Expr Feedback::det() const { return M[0][0] * M[1][1] - M[0][1] * M[1][0]; }

bool Feedback::invertible(const ZeroTestConfig& cfg) const { return !symx::is_zero(det(), cfg); }

Feedback Feedback::inverse(const ZeroTestConfig& cfg) const {
  if (!invertible(cfg)) throw NotInvertible("feedback matrix is singular");
  const Expr d = det();
  Feedback out;
  out.M = {{{M[1][1] / d, -M[0][1] / d}, {-M[1][0] / d, M[0][0] / d}}};
  for (int i = 0; i < 2; ++i) out.g[i] = -(out.M[i][0] * g[0] + out.M[i][1] * g[1]);
  return out;
}

Feedback Feedback::then(const Feedback& next) const {
  Feedback out;
  for (int i = 0; i < 2; ++i) {
    out.g[i] = next.g[i] + next.M[i][0] * g[0] + next.M[i][1] * g[1];
    for (int j = 0; j < 2; ++j) out.M[i][j] = next.M[i][0] * M[0][j] + next.M[i][1] * M[1][j];
  }
  return out;
}

Feedback Feedback::substituted(const symx::Bindings& b) const {
  Feedback out = *this;
  for (auto& e : out.g) e = symx::substitute(e, b);
  for (auto& row : out.M)
    for (auto& e : row) e = symx::substitute(e, b);
  return out;
}

std::string Feedback::str() const {
  std::string s;
  for (int i = 0; i < 2; ++i) {
    s += "ubar" + std::to_string(i + 1) + " = " + symx::to_string(g[i] + M[i][0] * Expr(Symbol("u1")) + M[i][1] * Expr(Symbol("u2")));
    if (i == 0) s += "; ";
  }
  return s;
}

AffineSystem apply_feedback(const AffineSystem& sys, const Feedback& f, const ZeroTestConfig& cfg) {
  const Feedback inv = f.inverse(cfg);
  const VectorField* B[2] = {&sys.b1, &sys.b2};
  fieldla::Vector drift = sys.drift.components, nb[2];
  for (int j = 0; j < 2; ++j) nb[j].assign(sys.n(), Expr());
  for (std::size_t r = 0; r < sys.n(); ++r) {
    for (int j = 0; j < 2; ++j) {
      nb[j][r] = (*B[0])[r] * inv.M[0][j] + (*B[1])[r] * inv.M[1][j];
      drift[r] = drift[r] + (*B[j])[r] * inv.g[j];
    }
  }
  AffineSystem out = sys;
  out.drift = geom::settle(VectorField(std::move(drift)), cfg);
  out.b1 = geom::settle(VectorField(std::move(nb[0])), cfg);
  out.b2 = geom::settle(VectorField(std::move(nb[1])), cfg);
  return out;
}

}  // namespace flattri::transform
