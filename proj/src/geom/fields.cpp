#include "flattri/geom/fields.hpp"

#include <sstream>

#include "flattri/errors.hpp"

namespace flattri::geom {

namespace {

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw PreconditionError("vector fields over different coordinate lists");
}

}  // namespace

VectorField VectorField::zero(std::size_t n) { return VectorField(Vector(n, Expr())); }

VectorField VectorField::coordinate(std::size_t n, std::size_t k) {
  VectorField v = zero(n);
  v.components[k] = Expr(1);
  return v;
}

bool VectorField::literally_zero() const {
  for (const auto& c : components) {
    if (!c.is_zero()) return false;
  }
  return true;
}

std::string VectorField::str(const Coordinates& coords) const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    if (components[i].is_one()) {
      os << "d/d" << coords[i].name();
    } else {
      os << '(' << components[i] << ")*d/d" << coords[i].name();
    }
  }
  if (first) os << '0';
  return os.str();
}

bool operator==(const VectorField& a, const VectorField& b) { return a.components == b.components; }

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_size(a.size(), b.size());
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return VectorField(std::move(c));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  require_same_size(a.size(), b.size());
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return VectorField(std::move(c));
}

VectorField operator*(const Expr& f, const VectorField& v) {
  Vector c(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = f * v[i];
  return VectorField(std::move(c));
}

OneForm OneForm::differential(const Expr& f, const Coordinates& coords) {
  Vector c;
  c.reserve(coords.size());
  for (const auto& x : coords) c.push_back(symx::differentiate(f, x));
  return OneForm(std::move(c));
}

OneForm OneForm::coordinate(std::size_t n, std::size_t k) {
  Vector c(n, Expr());
  c[k] = Expr(1);
  return OneForm(std::move(c));
}

std::string OneForm::str(const Coordinates& coords) const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (coefficients[i].is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    if (coefficients[i].is_one()) {
      os << 'd' << coords[i].name();
    } else {
      os << '(' << coefficients[i] << ")*d" << coords[i].name();
    }
  }
  if (first) os << '0';
  return os.str();
}

Expr pairing(const OneForm& w, const VectorField& v) {
  require_same_size(w.size(), v.size());
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!w[i].is_zero() && !v[i].is_zero()) terms.push_back(w[i] * v[i]);
  }
  return symx::sum(std::move(terms));
}

VectorField lie_bracket(const VectorField& v, const VectorField& w, const Coordinates& coords) {
  require_same_size(v.size(), w.size());
  require_same_size(v.size(), coords.size());
  const std::size_t n = coords.size();
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (std::size_t k = 0; k < n; ++k) {
      if (!v[k].is_zero() && !w[i].is_constant()) {
        Expr d = symx::differentiate(w[i], coords[k]);
        if (!d.is_zero()) terms.push_back(v[k] * d);
      }
      if (!w[k].is_zero() && !v[i].is_constant()) {
        Expr d = symx::differentiate(v[i], coords[k]);
        if (!d.is_zero()) terms.push_back(-(w[k] * d));
      }
    }
    out[i] = symx::sum(std::move(terms));
  }
  return VectorField(std::move(out));
}

Expr lie_derivative(const Expr& f, const VectorField& v, const Coordinates& coords, int k) {
  if (k < 0) throw PreconditionError("negative Lie derivative order");
  require_same_size(v.size(), coords.size());
  Expr acc = f;
  for (int step = 0; step < k; ++step) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (v[i].is_zero()) continue;
      Expr d = symx::differentiate(acc, coords[i]);
      if (!d.is_zero()) terms.push_back(v[i] * d);
    }
    acc = symx::sum(std::move(terms));
  }
  return acc;
}

VectorField settle(const VectorField& v, const ZeroTestConfig& cfg) {
  Vector c;
  c.reserve(v.size());
  for (const auto& e : v.components) c.push_back(symx::settle(e, cfg));
  return VectorField(std::move(c));
}

OneForm settle(const OneForm& w, const ZeroTestConfig& cfg) {
  Vector c;
  c.reserve(w.size());
  for (const auto& e : w.coefficients) c.push_back(symx::settle(e, cfg));
  return OneForm(std::move(c));
}

}  // namespace flattri::geom
