#include "flattri/geom/distribution.hpp"

#include <sstream>

#include "flattri/errors.hpp"

namespace flattri::geom {

using fieldla::FnMatrix;

namespace {

template <class T, class Get>
std::vector<T> independent_subset(const std::vector<T>& items, std::size_t n, Get get,
                                  const ZeroTestConfig& cfg) {
  std::vector<T> kept;
  std::vector<Vector> rows;
  for (const auto& item : items) {
    bool zero = true;
    for (const auto& e : get(item)) zero = zero && e.is_zero();
    if (zero) continue;
    kept.push_back(item);
    rows.push_back(get(item));
  }
  std::vector<T> out;
  for (std::size_t r : fieldla::independent_rows(FnMatrix::from_rows(rows, n), cfg)) out.push_back(kept[r]);
  return out;
}

}  // namespace

Distribution::Distribution(Coordinates coords, const std::vector<VectorField>& generators,
                           const ZeroTestConfig& cfg)
    : coords_(std::move(coords)), seed_(cfg.seed) {
  std::vector<VectorField> settled;
  for (const auto& g : generators) {
    if (g.size() != coords_.size()) throw PreconditionError("vector field length differs from the state count");
    settled.push_back(settle(g, cfg));
  }
  basis_ = independent_subset(settled, coords_.size(), [](const VectorField& v) { return v.components; }, cfg);
}

Distribution Distribution::tangent_space(const Coordinates& coords, const ZeroTestConfig& cfg) {
  std::vector<VectorField> fields;
  for (std::size_t k = 0; k < coords.size(); ++k) fields.push_back(VectorField::coordinate(coords.size(), k));
  return Distribution(coords, fields, cfg);
}

FnMatrix Distribution::matrix() const {
  std::vector<Vector> rows;
  for (const auto& b : basis_) rows.push_back(b.components);
  return FnMatrix::from_rows(rows, coords_.size());
}

bool Distribution::contains(const VectorField& v, const ZeroTestConfig& cfg) const {
  if (v.size() != coords_.size()) throw PreconditionError("vector field length differs from the state count");
  if (is_full() || v.literally_zero()) return true;
  if (dim() == 0) {
    for (const auto& c : v.components) {
      if (!symx::is_zero(c, cfg)) return false;
    }
    return true;
  }
  return fieldla::in_span(v.components, matrix(), cfg);
}

bool Distribution::contains(const Distribution& other, const ZeroTestConfig& cfg) const {
  if (other.dim() > dim()) return false;
  for (const auto& b : other.basis()) {
    if (!contains(b, cfg)) return false;
  }
  return true;
}

bool Distribution::equals(const Distribution& other, const ZeroTestConfig& cfg) const {
  return contains(other, cfg) && other.contains(*this, cfg);
}

Distribution Distribution::plus(const std::vector<VectorField>& more, const ZeroTestConfig& cfg) const {
  std::vector<VectorField> all = basis_;
  all.insert(all.end(), more.begin(), more.end());
  return Distribution(coords_, all, cfg);
}

Distribution Distribution::plus(const Distribution& other, const ZeroTestConfig& cfg) const {
  return plus(other.basis(), cfg);
}

std::string Distribution::str() const {
  std::ostringstream os;
  os << "span{";
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (i) os << ", ";
    os << basis_[i].str(coords_);
  }
  os << '}';
  return os.str();
}

Codistribution::Codistribution(Coordinates coords, const std::vector<OneForm>& generators,
                               const ZeroTestConfig& cfg)
    : coords_(std::move(coords)), seed_(cfg.seed) {
  std::vector<OneForm> settled;
  for (const auto& g : generators) {
    if (g.size() != coords_.size()) throw PreconditionError("one-form length differs from the state count");
    settled.push_back(settle(g, cfg));
  }
  basis_ = independent_subset(settled, coords_.size(), [](const OneForm& w) { return w.coefficients; }, cfg);
}

FnMatrix Codistribution::matrix() const {
  std::vector<Vector> rows;
  for (const auto& b : basis_) rows.push_back(b.coefficients);
  return FnMatrix::from_rows(rows, coords_.size());
}

bool Codistribution::contains(const OneForm& w, const ZeroTestConfig& cfg) const {
  if (w.size() != coords_.size()) throw PreconditionError("one-form length differs from the state count");
  if (dim() == coords_.size()) return true;
  if (dim() == 0) {
    for (const auto& c : w.coefficients) {
      if (!symx::is_zero(c, cfg)) return false;
    }
    return true;
  }
  return fieldla::in_span(w.coefficients, matrix(), cfg);
}

bool Codistribution::contains(const Codistribution& other, const ZeroTestConfig& cfg) const {
  if (other.dim() > dim()) return false;
  for (const auto& b : other.basis()) {
    if (!contains(b, cfg)) return false;
  }
  return true;
}

bool Codistribution::equals(const Codistribution& other, const ZeroTestConfig& cfg) const {
  return contains(other, cfg) && other.contains(*this, cfg);
}

Codistribution Codistribution::plus(const std::vector<OneForm>& more, const ZeroTestConfig& cfg) const {
  std::vector<OneForm> all = basis_;
  all.insert(all.end(), more.begin(), more.end());
  return Codistribution(coords_, all, cfg);
}

std::string Codistribution::str() const {
  std::ostringstream os;
  os << "span{";
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (i) os << ", ";
    os << basis_[i].str(coords_);
  }
  os << '}';
  return os.str();
}

Distribution derived_flag_step(const Distribution& d, const ZeroTestConfig& cfg) {
  if (d.is_full()) return d;
  const auto& b = d.basis();
  std::vector<VectorField> more;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i + 1; j < b.size(); ++j) more.push_back(lie_bracket(b[i], b[j], d.coords()));
  }
  return d.plus(more, cfg);
}

Distribution lie_flag_step(const Distribution& d0, const Distribution& di, const ZeroTestConfig& cfg) {
  if (di.is_full()) return di;
  std::vector<VectorField> more;
  for (const auto& g : d0.basis()) {
    for (const auto& h : di.basis()) more.push_back(lie_bracket(g, h, di.coords()));
  }
  return di.plus(more, cfg);
}

Closure involutive_closure(const Distribution& d, const ZeroTestConfig& cfg) {
  Closure c;
  c.flag.push_back(d);
  c.trace.push_back(d.dim());
  for (;;) {
    Distribution next = derived_flag_step(c.flag.back(), cfg);
    if (next.dim() == c.flag.back().dim()) break;
    c.trace.push_back(next.dim());
    c.flag.push_back(std::move(next));
  }
  c.closure = c.flag.back();
  return c;
}

bool is_involutive(const Distribution& d, const ZeroTestConfig& cfg) {
  if (d.is_full()) return true;
  const auto& b = d.basis();
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i + 1; j < b.size(); ++j) {
      if (!d.contains(lie_bracket(b[i], b[j], d.coords()), cfg)) return false;
    }
  }
  return true;
}

Codistribution annihilator(const Distribution& d, const ZeroTestConfig& cfg) {
  const std::size_t n = d.ambient_dim();
  std::vector<OneForm> forms;
  if (d.dim() == 0) {
    for (std::size_t k = 0; k < n; ++k) forms.push_back(OneForm::coordinate(n, k));
  } else if (!d.is_full()) {
    for (auto& v : fieldla::nullspace(d.matrix(), cfg)) forms.emplace_back(std::move(v));
  }
  Codistribution w(d.coords(), forms, cfg);
  if (w.dim() + d.dim() != n) throw CannotDecide("annihilator dimension mismatch");
  return w;
}

Distribution annihilator(const Codistribution& w, const ZeroTestConfig& cfg) {
  const std::size_t n = w.coords().size();
  std::vector<VectorField> fields;
  if (w.dim() == 0) {
    for (std::size_t k = 0; k < n; ++k) fields.push_back(VectorField::coordinate(n, k));
  } else if (w.dim() < n) {
    for (auto& v : fieldla::nullspace(w.matrix(), cfg)) fields.emplace_back(std::move(v));
  }
  Distribution d(w.coords(), fields, cfg);
  if (w.dim() + d.dim() != n) throw CannotDecide("annihilator dimension mismatch");
  return d;
}

Distribution cauchy_characteristics(const Distribution& d, const ZeroTestConfig& cfg) {
  if (d.dim() == 0 || d.is_full()) return d;
  const auto& b = d.basis();
  const auto& coords = d.coords();
  const std::size_t k = b.size();
  const Codistribution ann = annihilator(d, cfg);

  // c = sum_i lambda_i b_i is characteristic iff
  // <w_l, sum_i lambda_i [b_i, b_j]> = 0 for all j and all annihilator forms w_l;
  // the derivative terms of the lambdas stay inside D.
  std::vector<std::vector<VectorField>> br(k, std::vector<VectorField>(k));
  for (std::size_t i = 0; i < k; ++i) {
    br[i][i] = VectorField::zero(coords.size());
    for (std::size_t j = i + 1; j < k; ++j) {
      br[i][j] = lie_bracket(b[i], b[j], coords);
      br[j][i] = br[i][j];
      for (auto& c : br[j][i].components) c = -c;
    }
  }
  std::vector<Vector> rows;
  for (std::size_t j = 0; j < k; ++j) {
    for (const auto& w : ann.basis()) {
      Vector row(k);
      for (std::size_t i = 0; i < k; ++i) row[i] = symx::settle(pairing(w, br[i][j]), cfg);
      rows.push_back(std::move(row));
    }
  }
  std::vector<VectorField> chars;
  for (const auto& lambda : fieldla::nullspace(fieldla::FnMatrix::from_rows(rows, k), cfg)) {
    VectorField c = VectorField::zero(coords.size());
    for (std::size_t i = 0; i < k; ++i) {
      if (!lambda[i].is_zero()) c = c + lambda[i] * b[i];
    }
    chars.push_back(settle(c, cfg));
  }
  Distribution result(coords, chars, cfg);
  for (const auto& c : result.basis()) {
    for (const auto& g : b) {
      if (!d.contains(lie_bracket(c, g, coords), cfg)) {
        throw CannotDecide("Cauchy characteristic failed verification");
      }
    }
  }
  return result;
}

std::vector<std::size_t> coordinate_directions(const Distribution& d, const ZeroTestConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < d.ambient_dim(); ++k) {
    if (d.contains(VectorField::coordinate(d.ambient_dim(), k), cfg)) out.push_back(k);
  }
  return out;
}

bool is_coordinate_spanned(const Distribution& d, const ZeroTestConfig& cfg) {
  return coordinate_directions(d, cfg).size() == d.dim();
}

}  // namespace flattri::geom
