#include "flattri/fieldla/matrix.hpp"

#include <algorithm>
#include <map>

#include "flattri/errors.hpp"

namespace flattri::fieldla {

using symx::Float;
using symx::Numeric;
using symx::Rational;

FnMatrix::FnMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {}

FnMatrix FnMatrix::from_rows(const std::vector<Vector>& rows, std::size_t cols) {
  if (!rows.empty()) cols = rows.front().size();
  FnMatrix m(0, cols);
  for (const auto& r : rows) m.append_row(r);
  return m;
}

Vector FnMatrix::row(std::size_t r) const {
  return Vector(entries_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                entries_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

void FnMatrix::append_row(const Vector& v) {
  if (v.size() != cols_) throw PreconditionError("row length does not match the column count");
  entries_.insert(entries_.end(), v.begin(), v.end());
  ++rows_;
}

FnMatrix FnMatrix::transpose() const {
  FnMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
  }
  return t;
}

std::size_t rational_rank(std::vector<std::vector<Rational>> a) {
  std::size_t rank = 0;
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a.front().size() : 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && sgn(a[p][c]) == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (sgn(a[r][c]) == 0) continue;
      const Rational f = a[r][c] / a[rank][c];
      for (std::size_t k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
    }
    ++rank;
  }
  return rank;
}

namespace {

// Incremental echelon form at one point; rows are added one at a time.
template <class T>
class Echelon {
 public:
  Echelon(std::size_t cols, T threshold) : cols_(cols), threshold_(std::move(threshold)) {}

  bool add(std::vector<T> row) {
    for (const auto& [pivot, basis] : rows_) {
      if (negligible(row[pivot])) continue;
      const T f = row[pivot] / basis[pivot];
      for (std::size_t k = 0; k < cols_; ++k) row[k] -= f * basis[k];
    }
    for (std::size_t k = 0; k < cols_; ++k) {
      if (!negligible(row[k])) {
        rows_.emplace_back(k, std::move(row));
        return true;
      }
    }
    return false;
  }

  std::size_t rank() const { return rows_.size(); }

 private:
  bool negligible(const T& v) const {
    if constexpr (std::is_same_v<T, Rational>) {
      return sgn(v) == 0;
    } else {
      return abs(v) <= threshold_;
    }
  }

  std::size_t cols_;
  T threshold_;
  std::vector<std::pair<std::size_t, std::vector<T>>> rows_;
};

// prefix[i] = rank of the first i rows at this point.
std::vector<std::size_t> prefix_ranks_at(const FnMatrix& m, symx::Evaluator& ev, const ZeroTestConfig& cfg) {
  std::vector<Numeric> vals;
  vals.reserve(m.rows() * m.cols());
  bool exact = true;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      vals.push_back(ev(m.at(r, c)));
      exact = exact && vals.back().exact;
    }
  }
  std::vector<std::size_t> prefix{0};
  if (exact) {
    Echelon<Rational> ech(m.cols(), Rational(0));
    for (std::size_t r = 0; r < m.rows(); ++r) {
      std::vector<Rational> row;
      for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(vals[r * m.cols() + c].q);
      ech.add(std::move(row));
      prefix.push_back(ech.rank());
    }
    return prefix;
  }
  Float max_scale = 0;
  for (const auto& v : vals) {
    Float s = v.exact ? Float(abs(v.as_float())) : v.scale;
    if (s > max_scale) max_scale = s;
  }
  // elimination amplifies rounding; judge cancellation a few digits looser
  Echelon<Float> ech(m.cols(), Float(cfg.float_tolerance) * 1e4 * max_scale);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<Float> row;
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(vals[r * m.cols() + c].as_float());
    ech.add(std::move(row));
    prefix.push_back(ech.rank());
  }
  return prefix;
}

std::vector<std::size_t> generic_prefix_ranks(const FnMatrix& m, const ZeroTestConfig& cfg) {
  std::vector<std::size_t> best(m.rows() + 1, 0);
  if (m.rows() == 0 || m.cols() == 0) return best;
  symx::for_each_sample(cfg, [&](symx::Evaluator& ev, std::size_t) {
    auto p = prefix_ranks_at(m, ev, cfg);
    bool saturated = true;
    for (std::size_t i = 0; i < best.size(); ++i) {
      best[i] = std::max(best[i], p[i]);
      saturated = saturated && best[i] == std::min(i, m.cols());
    }
    return !saturated;
  });
  return best;
}

bool entry_zero(const Expr& e, const ZeroTestConfig& cfg) { return symx::is_zero(e, cfg); }

// Multiplies, distributing over the terms of a sum so that denominators cancel
// syntactically where they can.
Expr scale_by(const Expr& e, const Expr& f) {
  if (e.kind() == symx::Kind::sum) {
    std::vector<Expr> terms;
    for (const auto& t : e.operands()) terms.push_back(t * f);
    return symx::sum(std::move(terms));
  }
  return e * f;
}

void collect_denominators(const Expr& e, std::map<std::string, std::pair<Expr, long>>& out) {
  auto note = [&](const Expr& f) {
    if (f.kind() == symx::Kind::power && f.exponent() < 0) {
      auto key = f.base().str();
      auto [it, inserted] = out.emplace(key, std::make_pair(f.base(), -f.exponent()));
      if (!inserted) it->second.second = std::max(it->second.second, -f.exponent());
    }
  };
  auto scan_term = [&](const Expr& t) {
    if (t.kind() == symx::Kind::product) {
      for (const auto& f : t.operands()) note(f);
    } else {
      note(t);
    }
  };
  if (e.kind() == symx::Kind::sum) {
    for (const auto& t : e.operands()) scan_term(t);
  } else {
    scan_term(e);
  }
}

}  // namespace

std::size_t generic_rank(const FnMatrix& m, const ZeroTestConfig& cfg) {
  return generic_prefix_ranks(m, cfg).back();
}

bool in_span(const Vector& v, const FnMatrix& m, const ZeroTestConfig& cfg) {
  if (v.size() != m.cols()) throw PreconditionError("vector length does not match the column count");
  if (std::all_of(v.begin(), v.end(), [](const Expr& e) { return e.is_zero(); })) return true;
  FnMatrix aug = m;
  aug.append_row(v);
  auto p = generic_prefix_ranks(aug, cfg);
  return p[aug.rows()] == p[m.rows()];
}

std::vector<std::size_t> independent_rows(const FnMatrix& m, const ZeroTestConfig& cfg) {
  auto p = generic_prefix_ranks(m, cfg);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (p[i + 1] > p[i]) out.push_back(i);
  }
  return out;
}

std::vector<Vector> nullspace(const FnMatrix& m, const ZeroTestConfig& cfg) {
  const std::size_t cols = m.cols();
  std::vector<Vector> work;
  for (std::size_t r : independent_rows(m, cfg)) work.push_back(m.row(r));

  // Gauss-Jordan. Pivot: first remaining row (in order) whose entry in the
  // current column fails the zero test.
  std::vector<std::size_t> pivot_cols;
  std::size_t next = 0;
  for (std::size_t c = 0; c < cols && next < work.size(); ++c) {
    std::size_t p = next;
    while (p < work.size() && entry_zero(work[p][c], cfg)) ++p;
    if (p == work.size()) continue;
    std::swap(work[p], work[next]);
    const Expr pivot = work[next][c];
    for (std::size_t k = 0; k < cols; ++k) {
      work[next][k] = k == c ? Expr(1) : symx::settle(work[next][k] / pivot, cfg);
    }
    for (std::size_t r = 0; r < work.size(); ++r) {
      if (r == next || work[r][c].is_zero()) continue;
      const Expr f = work[r][c];
      for (std::size_t k = 0; k < cols; ++k) {
        if (k == c) {
          work[r][k] = Expr();
        } else if (!work[next][k].is_zero()) {
          work[r][k] = symx::settle(work[r][k] - f * work[next][k], cfg);
        }
      }
    }
    pivot_cols.push_back(c);
    ++next;
  }

  std::vector<Vector> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (std::find(pivot_cols.begin(), pivot_cols.end(), f) != pivot_cols.end()) continue;
    Vector v(cols, Expr());
    v[f] = Expr(1);
    for (std::size_t k = 0; k < pivot_cols.size(); ++k) v[pivot_cols[k]] = -work[k][f];

    std::map<std::string, std::pair<Expr, long>> dens;
    for (const auto& e : v) collect_denominators(e, dens);
    if (!dens.empty()) {
      std::vector<Expr> fs;
      for (const auto& [_, d] : dens) fs.push_back(symx::power(d.first, d.second));
      const Expr common = symx::product(std::move(fs));
      for (auto& e : v) e = scale_by(e, common);
    }
    basis.push_back(std::move(v));
  }

  for (const auto& v : basis) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      std::vector<Expr> terms;
      for (std::size_t c = 0; c < cols; ++c) {
        if (!m.at(r, c).is_zero() && !v[c].is_zero()) terms.push_back(m.at(r, c) * v[c]);
      }
      if (!symx::is_zero(symx::sum(std::move(terms)), cfg)) {
        throw CannotDecide("nullspace vector failed verification");
      }
    }
  }
  return basis;
}

}  // namespace flattri::fieldla
