#include "flattri/symx/sampling.hpp"

#include <mpfr.h>

#include "flattri/errors.hpp"

namespace flattri::symx {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Float to_float(const Rational& q) {
  Float f;
  mpfr_set_q(f.backend().data(), q.get_mpq_t(), MPFR_RNDN);
  return f;
}

Numeric exact(Rational q) {
  Numeric n;
  n.exact = true;
  n.q = std::move(q);
  return n;
}

Numeric floating(Float f, Float scale) {
  Numeric n;
  n.exact = false;
  n.f = std::move(f);
  n.scale = std::move(scale);
  return n;
}

Float magnitude(const Numeric& n) { return n.exact ? Float(abs(to_float(n.q))) : Float(abs(n.f)); }
Float error_scale(const Numeric& n) { return n.exact ? magnitude(n) : n.scale; }

bool near_zero(const Numeric& n, double tol) {
  if (n.exact) return sgn(n.q) == 0;
  return abs(n.f) <= Float(tol) * n.scale;
}

}  // namespace

void ZeroTestConfig::validate() const {
  if (samples < 1) throw PreconditionError("sample count must be at least 1");
  if (bound < 2) throw PreconditionError("sampling bound must be at least 2");
  if (max_attempts < 1) throw PreconditionError("attempt limit must be at least 1");
}

Rational sample_value(const ZeroTestConfig& cfg, std::size_t k, Symbol s) {
  const std::uint64_t h1 = splitmix64(cfg.seed ^ splitmix64(s.name_hash() ^ splitmix64(k + 1)));
  const std::uint64_t h2 = splitmix64(h1);
  const auto b = static_cast<std::uint64_t>(cfg.bound);
  Rational q(mpz_class(static_cast<unsigned long>(1 + h1 % b)),
             mpz_class(static_cast<unsigned long>(1 + h2 % b)));
  q.canonicalize();
  return q;
}

RationalPoint sample_point(const ZeroTestConfig& cfg, std::size_t k, const Symbols& symbols) {
  RationalPoint p;
  for (const auto& s : symbols) p.emplace(s, sample_value(cfg, k, s));
  return p;
}

bool Numeric::is_zero(double tolerance) const { return near_zero(*this, tolerance); }

Float Numeric::as_float() const { return exact ? to_float(q) : f; }

double Numeric::to_double() const { return exact ? q.get_d() : f.convert_to<double>(); }

Evaluator::Evaluator(const ZeroTestConfig& cfg, std::size_t point_index)
    : cfg_(&cfg), index_(point_index), tolerance_(cfg.float_tolerance) {
  if (cfg.log) cfg.log->points.fetch_add(1, std::memory_order_relaxed);
}

Evaluator::Evaluator(RationalPoint point, double float_tolerance)
    : point_(std::move(point)), tolerance_(float_tolerance) {}

Rational Evaluator::value_of(Symbol s) {
  auto it = point_.find(s);
  if (it != point_.end()) return it->second;
  if (!cfg_) throw PreconditionError("no value for '" + s.name() + "' at the evaluation point");
  return point_.emplace(s, sample_value(*cfg_, index_, s)).first->second;
}

Numeric Evaluator::operator()(const Expr& e) {
  if (e.is_constant()) return exact(e.value());
  auto it = memo_.find(e.node());
  if (it != memo_.end()) return it->second;
  Numeric v = compute(e);
  memo_.emplace(e.node(), v);
  keep_.push_back(e);
  return v;
}

Numeric Evaluator::compute(const Expr& e) {
  switch (e.kind()) {
    case Kind::constant: return exact(e.value());
    case Kind::variable: return exact(value_of(e.symbol()));
    case Kind::sum: {
      std::vector<Numeric> vs;
      bool all_exact = true;
      for (const auto& t : e.operands()) {
        vs.push_back((*this)(t));
        all_exact = all_exact && vs.back().exact;
      }
      if (all_exact) {
        Rational acc(0);
        for (const auto& v : vs) acc += v.q;
        return exact(std::move(acc));
      }
      Float acc = 0, scale = 0;
      for (const auto& v : vs) {
        acc += v.as_float();
        scale += error_scale(v);
      }
      return floating(std::move(acc), std::move(scale));
    }
    case Kind::product: {
      std::vector<Numeric> vs;
      bool all_exact = true;
      for (const auto& f : e.operands()) {
        vs.push_back((*this)(f));
        all_exact = all_exact && vs.back().exact;
      }
      if (all_exact) {
        Rational acc(1);
        for (const auto& v : vs) acc *= v.q;
        return exact(std::move(acc));
      }
      Float acc = 1;
      for (const auto& v : vs) acc *= v.as_float();
      // first-order propagation: sum over i of S_i * prod_{j != i} |v_j|
      Float scale = abs(acc);
      for (std::size_t i = 0; i < vs.size(); ++i) {
        Float term = error_scale(vs[i]);
        for (std::size_t j = 0; j < vs.size(); ++j) {
          if (j != i) term *= magnitude(vs[j]);
        }
        scale += term;
      }
      return floating(std::move(acc), std::move(scale));
    }
    case Kind::power: {
      Numeric b = (*this)(e.base());
      const long k = e.exponent();
      if (b.exact) {
        if (sgn(b.q) == 0 && k < 0) throw DivisionByZero("pole of " + to_string(e));
        const unsigned long m = static_cast<unsigned long>(k < 0 ? -k : k);
        mpz_class num, den;
        mpz_pow_ui(num.get_mpz_t(), b.q.get_num_mpz_t(), m);
        mpz_pow_ui(den.get_mpz_t(), b.q.get_den_mpz_t(), m);
        Rational r = k > 0 ? Rational(num, den) : Rational(den, num);
        r.canonicalize();
        return exact(std::move(r));
      }
      if (k < 0 && near_zero(b, tolerance_)) throw DivisionByZero("pole of " + to_string(e));
      Float v = pow(b.f, k);
      Float scale;
      if (b.f == 0) {
        scale = pow(b.scale, k);
      } else {
        scale = abs(v) * (1 + Float(k < 0 ? -k : k) * b.scale / abs(b.f));
      }
      return floating(std::move(v), std::move(scale));
    }
    case Kind::function: {
      Numeric a = (*this)(e.argument());
      const Float x = a.as_float();
      const Float sx = error_scale(a);
      switch (e.function()) {
        case Function::sin: {
          Float v = sin(x);
          return floating(v, abs(cos(x)) * sx + abs(v));
        }
        case Function::cos: {
          Float v = cos(x);
          return floating(v, abs(sin(x)) * sx + abs(v));
        }
        case Function::exp: {
          Float v = exp(x);
          return floating(v, abs(v) * sx + abs(v));
        }
        case Function::ln: {
          if (a.exact ? sgn(a.q) <= 0 : x <= Float(tolerance_) * sx) {
            throw DivisionByZero("ln outside its domain in " + to_string(e));
          }
          Float v = log(x);
          return floating(v, sx / x + abs(v));
        }
      }
    }
  }
  throw PreconditionError("unknown expression node");
}

Numeric eval(const Expr& e, const RationalPoint& p) { return Evaluator(p)(e); }

Rational eval_exact(const Expr& e, const RationalPoint& p) {
  Numeric n = eval(e, p);
  if (!n.exact) throw PreconditionError("expression needs floating-point evaluation");
  return n.q;
}

void note_resample(const ZeroTestConfig& cfg) {
  if (cfg.log) cfg.log->resamples.fetch_add(1, std::memory_order_relaxed);
}

void throw_cannot_decide(const ZeroTestConfig& cfg) {
  throw CannotDecide("cannot decide: " + std::to_string(cfg.max_attempts) +
                     " sample points hit a pole");
}

bool uses_float(const Expr& e) { return e.transcendental(); }

bool is_zero(const Expr& e, const ZeroTestConfig& cfg) {
  if (e.is_constant()) return e.is_zero();
  if (cfg.log) {
    cfg.log->zero_tests.fetch_add(1, std::memory_order_relaxed);
    if (e.transcendental()) cfg.log->float_tests.fetch_add(1, std::memory_order_relaxed);
  }
  bool zero = true;
  for_each_sample(cfg, [&](Evaluator& ev, std::size_t) {
    zero = ev(e).is_zero(cfg.float_tolerance);
    return zero;
  });
  return zero;
}

bool depends_on(const Expr& e, Symbol v, const ZeroTestConfig& cfg) {
  if (!contains(e, v)) return false;
  return !is_zero(differentiate(e, v), cfg);
}

Expr settle(const Expr& e, const ZeroTestConfig& cfg) {
  if (e.is_constant()) return e;
  if (cfg.log) cfg.log->zero_tests.fetch_add(1, std::memory_order_relaxed);
  bool constant = true;
  bool all_exact = true;
  bool all_zero = true;
  std::optional<Rational> first;
  for_each_sample(cfg, [&](Evaluator& ev, std::size_t) {
    Numeric n = ev(e);
    const bool z = n.is_zero(cfg.float_tolerance);
    all_zero = all_zero && z;
    if (!n.exact) {
      all_exact = false;
      constant = false;
      return all_zero;
    }
    if (!first) {
      first = n.q;
    } else if (*first != n.q) {
      constant = false;
    }
    return constant || all_zero;
  });
  if (all_zero) return Expr();
  if (all_exact && constant && first) return Expr(*first);
  return e;
}

}  // namespace flattri::symx
