#pragma once

// Exact evaluation at rational points and probabilistic zero testing.
//
// Sample point k assigns every symbol a positive rational p/q with
// 1 <= p, q <= bound, drawn from a hash of (seed, k, symbol name). Points are
// therefore reproducible and independent of the order in which symbols are
// met. Positive values keep ln and principal roots real.

#include <boost/multiprecision/mpfr.hpp>

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>

#include "flattri/errors.hpp"
#include "flattri/symx/expr.hpp"

namespace flattri::symx {

/// 50 decimal digits (about 166 bits of mantissa).
using Float = boost::multiprecision::mpfr_float_50;

struct SampleLog {
  std::atomic<std::uint64_t> zero_tests{0};
  std::atomic<std::uint64_t> points{0};
  std::atomic<std::uint64_t> resamples{0};
  std::atomic<std::uint64_t> float_tests{0};
};

struct ZeroTestConfig {
  int samples = 5;
  std::int64_t bound = 10000;
  std::uint64_t seed = 20240917;
  double float_tolerance = 1e-24;
  int max_attempts = 100;
  std::shared_ptr<SampleLog> log = std::make_shared<SampleLog>();

  /// Throws PreconditionError when samples < 1 or bound < 2.
  void validate() const;
};

using RationalPoint = std::unordered_map<Symbol, Rational, std::hash<Symbol>>;

/// Value of `s` at sample point `k`.
Rational sample_value(const ZeroTestConfig& cfg, std::size_t k, Symbol s);
RationalPoint sample_point(const ZeroTestConfig& cfg, std::size_t k, const Symbols& symbols);

/// An evaluated number. Exact unless a transcendental node was crossed; a
/// float carries `scale`, a first-order bound on the magnitude of rounding
/// errors relative to which cancellation is judged.
struct Numeric {
  bool exact = true;
  Rational q;
  Float f;
  Float scale;

  bool is_zero(double tolerance) const;
  Float as_float() const;
  double to_double() const;
};

/// Evaluates expressions at one point, memoizing shared subtrees.
/// Throws DivisionByZero at poles and outside the domain of ln.
class Evaluator {
 public:
  Evaluator(const ZeroTestConfig& cfg, std::size_t point_index);
  explicit Evaluator(RationalPoint point, double float_tolerance = 1e-24);

  Numeric operator()(const Expr& e);
  Rational value_of(Symbol s);

 private:
  Numeric compute(const Expr& e);

  const ZeroTestConfig* cfg_ = nullptr;
  std::size_t index_ = 0;
  RationalPoint point_;
  double tolerance_;
  std::unordered_map<const detail::Node*, Numeric> memo_;
  std::vector<Expr> keep_;
};

/// Evaluates at an explicit point; missing symbols raise PreconditionError.
Numeric eval(const Expr& e, const RationalPoint& p);
/// Exact value; PreconditionError if `e` needs floating point.
Rational eval_exact(const Expr& e, const RationalPoint& p);

bool is_zero(const Expr& e, const ZeroTestConfig& cfg);
bool depends_on(const Expr& e, Symbol v, const ZeroTestConfig& cfg);

/// Replaces `e` by 0 or by a rational constant when the samples say it is one.
Expr settle(const Expr& e, const ZeroTestConfig& cfg);

/// Runs `fn(evaluator, k)` on successive sample points until `cfg.samples`
/// of them complete without a pole. `fn` returns false to stop early.
/// Throws CannotDecide when max_attempts poles are hit.
template <class Fn>
void for_each_sample(const ZeroTestConfig& cfg, Fn&& fn);

bool uses_float(const Expr& e);

// ---------------------------------------------------------------------------

void note_resample(const ZeroTestConfig& cfg);
[[noreturn]] void throw_cannot_decide(const ZeroTestConfig& cfg);

template <class Fn>
void for_each_sample(const ZeroTestConfig& cfg, Fn&& fn) {
  int good = 0;
  int poles = 0;
  for (std::size_t k = 0; good < cfg.samples; ++k) {
    Evaluator ev(cfg, k);
    bool keep_going;
    try {
      keep_going = fn(ev, k);
    } catch (const DivisionByZero&) {
      note_resample(cfg);
      if (++poles >= cfg.max_attempts) throw_cannot_decide(cfg);
      continue;
    }
    ++good;
    if (!keep_going) return;
  }
}

}  // namespace flattri::symx
