#include "flattri/symx/solve.hpp"

#include "flattri/errors.hpp"

namespace flattri::symx {

namespace {

// Evaluates a target-free expression written with `target` in it: substitute
// a harmless value, trying 0 first because it usually simplifies most.
Expr eliminate(const Expr& e, Symbol target) {
  if (!contains(e, target)) return e;
  for (int v : {0, 1, 2}) {
    try {
      return substitute(e, {{target, Expr(v)}});
    } catch (const DivisionByZero&) {
    }
  }
  return e;
}

bool verify(Symbol new_var, const Expr& definition, Symbol target, const Expr& solution,
            const ZeroTestConfig& cfg) {
  try {
    Expr back = substitute(definition, {{target, solution}});
    return is_zero(back - Expr(new_var), cfg);
  } catch (const DivisionByZero&) {
    return false;
  }
}

[[noreturn]] void not_invertible(const Expr& definition, Symbol target, const std::string& why) {
  throw NotInvertible("not closed-form invertible: " + to_string(definition) + " in " +
                      target.name() + " (" + why + ")");
}

}  // namespace

Expr solve_for(Symbol new_var, const Expr& definition, Symbol target, const ZeroTestConfig& cfg,
               InversionPolicy policy) {
  if (!depends_on(definition, target, cfg)) not_invertible(definition, target, "no dependence");
  const Expr slope = differentiate(definition, target);

  // affine: definition = A + B * target
  if (!depends_on(slope, target, cfg)) {
    const Expr b = settle(eliminate(slope, target), cfg);
    const Expr a = settle(eliminate(definition - b * Expr(target), target), cfg);
    Expr solution = (Expr(new_var) - a) / b;
    if (verify(new_var, definition, target, solution, cfg)) return solution;
    not_invertible(definition, target, "back-substitution failed");
  }

  // pure power: target * d(def)/d(target) / def is the constant exponent
  Expr log_slope;
  try {
    log_slope = settle(Expr(target) * slope / definition, cfg);
  } catch (const CannotDecide&) {
    not_invertible(definition, target, "undefined logarithmic derivative");
  }
  if (!log_slope.is_constant() || log_slope.value().get_den() != 1 ||
      !log_slope.value().get_num().fits_slong_p()) {
    not_invertible(definition, target, "neither affine nor a pure power");
  }
  const long p = log_slope.value().get_num().get_si();
  const Expr coefficient = settle(eliminate(definition / power(Expr(target), p), target), cfg);
  if (contains(coefficient, target)) not_invertible(definition, target, "coefficient not separable");

  Expr solution;
  if (p == -1) {
    solution = coefficient / Expr(new_var);
  } else if (policy == InversionPolicy::strict) {
    not_invertible(definition, target, "power " + std::to_string(p) + " is not injective");
  } else {
    solution = exp(ln(Expr(new_var) / coefficient) / Expr(p));
  }
  if (verify(new_var, definition, target, solution, cfg)) return solution;
  not_invertible(definition, target, "back-substitution failed");
}

}  // namespace flattri::symx
