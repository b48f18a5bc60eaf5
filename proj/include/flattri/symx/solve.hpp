#pragma once

#include "flattri/symx/expr.hpp"
#include "flattri/symx/sampling.hpp"

namespace flattri::symx {

/// How to treat `new = C * target^p` with |p| >= 2.
///   strict         : rejected (the map is not injective over the reals)
///   principal_root : target = exp(ln(new / C) / p), valid where new / C > 0
enum class InversionPolicy { strict, principal_root };

/// Solves `new_var = definition` for `target`. Supports definitions affine in
/// `target` and pure powers C * target^p with C free of `target`. The result
/// is checked by back-substitution. Throws NotInvertible otherwise.
Expr solve_for(Symbol new_var, const Expr& definition, Symbol target, const ZeroTestConfig& cfg,
               InversionPolicy policy = InversionPolicy::strict);

}  // namespace flattri::symx
