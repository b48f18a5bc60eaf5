#include <vector>

#include "flattri/symx/expr.hpp"

namespace flattri::symx {

namespace {

using Terms = std::vector<Expr>;

Terms as_terms(const Expr& e) {
  if (e.kind() == Kind::sum) return Terms(e.operands().begin(), e.operands().end());
  return {e};
}

class Expander {
 public:
  explicit Expander(std::size_t max_terms) : max_(max_terms) {}

  Terms operator()(const Expr& e) const {
    switch (e.kind()) {
      case Kind::constant:
      case Kind::variable: return {e};
      case Kind::function: return {apply(e.function(), sum((*this)(e.argument())))};
      case Kind::sum: {
        Terms out;
        for (const auto& t : e.operands()) {
          Terms sub = (*this)(t);
          out.insert(out.end(), sub.begin(), sub.end());
        }
        return as_terms(sum(std::move(out)));
      }
      case Kind::power: {
        Terms base = (*this)(e.base());
        if (e.exponent() < 0 || base.size() == 1) return {power(sum(std::move(base)), e.exponent())};
        std::vector<Terms> factors(static_cast<std::size_t>(e.exponent()), base);
        return multiply(factors);
      }
      case Kind::product: {
        std::vector<Terms> factors;
        for (const auto& f : e.operands()) factors.push_back((*this)(f));
        return multiply(factors);
      }
    }
    return {e};
  }

 private:
  Terms multiply(const std::vector<Terms>& factors) const {
    Terms acc{Expr(1)};
    for (const auto& f : factors) {
      if (acc.size() * f.size() > max_) {
        std::vector<Expr> kept;
        for (const auto& g : factors) kept.push_back(sum(g));
        return {product(std::move(kept))};
      }
      Terms next;
      next.reserve(acc.size() * f.size());
      for (const auto& a : acc) {
        for (const auto& b : f) next.push_back(a * b);
      }
      acc = as_terms(sum(std::move(next)));
    }
    return acc;
  }

  std::size_t max_;
};

}  // namespace

Expr expand(const Expr& e, std::size_t max_terms) { return sum(Expander(max_terms)(e)); }

}  // namespace flattri::symx
