#pragma once

// Immutable symbolic expressions over interned symbols.
//
// Nodes are hash-consed only structurally (equal trees compare equal, they are
// not guaranteed to share storage). All constructors apply local
// simplifications: constant folding, flattening of sums and products, like-term
// collection, power merging and 0/1 absorption. Nothing is expanded, and there
// is no canonical rational-function form; identity questions are answered by
// the sampling routines in sampling.hpp.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace flattri::symx {

using Rational = mpq_class;

namespace detail {
struct SymbolEntry {
  std::string name;
  std::uint32_t id;
  std::uint64_t name_hash;  // FNV-1a of the name, stable across runs
};
}  // namespace detail

/// Interned variable name. Copies are cheap; equal names give equal symbols.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string_view name);

  const std::string& name() const;
  std::uint32_t id() const noexcept { return entry_ ? entry_->id : 0; }
  std::uint64_t name_hash() const noexcept { return entry_ ? entry_->name_hash : 0; }
  bool valid() const noexcept { return entry_ != nullptr; }

  friend bool operator==(Symbol a, Symbol b) noexcept { return a.entry_ == b.entry_; }
  /// Orders by name so that output does not depend on interning order.
  friend bool operator<(Symbol a, Symbol b) { return a.name() < b.name(); }

 private:
  const detail::SymbolEntry* entry_ = nullptr;
};

using Symbols = std::vector<Symbol>;

enum class Kind : std::uint8_t { constant, variable, power, product, sum, function };
enum class Function : std::uint8_t { sin, cos, exp, ln };

const char* function_name(Function f);

class Expr;

namespace detail {
struct Node;
}

class Expr {
 public:
  /// The constant zero.
  Expr();
  Expr(int value);  // NOLINT(google-explicit-constructor)
  Expr(long value);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& value);  // NOLINT(google-explicit-constructor)
  Expr(Symbol symbol);  // NOLINT(google-explicit-constructor)

  Kind kind() const noexcept;
  bool is_constant() const noexcept { return kind() == Kind::constant; }
  bool is_variable() const noexcept { return kind() == Kind::variable; }
  /// Literal zero/one, i.e. syntactic checks only.
  bool is_zero() const noexcept;
  bool is_one() const noexcept;

  const Rational& value() const;   // constant
  Symbol symbol() const;           // variable
  std::span<const Expr> operands() const;  // sum terms, product factors
  const Expr& base() const;        // power
  long exponent() const;           // power
  Function function() const;       // function
  const Expr& argument() const;    // function

  std::size_t hash() const noexcept;
  /// Bloom mask of the symbols occurring in the tree (bit id % 64).
  std::uint64_t symbol_mask() const noexcept;
  bool transcendental() const noexcept;
  std::size_t size() const noexcept;  // node count of the tree (shared nodes counted twice)
  const detail::Node* node() const noexcept { return node_.get(); }

  /// Structural equality.
  friend bool operator==(const Expr& a, const Expr& b);
  /// Total structural order, used to sort operands deterministically.
  static int compare(const Expr& a, const Expr& b);

  std::string str() const;

 private:
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  friend struct detail::Node;
  friend Expr make_node(detail::Node&&);

  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Kind kind = Kind::constant;
  Function func = Function::sin;
  long exponent = 0;
  Rational value;
  Symbol symbol;
  std::vector<Expr> operands;  // sum/product operands, power base, function argument
  std::size_t hash = 0;
  std::uint64_t symbol_mask = 0;
  std::size_t size = 1;
  bool transcendental = false;
};
}  // namespace detail

struct ExprHash {
  std::size_t operator()(const Expr& e) const noexcept { return e.hash(); }
};

// Smart constructors. Each returns a locally simplified expression.
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr power(const Expr& base, long exponent);
Expr apply(Function f, const Expr& argument);

inline Expr sin(const Expr& e) { return apply(Function::sin, e); }
inline Expr cos(const Expr& e) { return apply(Function::cos, e); }
inline Expr exp(const Expr& e) { return apply(Function::exp, e); }
inline Expr ln(const Expr& e) { return apply(Function::ln, e); }

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

/// Exact partial derivative.
Expr differentiate(const Expr& e, Symbol v);

using Bindings = std::unordered_map<Symbol, Expr, std::hash<Symbol>>;

/// Simultaneous substitution; unbound symbols are left alone.
Expr substitute(const Expr& e, const Bindings& bindings);

/// Products and positive powers distributed over sums, like terms collected.
/// Denominators that are sums stay whole; a node whose expansion would exceed
/// `max_terms` terms is kept factored.
Expr expand(const Expr& e, std::size_t max_terms = 256);

/// Syntactic occurrence test.
bool contains(const Expr& e, Symbol v);
/// Symbols occurring in `e`, sorted by name.
Symbols free_symbols(const Expr& e);

std::string to_string(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);

}  // namespace flattri::symx

template <>
struct std::hash<flattri::symx::Symbol> {
  std::size_t operator()(flattri::symx::Symbol s) const noexcept {
    return static_cast<std::size_t>(s.name_hash());
  }
};
