#include "flattri/symx/expr.hpp"

#include <algorithm>
#include <mutex>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "flattri/errors.hpp"

namespace flattri::symx {

// ---------------------------------------------------------------------------
// Symbols

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct SymbolTable {
  std::mutex mutex;
  std::unordered_map<std::string, std::unique_ptr<detail::SymbolEntry>> entries;
  std::uint32_t next_id = 1;
};

SymbolTable& symbol_table() {
  static SymbolTable table;
  return table;
}

const std::string& empty_name() {
  static const std::string name;
  return name;
}

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_rational(const Rational& q) {
  std::size_t h = mpz_get_ui(q.get_num_mpz_t());
  h = mix(h, mpz_get_ui(q.get_den_mpz_t()));
  h = mix(h, static_cast<std::size_t>(mpz_size(q.get_num_mpz_t())));
  return mix(h, static_cast<std::size_t>(sgn(q) + 1));
}

}  // namespace

Symbol::Symbol(std::string_view name) {
  auto& table = symbol_table();
  std::lock_guard lock(table.mutex);
  auto it = table.entries.find(std::string(name));
  if (it == table.entries.end()) {
    auto entry = std::make_unique<detail::SymbolEntry>(
        detail::SymbolEntry{std::string(name), table.next_id++, fnv1a(name)});
    it = table.entries.emplace(std::string(name), std::move(entry)).first;
  }
  entry_ = it->second.get();
}

const std::string& Symbol::name() const { return entry_ ? entry_->name : empty_name(); }

const char* function_name(Function f) {
  switch (f) {
    case Function::sin: return "sin";
    case Function::cos: return "cos";
    case Function::exp: return "exp";
    case Function::ln: return "ln";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Node construction

Expr make_node(detail::Node&& n) {
  n.hash = mix(std::hash<int>{}(static_cast<int>(n.kind)), 0);
  n.size = 1;
  n.symbol_mask = 0;
  n.transcendental = false;
  switch (n.kind) {
    case Kind::constant: n.hash = mix(n.hash, hash_rational(n.value)); break;
    case Kind::variable:
      n.hash = mix(n.hash, std::hash<Symbol>{}(n.symbol));
      n.symbol_mask = std::uint64_t{1} << (n.symbol.id() % 64);
      break;
    case Kind::power: n.hash = mix(n.hash, static_cast<std::size_t>(n.exponent)); break;
    case Kind::function:
      n.hash = mix(n.hash, static_cast<std::size_t>(n.func));
      n.transcendental = true;
      break;
    default: break;
  }
  for (const auto& op : n.operands) {
    n.hash = mix(n.hash, op.hash());
    n.symbol_mask |= op.symbol_mask();
    n.transcendental = n.transcendental || op.transcendental();
    n.size += op.size();
  }
  return Expr(std::make_shared<const detail::Node>(std::move(n)));
}

namespace {

Expr make_constant(const Rational& q) {
  detail::Node n;
  n.kind = Kind::constant;
  n.value = q;
  n.value.canonicalize();
  return make_node(std::move(n));
}

const Expr& zero_expr() {
  static const Expr z = make_constant(Rational(0));
  return z;
}

const Expr& one_expr() {
  static const Expr o = make_constant(Rational(1));
  return o;
}

Rational rational_pow(const Rational& base, long e) {
  if (e == 0) return Rational(1);
  if (sgn(base) == 0) {
    if (e < 0) throw DivisionByZero("zero raised to a negative power");
    return Rational(0);
  }
  const unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), k);
  Rational r = e > 0 ? Rational(num, den) : Rational(den, num);
  r.canonicalize();
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr accessors

Expr::Expr() : node_(zero_expr().node_) {}
Expr::Expr(int value) : Expr(Rational(value)) {}
Expr::Expr(long value) : Expr(Rational(value)) {}
Expr::Expr(const Rational& value) {
  if (value == 0) {
    node_ = zero_expr().node_;
  } else if (value == 1) {
    node_ = one_expr().node_;
  } else {
    node_ = make_constant(value).node_;
  }
}
Expr::Expr(Symbol symbol) {
  detail::Node n;
  n.kind = Kind::variable;
  n.symbol = symbol;
  node_ = make_node(std::move(n)).node_;
}

Kind Expr::kind() const noexcept { return node_->kind; }
bool Expr::is_zero() const noexcept { return node_->kind == Kind::constant && sgn(node_->value) == 0; }
bool Expr::is_one() const noexcept { return node_->kind == Kind::constant && node_->value == 1; }
const Rational& Expr::value() const { return node_->value; }
Symbol Expr::symbol() const { return node_->symbol; }
std::span<const Expr> Expr::operands() const { return node_->operands; }
const Expr& Expr::base() const { return node_->operands.front(); }
long Expr::exponent() const { return node_->exponent; }
Function Expr::function() const { return node_->func; }
const Expr& Expr::argument() const { return node_->operands.front(); }
std::size_t Expr::hash() const noexcept { return node_->hash; }
std::uint64_t Expr::symbol_mask() const noexcept { return node_->symbol_mask; }
bool Expr::transcendental() const noexcept { return node_->transcendental; }
std::size_t Expr::size() const noexcept { return node_->size; }
std::string Expr::str() const { return to_string(*this); }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return Expr::compare(a, b) == 0;
}

int Expr::compare(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return 0;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind) ? -1 : 1;
  switch (x.kind) {
    case Kind::constant: return cmp(x.value, y.value) < 0 ? -1 : (cmp(x.value, y.value) > 0 ? 1 : 0);
    case Kind::variable:
      if (x.symbol == y.symbol) return 0;
      return x.symbol.name() < y.symbol.name() ? -1 : 1;
    case Kind::power: {
      int c = compare(x.operands[0], y.operands[0]);
      if (c != 0) return c;
      if (x.exponent != y.exponent) return x.exponent < y.exponent ? -1 : 1;
      return 0;
    }
    case Kind::function:
      if (x.func != y.func) return x.func < y.func ? -1 : 1;
      return compare(x.operands[0], y.operands[0]);
    case Kind::product:
    case Kind::sum: {
      const std::size_t n = std::min(x.operands.size(), y.operands.size());
      for (std::size_t i = 0; i < n; ++i) {
        int c = compare(x.operands[i], y.operands[i]);
        if (c != 0) return c;
      }
      if (x.operands.size() != y.operands.size()) return x.operands.size() < y.operands.size() ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Smart constructors

namespace {

// Splits a term into (coefficient, rest) for like-term collection.
std::pair<Rational, Expr> split_coefficient(const Expr& t) {
  if (t.kind() == Kind::product && t.operands().front().is_constant()) {
    auto ops = t.operands();
    std::vector<Expr> rest(ops.begin() + 1, ops.end());
    if (rest.size() == 1) return {ops.front().value(), rest.front()};
    detail::Node n;
    n.kind = Kind::product;
    n.operands = std::move(rest);
    return {ops.front().value(), make_node(std::move(n))};
  }
  return {Rational(1), t};
}

struct ExprEq {
  bool operator()(const Expr& a, const Expr& b) const { return a == b; }
};

}  // namespace

Expr sum(std::vector<Expr> terms) {
  Rational constant(0);
  std::vector<std::pair<Expr, Rational>> acc;
  std::unordered_map<Expr, std::size_t, ExprHash, ExprEq> index;

  std::vector<Expr> stack(std::move(terms));
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    Expr t = std::move(stack.back());
    stack.pop_back();
    if (t.is_constant()) {
      constant += t.value();
      continue;
    }
    if (t.kind() == Kind::sum) {
      auto ops = t.operands();
      for (auto it = ops.rbegin(); it != ops.rend(); ++it) stack.push_back(*it);
      continue;
    }
    auto [coef, rest] = split_coefficient(t);
    auto [it, inserted] = index.emplace(rest, acc.size());
    if (inserted) {
      acc.emplace_back(rest, coef);
    } else {
      acc[it->second].second += coef;
    }
  }

  std::vector<std::pair<Expr, Rational>> kept;
  kept.reserve(acc.size());
  for (auto& entry : acc) {
    if (sgn(entry.second) != 0) kept.push_back(std::move(entry));
  }
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return Expr::compare(a.first, b.first) < 0; });

  std::vector<Expr> out;
  out.reserve(kept.size() + 1);
  for (auto& [rest, coef] : kept) {
    out.push_back(coef == 1 ? rest : product({Expr(coef), rest}));
  }
  if (sgn(constant) != 0) out.emplace_back(constant);
  if (out.empty()) return Expr();
  if (out.size() == 1) return out.front();
  detail::Node n;
  n.kind = Kind::sum;
  n.operands = std::move(out);
  return make_node(std::move(n));
}

Expr product(std::vector<Expr> factors) {
  Rational coef(1);
  std::vector<std::pair<Expr, long>> acc;
  std::unordered_map<Expr, std::size_t, ExprHash, ExprEq> index;

  std::vector<std::pair<Expr, long>> stack;
  stack.reserve(factors.size());
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) stack.emplace_back(std::move(*it), 1);

  while (!stack.empty()) {
    auto [f, e] = std::move(stack.back());
    stack.pop_back();
    switch (f.kind()) {
      case Kind::constant: coef *= rational_pow(f.value(), e); break;
      case Kind::product: {
        auto ops = f.operands();
        for (auto it = ops.rbegin(); it != ops.rend(); ++it) stack.emplace_back(*it, e);
        break;
      }
      case Kind::power: stack.emplace_back(f.base(), f.exponent() * e); break;
      default: {
        auto [it, inserted] = index.emplace(f, acc.size());
        if (inserted) {
          acc.emplace_back(f, e);
        } else {
          acc[it->second].second += e;
        }
      }
    }
  }
  if (sgn(coef) == 0) return Expr();

  std::sort(acc.begin(), acc.end(),
            [](const auto& a, const auto& b) { return Expr::compare(a.first, b.first) < 0; });

  std::vector<Expr> out;
  out.reserve(acc.size() + 1);
  bool needs_recombine = false;
  for (auto& [b, e] : acc) {
    if (e == 0) continue;
    Expr f = power(b, e);
    if (f.kind() == Kind::product || f.kind() == Kind::constant) needs_recombine = true;
    out.push_back(std::move(f));
  }
  if (needs_recombine) {
    out.emplace_back(coef);
    return product(std::move(out));
  }
  if (out.empty()) return Expr(coef);
  if (out.size() == 1 && coef == 1) return out.front();
  if (coef != 1) out.insert(out.begin(), Expr(coef));
  detail::Node n;
  n.kind = Kind::product;
  n.operands = std::move(out);
  return make_node(std::move(n));
}

Expr power(const Expr& base, long exponent) {
  if (exponent == 0) return Expr(1);
  if (exponent == 1) return base;
  switch (base.kind()) {
    case Kind::constant: return Expr(rational_pow(base.value(), exponent));
    case Kind::power: return power(base.base(), base.exponent() * exponent);
    case Kind::product: {
      std::vector<Expr> fs;
      fs.reserve(base.operands().size());
      for (const auto& f : base.operands()) fs.push_back(power(f, exponent));
      return product(std::move(fs));
    }
    case Kind::function:
      if (base.function() == Function::exp) return exp(Expr(exponent) * base.argument());
      break;
    default: break;
  }
  detail::Node n;
  n.kind = Kind::power;
  n.exponent = exponent;
  n.operands = {base};
  return make_node(std::move(n));
}

Expr apply(Function f, const Expr& argument) {
  if (argument.is_zero()) {
    switch (f) {
      case Function::sin: return Expr(0);
      case Function::cos:
      case Function::exp: return Expr(1);
      case Function::ln: throw DivisionByZero("ln(0)");
    }
  }
  if (f == Function::ln && argument.is_one()) return Expr(0);
  if (f == Function::exp) {
    // exp(k*ln(z)) = z^k for integer k
    if (argument.kind() == Kind::function && argument.function() == Function::ln) return argument.argument();
    if (argument.kind() == Kind::product && argument.operands().size() == 2 &&
        argument.operands()[0].is_constant() && argument.operands()[0].value().get_den() == 1 &&
        argument.operands()[1].kind() == Kind::function &&
        argument.operands()[1].function() == Function::ln) {
      const auto& k = argument.operands()[0].value().get_num();
      if (k.fits_slong_p()) return power(argument.operands()[1].argument(), k.get_si());
    }
  }
  detail::Node n;
  n.kind = Kind::function;
  n.func = f;
  n.operands = {argument};
  return make_node(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return sum({a, b});
}
Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  return sum({a, -b});
}
Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return product({a, b});
}
Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw DivisionByZero("division by literal zero");
  if (a.is_zero()) return Expr();
  if (b.is_one()) return a;
  return product({a, power(b, -1)});
}
Expr operator-(const Expr& a) {
  if (a.is_zero()) return a;
  if (a.is_constant()) return Expr(Rational(-a.value()));
  return product({Expr(-1), a});
}

// ---------------------------------------------------------------------------
// Calculus and substitution

bool contains(const Expr& e, Symbol v) {
  if ((e.symbol_mask() & (std::uint64_t{1} << (v.id() % 64))) == 0) return false;
  if (e.is_variable()) return e.symbol() == v;
  for (const auto& op : e.operands()) {
    if (contains(op, v)) return true;
  }
  return false;
}

namespace {

void collect_symbols(const Expr& e, std::vector<Symbol>& out) {
  if (e.is_variable()) {
    if (std::find(out.begin(), out.end(), e.symbol()) == out.end()) out.push_back(e.symbol());
    return;
  }
  for (const auto& op : e.operands()) collect_symbols(op, out);
}

class Differentiator {
 public:
  explicit Differentiator(Symbol v) : v_(v), bit_(std::uint64_t{1} << (v.id() % 64)) {}

  Expr operator()(const Expr& e) {
    if ((e.symbol_mask() & bit_) == 0) return Expr();
    auto it = memo_.find(e.node());
    if (it != memo_.end()) return it->second;
    Expr d = compute(e);
    memo_.emplace(e.node(), d);
    keep_.push_back(e);
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::constant: return Expr();
      case Kind::variable: return e.symbol() == v_ ? Expr(1) : Expr();
      case Kind::sum: {
        std::vector<Expr> terms;
        for (const auto& t : e.operands()) {
          Expr d = (*this)(t);
          if (!d.is_zero()) terms.push_back(std::move(d));
        }
        return sum(std::move(terms));
      }
      case Kind::product: {
        auto ops = e.operands();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < ops.size(); ++i) {
          Expr d = (*this)(ops[i]);
          if (d.is_zero()) continue;
          std::vector<Expr> fs;
          fs.reserve(ops.size());
          for (std::size_t j = 0; j < ops.size(); ++j) fs.push_back(j == i ? d : ops[j]);
          terms.push_back(product(std::move(fs)));
        }
        return sum(std::move(terms));
      }
      case Kind::power: {
        Expr d = (*this)(e.base());
        if (d.is_zero()) return Expr();
        return product({Expr(e.exponent()), power(e.base(), e.exponent() - 1), d});
      }
      case Kind::function: {
        const Expr& a = e.argument();
        Expr d = (*this)(a);
        if (d.is_zero()) return Expr();
        switch (e.function()) {
          case Function::sin: return cos(a) * d;
          case Function::cos: return -(sin(a) * d);
          case Function::exp: return e * d;
          case Function::ln: return d / a;
        }
      }
    }
    return Expr();
  }

  Symbol v_;
  std::uint64_t bit_;
  std::unordered_map<const detail::Node*, Expr> memo_;
  std::vector<Expr> keep_;
};

class Substituter {
 public:
  explicit Substituter(const Bindings& b) : bindings_(b) {
    for (const auto& [s, _] : b) mask_ |= std::uint64_t{1} << (s.id() % 64);
  }

  Expr operator()(const Expr& e) {
    if ((e.symbol_mask() & mask_) == 0) return e;
    auto it = memo_.find(e.node());
    if (it != memo_.end()) return it->second;
    Expr r = compute(e);
    memo_.emplace(e.node(), r);
    keep_.push_back(e);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::constant: return e;
      case Kind::variable: {
        auto it = bindings_.find(e.symbol());
        return it == bindings_.end() ? e : it->second;
      }
      case Kind::power: return power((*this)(e.base()), e.exponent());
      case Kind::function: return apply(e.function(), (*this)(e.argument()));
      case Kind::sum:
      case Kind::product: {
        std::vector<Expr> ops;
        bool changed = false;
        for (const auto& op : e.operands()) {
          ops.push_back((*this)(op));
          changed = changed || ops.back().node() != op.node();
        }
        if (!changed) return e;
        return e.kind() == Kind::sum ? sum(std::move(ops)) : product(std::move(ops));
      }
    }
    return e;
  }

  const Bindings& bindings_;
  std::uint64_t mask_ = 0;
  std::unordered_map<const detail::Node*, Expr> memo_;
  std::vector<Expr> keep_;
};

}  // namespace

Expr differentiate(const Expr& e, Symbol v) { return Differentiator(v)(e); }

Expr substitute(const Expr& e, const Bindings& bindings) {
  if (bindings.empty()) return e;
  return Substituter(bindings)(e);
}

Symbols free_symbols(const Expr& e) {
  Symbols out;
  collect_symbols(e, out);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Printing. The output parses back to a structurally equal expression.

namespace {

enum class Prec { sum = 0, product = 1, power = 2, atom = 3 };

std::string rational_str(const Rational& q) { return q.get_str(); }

bool is_negative_term(const Expr& t) {
  if (t.is_constant()) return sgn(t.value()) < 0;
  if (t.kind() == Kind::product) return t.operands().front().is_constant() && sgn(t.operands().front().value()) < 0;
  return false;
}

void print(std::ostream& os, const Expr& e, Prec ctx);

void print_power_operand(std::ostream& os, const Expr& base) {
  if (base.is_variable() || base.kind() == Kind::function ||
      (base.is_constant() && sgn(base.value()) > 0 && base.value().get_den() == 1)) {
    print(os, base, Prec::atom);
  } else {
    os << '(';
    print(os, base, Prec::sum);
    os << ')';
  }
}

// Prints a product of positive-exponent factors (no coefficient).
void print_factor_list(std::ostream& os, const std::vector<Expr>& fs) {
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) os << '*';
    print(os, fs[i], Prec::product);
  }
}

void print_product(std::ostream& os, const Expr& e, Prec ctx) {
  Rational coef(1);
  std::vector<Expr> num, den;
  for (const auto& f : e.operands()) {
    if (f.is_constant()) {
      coef *= f.value();
    } else if (f.kind() == Kind::power && f.exponent() < 0) {
      den.push_back(power(f.base(), -f.exponent()));
    } else {
      num.push_back(f);
    }
  }
  const bool negative = sgn(coef) < 0;
  const bool parens = ctx > Prec::product || (negative && ctx == Prec::product);
  if (parens) os << '(';
  if (negative) {
    os << '-';
    coef = -coef;
  }
  bool wrote = false;
  if (coef != 1 || num.empty()) {
    if (coef.get_den() != 1 && (!num.empty() || !den.empty())) {
      os << coef.get_num().get_str() << '/' << coef.get_den().get_str();
    } else {
      os << rational_str(coef);
    }
    wrote = true;
  }
  if (!num.empty()) {
    if (wrote) os << '*';
    print_factor_list(os, num);
  }
  if (!den.empty()) {
    os << '/';
    if (den.size() == 1 && (den.front().is_variable() || den.front().kind() == Kind::function)) {
      print(os, den.front(), Prec::atom);
    } else if (den.size() == 1) {
      os << '(';
      print(os, den.front(), Prec::sum);
      os << ')';
    } else {
      os << '(';
      print_factor_list(os, den);
      os << ')';
    }
  }
  if (parens) os << ')';
}

void print(std::ostream& os, const Expr& e, Prec ctx) {
  switch (e.kind()) {
    case Kind::constant: {
      const bool neg_or_frac = sgn(e.value()) < 0 || e.value().get_den() != 1;
      if (neg_or_frac && ctx >= Prec::product) {
        os << '(' << rational_str(e.value()) << ')';
      } else {
        os << rational_str(e.value());
      }
      return;
    }
    case Kind::variable: os << e.symbol().name(); return;
    case Kind::function:
      os << function_name(e.function()) << '(';
      print(os, e.argument(), Prec::sum);
      os << ')';
      return;
    case Kind::power:
      if (e.exponent() < 0) {
        const bool parens = ctx > Prec::product;
        if (parens) os << '(';
        os << "1/";
        Expr pos = power(e.base(), -e.exponent());
        if (pos.kind() == Kind::power) {
          os << '(';
          print(os, pos, Prec::sum);
          os << ')';
        } else {
          print(os, pos, Prec::atom);
        }
        if (parens) os << ')';
        return;
      }
      if (ctx > Prec::power) os << '(';
      print_power_operand(os, e.base());
      os << "**" << e.exponent();
      if (ctx > Prec::power) os << ')';
      return;
    case Kind::product: print_product(os, e, ctx); return;
    case Kind::sum: {
      const bool parens = ctx > Prec::sum;
      if (parens) os << '(';
      bool first = true;
      for (const auto& t : e.operands()) {
        if (first) {
          print(os, t, Prec::sum);
          first = false;
        } else if (is_negative_term(t)) {
          os << " - ";
          const Expr negated = -t;
          print(os, negated, negated.kind() == Kind::sum ? Prec::product : Prec::sum);
        } else {
          os << " + ";
          print(os, t, Prec::sum);
        }
      }
      if (parens) os << ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, Prec::sum);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

}  // namespace flattri::symx
