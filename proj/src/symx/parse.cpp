#include "flattri/symx/parse.hpp"

#include <cctype>
#include <climits>

#include "flattri/errors.hpp"

namespace flattri::symx {

Vocabulary::Vocabulary(const std::vector<std::string>& names) {
  for (const auto& n : names) add(n);
}

Vocabulary Vocabulary::from_symbols(const Symbols& symbols) {
  Vocabulary v;
  for (const auto& s : symbols) v.add(s.name());
  return v;
}

Vocabulary Vocabulary::open() {
  Vocabulary v;
  v.open_ = true;
  return v;
}

void Vocabulary::add(const std::string& name) { names_.emplace(name, Symbol(name)); }

bool Vocabulary::declares(std::string_view name) const {
  return open_ || names_.count(std::string(name)) > 0;
}

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  const auto head = static_cast<unsigned char>(name.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  for (unsigned char c : name) {
    if (!(std::isalnum(c) || c == '_' || c == '^')) return false;
  }
  return true;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '^';
}

class Parser {
 public:
  Parser(std::string_view text, const Vocabulary& vocab, std::size_t line)
      : text_(text), vocab_(vocab), line_(line) {}

  Expr run() {
    skip_space();
    if (pos_ == text_.size()) fail("empty expression");
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, pos_ + 1); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(std::string_view tok) {
    skip_space();
    return text_.substr(pos_, tok.size()) == tok;
  }

  bool accept(std::string_view tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  Expr parse_sum() {
    std::vector<Expr> terms{parse_product()};
    for (;;) {
      if (accept("+")) {
        terms.push_back(parse_product());
      } else if (accept("-")) {
        terms.push_back(-parse_product());
      } else {
        break;
      }
    }
    return terms.size() == 1 ? terms.front() : sum(std::move(terms));
  }

  Expr parse_product() {
    Expr acc = parse_unary();
    for (;;) {
      if (peek("**")) break;
      if (accept("*")) {
        acc = acc * parse_unary();
      } else if (accept("/")) {
        const std::size_t at = pos_;
        Expr d = parse_unary();
        if (d.is_zero()) {
          pos_ = at;
          fail("division by literal zero");
        }
        acc = acc / d;
      } else {
        break;
      }
    }
    return acc;
  }

  Expr parse_unary() {
    if (accept("-")) return -parse_unary();
    if (accept("+")) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    while (accept("**")) {
      const std::size_t at = pos_;
      long e = parse_exponent();
      if (e < 0 && base.is_zero()) {
        pos_ = at;
        fail("zero raised to a negative power");
      }
      base = power(base, e);
    }
    return base;
  }

  long parse_exponent() {
    bool paren = accept("(");
    bool negative = false;
    if (accept("-")) {
      negative = true;
    } else {
      accept("+");
    }
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer exponent");
    mpz_class v(std::string(text_.substr(start, pos_ - start)));
    if (!v.fits_slong_p() || v > 1000000) {
      pos_ = start;
      fail("exponent out of range");
    }
    if (paren && !accept(")")) fail("expected ')'");
    const long e = v.get_si();
    return negative ? -e : e;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(")")) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ < text_.size() && (ident_start(text_[pos_]) || text_[pos_] == '.')) {
        fail("malformed number");
      }
      return Expr(Rational(mpz_class(std::string(text_.substr(start, pos_ - start)))));
    }
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      if (peek("(")) {
        Function f;
        if (name == "sin") {
          f = Function::sin;
        } else if (name == "cos") {
          f = Function::cos;
        } else if (name == "exp") {
          f = Function::exp;
        } else if (name == "ln") {
          f = Function::ln;
        } else {
          pos_ = start;
          fail("unknown function '" + name + "'");
        }
        accept("(");
        Expr arg = parse_sum();
        if (!accept(")")) fail("expected ')'");
        if (f == Function::ln && arg.is_zero()) {
          pos_ = start;
          fail("ln of literal zero");
        }
        return apply(f, arg);
      }
      if (!vocab_.declares(name)) throw UndeclaredIdentifier(name, line_, start + 1);
      return Expr(Symbol(name));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string_view text_;
  const Vocabulary& vocab_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const Vocabulary& vocabulary, std::size_t line) {
  return Parser(text, vocabulary, line).run();
}

}  // namespace flattri::symx
