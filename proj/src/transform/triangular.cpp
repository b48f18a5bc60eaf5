#include "flattri/transform/triangular.hpp"

#include <algorithm>
#include <sstream>

namespace flattri::transform {

namespace {

std::vector<Symbol> names(const std::string& prefix, std::size_t len) {
  std::vector<Symbol> out;
  for (std::size_t k = 1; k <= len; ++k) out.emplace_back(prefix + std::to_string(k));
  return out;
}

Symbol input_symbol(const AffineSystem& sys, std::string name) {
  while (sys.index_of(Symbol(name)) != static_cast<std::size_t>(-1) ||
         std::find(sys.params.begin(), sys.params.end(), Symbol(name)) != sys.params.end()) {
    name += "_";
  }
  return Symbol(name);
}

}  // namespace

TriangularPattern TriangularPattern::canonical(std::size_t n11, std::size_t n12, std::size_t n2, std::size_t n3) {
  return {names("x11_", n11), names("x12_", n12), names("x2_", n2), names("x31_", n3), names("x32_", n3)};
}

Coordinates TriangularPattern::states() const {
  Coordinates out;
  for (const auto* b : {&x11, &x12, &x2, &x31, &x32}) out.insert(out.end(), b->begin(), b->end());
  return out;
}

std::string TriangularPattern::str() const {
  std::ostringstream os;
  os << "n11=" << n11() << " n12=" << n12() << " n2=" << n2() << " n3=" << n3();
  return os.str();
}

TriangularCheck verify_triangular_form(const AffineSystem& sys, const TriangularPattern& p,
                                       const ZeroTestConfig& cfg) {
  TriangularCheck out;
  auto fail = [&](std::string msg) {
    out.ok = false;
    out.diagnostics.push_back(std::move(msg));
  };

  // Partition.
  Coordinates all = p.states();
  if (p.n2() < 3) fail("x2 block has " + std::to_string(p.n2()) + " states, needs at least 3");
  if (p.x31.size() != p.x32.size()) fail("x3 chains differ in length");
  if (all.size() != sys.n()) fail("pattern has " + std::to_string(all.size()) + " states, system " + std::to_string(sys.n()));
  for (Symbol s : all) {
    if (sys.index_of(s) == static_cast<std::size_t>(-1)) fail("'" + s.name() + "' is not a state");
    if (std::count(all.begin(), all.end(), s) > 1) fail("'" + s.name() + "' assigned twice");
  }
  if (!out.ok) return out;

  const Symbol u1 = input_symbol(sys, "u1"), u2 = input_symbol(sys, "u2");
  auto rhs = [&](Symbol s) {
    std::size_t i = sys.index_of(s);
    return sys.drift[i] + sys.b1[i] * Expr(u1) + sys.b2[i] * Expr(u2);
  };
  auto expect = [&](Symbol s, const Expr& want) {
    if (!symx::is_zero(rhs(s) - want, cfg)) {
      fail(s.name() + "' = " + symx::to_string(rhs(s)) + ", expected " + symx::to_string(want));
    }
  };

  const bool has_x3 = p.n3() > 0;
  const Expr w1 = has_x3 ? Expr(p.x31[0]) : Expr(u1);
  const Expr w2 = has_x3 ? Expr(p.x32[0]) : Expr(u2);

  auto chain = [&](const std::vector<Symbol>& c, const Expr& end) {
    for (std::size_t k = 0; k < c.size(); ++k) expect(c[k], k + 1 < c.size() ? Expr(c[k + 1]) : end);
  };
  chain(p.x11, Expr(p.x2[0]));
  chain(p.x12, Expr(p.x2[1]));

  const std::size_t n2 = p.n2();
  expect(p.x2[0], w2);
  expect(p.x2[n2 - 1], w1);
  std::vector<Symbol> everything = sys.states;
  everything.push_back(u1);
  everything.push_back(u2);
  for (std::size_t j = 1; j + 1 < n2; ++j) {
    const Expr a = rhs(p.x2[j]) - Expr(p.x2[j + 1]) * w2;
    std::vector<Symbol> allowed = p.x11;
    allowed.insert(allowed.end(), p.x12.begin(), p.x12.end());
    allowed.insert(allowed.end(), p.x2.begin(), p.x2.begin() + static_cast<std::ptrdiff_t>(j + 2));
    for (Symbol v : everything) {
      if (std::find(allowed.begin(), allowed.end(), v) != allowed.end()) continue;
      if (symx::depends_on(a, v, cfg)) {
        fail("a2^" + std::to_string(j + 1) + " = " + p.x2[j].name() + "' - " + p.x2[j + 1].name() + "*" +
             symx::to_string(w2) + " depends on " + v.name());
      }
    }
  }

  chain(p.x31, Expr(u1));
  chain(p.x32, Expr(u2));
  return out;
}

}  // namespace flattri::transform
