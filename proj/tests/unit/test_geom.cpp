#include "doctest.h"

#include "flattri/geom/distribution.hpp"
#include "flattri/symx/parse.hpp"
#include "oracle.hpp"

using namespace flattri;
using namespace flattri::geom;
using symx::parse;

namespace {

Coordinates coords_of(std::initializer_list<const char*> names) {
  Coordinates c;
  for (auto n : names) c.emplace_back(n);
  return c;
}

VectorField F(std::initializer_list<const char*> comps) {
  Vector v;
  for (auto c : comps) v.push_back(parse(c, symx::Vocabulary::open()));
  return VectorField(v);
}

const Coordinates& ex1() {
  static const Coordinates c = coords_of({"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"});
  return c;
}

VectorField ex1_drift() {
  return F({"x4 + 1", "x3*x4 - x5", "x7 - x8", "x6*(x7 - x8 + x1)", "x4*(x7 - x8)", "x7", "0", "0"});
}

VectorField coord(const Coordinates& c, std::size_t k) { return VectorField::coordinate(c.size(), k); }

Distribution ex1_d2(const ZeroTestConfig& cfg) {
  VectorField b1 = coord(ex1(), 6), b2 = coord(ex1(), 7), a = ex1_drift();
  return Distribution(ex1(), {b1, b2, lie_bracket(a, b1, ex1()), lie_bracket(a, b2, ex1())}, cfg);
}

const Coordinates& motor() {
  static const Coordinates c = coords_of({"theta", "omega", "psi_d", "rho", "I_d", "I_q"});
  return c;
}

Distribution motor_d2(const ZeroTestConfig& cfg) {
  VectorField a = F({"omega", "mu*psi_d*I_q - tau_L/J", "-eta*psi_d + eta*M*I_d", "n_p*omega + eta*M*I_q/psi_d", "0", "0"});
  VectorField b1 = coord(motor(), 4), b2 = coord(motor(), 5);
  return Distribution(motor(), {b1, b2, lie_bracket(a, b1, motor()), lie_bracket(a, b2, motor())}, cfg);
}

Distribution chained(std::size_t n, const ZeroTestConfig& cfg) {
  Coordinates c;
  for (std::size_t i = 1; i <= n; ++i) c.emplace_back("x" + std::to_string(i));
  Vector b2(n, Expr());
  b2[0] = Expr(1);
  for (std::size_t i = 1; i + 1 < n; ++i) b2[i] = Expr(c[i + 1]);
  return Distribution(c, {VectorField::coordinate(n, n - 1), VectorField(b2)}, cfg);
}

}  // namespace

TEST_CASE("lie bracket fixtures") {
  auto xy = coords_of({"x", "y"});
  CHECK(lie_bracket(F({"1", "0"}), F({"0", "x"}), xy) == F({"0", "1"}));
  VectorField v = F({"x*y", "y**2 + 1"});
  CHECK(lie_bracket(v, v, xy).literally_zero());

  VectorField b1 = coord(ex1(), 6);
  CHECK(lie_bracket(b1, ex1_drift(), ex1()) == F({"0", "0", "1", "x6", "x4", "1", "0", "0"}));

  // chained n=4: [d4, d1 + x3 d2 + x4 d3] = d3
  auto c4 = coords_of({"x1", "x2", "x3", "x4"});
  CHECK(lie_bracket(F({"0", "0", "0", "1"}), F({"1", "x3", "x4", "0"}), c4) == F({"0", "0", "1", "0"}));
}

TEST_CASE("lie derivative") {
  VectorField a = F({"omega", "mu*psi_d*I_q - tau_L/J", "-eta*psi_d + eta*M*I_d", "n_p*omega + eta*M*I_q/psi_d", "0", "0"});
  CHECK(lie_derivative(Expr(Symbol("theta")), a, motor()) == Expr(Symbol("omega")));
  auto xy = coords_of({"x", "y"});
  CHECK(lie_derivative(parse("x*y", symx::Vocabulary::open()), VectorField::zero(2), xy, 3).is_zero());
  CHECK(lie_derivative(parse("x**2", symx::Vocabulary::open()), F({"1", "0"}), xy, 2) == Expr(2));
  CHECK(lie_derivative(Expr(Symbol("x")), F({"1", "0"}), xy, 0) == Expr(Symbol("x")));
}

TEST_CASE("example distributions") {
  ZeroTestConfig cfg;
  Distribution d1(ex1(), {coord(ex1(), 6), coord(ex1(), 7)}, cfg);
  CHECK(is_involutive(d1, cfg));
  Distribution d2 = ex1_d2(cfg);
  CHECK(d2.dim() == 4);
  CHECK_FALSE(is_involutive(d2, cfg));
  CHECK(d2.contains(F({"0", "0", "1", "x6", "x4", "0", "0", "0"}), cfg));

  Distribution d21 = derived_flag_step(d2, cfg);
  CHECK(d21.dim() == 5);
  Distribution expected(ex1(), {coord(ex1(), 7), coord(ex1(), 6), coord(ex1(), 5), coord(ex1(), 3),
                                F({"0", "0", "1", "0", "x4", "0", "0", "0"})}, cfg);
  CHECK(d21.equals(expected, cfg));

  Closure cl = involutive_closure(d2, cfg);
  CHECK(cl.trace == std::vector<std::size_t>{4, 5, 6});
  CHECK(coordinate_directions(cl.closure, cfg) == std::vector<std::size_t>{2, 3, 4, 5, 6, 7});

  Distribution c = cauchy_characteristics(d2, cfg);
  CHECK(c.equals(d1, cfg));

  Codistribution ann = annihilator(cl.closure, cfg);
  CHECK(ann.dim() == 2);
  Codistribution dx12(ex1(), {OneForm::coordinate(8, 0), OneForm::coordinate(8, 1)}, cfg);
  CHECK(ann.equals(dx12, cfg));
  CHECK(annihilator(ann, cfg).equals(cl.closure, cfg));

  CHECK(annihilator(Distribution::tangent_space(ex1(), cfg), cfg).dim() == 0);

  // [a, d/dx6] in closure(D2)
  CHECK(cl.closure.contains(lie_bracket(ex1_drift(), coord(ex1(), 5), ex1()), cfg));
}

TEST_CASE("motor distributions") {
  ZeroTestConfig cfg;
  Distribution d2 = motor_d2(cfg);
  CHECK(d2.dim() == 4);
  Closure cl = involutive_closure(d2, cfg);
  CHECK(cl.trace == std::vector<std::size_t>{4, 5});
  Distribution d1(motor(), {coord(motor(), 4), coord(motor(), 5)}, cfg);
  CHECK(cauchy_characteristics(d2, cfg).equals(d1, cfg));
  Codistribution ann = annihilator(cl.closure, cfg);
  CHECK(ann.equals(Codistribution(motor(), {OneForm::coordinate(6, 0)}, cfg), cfg));
}

TEST_CASE("chained flags") {
  ZeroTestConfig cfg;
  Distribution d = chained(5, cfg);
  Distribution l1 = lie_flag_step(d, d, cfg);
  CHECK(l1.dim() == 3);
  CHECK(lie_flag_step(d, l1, cfg).dim() == 4);
  Distribution inv = Distribution::tangent_space(coords_of({"a", "b"}), cfg);
  CHECK(lie_flag_step(inv, inv, cfg).dim() == 2);
  CHECK(involutive_closure(inv, cfg).trace.size() == 1);
  CHECK(cauchy_characteristics(inv, cfg).dim() == 2);
}

TEST_CASE("Jacobi identity on random polynomial fields") {
  ZeroTestConfig cfg;
  auto c = coords_of({"p", "q", "r"});
  oracle::ExprGen gen(77, {c[0], c[1], c[2]});
  auto field = [&] { return VectorField({gen.polynomial(2, 2), gen.polynomial(2, 2), gen.polynomial(2, 2)}); };
  for (int t = 0; t < 15; ++t) {
    VectorField u = field(), v = field(), w = field();
    VectorField j = lie_bracket(u, lie_bracket(v, w, c), c) + lie_bracket(v, lie_bracket(w, u, c), c) +
                    lie_bracket(w, lie_bracket(u, v, c), c);
    for (const auto& e : j.components) CHECK(symx::is_zero(e, cfg));
  }
}

TEST_CASE("brackets agree with finite-difference Jacobians") {
  auto c = coords_of({"p", "q", "r"});
  oracle::ExprGen gen(91, {c[0], c[1], c[2]});
  std::uniform_real_distribution<double> coord01(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    VectorField v({gen.polynomial(2, 3), gen.polynomial(2, 3), gen.polynomial(2, 3)});
    VectorField w({gen.polynomial(2, 3), gen.polynomial(2, 3), gen.polynomial(2, 3)});
    VectorField b = lie_bracket(v, w, c);
    for (int k = 0; k < 10; ++k) {
      oracle::DoublePoint p{{"p", coord01(gen.rng())}, {"q", coord01(gen.rng())}, {"r", coord01(gen.rng())}};
      for (std::size_t i = 0; i < 3; ++i) {
        double est = 0;
        for (std::size_t j = 0; j < 3; ++j) {
          est += oracle::eval_double(v[j], p) * oracle::central_difference(w[i], p, c[j].name(), 1e-5);
          est -= oracle::eval_double(w[j], p) * oracle::central_difference(v[i], p, c[j].name(), 1e-5);
        }
        CHECK(oracle::close(oracle::eval_double(b[i], p), est, 1e-5));
      }
    }
  }
}

TEST_CASE("Cauchy characteristics are involutive and grow along the derived flag") {
  ZeroTestConfig cfg;
  for (std::size_t n : {5u, 6u}) {
    Distribution d = chained(n, cfg);
    Distribution d1 = derived_flag_step(d, cfg);
    Distribution c1 = cauchy_characteristics(d1, cfg);
    CHECK(c1.dim() == 1);
    CHECK(is_involutive(c1, cfg));
    CHECK(cauchy_characteristics(derived_flag_step(d1, cfg), cfg).contains(c1, cfg));
  }
}
