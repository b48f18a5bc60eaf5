#include "doctest.h"

#include "fixtures.hpp"
#include "flattri/transform/pipeline.hpp"

using namespace flattri;
using namespace flattri::transform;
using fixtures::X;
using symx::is_zero;

namespace {

Expr rhs_drift(const AffineSystem& s, const char* name) { return s.drift[s.index_of(Symbol(name))]; }

void check_form(const TriangularCheck& c) {
  std::string all;
  for (const auto& d : c.diagnostics) all += d + "; ";
  CHECK_MESSAGE(c.ok, all);
}

}  // namespace

TEST_CASE("renaming the states of Example 1") {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("example1");
  const char* names[] = {"x1_1", "x1_2", "x2_1", "x2_2", "x2_3", "x2_4", "x3_1", "x3_2"};
  CoordChange phi(sys.states);
  symx::Bindings ren;
  for (std::size_t i = 0; i < 8; ++i) {
    phi.push(Symbol(names[i]), Expr(sys.states[i]), sys.states[i], cfg);
    ren.emplace(sys.states[i], Expr(Symbol(names[i])));
  }
  auto out = pushforward(sys, phi, cfg);
  REQUIRE(out.states.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(out.states[i] == Symbol(names[i]));
    CHECK(out.drift[i] == symx::substitute(sys.drift[i], ren));
  }
}

TEST_CASE("identity change and round trips") {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("motor");
  CoordChange id(sys.states);
  CHECK(id.is_identity());
  auto same = pushforward(sys, id, cfg);
  for (std::size_t i = 0; i < sys.n(); ++i) CHECK(same.drift[i] == sys.drift[i]);

  for (const char* name : {"example1", "motor", "extchained5"}) {
    auto s = fixtures::load(name);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto phi = fixtures::random_triangular_change(s, seed, cfg);
      auto there = pushforward(s, phi, cfg);
      auto back = pushforward(there, phi.inverted(), cfg);
      INFO(name << " seed " << seed);
      CHECK(same_system(back, s, cfg));
      for (std::size_t i = 0; i < s.n(); ++i) {
        CHECK(is_zero(phi.to_source(phi.inverse()[i]) - Expr(s.states[i]), cfg));
      }
    }
  }
}

TEST_CASE("apply_step agrees with pushforward") {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("example1");
  CoordChange phi(sys.states);
  phi.push(Symbol("y"), X("x3") * X("x4") - X("x5"), Symbol("x5"), cfg);
  CHECK(same_system(apply_step(sys, phi.steps()[0], cfg), pushforward(sys, phi, cfg), cfg));
}

TEST_CASE("Example 1 after normalizing the integrator inputs") {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("example1");
  CoordChange phi(sys.states);
  // xb1 = x2^2 + 1, xb2 = x2^1 x2^2 - x2^3 in the renamed states.
  phi.push(Symbol("xb1"), X("x4") + Expr(1), Symbol("x4"), cfg);
  phi.push(Symbol("xb2"), X("x3") * (X("xb1") - Expr(1)) - X("x5"), Symbol("x3"), cfg);
  auto s = pushforward(sys, phi, cfg);
  const Expr u = X("x7") - X("x8") + X("x1");
  CHECK(is_zero(rhs_drift(s, "x1") - X("xb1"), cfg));
  CHECK(is_zero(rhs_drift(s, "x2") - X("xb2"), cfg));
  CHECK(is_zero(rhs_drift(s, "xb1") - X("x6") * u, cfg));
  CHECK(is_zero(rhs_drift(s, "xb2") - X("x6") * (X("xb2") + X("x5")) / (X("xb1") - Expr(1)) * u, cfg));
  CHECK(is_zero(rhs_drift(s, "x5") - (X("xb1") - Expr(1)) * (X("x7") - X("x8")), cfg));
  CHECK(is_zero(rhs_drift(s, "x6") - X("x7"), cfg));
}

TEST_CASE("feedback") {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("example1");
  CHECK(same_system(apply_feedback(sys, Feedback::identity(), cfg), sys, cfg));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto f = fixtures::random_feedback(sys, seed);
    REQUIRE(f.invertible(cfg));
    auto there = apply_feedback(sys, f, cfg);
    CHECK(same_system(apply_feedback(there, f.inverse(cfg), cfg), sys, cfg));
    auto g = fixtures::random_feedback(sys, seed + 100);
    CHECK(same_system(apply_feedback(there, g, cfg), apply_feedback(sys, f.then(g), cfg), cfg));
  }
  Feedback singular;
  singular.M = {{{X("x1"), X("x2")}, {Expr(2) * X("x1"), Expr(2) * X("x2")}}};
  CHECK_FALSE(singular.invertible(cfg));
  CHECK_THROWS_AS(apply_feedback(sys, singular, cfg), NotInvertible);
}

TEST_CASE("triangular form verification") {
  ZeroTestConfig cfg;
  SUBCASE("motor form") {
    auto sys = cli::parse_system(R"(
states: [x11_1, x2_1, x2_2, x2_3, x31_1, x32_1]
params: [n_p, tau_L, J]
drift: [x2_1, x32_1, x2_3*x32_1 + n_p*x2_1 + tau_L/J*x2_3, x31_1, 0, 0]
input b1: [0, 0, 0, 0, 1, 0]
input b2: [0, 0, 0, 0, 0, 1]
)", "motor9").system;
    check_form(verify_triangular_form(sys, TriangularPattern::canonical(1, 0, 3, 1), cfg));
    CHECK_FALSE(verify_triangular_form(sys, TriangularPattern::canonical(0, 1, 3, 1), cfg).ok);
  }
  SUBCASE("generated systems, and agreement with the structure check") {
    const fixtures::TriangularShape shapes[] = {{1, 1, 3, 1}, {2, 0, 4, 0}, {0, 0, 5, 2}, {1, 2, 4, 1}};
    std::uint64_t seed = 11;
    for (const auto& sh : shapes) {
      auto t = fixtures::triangular(sh, seed++);
      auto p = TriangularPattern::canonical(sh.n11, sh.n12, sh.n2, sh.n3);
      check_form(verify_triangular_form(t.sys, p, cfg));
      auto r = flatness::check_theorem1(t.sys, cfg);
      CHECK(r.passed());
      CHECK(r.n2 == sh.n2);
      CHECK(r.n3 == sh.n3);
      CHECK(r.n11 + r.n12 == sh.n11 + sh.n12);
    }
  }
  SUBCASE("a2^2 depending on the last x2 state") {
    auto t = fixtures::triangular({1, 1, 4, 1}, 5);
    auto a = t.sys.drift.components;
    a[t.sys.index_of(Symbol("x2_2"))] = a[t.sys.index_of(Symbol("x2_2"))] + X("x2_4");
    t.sys.drift = geom::VectorField(a);
    auto c = verify_triangular_form(t.sys, TriangularPattern::canonical(1, 1, 4, 1), cfg);
    CHECK_FALSE(c.ok);
    REQUIRE(c.diagnostics.size() == 1);
    CHECK(c.diagnostics[0].find("a2^2") != std::string::npos);
    CHECK(c.diagnostics[0].find("depends on x2_4") != std::string::npos);
  }
  SUBCASE("bad partitions") {
    auto t = fixtures::triangular({1, 1, 3, 1}, 2);
    auto p = TriangularPattern::canonical(1, 1, 3, 1);
    p.x2[2] = p.x2[1];
    CHECK_FALSE(verify_triangular_form(t.sys, p, cfg).ok);
  }
}

TEST_CASE("adapted coordinates") {
  ZeroTestConfig cfg;
  auto ex1 = fixtures::load("example1");
  auto a = verify_adapted_coordinates(ex1, flatness::check_theorem1(ex1, cfg), cfg);
  REQUIRE(a.ok);
  CHECK(a.x3_levels == std::vector<std::vector<Symbol>>{{Symbol("x7"), Symbol("x8")}});
  CHECK(a.x2_lower == std::vector<std::vector<Symbol>>{{Symbol("x6")}});
  CHECK(a.x2_top == std::vector<Symbol>{Symbol("x3"), Symbol("x4"), Symbol("x5")});
  CHECK(a.x1_levels == std::vector<std::vector<Symbol>>{{Symbol("x1"), Symbol("x2")}});

  auto motor = fixtures::load("motor");
  auto m = verify_adapted_coordinates(motor, flatness::check_theorem1(motor, cfg), cfg);
  REQUIRE(m.ok);
  CHECK(m.x3_levels == std::vector<std::vector<Symbol>>{{Symbol("I_d"), Symbol("I_q")}});
  CHECK(m.x2_top == std::vector<Symbol>{Symbol("omega"), Symbol("psi_d"), Symbol("rho")});
  CHECK(m.x1_levels == std::vector<std::vector<Symbol>>{{Symbol("theta")}});

  CoordChange mix(ex1.states);
  mix.push(Symbol("y1"), X("x1") + X("x8"), Symbol("x1"), cfg);
  auto mixed = pushforward(ex1, mix, cfg);
  auto r = flatness::check_theorem1(mixed, cfg);
  REQUIRE(r.passed());
  auto bad = verify_adapted_coordinates(mixed, r, cfg);
  CHECK_FALSE(bad.ok);
  CHECK(bad.diagnostic == "D_1 is not spanned by coordinate fields");
  try {
    run_pipeline(mixed, r, cfg);
    FAIL("pipeline accepted non-adapted coordinates");
  } catch (const PipelineError& e) {
    CHECK(e.step() == "step 1");
    CHECK(std::string(e.what()).find("D_1 is not spanned") != std::string::npos);
  }
  // Undoing the mixing as a step-1 change restores the pipeline.
  CoordChange undo(mixed.states);
  undo.push(Symbol("x1"), X("y1") - X("x8"), Symbol("y1"), cfg);
  auto res = run_pipeline(mixed, r, cfg, undo);
  check_form(res.form);
  check_form(res.conjugation);
}

TEST_CASE("pipeline on Example 1") {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("example1");
  auto res = run_pipeline(sys, flatness::check_theorem1(sys, cfg), cfg);
  const auto& s = res.system;
  CHECK(res.pattern.str() == "n11=1 n12=1 n2=4 n3=1");
  CHECK(is_zero(rhs_drift(s, "x2_1") - X("x32_1"), cfg));
  CHECK(is_zero(rhs_drift(s, "x2_2") - X("x2_3") * X("x32_1"), cfg));
  CHECK(is_zero(rhs_drift(s, "x2_3") - X("x2_4") * X("x32_1") + X("x11_1"), cfg));
  CHECK(is_zero(rhs_drift(s, "x2_4") - X("x31_1"), cfg));
  check_form(res.form);
  check_form(res.conjugation);

  // Step 4 introduces x32_1 in place of x8, Step 5 ends with x31_1 in place of x7.
  const auto& steps = res.change.steps();
  auto replaced = [&](const char* fresh) {
    for (const auto& st : steps) {
      if (st.fresh == Symbol(fresh)) return st.replaced.name();
    }
    return std::string();
  };
  CHECK(replaced("x32_1") == "x8");
  CHECK(replaced("x31_1") == "x7");
  CHECK(replaced("x2_4") == "x6");

  // The composite change maps the input onto the output.
  auto direct = apply_feedback(pushforward(sys, res.change, cfg), res.feedback, cfg);
  CHECK(same_system(direct, s, cfg));

  // Every transcript entry re-loads.
  auto text = format_transcript(res.transcript);
  std::size_t docs = 0, start = 0;
  while (start < text.size()) {
    std::size_t end = text.find("---\n", start);
    if (end == std::string::npos) end = text.size();
    auto loaded = cli::parse_system(text.substr(start, end - start), "step");
    CHECK(loaded.system.n() == 8);
    ++docs;
    start = end + 4;
  }
  CHECK(docs == res.transcript.size());
  auto last = cli::parse_system(text.substr(text.rfind("---\n") + 4), "final").system;
  CHECK(same_system(last, s, cfg));
}

TEST_CASE("pipeline on the motor") {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("motor");
  auto res = run_pipeline(sys, flatness::check_theorem1(sys, cfg), cfg);
  const auto& s = res.system;
  CHECK(res.flat.phi1 == X("theta"));
  CHECK(res.flat.phi2 == X("rho"));
  CHECK(is_zero(rhs_drift(s, "x11_1") - X("x2_1"), cfg));
  CHECK(is_zero(rhs_drift(s, "x2_1") - X("x32_1"), cfg));
  CHECK(is_zero(rhs_drift(s, "x2_2") - (X("x2_3") * X("x32_1") + X("n_p") * X("x2_1") + X("tau_L") / X("J") * X("x2_3")),
                cfg));
  CHECK(is_zero(rhs_drift(s, "x2_3") - X("x31_1"), cfg));
  check_form(res.form);
  check_form(res.conjugation);
}

TEST_CASE("pipeline on systems already in triangular form") {
  ZeroTestConfig cfg;
  const fixtures::TriangularShape shapes[] = {{1, 1, 3, 1}, {2, 1, 4, 0}, {0, 0, 4, 1}, {1, 0, 3, 2}};
  std::uint64_t seed = 21;
  for (const auto& sh : shapes) {
    auto t = fixtures::triangular(sh, seed++);
    INFO("shape " << sh.n11 << "," << sh.n12 << "," << sh.n2 << "," << sh.n3);
    auto res = run_pipeline(t.sys, flatness::check_theorem1(t.sys, cfg), cfg);
    check_form(res.form);
    check_form(res.conjugation);
    CHECK(res.system.states == t.sys.states);
    CHECK(same_system(res.system, t.sys, cfg));
  }
}

TEST_CASE("pipeline after a random triangular change") {
  ZeroTestConfig cfg;
  auto t = fixtures::triangular({1, 1, 3, 1}, 3);
  CoordChange phi = fixtures::random_triangular_change(t.sys, 7, cfg);
  auto scrambled = pushforward(t.sys, phi, cfg);
  auto r = flatness::check_theorem1(scrambled, cfg);
  REQUIRE(r.passed());
  // The scrambled coordinates are not adapted; the inverse change is a valid step 1.
  CHECK_FALSE(verify_adapted_coordinates(scrambled, r, cfg).ok);
  auto res = run_pipeline(scrambled, r, cfg, phi.inverted());
  check_form(res.form);
  check_form(res.conjugation);
}

TEST_CASE("chained form procedure") {
  ZeroTestConfig cfg;
  SUBCASE("scrambled chained form, n = 4") {
    auto sys = fixtures::chained(4);
    CoordChange scramble(sys.states);
    scramble.push(Symbol("xb"), X("x1") + symx::power(X("x2"), 3), Symbol("x1"), cfg);
    auto s = pushforward(sys, scramble, cfg);
    auto res = appendix_chained_transform(s, X("xb") - symx::power(X("x2"), 3), X("x2"), cfg);
    check_form(res.form);
    check_form(res.conjugation);
    CHECK(res.pattern.str() == "n11=0 n12=0 n2=4 n3=0");
    auto want = fixtures::chained(4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(is_zero(res.system.b1[i] - want.b1[i], cfg));
      CHECK(is_zero(symx::substitute(res.system.b2[i], {{Symbol("x2_1"), X("x1")}, {Symbol("x2_2"), X("x2")},
                                                        {Symbol("x2_3"), X("x3")}, {Symbol("x2_4"), X("x4")}}) -
                        want.b2[i],
                    cfg));
    }
  }
  SUBCASE("already chained") {
    auto res = appendix_chained_transform(fixtures::chained(5), X("x1"), X("x2"), cfg);
    check_form(res.form);
    for (const auto& st : res.change.steps()) {
      INFO(st.str());
      CHECK(st.definition.is_variable());
    }
  }
  SUBCASE("extended chained form, scrambled") {
    auto sys = fixtures::load("extchained5");
    CoordChange scramble(sys.states);
    scramble.push(Symbol("xb"), X("x1") + symx::power(X("x2"), 3), Symbol("x1"), cfg);
    auto s = pushforward(sys, scramble, cfg);
    auto res = appendix_chained_transform(s, X("xb") - symx::power(X("x2"), 3), X("x2"), cfg);
    check_form(res.form);
    check_form(res.conjugation);
    CHECK(is_zero(rhs_drift(res.system, "x2_2") - X("x2_1") * X("x2_3"), cfg));
    for (const char* v : {"x2_1", "x2_3", "x2_4", "x2_5"}) CHECK(is_zero(rhs_drift(res.system, v), cfg));
  }
  SUBCASE("a pair violating L in D^(n-3) is rejected") {
    CHECK_THROWS_AS(appendix_chained_transform(fixtures::chained(5), X("x1"), X("x3"), cfg), PipelineError);
  }
  SUBCASE("non-chained systems are rejected") {
    auto sys = fixtures::chained(4);
    sys.b1 = geom::VectorField::coordinate(4, 2);
    CHECK_THROWS_AS(appendix_chained_transform(sys, X("x1"), X("x2"), cfg), PipelineError);
  }
}
