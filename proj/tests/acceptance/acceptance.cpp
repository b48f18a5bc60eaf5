// Acceptance criteria 1-11; one PASS/FAIL line each, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "flattri/cli/commands.hpp"
#include "flattri/flatness/checks.hpp"
#include "flattri/flatness/flat_output.hpp"
#include "flattri/transform/pipeline.hpp"

using namespace flattri;
using flatness::AffineSystem;
using flatness::StructureReport;
using fixtures::X;
using geom::Codistribution;
using geom::Coordinates;
using geom::Distribution;
using geom::OneForm;
using geom::VectorField;
using symx::Expr;
using symx::Symbol;
using symx::ZeroTestConfig;

namespace {

// Collects failed expectations of one criterion.
struct Ledger {
  std::vector<std::string> failures;
  std::size_t checks = 0;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
  template <class T>
  void equal(const T& got, const T& want, const std::string& what) {
    std::ostringstream os;
    os << what << ": got " << show(got) << ", expected " << show(want);
    expect(got == want, os.str());
  }

  static std::string show(std::size_t v) { return std::to_string(v); }
  static std::string show(int v) { return std::to_string(v); }
  static std::string show(const std::string& v) { return v; }
  static std::string show(const std::vector<std::size_t>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + "]";
  }
};

using Sizes = std::vector<std::size_t>;

Codistribution coordinate_forms(const Coordinates& coords, std::initializer_list<const char*> names,
                                const ZeroTestConfig& cfg) {
  std::vector<OneForm> forms;
  for (const char* n : names) {
    for (std::size_t k = 0; k < coords.size(); ++k) {
      if (coords[k].name() == n) forms.push_back(OneForm::coordinate(coords.size(), k));
    }
  }
  return Codistribution(coords, forms, cfg);
}

Expr row(const AffineSystem& s, const char* state) { return s.drift[s.index_of(Symbol(state))]; }

Distribution input_distribution(const AffineSystem& s, const ZeroTestConfig& cfg) {
  return Distribution(s.states, {s.b1, s.b2}, cfg);
}

// 1
void example1_check(Ledger& l) {
  ZeroTestConfig cfg;
  auto r = flatness::check_theorem1(fixtures::load("example1"), cfg);
  l.equal(std::string(to_string(r.outcome)), std::string("pass"), "outcome");
  l.equal(r.n3, std::size_t{1}, "n3");
  l.expect(r.D_dims.size() >= 2 && r.D_dims[1] == 4, "dim D_2 = 4");
  l.equal(r.derived_trace, Sizes{4, 5, 6}, "derived flag trace");
  l.equal(r.n2, std::size_t{4}, "n2");
  l.equal(r.s, std::size_t{1}, "s");
  l.expect(r.G.size() == 2 && r.G[1].is_full() && r.G[1].dim() == 8, "G_1 = T(X), dim 8");
  l.equal(r.case_tag, 1, "case");
}

// 2
void example1_flat_output(Ledger& l) {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("example1");
  auto r = flatness::check_theorem1(sys, cfg);
  auto c = flatness::flat_output(sys, r, cfg);
  l.expect(c.verified && c.phi2.has_value(), "suggested pair verifies");
  if (c.phi2) {
    Codistribution got(sys.states,
                       {OneForm::differential(c.phi1, sys.states), OneForm::differential(*c.phi2, sys.states)}, cfg);
    l.expect(got.equals(coordinate_forms(sys.states, {"x1", "x2"}, cfg), cfg),
             "span{dphi1, dphi2} = span{dx1, dx2}, got phi = (" + symx::to_string(c.phi1) + ", " +
                 symx::to_string(*c.phi2) + ")");
  }
  auto v = flatness::verify_flat_output(sys, r, X("x1"), X("x2"), cfg);
  l.expect(v.verified, "(x1, x2) verifies: " + v.violation());
}

// 3
void example1_transform(Ledger& l) {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("example1");
  auto res = transform::run_pipeline(sys, flatness::check_theorem1(sys, cfg), cfg);
  const auto& t = res.system;
  l.expect(symx::is_zero(row(t, "x2_2") - X("x2_3") * X("x32_1"), cfg), "x2_2' - x2_3 x32_1 = 0");
  l.expect(symx::is_zero(row(t, "x2_3") - X("x2_4") * X("x32_1") + X("x11_1"), cfg), "x2_3' - x2_4 x32_1 + x11_1 = 0");
  l.expect(res.form.ok, "verify_triangular_form");
  l.expect(res.conjugation.ok, "composite change and feedback reproduce the form");
}

// 4
void motor(Ledger& l) {
  ZeroTestConfig cfg;
  auto sys = fixtures::load("motor");
  auto r = flatness::check_theorem1(sys, cfg);
  l.equal(std::string(to_string(r.outcome)), std::string("pass"), "outcome");
  l.equal(r.n3, std::size_t{1}, "n3");
  l.equal(r.derived_trace, Sizes{4, 5}, "derived flag trace");
  l.equal(r.n2, std::size_t{3}, "n2");
  l.expect(r.c11.verdict == flatness::Verdict::pass, "coupling condition holds");
  l.equal(r.c11_dim, std::size_t{6}, "dim(closure + [a, D_2])");
  l.equal(r.s, std::size_t{1}, "s");
  l.equal(r.case_tag, 3, "case");

  auto c = flatness::flat_output(sys, r, cfg);
  l.expect(c.verified && c.phi1 == X("theta") && c.phi2 && *c.phi2 == X("rho"), "flat output (theta, rho)");
  l.expect(c.L_perp.equals(coordinate_forms(sys.states, {"theta", "omega", "rho"}, cfg), cfg),
           "L_perp = span{dtheta, domega, drho}, got " + c.L_perp.str());

  auto res = transform::run_pipeline(sys, r, cfg);
  const auto& t = res.system;
  const Expr np = X("n_p"), tl = X("tau_L"), J = X("J");
  const std::vector<std::pair<const char*, Expr>> form9 = {
      {"x11_1", X("x2_1")},
      {"x2_1", X("x32_1")},
      {"x2_2", X("x2_3") * X("x32_1") + np * X("x2_1") + tl / J * X("x2_3")},
      {"x2_3", X("x31_1")},
      {"x31_1", Expr()},
      {"x32_1", Expr()}};
  l.equal(t.n(), std::size_t{6}, "states");
  for (const auto& [state, want] : form9) {
    if (std::find(t.states.begin(), t.states.end(), Symbol(state)) == t.states.end()) {
      l.expect(false, std::string("missing state ") + state);
      continue;
    }
    l.expect(symx::is_zero(row(t, state) - want, cfg),
             std::string(state) + "' = " + symx::to_string(want) + ", got " + symx::to_string(row(t, state)));
  }
  l.expect(t.b1 == VectorField::coordinate(6, t.index_of(Symbol("x31_1"))), "b1 = d/dx31_1");
  l.expect(t.b2 == VectorField::coordinate(6, t.index_of(Symbol("x32_1"))), "b2 = d/dx32_1");
  l.expect(res.form.ok && res.conjugation.ok, "form and composite checks");
}

// 5
void chained_ladder(Ledger& l) {
  ZeroTestConfig cfg;
  for (std::size_t n = 4; n <= 8; ++n) {
    auto sys = fixtures::chained(n);
    Distribution d = input_distribution(sys, cfg), derived = d, lie = d;
    for (std::size_t i = 0; i <= n - 2; ++i) {
      const std::string at = "n=" + std::to_string(n) + " i=" + std::to_string(i);
      l.equal(derived.dim(), 2 + i, "dim D^(i), " + at);
      l.equal(lie.dim(), 2 + i, "dim D_(i), " + at);
      derived = geom::derived_flag_step(derived, cfg);
      lie = geom::lie_flag_step(d, lie, cfg);
    }
  }
}

// 6
void cauchy_inclusion(Ledger& l) {
  ZeroTestConfig cfg;
  std::mt19937_64 rng(606);
  std::size_t nontrivial = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 4 + static_cast<std::size_t>(t % 3);
    Coordinates c;
    for (std::size_t i = 1; i <= n; ++i) c.emplace_back("z" + std::to_string(i));
    oracle::ExprGen gen(rng(), c);
    std::vector<VectorField> gens;
    if (t % 2 == 0) {
      for (int k = 0; k < 2; ++k) {
        fieldla::Vector v;
        for (std::size_t i = 0; i < n; ++i) v.push_back(gen.polynomial(2, 2));
        gens.emplace_back(v);
      }
    } else {
      // Combinations of d/dz1 and d/dz2 give an involutive D with C(D) = D.
      for (int k = 0; k < 2; ++k) {
        fieldla::Vector v(n, Expr());
        v[0] = gen.polynomial(2, 2);
        v[1] = gen.polynomial(2, 2);
        gens.emplace_back(v);
      }
    }
    Distribution d(c, gens, cfg);
    Distribution cd = geom::cauchy_characteristics(d, cfg);
    Distribution cd1 = geom::cauchy_characteristics(geom::derived_flag_step(d, cfg), cfg);
    if (cd.dim() > 0) ++nontrivial;
    bool in = true;
    for (const auto& v : cd.basis()) in = in && cd1.contains(v, cfg);
    l.expect(in, "C(D) in C(D^(1)), trial " + std::to_string(t));
  }
  l.expect(nontrivial >= 20, "at least 20 trials with nontrivial C(D), got " + std::to_string(nontrivial));
}

// 7
void chained_cauchy(Ledger& l) {
  ZeroTestConfig cfg;
  for (std::size_t n : {5u, 6u, 7u}) {
    auto sys = fixtures::chained(n);
    Distribution prev = input_distribution(sys, cfg);
    for (std::size_t i = 1; i + 4 <= n; ++i) {
      Distribution di = geom::derived_flag_step(prev, cfg);
      Distribution ci = geom::cauchy_characteristics(di, cfg);
      const std::string at = "n=" + std::to_string(n) + " i=" + std::to_string(i);
      l.equal(ci.dim(), i, "dim C(D^(i)), " + at);
      l.expect(prev.contains(ci, cfg), "C(D^(i)) in D^(i-1), " + at);
      prev = di;
    }
  }
}

// Every verdict, dimension and index of the report.
std::string fingerprint(const StructureReport& r) {
  std::ostringstream os;
  auto v = [&](const flatness::ItemResult& it) { os << to_string(it.verdict) << ' '; };
  os << to_string(r.outcome) << " | ";
  v(r.a), v(r.b), v(r.c10), v(r.c11), v(r.d), v(r.e);
  for (const auto& it : r.c10_per_i) v(it);
  os << "| n3 " << r.n3 << " D " << Ledger::show(r.D_dims) << " trace " << Ledger::show(r.derived_trace) << " n2 "
     << r.n2 << " c11 " << r.c11_dim << " G " << Ledger::show(r.G_dims) << " s " << r.s << " n1 " << r.n1 << " ("
     << r.n11 << ", " << r.n12 << ") case " << r.case_tag;
  return os.str();
}

// 8
void invariance(Ledger& l) {
  ZeroTestConfig cfg;
  for (const char* name : {"example1", "motor"}) {
    auto sys = fixtures::load(name);
    const std::string want = fingerprint(flatness::check_theorem1(sys, cfg));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto fb = fixtures::random_feedback(sys, seed);
      auto got = fingerprint(flatness::check_theorem1(transform::apply_feedback(sys, fb, cfg), cfg));
      l.expect(got == want, std::string(name) + " feedback seed " + std::to_string(seed) + ": " + got);
      auto phi = fixtures::random_triangular_change(sys, seed, cfg);
      got = fingerprint(flatness::check_theorem1(transform::pushforward(sys, phi, cfg), cfg));
      l.expect(got == want, std::string(name) + " change seed " + std::to_string(seed) + ": " + got);
    }
  }
}

// 9
void necessity(Ledger& l) {
  ZeroTestConfig cfg;
  std::mt19937_64 rng(909);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  for (int t = 0; t < 10; ++t) {
    fixtures::TriangularShape sh{pick(0, 2), pick(0, 2), pick(3, 5), pick(0, 2)};
    auto tri = fixtures::triangular(sh, rng());
    auto r = flatness::check_theorem1(tri.sys, cfg);
    std::ostringstream at;
    at << "shape (" << sh.n11 << ", " << sh.n12 << ", " << sh.n2 << ", " << sh.n3 << ")";
    l.equal(std::string(to_string(r.outcome)), std::string("pass"), at.str() + " outcome");
    l.equal(r.n2, sh.n2, at.str() + " n2");
    l.equal(r.n3, sh.n3, at.str() + " n3");
    l.equal(r.n1, sh.n11 + sh.n12, at.str() + " n1");
    if (r.n1 > 0 && !r.degenerate) {
      l.equal(r.n11, std::max(sh.n11, sh.n12), at.str() + " n11");
      l.equal(r.n12, std::min(sh.n11, sh.n12), at.str() + " n12");
    }
  }
}

// 10
void finite_differences(Ledger& l) {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> unit(0.5, 1.5);
  const double h = 1e-5;
  for (const char* name : {"example1", "motor", "extchained5"}) {
    auto sys = fixtures::load(name);
    const auto& c = sys.states;
    const VectorField fields[] = {sys.drift, sys.b1, sys.b2};
    oracle::ExprGen gen(rng(), c);
    const Expr probe = gen.polynomial(2, 4) + symx::sin(Expr(c[0]));
    for (int k = 0; k < 10; ++k) {
      oracle::DoublePoint p;
      for (Symbol s : c) p[s.name()] = unit(rng);
      for (Symbol s : sys.params) p[s.name()] = unit(rng);
      for (std::size_t a = 0; a < 3; ++a) {
        const VectorField& v = fields[a];
        double est = 0;
        for (std::size_t j = 0; j < c.size(); ++j) {
          est += oracle::eval_double(v[j], p) * oracle::central_difference(probe, p, c[j].name(), h);
        }
        l.expect(oracle::close(oracle::eval_double(geom::lie_derivative(probe, v, c), p), est, 1e-5),
                 std::string(name) + " lie_derivative");
        for (std::size_t b = a + 1; b < 3; ++b) {
          const VectorField& w = fields[b];
          VectorField br = geom::lie_bracket(v, w, c);
          for (std::size_t i = 0; i < c.size(); ++i) {
            double e = 0;
            for (std::size_t j = 0; j < c.size(); ++j) {
              e += oracle::eval_double(v[j], p) * oracle::central_difference(w[i], p, c[j].name(), h);
              e -= oracle::eval_double(w[j], p) * oracle::central_difference(v[i], p, c[j].name(), h);
            }
            l.expect(oracle::close(oracle::eval_double(br[i], p), e, 1e-5), std::string(name) + " lie_bracket");
          }
        }
      }
    }
  }
  std::vector<Symbol> vars{Symbol("u"), Symbol("v")};
  oracle::ExprGen gen(rng(), vars);
  for (int t = 0; t < 40; ++t) {
    Expr e = gen.tree(3, true);
    oracle::DoublePoint p{{"u", unit(rng)}, {"v", unit(rng)}};
    for (Symbol s : vars) {
      const double exact = oracle::eval_double(symx::differentiate(e, s), p);
      const double fd = oracle::central_difference(e, p, s.name(), 1e-6);
      if (!std::isfinite(exact) || !std::isfinite(fd)) continue;
      // Central differences carry O(h^2) truncation plus rounding; compare at 1e-6.
      l.expect(oracle::close(exact, fd, 1e-6), "differentiate " + symx::to_string(e));
    }
  }
}

// 11
void negative_controls(Ledger& l) {
  ZeroTestConfig cfg;
  auto res = cli::run({"check", std::string(FLATTRI_TEST_DATA) + "/brunovsky.sys"});
  l.equal(res.exit_code, 0, "brunovsky exit code");
  l.expect(res.out.find("static feedback linearizable") != std::string::npos &&
               res.out.find("not static feedback linearizable") == std::string::npos,
           "brunovsky reported linearizable");

  auto ex1 = fixtures::load("example1");
  std::mt19937_64 rng(1111);
  oracle::ExprGen gen(rng(), ex1.states);
  transform::CoordChange mix(ex1.states);
  mix.push(Symbol("y1"), X("x1") + gen.small_int(1, 3) * X("x8") + gen.polynomial(2, 2) * X("x7") * X("x7"),
           Symbol("x1"), cfg);
  auto mixed = transform::pushforward(ex1, mix, cfg);
  auto r = flatness::check_theorem1(mixed, cfg);
  l.expect(r.passed(), "mixed Example 1 still passes check");
  auto adapted = transform::verify_adapted_coordinates(mixed, r, cfg);
  l.expect(!adapted.ok && adapted.diagnostic.find("D_1") != std::string::npos,
           "verify_adapted_coordinates names D_1: " + adapted.diagnostic);
  try {
    transform::run_pipeline(mixed, r, cfg);
    l.expect(false, "run_pipeline accepted non-adapted coordinates");
  } catch (const transform::PipelineError& e) {
    l.equal(e.step(), std::string("step 1"), "failing step");
    l.expect(std::string(e.what()).find("D_1 is not spanned by coordinate fields") != std::string::npos,
             std::string("diagnostic: ") + e.what());
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Ledger&)>>> criteria = {
      {"1  Example 1 check", example1_check},
      {"2  Example 1 flat output", example1_flat_output},
      {"3  Example 1 transformation", example1_transform},
      {"4  induction motor", motor},
      {"5  chained form ladders n = 4..8", chained_ladder},
      {"6  C(D) in C(D^(1)) on 50 random distributions", cauchy_inclusion},
      {"7  Cauchy characteristics of chained forms", chained_cauchy},
      {"8  feedback and coordinate invariance", invariance},
      {"9  random triangular systems", necessity},
      {"10 symbolic vs finite differences", finite_differences},
      {"11 negative controls", negative_controls},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Ledger l;
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      fn(l);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = error.empty() && l.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("%s  %-50s %zu checks, %.2fs\n", ok ? "PASS" : "FAIL", name, l.checks, secs);
    if (!error.empty()) std::printf("      exception: %s\n", error.c_str());
    for (std::size_t i = 0; i < l.failures.size() && i < 10; ++i) std::printf("      %s\n", l.failures[i].c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
