#include "flattri/transform/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "flattri/cli/system_file.hpp"
#include "flattri/flatness/checks.hpp"

namespace flattri::transform {

using flatness::check_theorem1;

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

bool has(const std::vector<Symbol>& v, Symbol s) { return std::find(v.begin(), v.end(), s) != v.end(); }

std::string join(const std::vector<Symbol>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].name();
  return s + "}";
}

std::string num(std::size_t k) { return std::to_string(k); }

// Replaces components equal to +-1 or to a single state by that literal.
AffineSystem tidy(const AffineSystem& sys, const ZeroTestConfig& cfg) {
  std::vector<Expr> literals{Expr(1), Expr(-1)};
  for (Symbol s : sys.states) literals.emplace_back(s);
  auto field = [&](const VectorField& v) {
    fieldla::Vector c = v.components;
    for (auto& e : c) {
      if (e.size() <= 3) continue;
      if (Expr x = symx::expand(e); x.size() < e.size()) e = x;
      for (const auto& l : literals) {
        if (symx::is_zero(e - l, cfg)) {
          e = l;
          break;
        }
      }
    }
    return VectorField(std::move(c));
  };
  AffineSystem out = sys;
  out.drift = field(sys.drift);
  out.b1 = field(sys.b1);
  out.b2 = field(sys.b2);
  return out;
}

// The pipeline's working state: the current system, the composite change
// and feedback, and the adapted groups renamed as variables are replaced.
struct Run {
  const ZeroTestConfig& cfg;
  AffineSystem sys;
  CoordChange total;
  Feedback fb;
  AdaptedCoordinates groups;
  std::vector<Symbol> fresh;
  std::vector<Expr*> tracked;
  std::vector<TranscriptEntry> transcript;
  std::vector<std::string> detail;

  std::size_t at(Symbol s) const {
    std::size_t i = sys.index_of(s);
    if (i == npos) throw PipelineError("internal", "'" + s.name() + "' is not a state");
    return i;
  }
  const Expr& drift(Symbol s) const { return sys.drift[at(s)]; }

  void rename_in_groups(Symbol from, Symbol to) {
    auto fix = [&](std::vector<Symbol>& g) { std::replace(g.begin(), g.end(), from, to); };
    for (auto& g : groups.x3_levels) fix(g);
    fix(groups.x2_top);
    for (auto& g : groups.x2_lower) fix(g);
    for (auto& g : groups.x1_levels) fix(g);
  }

  void apply(ElementaryStep es) {
    sys = tidy(apply_step(sys, es, cfg), cfg);
    symx::Bindings back{{es.replaced, es.inverse}};
    fb = fb.substituted(back);
    for (Expr* e : tracked) *e = symx::substitute(*e, back);
    rename_in_groups(es.replaced, es.fresh);
    fresh.push_back(es.fresh);
    detail.push_back(es.str());
    total.push(std::move(es));
  }

  // fresh = def, replacing the highest state of `group` that def depends on
  // and that can be solved for; affine inversions are preferred over roots.
  void introduce(const std::string& step, Symbol name, const Expr& def, const std::vector<Symbol>& group) {
    std::vector<Symbol> candidates;
    for (auto it = sys.states.rbegin(); it != sys.states.rend(); ++it) {
      if (has(group, *it) && !has(fresh, *it) && symx::depends_on(def, *it, cfg)) candidates.push_back(*it);
    }
    for (auto policy : {symx::InversionPolicy::strict, symx::InversionPolicy::principal_root}) {
      for (Symbol v : candidates) {
        Expr inverse;
        try {
          inverse = symx::solve_for(name, def, v, cfg, policy);
        } catch (const NotInvertible&) {
          continue;
        } catch (const CannotDecide&) {
          continue;
        }
        apply(ElementaryStep{name, def, v, inverse});
        return;
      }
    }
    std::vector<Symbol> open;
    for (Symbol s : group) {
      if (!has(fresh, s)) open.push_back(s);
    }
    throw PipelineError(step, "cannot introduce " + name.name() + " = " + symx::to_string(def) +
                                  ": no variable of " + join(open) + " can be solved for");
  }

  void feedback(const Feedback& f) {
    sys = tidy(apply_feedback(sys, f, cfg), cfg);
    fb = fb.then(f);
    detail.push_back(f.str());
  }

  void close(std::string label) {
    transcript.push_back({std::move(label), std::move(detail), sys});
    detail.clear();
  }
};

}  // namespace

std::vector<NamedDistribution> adapted_sequence(const StructureReport& r) {
  std::vector<NamedDistribution> out;
  const std::string top = "D_" + num(r.n3 + 1);
  for (std::size_t k = 0; k < r.n3; ++k) out.push_back({"D_" + num(k + 1), r.D.at(k)});
  for (std::size_t i = 0; i < r.cauchy.size(); ++i) out.push_back({"C(" + top + "^(" + num(i + 1) + "))", r.cauchy[i]});
  out.push_back({"closure of " + top, r.closure()});
  for (std::size_t i = 1; i < r.G.size(); ++i) out.push_back({"G_" + num(i), r.G[i]});
  return out;
}

AdaptedCoordinates verify_adapted_coordinates(const AffineSystem& sys, const StructureReport& report,
                                              const ZeroTestConfig& cfg) {
  if (!report.passed()) throw PreconditionError("adapted coordinates need a passing structure report");
  AdaptedCoordinates a;
  std::vector<std::vector<Symbol>> diffs;
  std::vector<Symbol> prev;
  for (const auto& nd : adapted_sequence(report)) {
    if (nd.distribution.coords() != sys.states) throw PreconditionError("report does not belong to the system");
    if (!geom::is_coordinate_spanned(nd.distribution, cfg)) {
      a.diagnostic = nd.name + " is not spanned by coordinate fields";
      return a;
    }
    std::vector<Symbol> now, diff;
    for (std::size_t k : geom::coordinate_directions(nd.distribution, cfg)) now.push_back(sys.states[k]);
    for (Symbol s : prev) {
      if (!has(now, s)) {
        a.diagnostic = nd.name + " does not contain d/d" + s.name();
        return a;
      }
    }
    for (Symbol s : now) {
      if (!has(prev, s)) diff.push_back(s);
    }
    diffs.push_back(std::move(diff));
    prev = std::move(now);
  }
  if (prev.size() != sys.n()) {
    a.diagnostic = "the sequence does not end at the tangent space";
    return a;
  }
  const std::size_t n3 = report.n3, n2 = report.n2;
  std::size_t k = 0;
  for (; k < n3; ++k) a.x3_levels.push_back(diffs[k]);
  a.x2_lower.resize(n2 - 3);
  for (std::size_t i = 1; i + 3 <= n2; ++i, ++k) a.x2_lower[n2 - i + 1 - 4] = diffs[k];
  a.x2_top = diffs[k++];
  for (; k < diffs.size(); ++k) a.x1_levels.push_back(diffs[k]);
  a.ok = true;
  return a;
}

AffineSystem reorder_states(const AffineSystem& sys, const Coordinates& order) {
  if (order.size() != sys.n()) throw PreconditionError("reorder is not a permutation");
  AffineSystem out = sys;
  out.states = order;
  fieldla::Vector f[3];
  for (Symbol s : order) {
    std::size_t i = sys.index_of(s);
    if (i == npos) throw PreconditionError("'" + s.name() + "' is not a state");
    f[0].push_back(sys.drift[i]);
    f[1].push_back(sys.b1[i]);
    f[2].push_back(sys.b2[i]);
  }
  out.drift = VectorField(std::move(f[0]));
  out.b1 = VectorField(std::move(f[1]));
  out.b2 = VectorField(std::move(f[2]));
  return out;
}

PipelineResult run_pipeline(const AffineSystem& input, const StructureReport& input_report, const ZeroTestConfig& cfg,
                            const std::optional<CoordChange>& step1, const FlatOutputRequest& request) {
  Run run{cfg, input, step1 ? *step1 : CoordChange(input.states), Feedback::identity(), {}, {}, {}, {}, {}};

  // Step 1: verification of adapted coordinates.
  StructureReport report = input_report;
  if (step1) {
    run.sys = pushforward(input, *step1, cfg);
    for (const auto& s : step1->steps()) run.detail.push_back(s.str());
    report = check_theorem1(run.sys, cfg);
  }
  if (!report.passed()) throw PipelineError("step 1", "structure conditions do not hold");
  run.groups = verify_adapted_coordinates(run.sys, report, cfg);
  if (!run.groups.ok) throw PipelineError("step 1", run.groups.diagnostic);
  run.detail.push_back("adapted coordinates verified");
  run.close("step 1: adapted coordinates");

  PipelineResult out;
  out.flat = flatness::flat_output(run.sys, report, cfg, request);
  if (!out.flat.verified) throw PipelineError("step 3", "flat output rejected: " + out.flat.violation());
  Expr phi[2] = {out.flat.phi1, *out.flat.phi2};
  run.tracked = {&phi[0], &phi[1]};
  const std::size_t len[2] = {out.flat.len1, out.flat.len2};
  const std::size_t n2 = report.n2, n3 = report.n3;
  if (len[0] + len[1] + n2 + 2 * n3 != run.sys.n()) throw PipelineError("step 2", "chain lengths do not add up");
  out.pattern = TriangularPattern::canonical(len[0], len[1], n2, n3);
  const auto& P = out.pattern;

  // Step 0 bookkeeping: free the normal form names.
  const Coordinates canon = P.states();
  for (Symbol p : run.sys.params) {
    if (has(canon, p)) throw PipelineError("step 0", "parameter '" + p.name() + "' clashes with a state name");
  }
  for (Symbol s : Coordinates(run.sys.states)) {
    if (!has(canon, s)) continue;
    std::string name = s.name() + "_o";
    while (has(canon, Symbol(name)) || has(run.sys.states, Symbol(name)) || has(run.sys.params, Symbol(name))) name += "_o";
    Symbol renamed(name);
    run.apply(ElementaryStep{renamed, Expr(s), s, Expr(renamed)});
  }
  run.fresh.clear();
  if (!run.detail.empty()) run.close("rename clashing states");

  // Step 2: x1 chains, top to bottom.
  const std::vector<Symbol>* x1[2] = {&P.x11, &P.x12};
  for (int j = 0; j < 2; ++j) {
    for (std::size_t k = 1; k <= len[j]; ++k) {
      Expr def = k == 1 ? phi[j] : run.drift((*x1[j])[k - 2]);
      run.introduce("step 2", (*x1[j])[k - 1], def, run.groups.x1_levels.at(len[j] - k));
    }
  }
  run.close("step 2: x1 subsystem");

  // Step 3: top variables of the x2 block.
  for (int j = 0; j < 2; ++j) {
    Expr def = len[j] ? run.drift(x1[j]->back()) : phi[j];
    run.introduce("step 3", P.x2[j], def, run.groups.x2_top);
  }
  run.close("step 3: top variables of the x2 block");

  auto input_row = [&](Symbol s) {
    std::size_t i = run.at(s);
    return std::array<Expr, 3>{run.sys.drift[i], run.sys.b1[i], run.sys.b2[i]};
  };

  // Step 4: x2^1' = x32^1 (or ubar2).
  if (n3 > 0) {
    run.introduce("step 4", P.x32[0], run.drift(P.x2[0]), run.groups.x3_levels[n3 - 1]);
  } else {
    auto [a, b1, b2] = input_row(P.x2[0]);
    Feedback f;
    f.g = {Expr(), a};
    const bool via_u2 = !symx::is_zero(b2, cfg);
    if (!via_u2 && symx::is_zero(b1, cfg)) throw PipelineError("step 4", P.x2[0].name() + "' does not contain an input");
    f.M = {{{via_u2 ? Expr(1) : Expr(), via_u2 ? Expr() : Expr(1)}, {b1, b2}}};
    run.feedback(f);
  }
  run.close("step 4: normalize the first x2 equation");

  // Step 5: the coefficients of x32^1 become states, top to bottom.
  for (std::size_t k = 2; k + 1 <= n2; ++k) {
    const Symbol xk = P.x2[k - 1];
    const std::string eq = xk.name() + "'";
    Expr b;
    if (n3 > 0) {
      const Symbol w = P.x32[0];
      const Expr r = run.drift(xk);
      for (const auto& level : run.groups.x3_levels) {
        for (Symbol v : level) {
          if (v != w && symx::depends_on(r, v, cfg)) throw PipelineError("step 5", eq + " depends on " + v.name());
        }
      }
      b = symx::settle(symx::differentiate(r, w), cfg);
      if (symx::depends_on(b, w, cfg)) throw PipelineError("step 5", eq + " is not affine in " + w.name());
    } else {
      auto [a, b1, b2] = input_row(xk);
      if (!symx::is_zero(b1, cfg)) throw PipelineError("step 5", eq + " contains the first input");
      b = b2;
    }
    for (std::size_t m = k + 2; m <= n2; ++m) {
      for (Symbol v : run.groups.x2_lower[m - 4]) {
        if (symx::depends_on(b, v, cfg)) {
          throw PipelineError("step 5", "b2^" + num(k) + " = " + symx::to_string(b) + " depends on " + v.name() +
                                            " (x2 position " + num(m) + ")");
        }
      }
    }
    const auto& group = k + 1 == 3 ? run.groups.x2_top : run.groups.x2_lower[k + 1 - 4];
    run.introduce("step 5", P.x2[k], b, group);
  }
  if (n3 > 0) {
    run.introduce("step 5", P.x31[0], run.drift(P.x2[n2 - 1]), run.groups.x3_levels[n3 - 1]);
  } else {
    auto [a, b1, b2] = input_row(P.x2[n2 - 1]);
    if (symx::is_zero(b1, cfg)) throw PipelineError("step 5", P.x2[n2 - 1].name() + "' does not contain the first input");
    Feedback f;
    f.g = {a, Expr()};
    f.M = {{{b1, b2}, {Expr(), Expr(1)}}};
    run.feedback(f);
  }
  run.close("step 5: x2 block in extended chained form");

  // Step 6: x3 chains and the final feedback.
  if (n3 > 0) {
    for (std::size_t k = 2; k <= n3; ++k) {
      const auto& group = run.groups.x3_levels[n3 - k];
      run.introduce("step 6", P.x32[k - 1], run.drift(P.x32[k - 2]), group);
      run.introduce("step 6", P.x31[k - 1], run.drift(P.x31[k - 2]), group);
    }
    auto [ai, b1i, b2i] = input_row(P.x31.back());
    auto [ak, b1k, b2k] = input_row(P.x32.back());
    Feedback f;
    f.g = {ai, ak};
    f.M = {{{b1i, b2i}, {b1k, b2k}}};
    if (!f.invertible(cfg)) throw PipelineError("step 6", "the x3 chains do not end in independent inputs");
    run.feedback(f);
    run.close("step 6: x3 subsystem");
  }

  for (Symbol s : run.sys.states) {
    if (!has(canon, s)) throw PipelineError("finish", "state '" + s.name() + "' was never replaced");
  }
  out.system = reorder_states(run.sys, canon);
  run.total.reorder(canon);
  out.change = run.total;
  out.feedback = run.fb;
  out.transcript = std::move(run.transcript);
  out.transcript.push_back({"triangular form " + P.str(), {}, out.system});
  out.form = verify_triangular_form(out.system, P, cfg);
  out.conjugation = verify_triangular_form(apply_feedback(pushforward(input, out.change, cfg), out.feedback, cfg), P, cfg);
  return out;
}

PipelineResult appendix_chained_transform(const AffineSystem& sys, const Expr& phi1, const Expr& phi2,
                                          const ZeroTestConfig& cfg) {
  bool driftless = true;
  for (const auto& e : sys.drift.components) driftless = driftless && symx::is_zero(e, cfg);
  if (driftless) {
    AffineSystem stripped = sys;
    stripped.drift = VectorField::zero(sys.n());
    if (!flatness::check_chained(stripped, cfg).ok()) throw PipelineError("chained form", "the chained form conditions fail");
  } else if (!flatness::check_extended_chained(sys, cfg).ok()) {
    throw PipelineError("chained form", "the extended chained form conditions fail");
  }
  StructureReport report = check_theorem1(sys, cfg);
  if (!report.passed() || report.n3 != 0 || !report.degenerate) {
    throw PipelineError("chained form", "the system is not in the chained family");
  }
  FlatOutputRequest req;
  req.phi1 = phi1;
  req.phi2 = phi2;
  PipelineResult out = run_pipeline(sys, report, cfg, std::nullopt, req);
  if (driftless) {
    for (std::size_t i = 0; i < out.system.n(); ++i) {
      if (!symx::is_zero(out.system.drift[i], cfg)) {
        out.form.ok = false;
        out.form.diagnostics.push_back("drift in " + out.system.states[i].name() + "' is not zero");
      }
    }
  }
  return out;
}

std::string format_transcript(const std::vector<TranscriptEntry>& transcript) {
  std::ostringstream os;
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    if (i) os << "---\n";
    os << "# " << transcript[i].label << '\n';
    for (const auto& d : transcript[i].detail) os << "#   " << d << '\n';
    os << cli::format_system(transcript[i].system);
  }
  return os.str();
}

}  // namespace flattri::transform
