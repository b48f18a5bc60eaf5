#include "flattri/flatness/flat_output.hpp"

namespace flattri::flatness {

using geom::OneForm;

namespace {

struct Ctx {
  const AffineSystem& sys;
  const StructureReport& report;
  const ZeroTestConfig& cfg;

  OneForm d(const Expr& f) const { return OneForm::differential(f, sys.states); }
  Expr La(const Expr& f, int k) const { return geom::lie_derivative(f, sys.drift, sys.states, k); }
  Codistribution span(const std::vector<OneForm>& forms) const { return Codistribution(sys.states, forms, cfg); }
  /// dL_a^m f for m = 0..top.
  std::vector<OneForm> ladder(const Expr& f, std::size_t top) const {
    std::vector<OneForm> out;
    for (std::size_t m = 0; m <= top; ++m) out.push_back(d(La(f, static_cast<int>(m))));
    return out;
  }
  const Distribution& top() const { return report.top_derived(); }
  const Distribution& top_cauchy() const {
    return report.n2 == 3 ? report.D_n3 : report.cauchy.at(report.n2 - 4);
  }
};

std::vector<Expr> heuristic_pool(const AffineSystem& sys, const std::vector<Expr>& extra) {
  std::vector<Expr> pool;
  for (Symbol s : sys.states) pool.emplace_back(s);
  pool.insert(pool.end(), extra.begin(), extra.end());
  const auto& x = sys.states;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) pool.push_back(Expr(x[i]) + Expr(x[j]));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) pool.push_back(Expr(x[i]) * Expr(x[j]));
  }
  for (Symbol s : x) pool.push_back(symx::power(Expr(s), 2));
  return pool;
}

void add(FlatOutputCandidate& c, std::string name, bool ok, std::string detail = {}) {
  c.conditions.push_back({std::move(name), ok, std::move(detail)});
}

bool independent(const Ctx& x, const std::vector<OneForm>& forms) { return x.span(forms).dim() == forms.size(); }

void check_L_membership(const Ctx& x, FlatOutputCandidate& c) {
  Distribution L = geom::annihilator(c.L_perp, x.cfg);
  add(c, "L subset D^(n2-3)", x.top().contains(L, x.cfg), "dim L = " + std::to_string(L.dim()));
}

void verify_case1(const Ctx& x, FlatOutputCandidate& c) {
  const std::size_t len[2] = {c.len1, c.len2};
  const Expr* phi[2] = {&c.phi1, &*c.phi2};
  for (std::size_t k = 1; k <= x.report.s; ++k) {
    std::vector<OneForm> forms;
    for (int j = 0; j < 2; ++j) {
      if (len[j] < k) continue;
      auto l = x.ladder(*phi[j], len[j] - k);
      forms.insert(forms.end(), l.begin(), l.end());
    }
    Codistribution target = geom::annihilator(x.report.G.at(k - 1), x.cfg);
    add(c, "span{dL_a^m phi} = G_" + std::to_string(k - 1) + "^perp", x.span(forms).equals(target, x.cfg),
        target.str());
  }
  std::vector<OneForm> all = x.ladder(c.phi1, c.len1);
  auto l2 = x.ladder(*c.phi2, c.len2);
  all.insert(all.end(), l2.begin(), l2.end());
  c.L_perp = x.span(all);
  check_L_membership(x, c);
}

void verify_case2(const Ctx& x, FlatOutputCandidate& c) {
  OneForm d1 = x.d(c.phi1);
  bool ann = true;
  for (const auto& v : x.top_cauchy().basis()) ann = ann && symx::is_zero(geom::pairing(d1, v), x.cfg);
  add(c, "dphi1 annihilates C(D^(n2-3))", ann);
  Codistribution recipe = geom::annihilator(x.top(), x.cfg).plus({d1}, x.cfg);
  c.L_perp = x.span({d1, x.d(*c.phi2)});
  add(c, "span{dphi1, dphi2} = (D^(n2-3))^perp + span{dphi1}", c.L_perp.equals(recipe, x.cfg), recipe.str());
  check_L_membership(x, c);
}

void verify_case3(const Ctx& x, FlatOutputCandidate& c) {
  const std::size_t s = x.report.s;
  Codistribution g = geom::annihilator(x.report.G.at(s - 1), x.cfg);
  add(c, "span{dphi1} = G_" + std::to_string(s - 1) + "^perp", x.span({x.d(c.phi1)}).equals(g, x.cfg), g.str());
  std::vector<OneForm> forms = x.ladder(c.phi1, s);
  forms.push_back(x.d(*c.phi2));
  add(c, "dphi2 independent of dL_a^m phi1, m = 0..s", independent(x, forms));
  Codistribution recipe =
      geom::annihilator(x.top(), x.cfg).plus({x.d(x.La(c.phi1, static_cast<int>(s)))}, x.cfg);
  c.L_perp = recipe;
  add(c, "span{dL_a^m phi1, dphi2} = (D^(n2-3))^perp + span{dL_a^s phi1}", x.span(forms).equals(recipe, x.cfg),
      recipe.str());
  check_L_membership(x, c);
}

FlatOutputCandidate verify_pair(const Ctx& x, const Expr& phi1, const Expr& phi2, std::size_t len1,
                                std::size_t len2) {
  FlatOutputCandidate c;
  c.phi1 = phi1;
  c.phi2 = phi2;
  c.case_tag = x.report.case_tag;
  c.len1 = len1;
  c.len2 = len2;
  add(c, "dphi1 ^ dphi2 != 0", independent(x, {x.d(phi1), x.d(phi2)}));
  switch (c.case_tag) {
    case 1: verify_case1(x, c); break;
    case 2: verify_case2(x, c); break;
    default: verify_case3(x, c); break;
  }
  c.verified = c.violation().empty();
  return c;
}

void require_pass(const StructureReport& report) {
  if (!report.passed() || report.case_tag == 0) {
    throw PreconditionError("flat outputs require a passing structure report");
  }
}

// Finds functions from `pool` whose differentials lie in `target` and extend
// `current`, until `current` reaches `want` dimensions.
std::vector<Expr> integrate(const Ctx& x, const Codistribution& target, Codistribution current, std::size_t want,
                            const std::vector<Expr>& pool) {
  std::vector<Expr> found;
  for (const auto& f : pool) {
    if (current.dim() >= want) break;
    OneForm df = x.d(f);
    if (!target.contains(df, x.cfg) || current.contains(df, x.cfg)) continue;
    current = current.plus({df}, x.cfg);
    found.push_back(f);
  }
  if (current.dim() < want) throw IntegrationFailed("heuristic integration failed - supply candidates");
  return found;
}

std::vector<Expr> with_fixed(const std::optional<Expr>& a, const std::optional<Expr>& b, std::vector<Expr> pool) {
  std::vector<Expr> out;
  if (a) out.push_back(*a);
  if (b) out.push_back(*b);
  out.insert(out.end(), pool.begin(), pool.end());
  return out;
}

FlatOutputCandidate suggest_case1(const Ctx& x, const FlatOutputRequest& req, const std::vector<Expr>& pool) {
  std::vector<std::pair<Expr, std::size_t>> chosen;
  const auto full = with_fixed(req.phi1, req.phi2, pool);
  for (std::size_t k = x.report.s; k >= 1; --k) {
    std::vector<OneForm> forms;
    for (const auto& [y, len] : chosen) {
      auto l = x.ladder(y, len - k);
      forms.insert(forms.end(), l.begin(), l.end());
    }
    Codistribution target = geom::annihilator(x.report.G.at(k - 1), x.cfg);
    for (auto& f : integrate(x, target, x.span(forms), target.dim(), full)) chosen.emplace_back(f, k);
  }
  if (chosen.size() != 2) throw IntegrationFailed("expected two chains in the x1 block");
  return verify_pair(x, chosen[0].first, chosen[1].first, chosen[0].second, chosen[1].second);
}

FlatOutputCandidate suggest_case2(const Ctx& x, const FlatOutputRequest& req, const std::vector<Expr>& pool) {
  const Distribution& cauchy = x.top_cauchy();
  const Codistribution dperp = geom::annihilator(x.top(), x.cfg);
  const std::vector<Expr> firsts = req.phi1 ? std::vector<Expr>{*req.phi1} : pool;
  for (const auto& f1 : firsts) {
    OneForm d1 = x.d(f1);
    bool ann = true;
    for (const auto& v : cauchy.basis()) ann = ann && symx::is_zero(geom::pairing(d1, v), x.cfg);
    if (!ann) continue;
    Codistribution lp = dperp.plus({d1}, x.cfg);
    if (lp.dim() != 2 || !geom::is_involutive(geom::annihilator(lp, x.cfg), x.cfg)) continue;
    try {
      auto f2 = integrate(x, lp, x.span({d1}), 2, req.phi2 ? std::vector<Expr>{*req.phi2} : pool);
      return verify_pair(x, f1, f2.at(0), 0, 0);
    } catch (const IntegrationFailed&) {
    }
  }
  throw IntegrationFailed("heuristic integration failed - supply candidates");
}

FlatOutputCandidate suggest_case3(const Ctx& x, const FlatOutputRequest& req, const std::vector<Expr>& pool) {
  const std::size_t s = x.report.s;
  Expr phi1;
  if (req.phi1) {
    phi1 = *req.phi1;
  } else {
    Codistribution g = geom::annihilator(x.report.G.at(s - 1), x.cfg);
    phi1 = integrate(x, g, x.span({}), g.dim(), pool).at(0);
  }
  Codistribution lp = geom::annihilator(x.top(), x.cfg).plus({x.d(x.La(phi1, static_cast<int>(s)))}, x.cfg);
  Expr phi2 = req.phi2 ? *req.phi2 : integrate(x, lp, x.span(x.ladder(phi1, s)), lp.dim(), pool).at(0);
  return verify_pair(x, phi1, phi2, s, 0);
}

}  // namespace

std::string FlatOutputCandidate::violation() const {
  for (const auto& c : conditions) {
    if (!c.ok) return c.name;
  }
  return {};
}

FlatOutputCandidate flat_output(const AffineSystem& sys, const StructureReport& report, const ZeroTestConfig& cfg,
                                const FlatOutputRequest& request) {
  require_pass(report);
  if (request.phi1 && request.phi2) return verify_flat_output(sys, report, *request.phi1, *request.phi2, cfg);
  Ctx x{sys, report, cfg};
  const auto pool = heuristic_pool(sys, request.candidates);
  FlatOutputCandidate c;
  switch (report.case_tag) {
    case 1: c = suggest_case1(x, request, pool); break;
    case 2: c = suggest_case2(x, request, pool); break;
    default: c = suggest_case3(x, request, pool); break;
  }
  c.suggested = true;
  return c;
}

FlatOutputCandidate verify_flat_output(const AffineSystem& sys, const StructureReport& report, const Expr& phi1,
                                       const Expr& phi2, const ZeroTestConfig& cfg) {
  require_pass(report);
  Ctx x{sys, report, cfg};
  switch (report.case_tag) {
    case 1: {
      FlatOutputCandidate c = verify_pair(x, phi1, phi2, report.n11, report.n12);
      if (!c.verified && report.n11 != report.n12) {
        FlatOutputCandidate swapped = verify_pair(x, phi1, phi2, report.n12, report.n11);
        if (swapped.verified) return swapped;
      }
      return c;
    }
    case 2: return verify_pair(x, phi1, phi2, 0, 0);
    default: return verify_pair(x, phi1, phi2, report.s, 0);
  }
}

}  // namespace flattri::flatness
