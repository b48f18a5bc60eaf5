#include "flattri/flatness/theorem.hpp"

#include <sstream>

#include "flattri/errors.hpp"

namespace flattri::flatness {

using geom::lie_bracket;

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::skipped: return "skipped";
    case Verdict::undecided: return "cannot decide";
  }
  return "?";
}

const char* to_string(Confidence c) { return c == Confidence::exact ? "exact" : "probabilistic (float)"; }

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::linearizable: return "static feedback linearizable";
    case Outcome::not_accessible: return "not accessible";
    case Outcome::undecided: return "cannot decide";
  }
  return "?";
}

namespace {

std::vector<VectorField> brackets_with(const VectorField& a, const Distribution& d) {
  std::vector<VectorField> out;
  for (const auto& v : d.basis()) out.push_back(lie_bracket(a, v, d.coords()));
  return out;
}

std::string dims_str(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

SampleStats snapshot(const ZeroTestConfig& cfg) {
  SampleStats s;
  if (cfg.log) {
    s.zero_tests = cfg.log->zero_tests.load();
    s.points = cfg.log->points.load();
    s.resamples = cfg.log->resamples.load();
    s.float_tests = cfg.log->float_tests.load();
  }
  return s;
}

// Runs one item; `fn` returns true on pass and may fill the detail. A
// CannotDecide is recorded on the item, never turned into a pass.
template <class Fn>
void run_item(ItemResult& item, const ZeroTestConfig& cfg, Fn&& fn) {
  const std::uint64_t floats = snapshot(cfg).float_tests;
  try {
    item.verdict = fn(item.detail) ? Verdict::pass : Verdict::fail;
  } catch (const CannotDecide& e) {
    item.verdict = Verdict::undecided;
    item.detail = e.what();
  }
  item.confidence = snapshot(cfg).float_tests > floats ? Confidence::probabilistic : Confidence::exact;
}

bool applicable_ok(const ItemResult& r) { return r.verdict == Verdict::pass || r.verdict == Verdict::skipped; }

void cross_checks(StructureReport& r) {
  auto add = [&](std::string name, bool ok, std::string detail) {
    r.cross_checks.push_back({std::move(name), ok, std::move(detail)});
  };
  for (std::size_t i = 0; i < r.D_dims.size(); ++i) {
    add("dim D_" + std::to_string(i + 1) + " = " + std::to_string(2 * (i + 1)), r.D_dims[i] == 2 * (i + 1),
        std::to_string(r.D_dims[i]));
  }
  for (std::size_t i = 0; i < r.cauchy.size(); ++i) {
    const std::size_t want = 2 * r.n3 + i + 1;
    add("dim C(D^(" + std::to_string(i + 1) + ")) = " + std::to_string(want), r.cauchy[i].dim() == want,
        std::to_string(r.cauchy[i].dim()));
  }
  if (!r.derived.empty()) {
    const std::size_t want = 2 * r.n3 + r.n2;
    add("dim Dbar = 2*n3 + n2 = " + std::to_string(want), r.closure().dim() == want,
        std::to_string(r.closure().dim()));
  }
  if (r.G_dims.size() >= 2) {
    const std::size_t first = r.G_dims[1] - r.G_dims[0];
    bool ok = first == 1 || first == 2;
    for (std::size_t i = 2; i < r.G_dims.size(); ++i) {
      const std::size_t inc = r.G_dims[i] - r.G_dims[i - 1];
      ok = ok && (first == 2 ? inc >= 1 && inc <= 2 : inc == 1);
    }
    add("G increments", ok, dims_str(r.G_dims));
  }
  if (r.outcome == Outcome::pass) {
    add("n = n1 + n2 + 2*n3", r.n == r.n1 + r.n2 + 2 * r.n3,
        std::to_string(r.n) + " vs " + std::to_string(r.n1) + " + " + std::to_string(r.n2) + " + 2*" +
            std::to_string(r.n3));
  }
}

}  // namespace

StructureReport check_theorem1(const AffineSystem& sys, const ZeroTestConfig& cfg) {
  StructureReport r;
  r.system = sys.name;
  r.n = sys.n();
  r.seed = cfg.seed;
  r.samples = cfg.samples;
  r.bound = cfg.bound;

  DiSequence seq = compute_Di_sequence(sys, cfg);
  r.D_dims = seq.dims;
  r.D = seq.D;
  if (seq.status != DiStatus::non_involutive) {
    r.outcome = seq.status == DiStatus::linearizable ? Outcome::linearizable : Outcome::not_accessible;
    r.brunovsky = seq.brunovsky;
    r.sample_log = snapshot(cfg);
    return r;
  }
  r.n3 = seq.n3;
  const Distribution& top = r.D.back();
  r.D_n3 = r.n3 == 0 ? Distribution(sys.states, {}, cfg) : r.D[r.n3 - 1];

  run_item(r.a, cfg, [&](std::string& detail) {
    Distribution c = geom::cauchy_characteristics(top, cfg);
    detail = "dim C(D_" + std::to_string(r.n3 + 1) + ") = " + std::to_string(c.dim()) + ", dim D_" +
             std::to_string(r.n3) + " = " + std::to_string(r.D_n3.dim());
    return c.equals(r.D_n3, cfg);
  });

  geom::Closure cl = geom::involutive_closure(top, cfg);
  r.derived = cl.flag;
  r.derived_trace = cl.trace;
  r.n2 = cl.trace.size() + 1;
  run_item(r.b, cfg, [&](std::string& detail) {
    detail = "trace " + dims_str(cl.trace) + ", n2 = " + std::to_string(r.n2);
    for (std::size_t i = 0; i < cl.trace.size(); ++i) {
      if (cl.trace[i] != cl.trace[0] + i) return false;
    }
    return true;
  });

  const Distribution& closure = r.closure();
  r.degenerate = closure.is_full();

  // Compatibility for i = 1..n2-3.
  run_item(r.c10, cfg, [&](std::string& detail) {
    bool all = true;
    for (std::size_t i = 1; i + 3 <= r.n2; ++i) {
      ItemResult sub;
      run_item(sub, cfg, [&](std::string& d) {
        Distribution c = geom::cauchy_characteristics(r.derived[i], cfg);
        r.cauchy.push_back(c);
        for (const auto& v : brackets_with(sys.drift, c)) {
          if (!r.derived[i].contains(v, cfg)) {
            d = "[a, C(D^(" + std::to_string(i) + "))] leaves D^(" + std::to_string(i) + ")";
            return false;
          }
        }
        return true;
      });
      if (sub.verdict == Verdict::undecided) throw CannotDecide(sub.detail);
      all = all && sub.verdict == Verdict::pass;
      if (detail.empty() && !sub.detail.empty()) detail = sub.detail;
      r.c10_per_i.push_back(std::move(sub));
    }
    if (r.c10_per_i.empty()) detail = "vacuous (n2 = 3)";
    return all;
  });

  if (r.degenerate) {
    r.c11.detail = r.d.detail = r.e.detail = "omitted: Dbar = T(X)";
    r.extended_chained_note = r.n3 == 0;
  } else {
    run_item(r.c11, cfg, [&](std::string& detail) {
      Distribution sum = closure.plus(brackets_with(sys.drift, r.top_derived()), cfg);
      r.c11_dim = sum.dim();
      detail = "dim(Dbar + [a, D^(" + std::to_string(r.n2 - 3) + ")]) = " + std::to_string(sum.dim()) +
               ", dim Dbar = " + std::to_string(closure.dim());
      return sum.dim() == closure.dim() + 1;
    });

    r.G.push_back(closure);
    r.G_dims.push_back(closure.dim());
    bool reached = false;
    std::string stop;
    run_item(r.d, cfg, [&](std::string& detail) {
      for (;;) {
        const Distribution& g = r.G.back();
        Distribution next = g.plus(brackets_with(sys.drift, g), cfg);
        if (next.dim() == g.dim()) {
          stop = "G stalls at dimension " + std::to_string(g.dim());
          return true;
        }
        r.G.push_back(next);
        r.G_dims.push_back(next.dim());
        if (!geom::is_involutive(next, cfg)) {
          detail = "G_" + std::to_string(r.G.size() - 1) + " is not involutive";
          stop = "sequence stopped at a non-involutive G";
          return false;
        }
        if (next.is_full()) {
          reached = true;
          return true;
        }
      }
    });
    if (r.d.verdict == Verdict::undecided) {
      r.e.verdict = Verdict::undecided;
      r.e.detail = r.d.detail;
    } else {
      r.e.confidence = r.d.confidence;
      r.e.verdict = reached ? Verdict::pass : Verdict::fail;
      r.e.detail = reached ? "s = " + std::to_string(r.G.size() - 1) : stop;
      if (reached) r.s = r.G.size() - 1;
    }
  }

  const ItemResult* items[] = {&r.a, &r.b, &r.c10, &r.c11, &r.d, &r.e};
  bool undecided = false, ok = true;
  for (const auto* it : items) {
    undecided = undecided || it->verdict == Verdict::undecided;
    ok = ok && applicable_ok(*it);
  }
  r.outcome = undecided ? Outcome::undecided : ok ? Outcome::pass : Outcome::fail;

  if (r.outcome == Outcome::pass) {
    // Chains of length >= i in the x1 block number dim G_i - dim G_{i-1}.
    for (std::size_t i = 1; i < r.G_dims.size(); ++i) {
      const std::size_t inc = r.G_dims[i] - r.G_dims[i - 1];
      if (inc >= 1) ++r.n11;
      if (inc >= 2) ++r.n12;
    }
    r.n1 = r.n11 + r.n12;
    r.case_tag = classify_case(r);
  }
  cross_checks(r);
  r.sample_log = snapshot(cfg);
  return r;
}

int classify_case(const StructureReport& report) {
  if (!report.passed()) throw PreconditionError("case classification requires a passing structure report");
  if (report.degenerate) return 2;
  const std::size_t inc = report.G_dims.at(1) - report.G_dims.at(0);
  return inc == 2 ? 1 : 3;
}

}  // namespace flattri::flatness
