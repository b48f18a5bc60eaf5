#include "flattri/cli/commands.hpp"

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "flattri/cli/system_file.hpp"
#include "flattri/flatness/flat_output.hpp"
#include "flattri/symx/parse.hpp"
#include "flattri/transform/pipeline.hpp"

namespace flattri::cli {

namespace {

using json = nlohmann::ordered_json;
using flatness::StructureReport;

constexpr const char* kVersion = FLATTRI_VERSION;

struct Options {
  std::uint64_t seed = symx::ZeroTestConfig{}.seed;
  int samples = symx::ZeroTestConfig{}.samples;
  std::int64_t bound = symx::ZeroTestConfig{}.bound;
  std::string format = "text";
  std::string file;
  std::string transcript;
  std::string phi1, phi2;
  std::string field1, field2;
};

// A command's answer: the exit code, a structured result and its text form.
struct Answer {
  int code = 0;
  json result = json::object();
  std::string text;
};

std::string dims(const std::vector<std::size_t>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

json item_json(const flatness::ItemResult& r) {
  return {{"verdict", to_string(r.verdict)}, {"confidence", to_string(r.confidence)}, {"detail", r.detail}};
}

std::string item_text(const char* name, const flatness::ItemResult& r) {
  std::ostringstream os;
  os << "  " << name << ": " << to_string(r.verdict);
  if (r.verdict == flatness::Verdict::pass || r.verdict == flatness::Verdict::fail) os << " (" << to_string(r.confidence) << ")";
  if (!r.detail.empty()) os << "  " << r.detail;
  os << '\n';
  return os.str();
}

int outcome_code(flatness::Outcome o) {
  switch (o) {
    case flatness::Outcome::pass:
    case flatness::Outcome::linearizable: return 0;
    case flatness::Outcome::undecided: return 2;
    default: return 1;
  }
}

json report_json(const StructureReport& r) {
  json items = json::object();
  items["a"] = item_json(r.a);
  items["b"] = item_json(r.b);
  items["c_compatibility"] = item_json(r.c10);
  items["c_coupling"] = item_json(r.c11);
  items["d"] = item_json(r.d);
  items["e"] = item_json(r.e);
  json per_i = json::array();
  for (const auto& it : r.c10_per_i) per_i.push_back(item_json(it));
  json checks = json::array();
  for (const auto& c : r.cross_checks) checks.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  json j = {{"outcome", to_string(r.outcome)},
            {"n", r.n},
            {"n3", r.n3},
            {"D_dims", r.D_dims},
            {"derived_flag_trace", r.derived_trace},
            {"n2", r.n2},
            {"items", items},
            {"c_compatibility_per_i", per_i},
            {"c_coupling_dim", r.c11_dim},
            {"G_dims", r.G_dims},
            {"s", r.s},
            {"n1", r.n1},
            {"n11", r.n11},
            {"n12", r.n12},
            {"case", r.case_tag},
            {"degenerate", r.degenerate},
            {"extended_chained", r.extended_chained_note},
            {"cross_checks", checks}};
  if (r.outcome == flatness::Outcome::linearizable) j["brunovsky_indices"] = r.brunovsky;
  return j;
}

std::string report_text(const StructureReport& r) {
  std::ostringstream os;
  os << "system: " << r.system << " (" << r.n << " states)\n";
  os << "outcome: " << to_string(r.outcome) << '\n';
  if (r.outcome == flatness::Outcome::linearizable) {
    os << "Brunovsky indices: " << r.brunovsky[0] << ", " << r.brunovsky[1] << '\n';
    return os.str();
  }
  if (r.outcome == flatness::Outcome::not_accessible) return os.str();
  os << "n3 = " << r.n3 << ", dim D_i = " << dims(r.D_dims) << '\n';
  os << "n2 = " << r.n2 << ", derived flag trace = " << dims(r.derived_trace) << '\n';
  os << item_text("(a) C(D^(n2-3)) = D_n3", r.a);
  os << item_text("(b) derived flag steps of one", r.b);
  for (std::size_t i = 0; i < r.c10_per_i.size(); ++i) {
    os << item_text(("(c) [a, C(D^(" + std::to_string(i + 1) + "))] in D^(" + std::to_string(i + 1) + ")").c_str(),
                    r.c10_per_i[i]);
  }
  if (r.c10_per_i.empty()) os << item_text("(c) compatibility", r.c10);
  os << item_text("(c) coupling", r.c11);
  if (r.c11.verdict != flatness::Verdict::skipped) os << "      dim(closure + [a, D^(n2-3)]) = " << r.c11_dim << '\n';
  os << item_text("(d) G_i involutive", r.d);
  os << item_text("(e) G_s = T(X)", r.e);
  if (!r.G_dims.empty()) os << "dim G_i = " << dims(r.G_dims) << ", s = " << r.s << '\n';
  if (r.degenerate) os << "closure = T(X): (c) coupling, (d), (e) omitted\n";
  if (r.extended_chained_note) os << "n3 = 0: conditions of the extended chained form\n";
  if (r.passed()) {
    os << "n1 = " << r.n1 << " (n11 = " << r.n11 << ", n12 = " << r.n12 << "), case " << r.case_tag << '\n';
  }
  for (const auto& c : r.cross_checks) os << "  check " << c.name << ": " << (c.ok ? "ok" : "FAILED") << '\n';
  return os.str();
}

json flat_json(const flatness::FlatOutputCandidate& c) {
  json conds = json::array();
  for (const auto& k : c.conditions) conds.push_back({{"name", k.name}, {"ok", k.ok}, {"detail", k.detail}});
  json lperp = json::array();
  for (const auto& w : c.L_perp.basis()) {
    json row = json::array();
    for (const auto& e : w.coefficients) row.push_back(symx::to_string(e));
    lperp.push_back(row);
  }
  return {{"phi1", symx::to_string(c.phi1)},
          {"phi2", c.phi2 ? symx::to_string(*c.phi2) : ""},
          {"case", c.case_tag},
          {"chain_lengths", {c.len1, c.len2}},
          {"suggested", c.suggested},
          {"verified", c.verified},
          {"violation", c.violation()},
          {"L_perp", lperp},
          {"conditions", conds}};
}

std::string flat_text(const flatness::FlatOutputCandidate& c) {
  std::ostringstream os;
  os << "phi1 = " << symx::to_string(c.phi1) << '\n';
  if (c.phi2) os << "phi2 = " << symx::to_string(*c.phi2) << '\n';
  os << "case " << c.case_tag << ", " << (c.suggested ? "suggested" : "given") << ", "
     << (c.verified ? "verified" : "rejected") << '\n';
  os << "L^perp = " << c.L_perp.str() << '\n';
  for (const auto& k : c.conditions) os << "  " << k.name << ": " << (k.ok ? "ok" : "violated") << '\n';
  return os.str();
}

symx::Vocabulary vocabulary(const flatness::AffineSystem& sys) {
  symx::Symbols all = sys.states;
  all.insert(all.end(), sys.params.begin(), sys.params.end());
  return symx::Vocabulary::from_symbols(all);
}

Answer cmd_check(const SystemFile& f, const symx::ZeroTestConfig& cfg) {
  auto r = flatness::check_theorem1(f.system, cfg);
  return {outcome_code(r.outcome), report_json(r), report_text(r)};
}

Answer cmd_linearize(const SystemFile& f, const symx::ZeroTestConfig& cfg) {
  auto d = flatness::compute_Di_sequence(f.system, cfg);
  const bool ok = d.status == flatness::DiStatus::linearizable;
  Answer a{ok ? 0 : 1, json::object(), ""};
  a.result = {{"linearizable", ok}, {"D_dims", d.dims}};
  if (ok) a.result["brunovsky_indices"] = d.brunovsky;
  a.text = std::string(ok ? "static feedback linearizable" : "not static feedback linearizable") +
           "\ndim D_i = " + dims(d.dims) + '\n';
  if (ok) a.text += "Brunovsky indices: " + std::to_string(d.brunovsky[0]) + ", " + std::to_string(d.brunovsky[1]) + '\n';
  return a;
}

Answer cmd_chained(const SystemFile& f, const symx::ZeroTestConfig& cfg) {
  auto r = flatness::check_chained(f.system, cfg);
  Answer a{r.ok() ? 0 : 1, json::object(), ""};
  a.result = {{"chained", r.ok()}, {"derived_flag_dims", r.derived_dims}, {"lie_flag_dims", r.lie_dims}};
  a.text = std::string(r.ok() ? "chained form conditions hold" : "chained form conditions fail") +
           "\ndim D^(i) = " + dims(r.derived_dims) + "\ndim D_(i) = " + dims(r.lie_dims) + '\n';
  return a;
}

Answer cmd_extchained(const SystemFile& f, const symx::ZeroTestConfig& cfg) {
  auto r = flatness::check_extended_chained(f.system, cfg);
  Answer a{r.ok() ? 0 : 1, json::object(), ""};
  std::vector<bool> compat(r.compatibility.begin(), r.compatibility.end());
  a.result = {{"extended_chained", r.ok()},
              {"derived_flag_dims", r.ladders.derived_dims},
              {"lie_flag_dims", r.ladders.lie_dims},
              {"compatibility", compat}};
  a.text = std::string(r.ok() ? "extended chained form conditions hold" : "extended chained form conditions fail") +
           "\ndim D^(i) = " + dims(r.ladders.derived_dims) + "\ndim D_(i) = " + dims(r.ladders.lie_dims) + '\n';
  for (std::size_t i = 0; i < compat.size(); ++i) {
    a.text += "  [a, C(D^(" + std::to_string(i + 1) + "))] in D^(" + std::to_string(i + 1) + "): " +
              (compat[i] ? "ok" : "violated") + '\n';
  }
  return a;
}

flatness::FlatOutputRequest request_from(const SystemFile& f, const Options& o) {
  flatness::FlatOutputRequest req;
  auto vocab = vocabulary(f.system);
  if (!o.phi1.empty()) req.phi1 = symx::parse(o.phi1, vocab);
  if (!o.phi2.empty()) req.phi2 = symx::parse(o.phi2, vocab);
  if (o.phi1.empty() && o.phi2.empty()) {
    if (f.flat_output.size() >= 1) req.phi1 = f.flat_output[0];
    if (f.flat_output.size() >= 2) req.phi2 = f.flat_output[1];
  }
  return req;
}

Answer not_passing(const StructureReport& r) {
  Answer a{outcome_code(r.outcome) == 2 ? 2 : 1, json::object(), ""};
  a.result = {{"structure", report_json(r)}};
  a.text = report_text(r) + "structure conditions do not hold\n";
  return a;
}

Answer cmd_flat_output(const SystemFile& f, const Options& o, const symx::ZeroTestConfig& cfg) {
  auto r = flatness::check_theorem1(f.system, cfg);
  if (!r.passed()) return not_passing(r);
  auto c = flatness::flat_output(f.system, r, cfg, request_from(f, o));
  return {c.verified ? 0 : 1, flat_json(c), flat_text(c)};
}

std::optional<transform::CoordChange> step1_change(const SystemFile& f, const symx::ZeroTestConfig& cfg) {
  if (f.coord_change.empty()) return std::nullopt;
  transform::CoordChange phi(f.system.states);
  for (const auto& e : f.coord_change) {
    phi.push(e.fresh, e.definition, e.old, cfg, symx::InversionPolicy::principal_root);
  }
  return phi;
}

Answer cmd_transform(const SystemFile& f, const Options& o, const symx::ZeroTestConfig& cfg) {
  auto r = flatness::check_theorem1(f.system, cfg);
  if (!r.passed()) return not_passing(r);
  auto res = transform::run_pipeline(f.system, r, cfg, step1_change(f, cfg), request_from(f, o));
  const bool ok = res.form.ok && res.conjugation.ok;
  if (!o.transcript.empty()) {
    std::ofstream out(o.transcript, std::ios::binary);
    if (!out) throw Error("cannot write '" + o.transcript + "'");
    out << transform::format_transcript(res.transcript);
  }
  json steps = json::array();
  for (const auto& st : res.change.steps()) {
    steps.push_back({{"new", st.fresh.name()}, {"definition", symx::to_string(st.definition)},
                     {"replaces", st.replaced.name()}});
  }
  std::vector<std::string> labels;
  for (const auto& t : res.transcript) labels.push_back(t.label);
  Answer a{ok ? 0 : 1, json::object(), ""};
  a.result = {{"pattern",
               {{"n11", res.pattern.n11()}, {"n12", res.pattern.n12()}, {"n2", res.pattern.n2()}, {"n3", res.pattern.n3()}}},
              {"flat_output", flat_json(res.flat)},
              {"system", format_system(res.system)},
              {"coordinate_steps", steps},
              {"feedback",
               {{"g", {symx::to_string(res.feedback.g[0]), symx::to_string(res.feedback.g[1])}},
                {"M",
                 {{symx::to_string(res.feedback.M[0][0]), symx::to_string(res.feedback.M[0][1])},
                  {symx::to_string(res.feedback.M[1][0]), symx::to_string(res.feedback.M[1][1])}}}}},
              {"triangular_form", res.form.ok},
              {"conjugation", res.conjugation.ok},
              {"diagnostics", res.form.diagnostics},
              {"transcript_steps", labels}};
  std::ostringstream os;
  os << "triangular form " << res.pattern.str() << '\n';
  os << "flat output: phi1 = " << symx::to_string(res.flat.phi1) << ", phi2 = " << symx::to_string(*res.flat.phi2) << '\n';
  os << format_system(res.system);
  os << "form check: " << (res.form.ok ? "ok" : "FAILED") << ", composite change and feedback: "
     << (res.conjugation.ok ? "ok" : "FAILED") << '\n';
  for (const auto& d : res.form.diagnostics) os << "  " << d << '\n';
  for (const auto& d : res.conjugation.diagnostics) os << "  composite: " << d << '\n';
  a.text = os.str();
  return a;
}

geom::VectorField field_arg(const std::string& s, const flatness::AffineSystem& sys) {
  if (s == "a" || s == "drift") return sys.drift;
  if (s == "b1") return sys.b1;
  if (s == "b2") return sys.b2;
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw Error("a field is a, b1, b2 or a bracketed component list, got '" + s + "'");
  }
  auto vocab = vocabulary(sys);
  fieldla::Vector c;
  int depth = 0;
  std::size_t start = 1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const char ch = s[i];
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if ((ch == ',' && depth == 0) || i + 1 == s.size()) {
      c.push_back(symx::parse(s.substr(start, i - start), vocab));
      start = i + 1;
    }
  }
  if (c.size() != sys.n()) throw Error("field has " + std::to_string(c.size()) + " components for " + std::to_string(sys.n()) + " states");
  return geom::VectorField(std::move(c));
}

json field_json(const geom::VectorField& v) {
  json j = json::array();
  for (const auto& e : v.components) j.push_back(symx::to_string(e));
  return j;
}

Answer cmd_bracket(const SystemFile& f, const Options& o, const symx::ZeroTestConfig& cfg) {
  auto v = field_arg(o.field1, f.system), w = field_arg(o.field2, f.system);
  auto b = geom::settle(geom::lie_bracket(v, w, f.system.states), cfg);
  Answer a;
  a.result = {{"bracket", field_json(b)}};
  std::ostringstream os;
  for (std::size_t i = 0; i < b.size(); ++i) os << f.system.states[i].name() << ": " << symx::to_string(b[i]) << '\n';
  a.text = os.str();
  return a;
}

Answer cmd_flags(const SystemFile& f, const symx::ZeroTestConfig& cfg) {
  auto d = flatness::compute_Di_sequence(f.system, cfg);
  auto closure = geom::involutive_closure(d.D.back(), cfg);
  std::vector<std::size_t> cauchy;
  for (std::size_t i = 1; i + 1 < closure.flag.size(); ++i) {
    cauchy.push_back(geom::cauchy_characteristics(closure.flag[i], cfg).dim());
  }
  std::vector<bool> involutive;
  for (const auto& di : d.D) involutive.push_back(geom::is_involutive(di, cfg));
  Answer a;
  a.result = {{"D_dims", d.dims},
              {"D_involutive", involutive},
              {"derived_flag_of_last_D", closure.trace},
              {"cauchy_dims", cauchy}};
  std::ostringstream os;
  os << "dim D_i = " << dims(d.dims) << '\n';
  for (std::size_t i = 0; i < d.D.size(); ++i) {
    os << "D_" << i + 1 << (involutive[i] ? " involutive" : " not involutive") << ": " << d.D[i].str() << '\n';
  }
  os << "derived flag of D_" << d.D.size() << ": " << dims(closure.trace) << '\n';
  os << "dim C(D^(i)), i = 1.. : " << dims(cauchy) << '\n';
  a.text = os.str();
  return a;
}

json sample_json(const symx::ZeroTestConfig& cfg) {
  return {{"zero_tests", cfg.log->zero_tests.load()},
          {"points", cfg.log->points.load()},
          {"resamples", cfg.log->resamples.load()},
          {"float_tests", cfg.log->float_tests.load()}};
}

}  // namespace

RunResult run(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Structurally flat triangular form analysis of two-input affine systems", "flattri"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "sampling seed")->envname("FLATTRI_SEED");
  app.add_option("--samples", o.samples, "sample points per zero test")->envname("FLATTRI_SAMPLES");
  app.add_option("--bound", o.bound, "rational sampling bound")->envname("FLATTRI_BOUND");
  app.add_option("--format", o.format, "text or structured")
      ->envname("FLATTRI_FORMAT")
      ->check(CLI::IsMember({"text", "structured"}));

  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("file", o.file, "system file")->required();
    return s;
  };
  auto* check = sub("check", "structure conditions, indices and case");
  auto* lin = sub("linearize-check", "static feedback linearizability");
  auto* ch = sub("chained-check", "chained form conditions (driftless systems)");
  auto* ext = sub("extchained-check", "extended chained form conditions");
  auto* flat = sub("flat-output", "suggest or verify a flat output");
  flat->add_option("--phi1", o.phi1, "first flat output component");
  flat->add_option("--phi2", o.phi2, "second flat output component");
  auto* tr = sub("transform", "transform into the triangular form");
  tr->add_option("--transcript", o.transcript, "write every intermediate system to this file");
  tr->add_option("--phi1", o.phi1, "first flat output component");
  tr->add_option("--phi2", o.phi2, "second flat output component");
  auto* br = sub("bracket", "Lie bracket of two fields (a, b1, b2 or a component list)");
  br->add_option("f", o.field1)->required();
  br->add_option("g", o.field2)->required();
  auto* fl = sub("flags", "D_i sequence, derived flag and Cauchy characteristics");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  RunResult result;
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    int code = app.exit(e, out, err);
    return {code == 0 ? 0 : 2, out.str(), err.str()};
  }

  symx::ZeroTestConfig cfg;
  cfg.seed = o.seed;
  cfg.samples = o.samples;
  cfg.bound = o.bound;
  const std::string command = app.get_subcommands().front()->get_name();

  json doc = {{"tool", "flattri"}, {"version", kVersion}, {"command", command}, {"file", o.file}};
  Answer a;
  try {
    cfg.validate();
    SystemFile f = load_system(o.file);
    f.system.validate(cfg);
    doc["system"] = f.system.name;
    if (check->parsed()) a = cmd_check(f, cfg);
    else if (lin->parsed()) a = cmd_linearize(f, cfg);
    else if (ch->parsed()) a = cmd_chained(f, cfg);
    else if (ext->parsed()) a = cmd_extchained(f, cfg);
    else if (flat->parsed()) a = cmd_flat_output(f, o, cfg);
    else if (tr->parsed()) a = cmd_transform(f, o, cfg);
    else if (br->parsed()) a = cmd_bracket(f, o, cfg);
    else if (fl->parsed()) a = cmd_flags(f, cfg);
  } catch (const CannotDecide& e) {
    a = {2, json::object(), ""};
    a.result = {{"error", e.what()}, {"undecided", true}};
    result.err = std::string("cannot decide: ") + e.what() + '\n';
  } catch (const std::exception& e) {
    a = {2, json::object(), ""};
    a.result = {{"error", e.what()}};
    result.err = std::string("error: ") + e.what() + '\n';
  }
  doc["seed"] = cfg.seed;
  doc["samples"] = cfg.samples;
  doc["bound"] = cfg.bound;
  doc["sample_log"] = sample_json(cfg);
  doc["exit_code"] = a.code;
  doc["result"] = a.result;

  result.exit_code = a.code;
  if (o.format == "structured") {
    result.out = doc.dump(2) + '\n';
  } else {
    result.out = a.text;
    if (!a.text.empty()) {
      result.out += "seed " + std::to_string(cfg.seed) + ", " + std::to_string(cfg.samples) + " samples, bound " +
                    std::to_string(cfg.bound) + ", " + std::to_string(cfg.log->zero_tests.load()) + " zero tests\n";
    }
  }
  return result;
}

}  // namespace flattri::cli
