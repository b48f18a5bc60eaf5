#include "flattri/flatness/checks.hpp"

#include "flattri/errors.hpp"

namespace flattri::flatness {

using geom::lie_bracket;

namespace {

std::vector<VectorField> brackets_with(const VectorField& a, const Distribution& d) {
  std::vector<VectorField> out;
  for (const auto& v : d.basis()) out.push_back(lie_bracket(a, v, d.coords()));
  return out;
}

ChainedLadders ladders(const Distribution& d, std::size_t n, const ZeroTestConfig& cfg) {
  ChainedLadders r;
  Distribution derived = d, lie = d;
  r.derived_ok = r.lie_ok = true;
  for (std::size_t i = 0; i + 2 <= n; ++i) {
    if (i > 0) {
      derived = geom::derived_flag_step(derived, cfg);
      lie = geom::lie_flag_step(d, lie, cfg);
    }
    r.derived_dims.push_back(derived.dim());
    r.lie_dims.push_back(lie.dim());
    r.derived_ok = r.derived_ok && derived.dim() == 2 + i;
    r.lie_ok = r.lie_ok && lie.dim() == 2 + i;
  }
  return r;
}

}  // namespace

DiSequence compute_Di_sequence(const AffineSystem& sys, const ZeroTestConfig& cfg) {
  sys.validate(cfg);
  DiSequence seq;
  Distribution d = sys.input_distribution(cfg);
  for (;;) {
    seq.D.push_back(d);
    seq.dims.push_back(d.dim());
    if (!geom::is_involutive(d, cfg)) {
      seq.status = DiStatus::non_involutive;
      seq.n3 = seq.D.size() - 1;
      return seq;
    }
    if (d.is_full()) break;
    Distribution next = d.plus(brackets_with(sys.drift, d), cfg);
    if (next.dim() == d.dim()) {
      seq.status = DiStatus::not_accessible;
      return seq;
    }
    d = std::move(next);
  }
  seq.status = DiStatus::linearizable;
  std::size_t prev = 0;
  for (std::size_t dim : seq.dims) {
    std::size_t inc = dim - prev;
    if (inc >= 1) ++seq.brunovsky[0];
    if (inc >= 2) ++seq.brunovsky[1];
    prev = dim;
  }
  return seq;
}

bool check_linearizable(const AffineSystem& sys, const ZeroTestConfig& cfg) {
  return compute_Di_sequence(sys, cfg).status == DiStatus::linearizable;
}

ChainedLadders check_chained(const AffineSystem& sys, const ZeroTestConfig& cfg) {
  sys.validate(cfg);
  for (const auto& c : sys.drift.components) {
    if (!symx::is_zero(c, cfg)) throw PreconditionError("chained-form check requires zero drift");
  }
  if (sys.n() < 3) throw PreconditionError("chained form needs at least 3 states");
  return ladders(sys.input_distribution(cfg), sys.n(), cfg);
}

bool ExtendedChainedResult::ok() const noexcept {
  if (!ladders.ok()) return false;
  for (bool b : compatibility) {
    if (!b) return false;
  }
  return true;
}

ExtendedChainedResult check_extended_chained(const AffineSystem& sys, const ZeroTestConfig& cfg) {
  sys.validate(cfg);
  const std::size_t n = sys.n();
  if (n < 3) throw PreconditionError("chained form needs at least 3 states");
  ExtendedChainedResult r;
  Distribution d = sys.input_distribution(cfg);
  r.ladders = ladders(d, n, cfg);
  if (!r.ladders.ok()) return r;
  Distribution di = d;
  for (std::size_t i = 1; i + 3 <= n; ++i) {
    di = geom::derived_flag_step(di, cfg);
    Distribution c = geom::cauchy_characteristics(di, cfg);
    bool ok = true;
    for (const auto& v : brackets_with(sys.drift, c)) ok = ok && di.contains(v, cfg);
    r.compatibility.push_back(ok);
  }
  return r;
}

}  // namespace flattri::flatness
