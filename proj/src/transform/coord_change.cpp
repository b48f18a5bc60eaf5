#include "flattri/transform/coord_change.hpp"

#include <algorithm>

#include "flattri/errors.hpp"

namespace flattri::transform {

namespace {

std::size_t position(const Coordinates& c, Symbol s) {
  auto it = std::find(c.begin(), c.end(), s);
  if (it == c.end()) throw PreconditionError("'" + s.name() + "' is not a current coordinate");
  return static_cast<std::size_t>(it - c.begin());
}

VectorField transform_field(const VectorField& v, const fieldla::Vector& forward, const Coordinates& source,
                            const symx::Bindings& to_target, const ZeroTestConfig& cfg) {
  fieldla::Vector out;
  for (const auto& f : forward) {
    std::vector<Expr> terms;
    for (std::size_t j = 0; j < source.size(); ++j) {
      if (v[j].is_zero()) continue;
      Expr d = symx::differentiate(f, source[j]);
      if (!d.is_zero()) terms.push_back(d * v[j]);
    }
    out.push_back(symx::settle(symx::substitute(symx::sum(std::move(terms)), to_target), cfg));
  }
  return VectorField(std::move(out));
}

}  // namespace

std::string ElementaryStep::str() const {
  return fresh.name() + " = " + symx::to_string(definition) + "  (replaces " + replaced.name() + ")";
}

CoordChange::CoordChange(Coordinates source) : source_(std::move(source)), target_(source_) {
  for (Symbol s : source_) {
    forward_.emplace_back(s);
    inverse_.emplace_back(s);
  }
}

const ElementaryStep& CoordChange::push(Symbol fresh, const Expr& definition, Symbol replaced,
                                        const ZeroTestConfig& cfg, symx::InversionPolicy policy) {
  ElementaryStep step{fresh, definition, replaced, Expr()};
  step.inverse = symx::solve_for(fresh, definition, replaced, cfg, policy);
  push(std::move(step));
  return steps_.back();
}

void CoordChange::push(ElementaryStep step) {
  const std::size_t pos = position(target_, step.replaced);
  if (std::find(target_.begin(), target_.end(), step.fresh) != target_.end() && step.fresh != step.replaced) {
    throw PreconditionError("'" + step.fresh.name() + "' is already a coordinate");
  }
  symx::Bindings to_source;
  for (std::size_t i = 0; i < target_.size(); ++i) to_source.emplace(target_[i], forward_[i]);
  forward_[pos] = symx::substitute(step.definition, to_source);
  symx::Bindings back{{step.replaced, step.inverse}};
  for (auto& e : inverse_) e = symx::substitute(e, back);
  target_[pos] = step.fresh;
  steps_.push_back(std::move(step));
}

void CoordChange::reorder(const Coordinates& order) {
  if (order.size() != target_.size()) throw PreconditionError("reorder is not a permutation");
  fieldla::Vector fwd;
  for (Symbol s : order) fwd.push_back(forward_[position(target_, s)]);
  target_ = order;
  forward_ = std::move(fwd);
}

Expr CoordChange::to_target(const Expr& e) const {
  symx::Bindings b;
  for (std::size_t i = 0; i < source_.size(); ++i) b.emplace(source_[i], inverse_[i]);
  return symx::substitute(e, b);
}

Expr CoordChange::to_source(const Expr& e) const {
  symx::Bindings b;
  for (std::size_t i = 0; i < target_.size(); ++i) b.emplace(target_[i], forward_[i]);
  return symx::substitute(e, b);
}

CoordChange CoordChange::then(const CoordChange& next) const {
  CoordChange out = *this;
  for (const auto& s : next.steps()) out.push(s);
  out.reorder(next.target());
  return out;
}

CoordChange CoordChange::inverted() const {
  CoordChange out(target_);
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    out.push(ElementaryStep{it->replaced, it->inverse, it->fresh, it->definition});
  }
  out.reorder(source_);
  return out;
}

AffineSystem pushforward(const AffineSystem& sys, const CoordChange& phi, const ZeroTestConfig& cfg) {
  if (sys.states != phi.source()) throw PreconditionError("coordinate change does not start at the system's states");
  symx::Bindings to_target;
  for (std::size_t i = 0; i < phi.source().size(); ++i) to_target.emplace(phi.source()[i], phi.inverse()[i]);
  AffineSystem out;
  out.name = sys.name;
  out.params = sys.params;
  out.states = phi.target();
  out.drift = transform_field(sys.drift, phi.forward(), sys.states, to_target, cfg);
  out.b1 = transform_field(sys.b1, phi.forward(), sys.states, to_target, cfg);
  out.b2 = transform_field(sys.b2, phi.forward(), sys.states, to_target, cfg);
  return out;
}

AffineSystem apply_step(const AffineSystem& sys, const ElementaryStep& step, const ZeroTestConfig& cfg) {
  const std::size_t pos = position(sys.states, step.replaced);
  symx::Bindings back{{step.replaced, step.inverse}};
  auto field = [&](const VectorField& v) {
    fieldla::Vector out = v.components;
    out[pos] = geom::lie_derivative(step.definition, v, sys.states);
    for (auto& e : out) e = symx::settle(symx::substitute(e, back), cfg);
    return VectorField(std::move(out));
  };
  AffineSystem out = sys;
  out.drift = field(sys.drift);
  out.b1 = field(sys.b1);
  out.b2 = field(sys.b2);
  out.states[pos] = step.fresh;
  return out;
}

bool same_system(const AffineSystem& a, const AffineSystem& b, const ZeroTestConfig& cfg) {
  if (a.states != b.states) return false;
  for (auto [f, g] : {std::pair{&a.drift, &b.drift}, {&a.b1, &b.b1}, {&a.b2, &b.b2}}) {
    for (std::size_t i = 0; i < f->size(); ++i) {
      if (!symx::is_zero((*f)[i] - (*g)[i], cfg)) return false;
    }
  }
  return true;
}

}  // namespace flattri::transform
