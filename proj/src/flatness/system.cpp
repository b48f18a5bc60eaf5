#include "flattri/flatness/system.hpp"

#include <algorithm>

#include "flattri/errors.hpp"

namespace flattri::flatness {

void AffineSystem::validate(const ZeroTestConfig& cfg) const {
  if (states.empty()) throw PreconditionError("system has no states");
  for (const auto* f : {&drift, &b1, &b2}) {
    if (f->size() != states.size()) {
      throw PreconditionError("vector field has " + std::to_string(f->size()) + " components for " +
                              std::to_string(states.size()) + " states");
    }
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      if (states[i] == states[j]) throw PreconditionError("duplicate state '" + states[i].name() + "'");
    }
  }
  if (input_distribution(cfg).dim() != 2) {
    throw PreconditionError("input vector fields are not independent at generic points");
  }
}

bool AffineSystem::transcendental() const {
  for (const auto* f : {&drift, &b1, &b2}) {
    for (const auto& c : f->components) {
      if (c.transcendental()) return true;
    }
  }
  return false;
}

std::size_t AffineSystem::index_of(Symbol s) const {
  auto it = std::find(states.begin(), states.end(), s);
  return it == states.end() ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(it - states.begin());
}

Distribution AffineSystem::input_distribution(const ZeroTestConfig& cfg) const {
  return Distribution(states, {b1, b2}, cfg);
}

}  // namespace flattri::flatness
