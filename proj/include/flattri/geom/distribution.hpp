#pragma once

#include <cstdint>
#include <vector>

#include "flattri/geom/fields.hpp"

namespace flattri::geom {

class Codistribution;

/// Span of vector fields over the function field. The stored basis is a
/// greedy independent subset of the generators, in generator order.
class Distribution {
 public:
  Distribution() = default;
  Distribution(Coordinates coords, const std::vector<VectorField>& generators, const ZeroTestConfig& cfg);
  static Distribution tangent_space(const Coordinates& coords, const ZeroTestConfig& cfg);

  const Coordinates& coords() const noexcept { return coords_; }
  const std::vector<VectorField>& basis() const noexcept { return basis_; }
  std::size_t dim() const noexcept { return basis_.size(); }
  std::size_t ambient_dim() const noexcept { return coords_.size(); }
  bool is_full() const noexcept { return dim() == ambient_dim(); }
  /// Seed under which the dimension was certified.
  std::uint64_t seed() const noexcept { return seed_; }

  fieldla::FnMatrix matrix() const;
  bool contains(const VectorField& v, const ZeroTestConfig& cfg) const;
  bool contains(const Distribution& other, const ZeroTestConfig& cfg) const;
  /// Mutual containment.
  bool equals(const Distribution& other, const ZeroTestConfig& cfg) const;

  Distribution plus(const std::vector<VectorField>& more, const ZeroTestConfig& cfg) const;
  Distribution plus(const Distribution& other, const ZeroTestConfig& cfg) const;

  std::string str() const;

 private:
  Coordinates coords_;
  std::vector<VectorField> basis_;
  std::uint64_t seed_ = 0;
};

class Codistribution {
 public:
  Codistribution() = default;
  Codistribution(Coordinates coords, const std::vector<OneForm>& generators, const ZeroTestConfig& cfg);

  const Coordinates& coords() const noexcept { return coords_; }
  const std::vector<OneForm>& basis() const noexcept { return basis_; }
  std::size_t dim() const noexcept { return basis_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  fieldla::FnMatrix matrix() const;
  bool contains(const OneForm& w, const ZeroTestConfig& cfg) const;
  bool contains(const Codistribution& other, const ZeroTestConfig& cfg) const;
  bool equals(const Codistribution& other, const ZeroTestConfig& cfg) const;
  Codistribution plus(const std::vector<OneForm>& more, const ZeroTestConfig& cfg) const;

  std::string str() const;

 private:
  Coordinates coords_;
  std::vector<OneForm> basis_;
  std::uint64_t seed_ = 0;
};

/// D + [D, D].
Distribution derived_flag_step(const Distribution& d, const ZeroTestConfig& cfg);
/// Di + [D0, Di].
Distribution lie_flag_step(const Distribution& d0, const Distribution& di, const ZeroTestConfig& cfg);

struct Closure {
  Distribution closure;
  std::vector<std::size_t> trace;  // dim D, dim D^(1), ... up to the stable value
  std::vector<Distribution> flag;  // D, D^(1), ..., closure
};
Closure involutive_closure(const Distribution& d, const ZeroTestConfig& cfg);

bool is_involutive(const Distribution& d, const ZeroTestConfig& cfg);

/// C(D) = {c in D : [c, D] in D}.
Distribution cauchy_characteristics(const Distribution& d, const ZeroTestConfig& cfg);

Codistribution annihilator(const Distribution& d, const ZeroTestConfig& cfg);
Distribution annihilator(const Codistribution& w, const ZeroTestConfig& cfg);

/// Indices k with d/dx_k in D.
std::vector<std::size_t> coordinate_directions(const Distribution& d, const ZeroTestConfig& cfg);
/// True iff D is spanned by coordinate fields.
bool is_coordinate_spanned(const Distribution& d, const ZeroTestConfig& cfg);

}  // namespace flattri::geom
