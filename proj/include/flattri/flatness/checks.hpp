#pragma once

#include <array>
#include <vector>

#include "flattri/flatness/system.hpp"

namespace flattri::flatness {

enum class DiStatus {
  non_involutive,  // found D_{n3+1}
  linearizable,    // every D_i involutive, saturating at T(X)
  not_accessible,  // every D_i involutive, saturating below T(X)
};

struct DiSequence {
  DiStatus status = DiStatus::non_involutive;
  /// D_1, D_2, ...; the last entry is D_{n3+1} when non_involutive.
  std::vector<Distribution> D;
  std::vector<std::size_t> dims;
  std::size_t n3 = 0;
  /// Controllability indices read from the dims (linearizable only).
  std::array<std::size_t, 2> brunovsky{0, 0};
};

/// D_1 = span{b1, b2}, D_{i+1} = D_i + [a, D_i].
DiSequence compute_Di_sequence(const AffineSystem& sys, const ZeroTestConfig& cfg);

bool check_linearizable(const AffineSystem& sys, const ZeroTestConfig& cfg);

struct ChainedLadders {
  std::vector<std::size_t> derived_dims;  // dim D^(i), i = 0..n-2
  std::vector<std::size_t> lie_dims;      // dim D_(i), i = 0..n-2
  bool derived_ok = false;
  bool lie_ok = false;
  bool ok() const noexcept { return derived_ok && lie_ok; }
};

/// Requires zero drift.
ChainedLadders check_chained(const AffineSystem& sys, const ZeroTestConfig& cfg);

struct ExtendedChainedResult {
  ChainedLadders ladders;  // of the driftless part
  /// [a, C(D^(i))] in D^(i) for i = 1..n-3; empty when the ladders fail.
  std::vector<bool> compatibility;
  bool ok() const noexcept;
};

ExtendedChainedResult check_extended_chained(const AffineSystem& sys, const ZeroTestConfig& cfg);

}  // namespace flattri::flatness
