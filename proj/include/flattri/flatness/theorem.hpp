#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "flattri/flatness/checks.hpp"

namespace flattri::flatness {

enum class Verdict { pass, fail, skipped, undecided };
enum class Confidence { exact, probabilistic };

const char* to_string(Verdict v);
const char* to_string(Confidence c);

struct ItemResult {
  Verdict verdict = Verdict::skipped;
  Confidence confidence = Confidence::exact;
  std::string detail;
};

struct CrossCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct SampleStats {
  std::uint64_t zero_tests = 0;
  std::uint64_t points = 0;
  std::uint64_t resamples = 0;
  std::uint64_t float_tests = 0;
};

enum class Outcome { pass, fail, linearizable, not_accessible, undecided };
const char* to_string(Outcome o);

struct StructureReport {
  std::string system;
  std::size_t n = 0;
  Outcome outcome = Outcome::fail;

  std::size_t n3 = 0;
  std::vector<std::size_t> D_dims;
  std::vector<std::size_t> derived_trace;  // dim D_{n3+1}^(i), i = 0.. up to the closure
  std::size_t n2 = 0;

  ItemResult a, b, c10, c11, d, e;
  std::vector<ItemResult> c10_per_i;  // i = 1..n2-3
  std::size_t c11_dim = 0;            // dim(Dbar + [a, D^(n2-3)])

  std::vector<std::size_t> G_dims;  // G_0 = Dbar, G_1, ...
  std::size_t s = 0;
  std::size_t n1 = 0, n11 = 0, n12 = 0;
  int case_tag = 0;  // 0 until all items pass
  bool degenerate = false;            // Dbar = T(X)
  bool extended_chained_note = false; // degenerate with n3 = 0
  std::array<std::size_t, 2> brunovsky{0, 0};
  std::vector<CrossCheck> cross_checks;

  std::uint64_t seed = 0;
  int samples = 0;
  std::int64_t bound = 0;
  SampleStats sample_log;

  // Kept for flat outputs and the pipeline.
  std::vector<Distribution> D;        // D_1..D_{n3+1}
  Distribution D_n3;                  // D_{n3}; zero-dimensional when n3 = 0
  std::vector<Distribution> derived;  // D_{n3+1}^(0)..Dbar
  std::vector<Distribution> cauchy;   // C(D_{n3+1}^(i)), i = 1..n2-3
  std::vector<Distribution> G;        // G_0..G_s

  bool passed() const noexcept { return outcome == Outcome::pass; }
  const Distribution& closure() const { return derived.back(); }
  /// D_{n3+1}^(n2-3).
  const Distribution& top_derived() const { return derived.at(n2 - 3); }
};

StructureReport check_theorem1(const AffineSystem& sys, const ZeroTestConfig& cfg);

/// 1: two x1 chains, 2: none, 3: one. Requires a passing report.
int classify_case(const StructureReport& report);

}  // namespace flattri::flatness
