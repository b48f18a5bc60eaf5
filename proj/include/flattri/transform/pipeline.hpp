#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flattri/flatness/flat_output.hpp"
#include "flattri/transform/triangular.hpp"

namespace flattri::transform {

using flatness::FlatOutputCandidate;
using flatness::FlatOutputRequest;
using flatness::StructureReport;

/// A failed step; `step` names it ("step 1", "step 5", ...).
class PipelineError : public Error {
 public:
  PipelineError(std::string step, const std::string& what) : Error(step + ": " + what), step_(std::move(step)) {}
  const std::string& step() const noexcept { return step_; }

 private:
  std::string step_;
};

struct NamedDistribution {
  std::string name;
  geom::Distribution distribution;
};

/// D_1..D_n3, C(D_{n3+1}^(i)) for i = 1..n2-3, the closure, G_1..G_s.
std::vector<NamedDistribution> adapted_sequence(const StructureReport& report);

/// The states grouped by the first member of the sequence containing their
/// coordinate field.
struct AdaptedCoordinates {
  bool ok = false;
  std::string diagnostic;
  std::vector<std::vector<Symbol>> x3_levels;  // [k-1]: D_k minus D_{k-1}
  std::vector<Symbol> x2_top;                  // closure minus C(D^(n2-3))
  std::vector<std::vector<Symbol>> x2_lower;   // [m-4]: x2 position m = 4..n2
  std::vector<std::vector<Symbol>> x1_levels;  // [i-1]: G_i minus G_{i-1}
};

/// Every member of the sequence must be spanned by coordinate fields.
AdaptedCoordinates verify_adapted_coordinates(const AffineSystem& sys, const StructureReport& report,
                                              const ZeroTestConfig& cfg);

struct TranscriptEntry {
  std::string label;
  std::vector<std::string> detail;  // substitutions and feedbacks of the step
  AffineSystem system;              // after the step
};

struct PipelineResult {
  AffineSystem system;  // in triangular form, states in block order
  CoordChange change;   // from the input states to system.states
  Feedback feedback;    // in the final coordinates
  TriangularPattern pattern;
  FlatOutputCandidate flat;
  std::vector<TranscriptEntry> transcript;
  TriangularCheck form;         // on `system`
  TriangularCheck conjugation;  // on the input transformed by change and feedback
};

/// Steps 1 to 6. `step1` is an optional change into adapted coordinates; the
/// flat output is suggested unless `request` fixes it.
PipelineResult run_pipeline(const AffineSystem& sys, const StructureReport& report, const ZeroTestConfig& cfg,
                            const std::optional<CoordChange>& step1 = std::nullopt,
                            const FlatOutputRequest& request = {});

/// Chained (or extended chained) form with phi1, phi2 as the top variables.
PipelineResult appendix_chained_transform(const AffineSystem& sys, const Expr& phi1, const Expr& phi2,
                                          const ZeroTestConfig& cfg);

/// Labelled systems separated by "---" lines; every system re-loads.
std::string format_transcript(const std::vector<TranscriptEntry>& transcript);

/// Same states and fields with the states permuted into `order`.
AffineSystem reorder_states(const AffineSystem& sys, const Coordinates& order);

}  // namespace flattri::transform
