#pragma once

#include "mcf4d/flow.hpp"
#include "mcf4d/functionals.hpp"

#include <string>

namespace mcf4d {

struct NormalizedFlow {
  FlowTrace trace;
  double scale = 1.0;  // lambda with F -> lambda F, t -> lambda^2 t
  double sup_a2_before = 0.0;
};

/// Parabolic rescaling about the origin so that sup |A|^2 over the stored states is 1.
NormalizedFlow normalize_flow(const FlowTrace& trace);

struct ExtremalStats {
  double delta = 0.0;  // inf of the angle cosine over stored spacetime nodes
  double h2 = 0.0;     // sup of |H|^2
  double sup_a2 = 0.0;
};

/// Throws KindMismatch when a lagrangian evaluation meets |cos alpha| > 1e-6.
ExtremalStats extremal_stats(const FlowTrace& trace, WeightKind kind);

enum class Verdict { satisfied, violated };

std::string_view verdict_name(Verdict v);

struct TheoremHypotheses {
  bool ancient = false;  // a computed flow has a finite past
  bool complete = false;
  bool area_ratio_checked = false;
  bool sup_a2_normalized = false;
};

struct TheoremReport {
  WeightKind kind = WeightKind::symplectic;
  double sup_a2_before = 0.0;
  double scale_applied = 1.0;
  double h2 = 0.0;
  double delta = 0.0;
  double lhs = 0.0;  // delta e^{h^2/4} (symplectic) or delta e^{h^2/2} (lagrangian)
  Verdict verdict = Verdict::satisfied;
  TheoremHypotheses hypotheses;
  bool theorem_applies = false;
  std::string interpretation;
};

TheoremReport check_main_theorem(const FlowTrace& trace, WeightKind kind);

struct GradientProbe {
  double max_gf = 0.0;
  std::size_t max_time_index = 0;
  NodeIndex max_node = 0;
  bool interior_max = false;
  double inequality_residual_min = 0.0;  // min of (Lap - d_t) f - RHS
  double identity_defect = 0.0;          // max |(Lap - d_t) f - exact expansion|
  double sup_a2 = 0.0;                   // the inequality assumes sup |A|^2 <= 1
  std::size_t evaluated_nodes = 0;
};

/// Maximum-principle probe for f = e^{p|H|^2} / cos^2 localized by g = psi(|X|^2 / R^2).
GradientProbe gradient_estimate_probe(const FlowTrace& trace, double p, double radius, WeightKind kind);

/// Per-node pieces of the probe at the middle of three states.
struct GradientResidual {
  std::vector<double> inequality;  // (Lap - d_t) f - RHS; NaN where not evaluated
  std::vector<double> defect;      // (Lap - d_t) f - exact expansion
};

GradientResidual gradient_estimate_residual(const SurfaceState& prev, const SurfaceState& mid,
                                            const SurfaceState& next, double p, WeightKind kind);

}  // namespace mcf4d
