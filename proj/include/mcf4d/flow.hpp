#pragma once

#include "mcf4d/geometry.hpp"
#include "mcf4d/scenario.hpp"
#include "mcf4d/types.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mcf4d {

/// Diagnostics recorded after every accepted step (and for the initial state).
struct StepScalars {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  long step = 0;
  double time = 0.0;
  double area = kNaN;
  double max_a2 = kNaN;
  double max_h2 = kNaN;
  double min_cos_alpha = kNaN;
  double min_cos_theta = kNaN;
  double psi = kNaN;
  double rhs_drift = kNaN;
  double rhs_dissipation = kNaN;
  double rhs_gradient = kNaN;
  double min_det_g = kNaN;
};

enum class Termination { reached_t_end, blowup_detected, degenerate_mesh, step_limit };

std::string_view termination_name(Termination t);

/// Time-ordered flow record. `states` holds every `stride`-th state plus the
/// final one; `scalars` has one row per accepted step.
struct FlowTrace {
  std::vector<SurfaceState> states;
  std::vector<StepScalars> scalars;
  std::vector<double> reduced_radius;  // sphere_ode only, one per scalar row
  Termination reason = Termination::reached_t_end;
  std::string failure;
};

struct FlowControls {
  double t_end = 1.0;
  long max_steps = 1000000;
  double blowup_threshold = 1e4;
  int stride = 1;
  double safety = 0.8;
  std::optional<double> fixed_dt;  // must not exceed cfl_dt at safety 1
  Exec exec = Exec::parallel;
};

/// Extra per-step diagnostics filled by the caller (Gaussian functionals).
using StepHook = std::function<void(const SurfaceState&, const GeometryBundle&, StepScalars&)>;

enum class SingularityClass { TypeI, TypeII, Undetermined };

std::string_view singularity_class_name(SingularityClass c);

struct SingularityVerdict {
  double estimated_t = 0.0;
  double type_i_sup = 0.0;
  SingularityClass classification = SingularityClass::Undetermined;
  std::size_t window_begin = 0;  // first scalar row of the fit window
};

/// Explicit parabolic time-step bound: safety * min lambda_min(g) * min(h)^2 / 8.
double cfl_dt(const GeometryBundle& bundle, double safety);

/// One classical RK4 step of dF/dt = H. On clamped axes the two outermost
/// node rows are held fixed.
SurfaceState step(const SurfaceState& state, double dt, Exec exec = Exec::parallel);

/// Fill the geometric columns of a scalar row from a bundle.
StepScalars summarize(const SurfaceState& state, const GeometryBundle& bundle, long step_index);

FlowTrace run_flow(const SurfaceState& initial, const FlowControls& controls, const StepHook& hook = {});

/// Shrinking round sphere in its reduced form dr/dt = -2/r, integrated by RK4.
FlowTrace run_sphere_ode(const SphereOdeState& initial, const FlowControls& controls);

/// Reciprocal-linear fit of max|A|^2 ~ c / (T - t) on the last quarter of the samples.
SingularityVerdict estimate_singular_time(const FlowTrace& trace);

/// Same analysis on a bare (time, max|A|^2) series; used for injected fixtures.
SingularityVerdict estimate_singular_time(std::span<const double> times, std::span<const double> max_a2);

/// States at t* - d, t*, t* + d for every d in `deltas` (decreasing). The flow
/// runs at the CFL step up to t* - deltas[0], then with the fixed step
/// deltas.back() / substeps, which must divide every delta.
std::vector<std::array<SurfaceState, 3>> centered_samples(const SurfaceState& initial, double t_star,
                                                          std::span<const double> deltas, int substeps,
                                                          Exec exec = Exec::parallel);

/// argmax with ties resolved to the smallest index.
std::size_t argmax_first(std::span<const double> values);

}  // namespace mcf4d
