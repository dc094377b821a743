#pragma once

#include "mcf4d/flow.hpp"
#include "mcf4d/geometry.hpp"
#include "mcf4d/types.hpp"

#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace mcf4d {

/// Floor on the weight denominators cos(theta) / cos(alpha).
inline constexpr double kWeightFloor = 1e-3;

/// Gaussian integrands are dropped where the exponent is below -40.
inline constexpr double kGaussianCutoffExponent = 40.0;

enum class WeightKind { lagrangian, symplectic };

std::string_view weight_kind_name(WeightKind kind);
WeightKind parse_weight_kind(std::string_view text);

/// Center (X0, t0) of the backward heat kernel
/// rho = exp(-|X - X0|^2 / (4 (t0 - t))) / (4 pi (t0 - t)).
struct GaussianWeight {
  Vec4 center = Vec4::Zero();
  double reference_time = 1.0;
};

/// Angle cosine selected by the weight kind: Re e^{i theta} or cos(alpha).
std::vector<double> angle_cosine(const GeometryBundle& bundle, WeightKind kind);

double gaussian_density(const GaussianWeight& weight, const SurfaceState& state, const GeometryBundle& bundle);

/// Integral of rho / cos(theta) (or rho / cos(alpha)).
double weighted_psi(const GaussianWeight& weight, const SurfaceState& state, const GeometryBundle& bundle,
                    WeightKind kind);

/// Psi and the three nonnegative right-hand-side integrals of its monotonicity law at one state.
struct MonotonicityTerms {
  double psi = 0.0;
  double drift = 0.0;        // int w rho |H + (F - X0)^perp / (2 (t0 - t))|^2
  double dissipation = 0.0;  // int w rho |H|^2 (lagrangian) or |nabla-bar J|^2 (symplectic)
  double gradient = 0.0;     // int 2 |grad c|^2 / c^3 rho
  double dissipation_half_h2 = 0.0;  // symplectic only: int w rho |H|^2 / 2
};

/// Requires a bundle built with nabla-bar J for the symplectic kind.
MonotonicityTerms monotonicity_terms(const GaussianWeight& weight, const SurfaceState& state,
                                     const GeometryBundle& bundle, WeightKind kind);

struct MonotonicityReport {
  WeightKind kind = WeightKind::lagrangian;
  std::vector<double> times;           // interior samples
  std::vector<double> psi;             // interior samples
  std::vector<double> lhs;             // centered dPsi/dt
  std::vector<double> rhs_drift;
  std::vector<double> rhs_dissipation;
  std::vector<double> rhs_gradient;
  std::vector<double> residual;        // lhs + drift + dissipation + gradient
  std::vector<double> rhs_dissipation_half_h2;  // symplectic only
};

/// Step hook filling the psi / rhs_* columns of the scalar timeseries.
StepHook psi_hook(const GaussianWeight& weight, WeightKind kind);

MonotonicityReport monotonicity_scan(const FlowTrace& trace, const GaussianWeight& weight, WeightKind kind);

/// Test field f of the weighted-integral identity d/dt int f rho = int (f_t - Lap f) rho - int f rho |drift|^2.
enum class TestField { one, inv_cos_theta, inv_cos_alpha };

struct IdentitySeries {
  std::vector<double> times;
  std::vector<double> lhs;       // centered d/dt int f rho
  std::vector<double> source;    // int (f_t - Lap f) rho
  std::vector<double> drift;     // int f rho |H + (X - X0)^perp / (2 (t0 - t))|^2
  std::vector<double> residual;  // lhs - source + drift
};

/// `measured_source` selects how f_t - Lap f is obtained: from the closed-form
/// evolution law of f (false) or from centered time differences and the
/// discrete Laplacian (true).
IdentitySeries weighted_integral_identity_check(const FlowTrace& trace, const GaussianWeight& weight, TestField field,
                                                bool measured_source = false);

enum class Quantity { cos_theta, inv_cos_theta, cos_alpha, inv_cos2_alpha, H2 };

std::string_view quantity_name(Quantity q);
Quantity parse_quantity(std::string_view text);

/// Residual LHS - RHS of an evolution identity at the middle of three states,
/// per node; NaN at nodes excluded by the holomorphic filter.
std::vector<double> evolution_residual_at(const SurfaceState& prev, const SurfaceState& mid, const SurfaceState& next,
                                          Quantity quantity);

struct EvolutionResidual {
  Quantity quantity = Quantity::cos_theta;
  std::vector<double> times;                  // interior stored times
  std::vector<std::vector<double>> residual;  // [time][node]
  std::vector<double> max_abs;                // [time], over finite entries
};

EvolutionResidual evolution_residual(const FlowTrace& trace, Quantity quantity);

/// sum over orthonormal i, j of (H . h_ij)^2 at a node.
double h_dot_a_squared(const GeometryBundle& bundle, NodeIndex node);

/// True on the two outermost node rows of a clamped axis, which the flow holds fixed.
bool frozen_node(const ParamGrid& grid, NodeIndex node);

/// Weights of the three-point derivative at the middle of (t0, t1, t2).
std::array<double, 3> centered_time_weights(double t0, double t1, double t2);

/// Largest |a - b| over nodes where both are finite.
double max_abs_difference(std::span<const double> a, std::span<const double> b);

/// Observed orders log2(d_j / d_{j+1}) from successive differences
/// d_j = max |r_j - r_{j+1}| of per-node residual fields at step ratio 2.
/// Cancels the part of the residual that does not depend on the refined step.
std::vector<double> successive_difference_orders(const std::vector<std::vector<double>>& fields);

struct PinchingResult {
  double min_margin = std::numeric_limits<double>::infinity();
  std::vector<NodeIndex> violating_nodes;
  bool vacuous = true;
};

/// |nabla-bar J|^2 - |H|^2 / 2 over admissible nodes.
PinchingResult pinching_check(const GeometryBundle& bundle);

struct CutoffValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// C^2 cutoff: 1 on [0, 1/2], quintic smoothstep down to 0 on [1/2, 1], 0 beyond.
CutoffValue cutoff_psi(double r);

/// |psi'|^2 / psi, using its closed form near r = 1.
double cutoff_grad_ratio(double r);

struct CutoffConstants {
  double sup_neg_d2 = 0.0;     // sup(-psi'')
  double sup_grad_ratio = 0.0; // sup |psi'|^2 / psi
  double c_psi = 0.0;          // max of the two
  double c1 = 0.0;             // sup over r in [0,1] of 4 |psi'| + 4 r |psi''|
  double c2 = 0.0;             // sup over r in [0,1] of 4 r |psi'|^2 / psi
};

const CutoffConstants& cutoff_constants();

/// Localizer g = psi(|X - center|^2 / R^2) at every node.
std::vector<double> localizer(const SurfaceState& state, double radius, const Vec4& center = Vec4::Zero());

struct LocalizerBounds {
  double max_heat = 0.0;       // R^2 max |(Lap - d_t) g|
  double max_grad_ratio = 0.0; // R^2 max |grad g|^2 / g over g > 0
};

LocalizerBounds localizer_scan(const FlowTrace& trace, double radius, const Vec4& center = Vec4::Zero());

/// Admissible open interval for p: (0, 1) lagrangian, (0, 1/2) symplectic.
double default_p(WeightKind kind);
void check_p(double p, WeightKind kind);

struct SpacetimeMax {
  std::size_t time_index = 0;
  NodeIndex node = 0;
  double value = -std::numeric_limits<double>::infinity();
};

struct LocalizedField {
  std::vector<double> times;
  std::vector<std::vector<double>> f;   // e^{p|H|^2} / cos^2
  std::vector<std::vector<double>> gf;  // localizer * f
  SpacetimeMax max_gf;
};

LocalizedField localized_f(const FlowTrace& trace, double p, double radius, WeightKind kind,
                           const Vec4& center = Vec4::Zero());

/// One connected piece of a surface for measure computations.
struct SurfacePiece {
  const SurfaceState* state;
  const GeometryBundle* bundle;
};

/// mu(Sigma ∩ B_R(center)) / R^2 per radius.
std::vector<double> area_ratio(const SurfaceState& state, const GeometryBundle& bundle, const Vec4& center,
                               std::span<const double> radii);
std::vector<double> area_ratio(std::span<const SurfacePiece> pieces, const Vec4& center,
                               std::span<const double> radii);

}  // namespace mcf4d
