#pragma once

#include "mcf4d/parallel.hpp"
#include "mcf4d/stencil.hpp"
#include "mcf4d/types.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace mcf4d {

/// Scale applied to the Frobenius norm of the derivative of J_Sigma.
///
/// With J_Sigma = e2 e1^T - e1 e2^T + v2 v1^T - v1 v2^T the plain Frobenius
/// norm counts each second-fundamental-form combination four times (two skew
/// blocks, each with two copies); the Kahler-angle evolution law pins the
/// factor 1/4 (checked by the calibration tests on the symplectic graph flow).
inline constexpr double kNablaJScale = 0.25;

/// Nodes with sin^2(alpha) below this are excluded from pointwise |nabla J|^2 checks.
inline constexpr double kHolomorphicFilter = 1e-6;

/// |Omega(e1, e2)| below this marks the Lagrangian angle as undefined.
inline constexpr double kOmegaVanishes = 1e-12;

/// det g relative to |F_1|^2 |F_2|^2 below this is a collapsed cell.
inline constexpr double kDegenerateMetric = 1e-12;

/// Rotation angles (tangent, normal) applied to the canonical frames at a node.
using FrameGauge = std::function<std::array<double, 2>(NodeIndex)>;

struct BuildOptions {
  Exec exec = Exec::parallel;
  bool with_nabla_j = true;
  FrameGauge gauge;  // empty: canonical deterministic frames
};

/// Per-node discrete differential geometry of an immersed surface in R^4.
struct GeometryBundle {
  ParamGrid grid;
  std::shared_ptr<const GridOps> ops;

  std::vector<std::array<Vec4, 2>> tangents;  // dF/du1, dF/du2
  std::vector<Mat2> metric;
  std::vector<Mat2> inverse_metric;
  std::vector<double> area_element;
  std::vector<std::array<Mat2, 2>> christoffel;  // [k](i, j) = Gamma^k_ij
  std::vector<std::array<Vec4, 2>> tangent_frame;
  std::vector<std::array<Vec4, 2>> normal_frame;  // {e1, e2, v1, v2} positively oriented
  std::vector<std::array<Mat2, 2>> second_ff;     // [alpha](i, j) = h^alpha_ij
  std::vector<Vec4> mean_curvature;
  std::vector<double> norm_a2;
  std::vector<double> norm_h2;
  std::vector<double> cos_alpha;
  std::vector<std::complex<double>> lag_angle_unit;  // NaN where Omega vanishes
  std::vector<double> omega_modulus;
  std::vector<double> nabla_bar_j2;         // NaN when not computed
  std::vector<std::uint8_t> j_admissible;   // 1 where sin^2(alpha) >= kHolomorphicFilter

  std::size_t size() const { return area_element.size(); }
  bool has_nabla_j() const { return !nabla_bar_j2.empty() && nabla_bar_j2.size() == size(); }
  double min_det_g() const;
  /// Node-wise quadrature of the area, sum of sqrt(det g) * du1 * du2.
  double area() const;
};

GeometryBundle build_geometry(const SurfaceState& state, const BuildOptions& options = {});

/// Mean curvature vector only, computed as the normal part of g^ij d_ij F.
/// This is the flow velocity and the independent route to H used by tests.
std::vector<Vec4> mean_curvature_velocity(const SurfaceState& state, Exec exec = Exec::parallel);

/// cos(alpha) = omega(e1, e2), omega = dx1^dy1 + dx2^dy2.
std::vector<double> kahler_angle(const SurfaceState& state, const GeometryBundle& bundle);

struct LagrangianAngle {
  std::vector<std::complex<double>> unit;  // e^{i theta}; NaN at vanishing nodes
  std::vector<double> modulus;             // |Omega(e1, e2)|
  std::vector<NodeIndex> vanishing;        // nodes with modulus < kOmegaVanishes
};

/// Omega(e1, e2) / |Omega(e1, e2)| with Omega = dz1 ^ dz2.
LagrangianAngle lagrangian_angle(const SurfaceState& state, const GeometryBundle& bundle);

/// |nabla-bar J_Sigma|^2 where admissible, nullopt at nodes close to complex points.
std::vector<std::optional<double>> nabla_bar_J_norm(const SurfaceState& state, const GeometryBundle& bundle);

/// Laplace-Beltrami g^ij (d_ij f - Gamma^k_ij d_k f).
std::vector<double> laplace_beltrami(std::span<const double> field, const GeometryBundle& bundle);

/// |grad f|^2 = g^ij d_i f d_j f.
std::vector<double> tangential_gradient(std::span<const double> field, const GeometryBundle& bundle);

/// <grad a, grad b> = g^ij d_i a d_j b.
std::vector<double> gradient_dot(std::span<const double> a, std::span<const double> b, const GeometryBundle& bundle);

/// Coordinate derivatives (d_1 f, d_2 f) of a scalar field at every node.
std::vector<std::array<double, 2>> coordinate_gradient(std::span<const double> field, const GeometryBundle& bundle);

/// |nabla^perp V|^2 for a normal vector field V (e.g. H): g^ij <(d_i V)^perp, (d_j V)^perp>.
std::vector<double> normal_gradient_norm2(std::span<const Vec4> field, const GeometryBundle& bundle);

/// sum_beta |grad X^beta|^2 for the position field, including lattice shifts.
std::vector<double> position_gradient_norm2(const SurfaceState& state, const GeometryBundle& bundle);

/// Real 4x4 matrix of J_Sigma at a node.
Mat4 j_sigma(const GeometryBundle& bundle, NodeIndex node);

}  // namespace mcf4d
