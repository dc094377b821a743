#pragma once

#include "mcf4d/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace mcf4d {

enum class ScenarioName {
  plane,
  complex_line,
  sphere_ode,
  clifford_torus,
  lagrangian_graph,
  symplectic_graph,
  grim_reaper_product,
};

std::string_view scenario_name(ScenarioName name);
ScenarioName parse_scenario_name(std::string_view text);

/// Initial-data description. Parameters not used by a scenario are ignored.
struct ScenarioSpec {
  ScenarioName name = ScenarioName::plane;
  int n1 = 64;
  int n2 = 64;
  double radius = 1.0;      // clifford_torus, sphere_ode
  double amplitude = 0.1;   // lagrangian_graph (potential), symplectic_graph (epsilon)
  double x_max = 1.4;       // grim_reaper_product truncation |x| <= x_max
  double half_width = 10.0; // plane / complex_line parameter half-width
  bool periodic = true;     // plane / complex_line: lattice-periodic or clamped patch

  void validate() const;
};

/// Exact parametric immersion at t = 0.
///
/// Graph scenarios use the parameter cell [-pi, pi)^2 with lattice shifts of
/// 2 pi along the base directions, so the stored cell tiles a complete surface.
SurfaceState generate_scenario(const ScenarioSpec& spec);

/// Reduced state of the shrinking round sphere: only the radius evolves.
struct SphereOdeState {
  double radius = 1.0;
  double time = 0.0;
};

SphereOdeState generate_sphere_ode(const ScenarioSpec& spec);

/// Analytic translating-soliton trace of the grim-reaper product: the state at
/// time t is the t = 0 state translated by t along y1.
std::vector<SurfaceState> grim_reaper_translating_states(const ScenarioSpec& spec, const std::vector<double>& times);

/// Lagrangian potential used by lagrangian_graph: w(u, v) = a sin u sin v.
double lagrangian_potential(double amplitude, double u, double v);

}  // namespace mcf4d
