#include "mcf4d/scenario.hpp"

#include <cmath>
#include <numbers>

namespace mcf4d {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::BadParameter, what);
}

}  // namespace

std::string_view scenario_name(ScenarioName name) {
  switch (name) {
    case ScenarioName::plane: return "plane";
    case ScenarioName::complex_line: return "complex_line";
    case ScenarioName::sphere_ode: return "sphere_ode";
    case ScenarioName::clifford_torus: return "clifford_torus";
    case ScenarioName::lagrangian_graph: return "lagrangian_graph";
    case ScenarioName::symplectic_graph: return "symplectic_graph";
    case ScenarioName::grim_reaper_product: return "grim_reaper_product";
  }
  return "unknown";
}

ScenarioName parse_scenario_name(std::string_view text) {
  for (auto name : {ScenarioName::plane, ScenarioName::complex_line, ScenarioName::sphere_ode,
                    ScenarioName::clifford_torus, ScenarioName::lagrangian_graph, ScenarioName::symplectic_graph,
                    ScenarioName::grim_reaper_product}) {
    if (scenario_name(name) == text) return name;
  }
  throw Error(ErrorKind::BadConfig, "unknown scenario '" + std::string(text) + "'");
}

void ScenarioSpec::validate() const {
  if (name != ScenarioName::sphere_ode) {
    require(n1 >= ParamGrid::kMinNodes && n2 >= ParamGrid::kMinNodes,
            "resolution must be at least 8 x 8 (got " + std::to_string(n1) + " x " + std::to_string(n2) + ")");
  }
  switch (name) {
    case ScenarioName::clifford_torus:
    case ScenarioName::sphere_ode:
      require(radius > 0.0, "radius must be positive");
      break;
    case ScenarioName::lagrangian_graph:
    case ScenarioName::symplectic_graph:
      require(amplitude > 0.0, "amplitude must be positive");
      break;
    case ScenarioName::grim_reaper_product:
      require(x_max > 0.0 && x_max < kPi / 2, "grim reaper x_max must lie in (0, pi/2)");
      require(n1 % 2 == 1, "grim reaper n1 must be odd so that x = 0 is a node");
      break;
    case ScenarioName::plane:
    case ScenarioName::complex_line:
      require(half_width > 0.0, "half_width must be positive");
      break;
  }
}

double lagrangian_potential(double amplitude, double u, double v) { return amplitude * std::sin(u) * std::sin(v); }

SurfaceState generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  SurfaceState s;
  auto fill = [&s](auto&& immersion) {
    const std::size_t n = s.grid.size();
    s.positions.resize(n);
    for (std::size_t node = 0; node < n; ++node) {
      const auto [i1, i2] = s.grid.ij(node);
      s.positions[node] = immersion(s.grid.axis[0].coord(i1), s.grid.axis[1].coord(i2));
    }
  };

  switch (spec.name) {
    case ScenarioName::plane:
    case ScenarioName::complex_line: {
      const double w = spec.half_width;
      const bool complex = spec.name == ScenarioName::complex_line;
      if (spec.periodic) {
        s.grid.axis = {ParamGrid::periodic_axis(spec.n1, 2 * w, -w), ParamGrid::periodic_axis(spec.n2, 2 * w, -w)};
        s.period_shift[0] = Vec4(2 * w, 0, 0, 0);
        s.period_shift[1] = complex ? Vec4(0, 2 * w, 0, 0) : Vec4(0, 0, 2 * w, 0);
      } else {
        s.grid.axis = {ParamGrid::clamped_axis(spec.n1, -w, w), ParamGrid::clamped_axis(spec.n2, -w, w)};
      }
      if (complex) {
        fill([](double u, double v) { return Vec4(u, v, 0, 0); });
      } else {
        fill([](double u, double v) { return Vec4(u, 0, v, 0); });
      }
      break;
    }
    case ScenarioName::sphere_ode: {
      // Lat-long patch away from the poles, in the hyperplane y2 = 0; used for
      // snapshots only, the radius itself evolves by the reduced ODE.
      const double r = spec.radius;
      s.grid.axis = {ParamGrid::clamped_axis(std::max(spec.n1, 8), 0.5, kPi - 0.5),
                     ParamGrid::periodic_axis(std::max(spec.n2, 8), 2 * kPi)};
      fill([r](double th, double ph) {
        return Vec4(r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph), r * std::cos(th), 0.0);
      });
      break;
    }
    case ScenarioName::clifford_torus: {
      const double r = spec.radius;
      s.grid.axis = {ParamGrid::periodic_axis(spec.n1, 2 * kPi), ParamGrid::periodic_axis(spec.n2, 2 * kPi)};
      fill([r](double phi, double psi) {
        return Vec4(r * std::cos(phi), r * std::sin(phi), r * std::cos(psi), r * std::sin(psi));
      });
      break;
    }
    case ScenarioName::lagrangian_graph: {
      // F = (u, w_u, v, w_v) makes omega restrict to w_uv - w_vu = 0.
      const double a = spec.amplitude;
      s.grid.axis = {ParamGrid::periodic_axis(spec.n1, 2 * kPi, -kPi), ParamGrid::periodic_axis(spec.n2, 2 * kPi, -kPi)};
      s.period_shift[0] = Vec4(2 * kPi, 0, 0, 0);
      s.period_shift[1] = Vec4(0, 0, 2 * kPi, 0);
      fill([a](double u, double v) {
        return Vec4(u, a * std::cos(u) * std::sin(v), v, a * std::sin(u) * std::cos(v));
      });
      break;
    }
    case ScenarioName::symplectic_graph: {
      const double eps = spec.amplitude;
      s.grid.axis = {ParamGrid::periodic_axis(spec.n1, 2 * kPi, -kPi), ParamGrid::periodic_axis(spec.n2, 2 * kPi, -kPi)};
      s.period_shift[0] = Vec4(2 * kPi, 0, 0, 0);
      s.period_shift[1] = Vec4(0, 2 * kPi, 0, 0);
      fill([eps](double u, double v) { return Vec4(u, v, eps * std::sin(u), eps * std::cos(v)); });
      break;
    }
    case ScenarioName::grim_reaper_product: {
      // Arclength parametrization of y = -log cos x: x = gd(s), y = log cosh s.
      const double s_max = std::asinh(std::tan(spec.x_max));
      s.grid.axis = {ParamGrid::clamped_axis(spec.n1, -s_max, s_max), ParamGrid::clamped_axis(spec.n2, -1.0, 1.0)};
      fill([](double arc, double v) {
        const double x = 2.0 * std::atan(std::tanh(0.5 * arc));
        return Vec4(x, std::log(std::cosh(arc)), v, 0.0);
      });
      break;
    }
  }
  s.time = 0.0;
  return s;
}

SphereOdeState generate_sphere_ode(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.name != ScenarioName::sphere_ode) {
    throw Error(ErrorKind::BadParameter, "generate_sphere_ode requires the sphere_ode scenario");
  }
  return SphereOdeState{spec.radius, 0.0};
}

std::vector<SurfaceState> grim_reaper_translating_states(const ScenarioSpec& spec, const std::vector<double>& times) {
  if (spec.name != ScenarioName::grim_reaper_product) {
    throw Error(ErrorKind::BadParameter, "translating states require the grim_reaper_product scenario");
  }
  const SurfaceState base = generate_scenario(spec);
  std::vector<SurfaceState> out;
  out.reserve(times.size());
  for (double t : times) {
    SurfaceState s = base;
    for (auto& p : s.positions) p[1] += t;
    s.time = t;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mcf4d
