#pragma once

#include "mcf4d/flow.hpp"
#include "mcf4d/geometry.hpp"
#include "mcf4d/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace testing {

using namespace mcf4d;

inline SurfaceState make(ScenarioName name, int n1, int n2 = -1) {
  ScenarioSpec s;
  s.name = name;
  s.n1 = n1;
  s.n2 = n2 < 0 ? n1 : n2;
  return generate_scenario(s);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) m = std::max(m, std::abs(x));
  }
  return m;
}

template <class F>
double max_over_nodes(std::size_t n, F&& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(f(i)));
  return m;
}

}  // namespace testing
