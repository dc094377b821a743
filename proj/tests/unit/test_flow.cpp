#include "doctest.h"
#include "support.hpp"

#include "mcf4d/functionals.hpp"

#include <numbers>

using namespace mcf4d;
using testing::make;

namespace {

double mean_radius(const SurfaceState& s, int pair) {
  double sum = 0.0;
  for (const auto& p : s.positions) sum += std::hypot(p[2 * pair], p[2 * pair + 1]);
  return sum / static_cast<double>(s.positions.size());
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("cfl step") {
  ScenarioSpec sp;
  sp.name = ScenarioName::plane;
  sp.periodic = false;
  sp.half_width = 1.0;
  sp.n1 = sp.n2 = 21;  // spacing 0.1
  const auto plane = generate_scenario(sp);
  CHECK(cfl_dt(build_geometry(plane), 1.0) == doctest::Approx(1.25e-3).epsilon(1e-12));
  CHECK(cfl_dt(build_geometry(plane), 0.5) == doctest::Approx(6.25e-4).epsilon(1e-12));

  const auto torus = make(ScenarioName::clifford_torus, 64);
  const double h = 2 * std::numbers::pi / 64;
  CHECK(cfl_dt(build_geometry(torus), 0.8) == doctest::Approx(0.8 * h * h / 8).epsilon(1e-4));

  auto big = torus;
  for (auto& p : big.positions) p *= 3.0;
  CHECK(cfl_dt(build_geometry(big), 0.8) / cfl_dt(build_geometry(torus), 0.8) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("plane is a fixed point") {
  for (bool periodic : {true, false}) {
    ScenarioSpec sp;
    sp.name = ScenarioName::plane;
    sp.periodic = periodic;
    sp.n1 = sp.n2 = 16;
    const auto s = generate_scenario(sp);
    const auto t = step(s, 1e-3);
    for (std::size_t i = 0; i < s.positions.size(); ++i) CHECK((t.positions[i] - s.positions[i]).norm() < 1e-14);
    CHECK(t.time == doctest::Approx(1e-3));

    FlowControls c;
    c.t_end = 1.0;
    const auto tr = run_flow(s, c);
    CHECK(tr.reason == Termination::reached_t_end);
    CHECK(tr.scalars.back().time == 1.0);
    CHECK(tr.scalars.back().area == doctest::Approx(tr.scalars.front().area).epsilon(1e-12));
  }
}

TEST_CASE("Clifford torus shrinks like its circles") {
  const auto s = make(ScenarioName::clifford_torus, 64);
  FlowControls c;
  c.t_end = 0.1;
  c.stride = 1000000;
  const auto tr = run_flow(s, c);
  REQUIRE(tr.reason == Termination::reached_t_end);
  const auto& last = tr.states.back();
  CHECK(last.time == doctest::Approx(0.1));
  CHECK(std::abs(mean_radius(last, 0) - std::sqrt(0.8)) < 1e-4);
  CHECK(std::abs(mean_radius(last, 1) - std::sqrt(0.8)) < 1e-4);
}

TEST_CASE("Clifford blow-up is Type I") {
  const auto s = make(ScenarioName::clifford_torus, 32);
  FlowControls c;
  c.t_end = 1.0;
  c.blowup_threshold = 1e4;
  c.stride = 100;
  const auto tr = run_flow(s, c);
  REQUIRE(tr.reason == Termination::blowup_detected);
  CHECK(tr.scalars.back().time == doctest::Approx(0.5).epsilon(1e-3));
  const auto v = estimate_singular_time(tr);
  CHECK(v.estimated_t == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(v.type_i_sup == doctest::Approx(1.0).epsilon(0.05));
  CHECK(v.classification == SingularityClass::TypeI);
}

TEST_CASE("sphere reduced ODE") {
  FlowControls c;
  c.t_end = 0.2;
  const auto tr = run_sphere_ode(SphereOdeState{1.0, 0.0}, c);
  REQUIRE(tr.reason == Termination::reached_t_end);
  for (std::size_t i = 0; i < tr.scalars.size(); ++i) {
    CHECK(std::abs(tr.reduced_radius[i] - std::sqrt(1.0 - 4.0 * tr.scalars[i].time)) < 1e-10);
  }

  c.t_end = 1.0;
  c.blowup_threshold = 1e6;
  const auto bl = run_sphere_ode(SphereOdeState{1.0, 0.0}, c);
  REQUIRE(bl.reason == Termination::blowup_detected);
  const auto v = estimate_singular_time(bl);
  CHECK(v.estimated_t == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(v.type_i_sup == doctest::Approx(0.5).epsilon(0.01));
  CHECK(v.classification == SingularityClass::TypeI);
}

TEST_CASE("Type II fixture") {
  const double T = 1.0;
  std::vector<double> t, a;
  for (int k = 0; k <= 200; ++k) {
    const double gap = std::pow(10.0, -6.0 * k / 200.0);  // geometric in T - t
    t.push_back(T - gap);
    a.push_back(std::pow(gap, -1.5));
  }
  const auto v = estimate_singular_time(t, a);
  CHECK(v.classification == SingularityClass::TypeII);

  std::vector<double> b;
  for (double x : t) b.push_back(1.0 / (T - x));
  const auto w = estimate_singular_time(t, b);
  CHECK(w.classification == SingularityClass::TypeI);
  CHECK(w.estimated_t == doctest::Approx(T).epsilon(1e-12));
  CHECK(w.type_i_sup == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("singular time needs a blow-up") {
  const auto s = make(ScenarioName::plane, 16);
  FlowControls c;
  c.t_end = 0.1;
  const auto tr = run_flow(s, c);
  CHECK_THROWS_AS(estimate_singular_time(tr), Error);
  const std::vector<double> t{0, 1, 2}, a{1, 2, 3};
  try {
    estimate_singular_time(t, a);
    FAIL("expected InsufficientBlowup");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientBlowup);
  }
}

TEST_CASE("argmax ties go to the smallest index") {
  const std::vector<double> v{1.0, 3.0, 2.0, 3.0, 3.0};
  CHECK(argmax_first(v) == 1);
  const std::vector<double> w{5.0, 5.0};
  CHECK(argmax_first(w) == 0);
}

TEST_CASE("small Lagrangian graph flattens") {
  const auto s = make(ScenarioName::lagrangian_graph, 64);
  FlowControls c;
  c.t_end = 0.5;
  c.stride = 1000000;
  const auto tr = run_flow(s, c);
  REQUIRE(tr.reason == Termination::reached_t_end);
  for (std::size_t k = 1; k < tr.scalars.size(); ++k) {
    const auto& p = tr.scalars[k - 1];
    const auto& q = tr.scalars[k];
    CHECK(q.max_a2 <= p.max_a2 + 1e-12);
    CHECK(q.min_cos_theta >= p.min_cos_theta - 1e-8);
    CHECK(q.area < p.area + 1e-10);
    CHECK(std::abs(q.min_cos_alpha) < 1e-6);
  }
  CHECK(tr.scalars.back().max_a2 < 0.5 * tr.scalars.front().max_a2);
}

TEST_CASE("symplectic graph keeps its Kahler angle minimum") {
  const auto s = make(ScenarioName::symplectic_graph, 32);
  FlowControls c;
  c.t_end = 0.3;
  const auto tr = run_flow(s, c);
  REQUIRE(tr.reason == Termination::reached_t_end);
  for (std::size_t k = 1; k < tr.scalars.size(); ++k) {
    CHECK(tr.scalars[k].min_cos_alpha >= tr.scalars[k - 1].min_cos_alpha - 1e-8);
    CHECK(tr.scalars[k].area < tr.scalars[k - 1].area + 1e-10);
  }
}

TEST_CASE("area decays by the integral of |H|^2") {
  const auto s = make(ScenarioName::symplectic_graph, 32);
  const double dt = 1e-3;
  const auto a = step(s, -0.0 + dt);
  const auto b0 = build_geometry(s), b1 = build_geometry(a);
  double h2 = 0.0;
  for (std::size_t i = 0; i < b0.size(); ++i) {
    h2 += 0.5 * (b0.norm_h2[i] * b0.area_element[i] + b1.norm_h2[i] * b1.area_element[i]);
  }
  h2 *= s.grid.cell_area();
  CHECK((b1.area() - b0.area()) / dt == doctest::Approx(-h2).epsilon(1e-3));
}

TEST_CASE("parabolic covariance") {
  const double lambda = 2.0, dt = 1e-3;
  const auto s = make(ScenarioName::symplectic_graph, 16);
  auto big = s;
  for (auto& p : big.positions) p *= lambda;
  for (auto& sh : big.period_shift) sh *= lambda;
  FlowControls a, b;
  a.fixed_dt = dt;
  a.t_end = 20 * dt;
  b.fixed_dt = lambda * lambda * dt;
  b.t_end = lambda * lambda * 20 * dt;
  const auto ta = run_flow(s, a), tb = run_flow(big, b);
  const auto& x = ta.states.back();
  const auto& y = tb.states.back();
  CHECK(y.time == doctest::Approx(lambda * lambda * x.time).epsilon(1e-14));
  for (std::size_t i = 0; i < x.positions.size(); ++i) CHECK((y.positions[i] - lambda * x.positions[i]).norm() < 1e-10);
}

TEST_CASE("serial and parallel steps are bit-identical") {
  const auto s = make(ScenarioName::lagrangian_graph, 32);
  const auto a = step(s, 1e-3, Exec::serial), b = step(s, 1e-3, Exec::parallel);
  for (std::size_t i = 0; i < a.positions.size(); ++i) CHECK(a.positions[i] == b.positions[i]);
}

TEST_CASE("clamped rows are held fixed") {
  ScenarioSpec sp;
  sp.name = ScenarioName::grim_reaper_product;
  sp.n1 = 33;
  sp.n2 = 9;
  const auto s = generate_scenario(sp);
  FlowControls c;
  c.t_end = 0.01;
  const auto tr = run_flow(s, c);
  const auto& last = tr.states.back();
  for (std::size_t i = 0; i < s.positions.size(); ++i) {
    if (frozen_node(s.grid, i)) CHECK(last.positions[i] == s.positions[i]);
  }
  // interior nodes translate along y1 at unit speed
  const NodeIndex mid = s.grid.node(16, 4);
  CHECK(last.positions[mid][1] - s.positions[mid][1] == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("bad controls") {
  const auto s = make(ScenarioName::clifford_torus, 16);
  FlowControls c;
  c.fixed_dt = 1.0;
  CHECK_THROWS_AS(run_flow(s, c), Error);
  c.fixed_dt.reset();
  c.stride = 0;
  CHECK_THROWS_AS(run_flow(s, c), Error);
  const double bad[] = {0.01, 0.02};
  CHECK_THROWS_AS(centered_samples(s, 0.1, bad, 4), Error);
}

TEST_CASE("centered samples") {
  const auto s = make(ScenarioName::symplectic_graph, 16);
  const double d[] = {0.02, 0.01, 0.005};
  const auto tri = centered_samples(s, 0.1, d, 4);
  REQUIRE(tri.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(tri[j][0].time == doctest::Approx(0.1 - d[j]).epsilon(1e-12));
    CHECK(tri[j][1].time == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(tri[j][2].time == doctest::Approx(0.1 + d[j]).epsilon(1e-12));
    CHECK(tri[j][1].positions == tri[0][1].positions);
  }
}

}
