#include "doctest.h"
#include "support.hpp"

#include "mcf4d/rescaler.hpp"
#include "mcf4d/theorem.hpp"

using namespace mcf4d;
using testing::make;

namespace {

FlowTrace single(const SurfaceState& s) {
  FlowTrace t;
  t.states.push_back(s);
  t.scalars.push_back(summarize(s, build_geometry(s), 0));
  return t;
}

FlowTrace flow(const SurfaceState& s, double t_end, int stride) {
  FlowControls c;
  c.t_end = t_end;
  c.stride = stride;
  return run_flow(s, c);
}

FlowTrace grim_trace(int n1) {
  ScenarioSpec sp;
  sp.name = ScenarioName::grim_reaper_product;
  sp.n1 = n1;
  sp.n2 = 17;
  sp.x_max = 1.4;
  FlowTrace t;
  t.states = grim_reaper_translating_states(sp, {0.0, 0.25, 0.5, 0.75, 1.0});
  for (const auto& s : t.states) t.scalars.push_back(summarize(s, build_geometry(s), 0));
  return t;
}

}  // namespace

TEST_SUITE("theorem") {

TEST_CASE("normalization") {
  ScenarioSpec sp;
  sp.name = ScenarioName::clifford_torus;
  sp.n1 = sp.n2 = 64;
  sp.radius = 1.0 / std::sqrt(2.0);  // |A|^2 = 4
  const auto tr = single(generate_scenario(sp));
  const auto nf = normalize_flow(tr);
  CHECK(nf.sup_a2_before == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(nf.scale == doctest::Approx(2.0).epsilon(1e-4));
  const auto b = build_geometry(nf.trace.states[0]);
  CHECK(*std::max_element(b.norm_a2.begin(), b.norm_a2.end()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nf.trace.scalars[0].max_a2 == doctest::Approx(1.0).epsilon(1e-12));

  const auto again = normalize_flow(nf.trace);
  CHECK(again.scale == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("flat data cannot be normalized") {
  try {
    normalize_flow(single(make(ScenarioName::plane, 16)));
    FAIL("expected ZeroCurvature");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroCurvature);
  }
}

TEST_CASE("kind mismatch") {
  const auto tr = single(make(ScenarioName::symplectic_graph, 16));
  try {
    check_main_theorem(tr, WeightKind::lagrangian);
    FAIL("expected KindMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::KindMismatch);
  }
  CHECK_NOTHROW(check_main_theorem(tr, WeightKind::symplectic));
}

TEST_CASE("grim reaper product") {
  const double expect = std::cos(1.4) * std::exp(0.5);
  const auto r = check_main_theorem(grim_trace(129), WeightKind::lagrangian);
  CHECK(r.lhs == doctest::Approx(expect).epsilon(1e-6));
  CHECK(r.delta == doctest::Approx(std::cos(1.4)).epsilon(1e-6));
  CHECK(r.h2 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.verdict == Verdict::satisfied);
  CHECK_FALSE(r.hypotheses.ancient);
  CHECK_FALSE(r.hypotheses.complete);
  CHECK_FALSE(r.theorem_applies);
  CHECK(r.hypotheses.sup_a2_normalized);
  // the curve already has max curvature 1 at its tip
  CHECK(r.scale_applied == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("small Lagrangian graph flow") {
  const auto tr = flow(make(ScenarioName::lagrangian_graph, 32), 0.2, 40);
  const auto r = check_main_theorem(tr, WeightKind::lagrangian);
  CHECK_FALSE(r.hypotheses.ancient);
  CHECK(r.hypotheses.complete);
  CHECK_FALSE(r.hypotheses.area_ratio_checked);
  CHECK_FALSE(r.theorem_applies);
  CHECK(r.hypotheses.sup_a2_normalized);
  CHECK(r.lhs == doctest::Approx(r.delta * std::exp(r.h2 / 2)));
  if (r.verdict == Verdict::violated) CHECK(r.interpretation.find("not a counterexample") != std::string::npos);
  const bool disproof = r.interpretation.find("counterexample") != std::string::npos &&
                        r.interpretation.find("not a counterexample") == std::string::npos;
  CHECK_FALSE(disproof);

  // parabolic rescaling of the input leaves the report unchanged
  FlowTrace big;
  for (const auto& s : tr.states) big.states.push_back(rescale_state(s, 3.0, Vec4(1, 2, 3, 4), 0.0));
  big.scalars = tr.scalars;
  const auto q = check_main_theorem(big, WeightKind::lagrangian);
  CHECK(std::abs(q.lhs - r.lhs) < 1e-9);
  CHECK(q.scale_applied == doctest::Approx(r.scale_applied / 3.0).epsilon(1e-12));
}

TEST_CASE("symplectic Clifford torus") {
  const auto r = check_main_theorem(single(make(ScenarioName::clifford_torus, 32)), WeightKind::symplectic);
  CHECK(std::abs(r.delta) < 1e-12);
  CHECK(r.verdict == Verdict::satisfied);
  CHECK(r.hypotheses.complete);
}

TEST_CASE("gradient probe on a calibrated plane") {
  FlowControls c;
  c.t_end = 0.04;
  c.fixed_dt = 0.01;
  const auto tr = run_flow(make(ScenarioName::plane, 32), c);
  const auto g = gradient_estimate_probe(tr, 0.9, 2.5, WeightKind::lagrangian);
  CHECK(g.max_gf == doctest::Approx(1.0));
  CHECK(std::abs(g.inequality_residual_min) < 1e-10);
  CHECK(g.identity_defect < 1e-10);
  CHECK(g.sup_a2 < 1e-20);
  CHECK(g.evaluated_nodes > 0);

  FlowTrace two;
  two.states = {tr.states[0], tr.states[1]};
  try {
    gradient_estimate_probe(two, 0.9, 2.5, WeightKind::lagrangian);
    FAIL("expected ShortTrace");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShortTrace);
  }
  CHECK_THROWS_AS(gradient_estimate_probe(tr, 0.6, 2.5, WeightKind::symplectic), Error);
}

TEST_CASE("gradient residual pieces on graph flows") {
  for (auto [name, kind] : {std::pair{ScenarioName::lagrangian_graph, WeightKind::lagrangian},
                            std::pair{ScenarioName::symplectic_graph, WeightKind::symplectic}}) {
    const double d[] = {0.005};
    const auto tri = centered_samples(make(name, 32), 0.05, d, 8)[0];
    const auto r = gradient_estimate_residual(tri[0], tri[1], tri[2], default_p(kind), kind);
    double worst_defect = 0.0, min_ineq = 1e300;
    for (std::size_t i = 0; i < r.defect.size(); ++i) {
      if (!std::isfinite(r.defect[i])) continue;
      worst_defect = std::max(worst_defect, std::abs(r.defect[i]));
      min_ineq = std::min(min_ineq, r.inequality[i]);
    }
    CHECK(worst_defect < 1e-2);
    CHECK(min_ineq >= -worst_defect);
  }
}

}
