#include "doctest.h"
#include "support.hpp"

#include "mcf4d/rescaler.hpp"

using namespace mcf4d;
using testing::make;

namespace {

// |A|^2 = 1 / (T - t) on a small cluster of points; times on a dyadic grid so
// that T - r^2/4 is sampled exactly.
std::vector<CurvatureSample> type_i_fixture(double T) {
  std::vector<CurvatureSample> out;
  for (int k = 900; k < 1024; ++k) {
    CurvatureSample s;
    s.time = T - (1024 - k) / 1024.0;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) s.positions.push_back(Vec4(0.04 * (i - 2), 0.04 * (j - 2), 0.0, 0.0));
    }
    s.norm_a2.assign(s.positions.size(), 1.0 / (T - s.time));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_SUITE("rescaler") {

TEST_CASE("sigma candidates") {
  const auto s = sigma_candidates(0.5);
  REQUIRE(s.size() == kSigmaCandidates);
  CHECK(s.back() == 0.25);
  for (std::size_t j = 1; j < s.size(); ++j) CHECK(s[j] / s[j - 1] == doctest::Approx(std::exp2(0.125)));
  for (std::size_t j = 8; j < s.size(); ++j) CHECK(s[j - 8] == doctest::Approx(0.5 * s[j]).epsilon(1e-14));
}

TEST_CASE("Type I fixture selects sigma = r/2") {
  const double T = 1.0;
  const auto samples = type_i_fixture(T);
  for (double r : {0.5, 0.25}) {
    const auto rec = select_blowup_datum(samples, T, Vec4::Zero(), r);
    CHECK(rec.sigma_k == 0.5 * r);
    CHECK(rec.peak_time == T - 0.25 * r * r);
    CHECK(rec.peak_node == 0);
    CHECK(rec.lambda_k == doctest::Approx(2.0 / r));
    CHECK(rec.lambda_k * rec.lambda_k * rec.sigma_k * rec.sigma_k == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(samples[rec.peak_state].time == rec.peak_time);
  }
}

TEST_CASE("coverage errors") {
  const double T = 1.0;
  const auto samples = type_i_fixture(T);
  auto expect = [](auto&& fn) {
    try {
      fn();
      FAIL("expected InsufficientCoverage");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InsufficientCoverage);
    }
  };
  expect([&] { select_blowup_datum(samples, T, Vec4(5, 0, 0, 0), 0.5); });
  // only samples after T - r^2/4 for r = 0.8
  std::vector<CurvatureSample> late(samples.end() - 10, samples.end());
  expect([&] { select_blowup_datum(late, T, Vec4::Zero(), 0.8); });
  CHECK_THROWS_AS(select_blowup_datum(samples, T, Vec4::Zero(), 0.0), Error);
}

TEST_CASE("rescaling composes as a group") {
  const auto s = make(ScenarioName::symplectic_graph, 16);
  const Vec4 o1(0.1, -0.2, 0.3, 0.05), o2(1.0, 0.5, -0.25, 2.0);
  const double l1 = 3.0, l2 = 0.7, t1 = -0.2, t2 = 0.4;
  const auto a = rescale_state(rescale_state(s, l1, o1, t1), l2, o2, t2);
  const auto b = rescale_state(s, l1 * l2, o1 + o2 / l1, t1 + t2 / (l1 * l1));
  CHECK(a.time == doctest::Approx(b.time).epsilon(1e-14));
  for (std::size_t i = 0; i < a.positions.size(); ++i) CHECK((a.positions[i] - b.positions[i]).norm() < 1e-12);
  for (int k = 0; k < 2; ++k) CHECK((a.period_shift[k] - b.period_shift[k]).norm() < 1e-12);
}

TEST_CASE("rescaled curvature and angles") {
  const auto s = make(ScenarioName::symplectic_graph, 32);
  const double lambda = 7.5;
  const auto t = rescale_state(s, lambda, s.positions[11], 0.3);
  const auto a = build_geometry(s), b = build_geometry(t);
  const double scale = *std::max_element(a.norm_a2.begin(), a.norm_a2.end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(b.norm_a2[i] * lambda * lambda - a.norm_a2[i]) <= 1e-10 * scale);
    CHECK(std::abs(b.cos_alpha[i] - a.cos_alpha[i]) < 1e-12);
  }
  CHECK(t.time == doctest::Approx(lambda * lambda * (0.0 - 0.3)));
}

TEST_CASE("Clifford blow-up sequence") {
  const auto s = make(ScenarioName::clifford_torus, 32);
  FlowControls c;
  c.t_end = 1.0;
  c.blowup_threshold = 2048;
  c.stride = 4;
  const auto tr = run_flow(s, c);
  REQUIRE(tr.reason == Termination::blowup_detected);
  const double t_hat = estimate_singular_time(tr).estimated_t;
  const auto samples = curvature_samples(tr);
  for (double r : {0.25, 0.125}) {
    // X0 on the surface at the end of the selection window
    std::size_t k = 0;
    while (k + 1 < tr.states.size() && tr.states[k + 1].time <= t_hat - 0.25 * r * r) ++k;
    auto rec = select_blowup_datum(samples, t_hat, tr.states[k].positions[0], r);
    rescale_flow(tr, rec);
    const auto v = validate_rescaled(rec);
    CHECK(v.origin_norm == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(v.sup_bound <= 4.05);
    CHECK(v.lambda_sigma_sq > 0.5);
    CHECK(v.lambda_sigma_sq <= 1.0);
    CHECK(rec.rescaled.states.front().time <= 0.0);
  }
}

TEST_CASE("selection is deterministic") {
  const auto samples = type_i_fixture(1.0);
  const auto a = select_blowup_datum(samples, 1.0, Vec4::Zero(), 0.3);
  const auto b = select_blowup_datum(samples, 1.0, Vec4::Zero(), 0.3);
  CHECK(a.sigma_k == b.sigma_k);
  CHECK(a.peak_node == b.peak_node);
  CHECK(a.peak_state == b.peak_state);
}

}
