#include "mcf4d/theorem.hpp"

#include "mcf4d/rescaler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcf4d {

namespace {

GeometryBundle plain_bundle(const SurfaceState& s, bool with_j = false) {
  BuildOptions o;
  o.with_nabla_j = with_j;
  return build_geometry(s, o);
}

bool complete_surface(const ParamGrid& grid) { return grid.axis[0].periodic && grid.axis[1].periodic; }

}  // namespace

NormalizedFlow normalize_flow(const FlowTrace& trace) {
  if (trace.states.empty()) throw Error(ErrorKind::BadParameter, "cannot normalize an empty trace");
  double sup = 0.0;
  double extent = 0.0;
  for (const auto& s : trace.states) {
    const auto b = plain_bundle(s);
    sup = std::max(sup, *std::max_element(b.norm_a2.begin(), b.norm_a2.end()));
    for (const auto& p : s.positions) extent = std::max(extent, p.norm());
  }
  if (!std::isfinite(sup)) throw Error(ErrorKind::NonFinite, "sup |A|^2 is not finite");
  // rounding noise of second differences of a flat immersion stays far below this
  if (!(sup * std::max(extent, 1.0) * std::max(extent, 1.0) > 1e-12)) {
    throw Error(ErrorKind::ZeroCurvature, "sup |A|^2 = " + std::to_string(sup) + ", normalization undefined");
  }

  NormalizedFlow out;
  out.sup_a2_before = sup;
  out.scale = std::sqrt(sup);
  const double lam = out.scale;
  const double lam2 = lam * lam;
  out.trace.reason = trace.reason;
  out.trace.failure = trace.failure;
  for (const auto& s : trace.states) out.trace.states.push_back(rescale_state(s, lam, Vec4::Zero(), 0.0));
  for (auto row : trace.scalars) {
    row.time *= lam2;
    row.area *= lam2;
    row.max_a2 /= lam2;
    row.max_h2 /= lam2;
    row.min_det_g *= lam2 * lam2;
    // Gaussian columns refer to the unscaled weight center
    row.psi = row.rhs_drift = row.rhs_dissipation = row.rhs_gradient = StepScalars::kNaN;
    out.trace.scalars.push_back(row);
  }
  for (double r : trace.reduced_radius) out.trace.reduced_radius.push_back(lam * r);
  return out;
}

ExtremalStats extremal_stats(const FlowTrace& trace, WeightKind kind) {
  if (trace.states.empty()) throw Error(ErrorKind::BadParameter, "empty trace");
  ExtremalStats st;
  st.delta = std::numeric_limits<double>::infinity();
  for (const auto& s : trace.states) {
    const auto b = plain_bundle(s);
    if (kind == WeightKind::lagrangian) {
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (std::abs(b.cos_alpha[i]) > 1e-6) {
          throw Error(ErrorKind::KindMismatch,
                      "|cos alpha| = " + std::to_string(std::abs(b.cos_alpha[i])) + " at node " + std::to_string(i) +
                          ", t = " + std::to_string(s.time) + ": trace is not Lagrangian", i);
        }
      }
    }
    const auto c = angle_cosine(b, kind);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (std::isfinite(c[i])) st.delta = std::min(st.delta, c[i]);
      st.h2 = std::max(st.h2, b.norm_h2[i]);
      st.sup_a2 = std::max(st.sup_a2, b.norm_a2[i]);
    }
  }
  return st;
}

std::string_view verdict_name(Verdict v) { return v == Verdict::satisfied ? "satisfied" : "violated"; }

TheoremReport check_main_theorem(const FlowTrace& trace, WeightKind kind) {
  const NormalizedFlow nf = normalize_flow(trace);
  const ExtremalStats st = extremal_stats(nf.trace, kind);

  TheoremReport r;
  r.kind = kind;
  r.sup_a2_before = nf.sup_a2_before;
  r.scale_applied = nf.scale;
  r.h2 = st.h2;
  r.delta = st.delta;
  const double exponent = kind == WeightKind::symplectic ? st.h2 / 4.0 : st.h2 / 2.0;
  r.lhs = st.delta * std::exp(exponent);
  r.verdict = r.lhs <= 1.0 + 1e-9 ? Verdict::satisfied : Verdict::violated;
  r.hypotheses.ancient = false;
  r.hypotheses.complete = complete_surface(nf.trace.states.front().grid);
  r.hypotheses.area_ratio_checked = false;
  r.hypotheses.sup_a2_normalized = std::abs(st.sup_a2 - 1.0) <= 1e-6;
  r.theorem_applies = false;
  if (r.verdict == Verdict::satisfied) {
    r.interpretation =
        "inequality holds on the sampled data; the flow has a finite past, so the theorem's hypotheses are not met "
        "and this is a consistency observation only";
  } else {
    r.interpretation =
        "inequality fails on the sampled data; the flow has a finite past (not ancient), so the theorem does not "
        "apply and this is not a counterexample";
  }
  return r;
}

GradientResidual gradient_estimate_residual(const SurfaceState& prev, const SurfaceState& mid,
                                            const SurfaceState& next, double p, WeightKind kind) {
  check_p(p, kind);
  const bool symp = kind == WeightKind::symplectic;
  const auto w3 = centered_time_weights(prev.time, mid.time, next.time);
  const auto bp = plain_bundle(prev);
  const auto bm = plain_bundle(mid, symp);
  const auto bn = plain_bundle(next);
  const std::size_t n = bm.size();

  auto f_of = [&](const GeometryBundle& b) {
    const auto c = angle_cosine(b, kind);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(c[i] >= kWeightFloor)) {
        throw Error(ErrorKind::DenominatorFloor, "cosine " + std::to_string(c[i]) + " at node " + std::to_string(i),
                    i);
      }
      f[i] = std::exp(p * b.norm_h2[i]) / (c[i] * c[i]);
    }
    return f;
  };
  const auto fp = f_of(bp), fm = f_of(bm), fn = f_of(bn);

  const auto c = angle_cosine(bm, kind);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (c[i] * c[i]);
  const auto lap_f = laplace_beltrami(fm, bm);
  const auto grad_u = tangential_gradient(bm.norm_h2, bm);
  const auto grad_h = normal_gradient_norm2(bm.mean_curvature, bm);
  const auto grad_c = tangential_gradient(c, bm);
  const auto cross = gradient_dot(fm, w, bm);

  GradientResidual out;
  out.inequality.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.defect.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    if (frozen_node(bm.grid, i)) continue;
    if (symp && !bm.j_admissible[i]) continue;
    const double u = bm.norm_h2[i];
    const double heat = lap_f[i] - (w3[0] * fp[i] + w3[1] * fm[i] + w3[2] * fn[i]);
    const double common = p * p * grad_u[i] + 2.0 * p * grad_h[i] - 2.0 * grad_c[i] / (c[i] * c[i]);
    const double tail = 2.0 * c[i] * c[i] * cross[i];
    const double angle_term = symp ? 2.0 * bm.nabla_bar_j2[i] : 2.0 * u;
    const double exact = fm[i] * (common - 2.0 * p * h_dot_a_squared(bm, i) + angle_term) + tail;
    const double bound = fm[i] * (common + (symp ? 1.0 - 2.0 * p : 2.0 * (1.0 - p)) * u) + tail;
    out.inequality[i] = heat - bound;
    out.defect[i] = heat - exact;
  }
  return out;
}

GradientProbe gradient_estimate_probe(const FlowTrace& trace, double p, double radius, WeightKind kind) {
  check_p(p, kind);
  if (trace.states.size() < 3) throw Error(ErrorKind::ShortTrace, "gradient probe needs at least 3 stored states");
  GradientProbe g;
  const auto field = localized_f(trace, p, radius, kind);
  g.max_gf = field.max_gf.value;
  g.max_time_index = field.max_gf.time_index;
  g.max_node = field.max_gf.node;
  g.interior_max = g.max_time_index > 0 && g.max_time_index + 1 < trace.states.size() &&
                   !frozen_node(trace.states.front().grid, g.max_node) && g.max_gf > 0.0;

  g.inequality_residual_min = std::numeric_limits<double>::infinity();
  for (const auto& s : trace.states) {
    const auto b = plain_bundle(s);
    g.sup_a2 = std::max(g.sup_a2, *std::max_element(b.norm_a2.begin(), b.norm_a2.end()));
  }
  for (std::size_t k = 1; k + 1 < trace.states.size(); ++k) {
    const auto r = gradient_estimate_residual(trace.states[k - 1], trace.states[k], trace.states[k + 1], p, kind);
    for (std::size_t i = 0; i < r.inequality.size(); ++i) {
      if (!std::isfinite(r.inequality[i])) continue;
      ++g.evaluated_nodes;
      g.inequality_residual_min = std::min(g.inequality_residual_min, r.inequality[i]);
      g.identity_defect = std::max(g.identity_defect, std::abs(r.defect[i]));
    }
  }
  return g;
}

}  // namespace mcf4d
