#include "mcf4d/functionals.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mcf4d {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

// Lattice translations m1 s1 + m2 s2 that can bring a node within `reach` of `center`.
std::vector<Vec4> lattice_offsets(const SurfaceState& s, const Vec4& center, double reach) {
  std::vector<Vec4> out{Vec4::Zero()};
  if (!s.has_lattice()) return out;

  double far = 0.0;
  for (const auto& p : s.positions) far = std::max(far, (p - center).norm());
  std::array<Vec4, 2> shift{Vec4::Zero(), Vec4::Zero()};
  for (int a = 0; a < 2; ++a) {
    if (s.grid.axis[a].periodic) shift[a] = s.period_shift[a];
  }

  std::array<int, 2> m{0, 0};
  const bool both = !shift[0].isZero(0.0) && !shift[1].isZero(0.0);
  if (both) {
    Eigen::Matrix<double, 4, 2> basis;
    basis.col(0) = shift[0];
    basis.col(1) = shift[1];
    const double sigma = Eigen::JacobiSVD<Eigen::Matrix<double, 4, 2>>(basis).singularValues()(1);
    const int M = static_cast<int>(std::ceil((reach + far) / sigma)) + 1;
    m = {M, M};
  } else {
    for (int a = 0; a < 2; ++a) {
      if (!shift[a].isZero(0.0)) m[a] = static_cast<int>(std::ceil((reach + far) / shift[a].norm())) + 1;
    }
  }
  out.clear();
  for (int a = -m[0]; a <= m[0]; ++a) {
    for (int b = -m[1]; b <= m[1]; ++b) out.push_back(a * shift[0] + b * shift[1]);
  }
  // keep the identity image first
  std::stable_partition(out.begin(), out.end(), [](const Vec4& o) { return o.isZero(0.0); });
  return out;
}

// Heat-kernel quadrature with K simultaneous integrands. `integrand(node, x, rho)`
// returns the K values already multiplied by rho, where x = F + offset - X0.
// Node partial sums are combined serially so the result does not depend on threads.
template <std::size_t K, class Integrand>
std::array<double, K> heat_quadrature(const GaussianWeight& w, const SurfaceState& s, const GeometryBundle& b,
                                      Integrand&& integrand, std::vector<std::uint8_t>* contributes = nullptr) {
  const double tau = w.reference_time - s.time;
  if (!(tau > 0.0)) {
    throw Error(ErrorKind::TimeOrder, "state time " + std::to_string(s.time) + " is not before t0 = " +
                                          std::to_string(w.reference_time));
  }
  const auto offsets = lattice_offsets(s, w.center, std::sqrt(4.0 * tau * kGaussianCutoffExponent));
  const std::size_t n = s.positions.size();
  const double cell = s.grid.cell_area();
  const double norm = 1.0 / (4.0 * kPi * tau);
  std::vector<std::array<double, K>> partial(n);
  if (contributes) contributes->assign(n, 0);

  for_each_node(Exec::parallel, n, [&](std::size_t node) {
    std::array<double, K> acc{};
    const double dmu = b.area_element[node] * cell;
    for (const auto& o : offsets) {
      const Vec4 x = s.positions[node] + o - w.center;
      const double e = x.squaredNorm() / (4.0 * tau);
      if (e > kGaussianCutoffExponent) continue;
      if (contributes) (*contributes)[node] = 1;
      const auto v = integrand(node, x, norm * std::exp(-e));
      for (std::size_t k = 0; k < K; ++k) acc[k] += v[k] * dmu;
    }
    partial[node] = acc;
  });

  std::array<double, K> total{};
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < K; ++k) total[k] += p[k];
  }
  return total;
}

Vec4 normal_part(const GeometryBundle& b, NodeIndex node, const Vec4& x) {
  const auto& v = b.normal_frame[node];
  return v[0].dot(x) * v[0] + v[1].dot(x) * v[1];
}

void check_floor(std::span<const double> c, const std::vector<std::uint8_t>& mask, ErrorKind kind, double floor,
                 const char* what) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (mask[i] && !(c[i] >= floor)) {
      throw Error(kind, std::string(what) + " = " + std::to_string(c[i]) + " below " + std::to_string(floor) +
                            " at node " + std::to_string(i), i);
    }
  }
}

GeometryBundle bundle_for(const SurfaceState& s, bool with_j) {
  BuildOptions o;
  o.with_nabla_j = with_j;
  return build_geometry(s, o);
}

void require_states(const FlowTrace& trace, std::size_t min_states) {
  if (trace.states.size() < min_states) {
    throw Error(ErrorKind::ShortTrace, "need at least " + std::to_string(min_states) + " stored states, have " +
                                           std::to_string(trace.states.size()));
  }
}

}  // namespace

bool frozen_node(const ParamGrid& grid, NodeIndex node) {
  const auto ij = grid.ij(node);
  for (int a = 0; a < 2; ++a) {
    const int n = grid.axis[a].count;
    if (!grid.axis[a].periodic && (ij[a] < 2 || ij[a] > n - 3)) return true;
  }
  return false;
}

double h_dot_a_squared(const GeometryBundle& b, NodeIndex node) {
  const Vec4& H = b.mean_curvature[node];
  const auto& v = b.normal_frame[node];
  const Mat2 K = H.dot(v[0]) * b.second_ff[node][0] + H.dot(v[1]) * b.second_ff[node][1];
  const Mat2 M = b.inverse_metric[node] * K;
  return (M * M).trace();
}

std::string_view weight_kind_name(WeightKind kind) {
  return kind == WeightKind::lagrangian ? "lagrangian" : "symplectic";
}

WeightKind parse_weight_kind(std::string_view text) {
  if (text == "lagrangian") return WeightKind::lagrangian;
  if (text == "symplectic") return WeightKind::symplectic;
  throw Error(ErrorKind::BadConfig, "unknown weight kind '" + std::string(text) + "'");
}

std::vector<double> angle_cosine(const GeometryBundle& bundle, WeightKind kind) {
  if (kind == WeightKind::symplectic) return bundle.cos_alpha;
  std::vector<double> c(bundle.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = bundle.lag_angle_unit[i].real();
  return c;
}

double gaussian_density(const GaussianWeight& weight, const SurfaceState& state, const GeometryBundle& bundle) {
  return heat_quadrature<1>(weight, state, bundle,
                            [](NodeIndex, const Vec4&, double rho) { return std::array<double, 1>{rho}; })[0];
}

double weighted_psi(const GaussianWeight& weight, const SurfaceState& state, const GeometryBundle& bundle,
                    WeightKind kind) {
  const auto c = angle_cosine(bundle, kind);
  std::vector<std::uint8_t> mask;
  const double psi = heat_quadrature<1>(
      weight, state, bundle, [&](NodeIndex i, const Vec4&, double rho) { return std::array<double, 1>{rho / c[i]}; },
      &mask)[0];
  check_floor(c, mask, ErrorKind::WeightFloor, kWeightFloor,
              kind == WeightKind::lagrangian ? "cos(theta)" : "cos(alpha)");
  return psi;
}

MonotonicityTerms monotonicity_terms(const GaussianWeight& weight, const SurfaceState& state,
                                     const GeometryBundle& bundle, WeightKind kind) {
  const bool symp = kind == WeightKind::symplectic;
  if (symp && !bundle.has_nabla_j()) {
    throw Error(ErrorKind::BadParameter, "symplectic monotonicity terms need |nabla-bar J|^2 in the bundle");
  }
  const auto c = angle_cosine(bundle, kind);
  const auto grad_c = tangential_gradient(c, bundle);
  const double tau = weight.reference_time - state.time;
  std::vector<std::uint8_t> mask;
  const auto sums = heat_quadrature<5>(
      weight, state, bundle,
      [&](NodeIndex i, const Vec4& x, double rho) {
        const double w = rho / c[i];
        const Vec4 d = bundle.mean_curvature[i] + normal_part(bundle, i, x) / (2.0 * tau);
        const double diss = symp ? bundle.nabla_bar_j2[i] : bundle.norm_h2[i];
        return std::array<double, 5>{w, w * d.squaredNorm(), w * diss,
                                     2.0 * grad_c[i] / (c[i] * c[i] * c[i]) * rho, 0.5 * w * bundle.norm_h2[i]};
      },
      &mask);
  check_floor(c, mask, ErrorKind::WeightFloor, kWeightFloor, symp ? "cos(alpha)" : "cos(theta)");
  MonotonicityTerms t;
  t.psi = sums[0];
  t.drift = sums[1];
  t.dissipation = sums[2];
  t.gradient = sums[3];
  t.dissipation_half_h2 = symp ? sums[4] : kNaN;
  return t;
}

StepHook psi_hook(const GaussianWeight& weight, WeightKind kind) {
  return [weight, kind](const SurfaceState& s, const GeometryBundle& b, StepScalars& row) {
    if (!(s.time < weight.reference_time)) return;
    MonotonicityTerms t;
    if (kind == WeightKind::symplectic && !b.has_nabla_j()) {
      t = monotonicity_terms(weight, s, bundle_for(s, true), kind);
    } else {
      t = monotonicity_terms(weight, s, b, kind);
    }
    row.psi = t.psi;
    row.rhs_drift = t.drift;
    row.rhs_dissipation = t.dissipation;
    row.rhs_gradient = t.gradient;
  };
}

std::array<double, 3> centered_time_weights(double t0, double t1, double t2) {
  const double a = t1 - t0, b = t2 - t1;
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorKind::TimeOrder, "time samples must be strictly increasing");
  return {-b / (a * (a + b)), (b - a) / (a * b), a / (b * (a + b))};
}

MonotonicityReport monotonicity_scan(const FlowTrace& trace, const GaussianWeight& weight, WeightKind kind) {
  require_states(trace, 5);
  const bool symp = kind == WeightKind::symplectic;
  std::vector<MonotonicityTerms> terms;
  terms.reserve(trace.states.size());
  for (const auto& s : trace.states) terms.push_back(monotonicity_terms(weight, s, bundle_for(s, symp), kind));

  MonotonicityReport r;
  r.kind = kind;
  for (std::size_t i = 1; i + 1 < trace.states.size(); ++i) {
    const auto w =
        centered_time_weights(trace.states[i - 1].time, trace.states[i].time, trace.states[i + 1].time);
    const double lhs = w[0] * terms[i - 1].psi + w[1] * terms[i].psi + w[2] * terms[i + 1].psi;
    r.times.push_back(trace.states[i].time);
    r.psi.push_back(terms[i].psi);
    r.lhs.push_back(lhs);
    r.rhs_drift.push_back(terms[i].drift);
    r.rhs_dissipation.push_back(terms[i].dissipation);
    r.rhs_gradient.push_back(terms[i].gradient);
    r.residual.push_back(lhs + terms[i].drift + terms[i].dissipation + terms[i].gradient);
    if (symp) r.rhs_dissipation_half_h2.push_back(terms[i].dissipation_half_h2);
  }
  return r;
}

IdentitySeries weighted_integral_identity_check(const FlowTrace& trace, const GaussianWeight& weight, TestField field,
                                                bool measured_source) {
  require_states(trace, 5);
  const bool symp = field == TestField::inv_cos_alpha;
  const std::size_t ns = trace.states.size();

  std::vector<GeometryBundle> bundles;
  std::vector<std::vector<double>> f(ns);
  bundles.reserve(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    bundles.push_back(bundle_for(trace.states[k], symp && !measured_source));
    const auto& b = bundles.back();
    if (field == TestField::one) {
      f[k].assign(b.size(), 1.0);
    } else {
      const auto c = angle_cosine(b, symp ? WeightKind::symplectic : WeightKind::lagrangian);
      f[k].resize(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) f[k][i] = 1.0 / c[i];
    }
  }

  // int f rho at every stored state
  std::vector<double> integral(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    std::vector<std::uint8_t> mask;
    integral[k] = heat_quadrature<1>(
        weight, trace.states[k], bundles[k],
        [&](NodeIndex i, const Vec4&, double rho) { return std::array<double, 1>{f[k][i] * rho}; }, &mask)[0];
    if (field != TestField::one) {
      std::vector<double> c(f[k].size());
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1.0 / f[k][i];
      check_floor(c, mask, ErrorKind::WeightFloor, kWeightFloor, symp ? "cos(alpha)" : "cos(theta)");
    }
  }

  IdentitySeries out;
  for (std::size_t k = 1; k + 1 < ns; ++k) {
    const auto& s = trace.states[k];
    const auto& b = bundles[k];
    const auto w = centered_time_weights(trace.states[k - 1].time, s.time, trace.states[k + 1].time);
    const double tau = weight.reference_time - s.time;

    std::vector<double> src(b.size(), 0.0);
    if (measured_source) {
      const auto lap = laplace_beltrami(f[k], b);
      for (std::size_t i = 0; i < src.size(); ++i) {
        src[i] = w[0] * f[k - 1][i] + w[1] * f[k][i] + w[2] * f[k + 1][i] - lap[i];
      }
    } else if (field != TestField::one) {
      std::vector<double> c(b.size());
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1.0 / f[k][i];
      const auto g2 = tangential_gradient(c, b);
      for (std::size_t i = 0; i < src.size(); ++i) {
        const double diss = symp ? b.nabla_bar_j2[i] : b.norm_h2[i];
        src[i] = -(diss / c[i] + 2.0 * g2[i] / (c[i] * c[i] * c[i]));
      }
    }
    const auto sums = heat_quadrature<2>(weight, s, b, [&](NodeIndex i, const Vec4& x, double rho) {
      const Vec4 d = b.mean_curvature[i] + normal_part(b, i, x) / (2.0 * tau);
      return std::array<double, 2>{src[i] * rho, f[k][i] * rho * d.squaredNorm()};
    });
    const double lhs = w[0] * integral[k - 1] + w[1] * integral[k] + w[2] * integral[k + 1];
    out.times.push_back(s.time);
    out.lhs.push_back(lhs);
    out.source.push_back(sums[0]);
    out.drift.push_back(sums[1]);
    out.residual.push_back(lhs - sums[0] + sums[1]);
  }
  return out;
}

std::string_view quantity_name(Quantity q) {
  switch (q) {
    case Quantity::cos_theta: return "cos_theta";
    case Quantity::inv_cos_theta: return "inv_cos_theta";
    case Quantity::cos_alpha: return "cos_alpha";
    case Quantity::inv_cos2_alpha: return "inv_cos2_alpha";
    case Quantity::H2: return "H2";
  }
  return "unknown";
}

Quantity parse_quantity(std::string_view text) {
  for (auto q : {Quantity::cos_theta, Quantity::inv_cos_theta, Quantity::cos_alpha, Quantity::inv_cos2_alpha,
                 Quantity::H2}) {
    if (quantity_name(q) == text) return q;
  }
  throw Error(ErrorKind::BadConfig, "unknown quantity '" + std::string(text) + "'");
}

std::vector<double> evolution_residual_at(const SurfaceState& prev, const SurfaceState& mid, const SurfaceState& next,
                                          Quantity quantity) {
  const bool kahler = quantity == Quantity::cos_alpha || quantity == Quantity::inv_cos2_alpha;
  const auto w = centered_time_weights(prev.time, mid.time, next.time);
  const GeometryBundle bp = bundle_for(prev, false);
  const GeometryBundle bm = bundle_for(mid, kahler);
  const GeometryBundle bn = bundle_for(next, false);
  const std::size_t n = bm.size();
  const WeightKind kind = kahler ? WeightKind::symplectic : WeightKind::lagrangian;

  // field q evaluated on a bundle, and the angle cosine it is built from
  auto field = [&](const GeometryBundle& b) {
    std::vector<double> q(n);
    if (quantity == Quantity::H2) return b.norm_h2;
    const auto c = angle_cosine(b, kind);
    for (std::size_t i = 0; i < n; ++i) {
      switch (quantity) {
        case Quantity::inv_cos_theta: q[i] = 1.0 / c[i]; break;
        case Quantity::inv_cos2_alpha: q[i] = 1.0 / (c[i] * c[i]); break;
        default: q[i] = c[i]; break;
      }
    }
    return q;
  };

  if (quantity == Quantity::inv_cos_theta || quantity == Quantity::inv_cos2_alpha) {
    for (const auto* b : {&bp, &bm, &bn}) {
      const auto c = angle_cosine(*b, kind);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(c[i] >= kWeightFloor)) {
          throw Error(ErrorKind::DenominatorFloor,
                      std::string(quantity_name(quantity)) + " denominator " + std::to_string(c[i]) + " at node " +
                          std::to_string(i), i);
        }
      }
    }
  }

  const auto qp = field(bp), qm = field(bm), qn = field(bn);
  const auto lap = laplace_beltrami(qm, bm);
  const auto c = angle_cosine(bm, kind);
  const auto grad_c = tangential_gradient(c, bm);
  std::vector<double> grad_h;
  if (quantity == Quantity::H2) grad_h = normal_gradient_norm2(bm.mean_curvature, bm);

  std::vector<double> r(n, kNaN);
  for (std::size_t i = 0; i < n; ++i) {
    if (frozen_node(bm.grid, i)) continue;
    const double dt = w[0] * qp[i] + w[1] * qm[i] + w[2] * qn[i];
    const double heat = dt - lap[i];  // (d_t - Lap) q
    switch (quantity) {
      case Quantity::cos_theta: r[i] = heat - bm.norm_h2[i] * c[i]; break;
      case Quantity::inv_cos_theta:
        r[i] = heat + bm.norm_h2[i] / c[i] + 2.0 * grad_c[i] / (c[i] * c[i] * c[i]);
        break;
      case Quantity::cos_alpha:
        if (bm.j_admissible[i]) r[i] = heat - bm.nabla_bar_j2[i] * c[i];
        break;
      case Quantity::inv_cos2_alpha:
        if (bm.j_admissible[i]) {
          const double c2 = c[i] * c[i];
          r[i] = -heat - 6.0 * grad_c[i] / (c2 * c2) - 2.0 * bm.nabla_bar_j2[i] / c2;
        }
        break;
      case Quantity::H2: r[i] = -heat - 2.0 * grad_h[i] + 2.0 * h_dot_a_squared(bm, i); break;
    }
  }
  return r;
}

EvolutionResidual evolution_residual(const FlowTrace& trace, Quantity quantity) {
  require_states(trace, 3);
  EvolutionResidual out;
  out.quantity = quantity;
  for (std::size_t k = 1; k + 1 < trace.states.size(); ++k) {
    auto r = evolution_residual_at(trace.states[k - 1], trace.states[k], trace.states[k + 1], quantity);
    double m = 0.0;
    for (double v : r) {
      if (std::isfinite(v)) m = std::max(m, std::abs(v));
    }
    out.times.push_back(trace.states[k].time);
    out.max_abs.push_back(m);
    out.residual.push_back(std::move(r));
  }
  return out;
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (std::isfinite(a[i]) && std::isfinite(b[i])) m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

std::vector<double> successive_difference_orders(const std::vector<std::vector<double>>& fields) {
  std::vector<double> d, orders;
  for (std::size_t j = 0; j + 1 < fields.size(); ++j) d.push_back(max_abs_difference(fields[j], fields[j + 1]));
  for (std::size_t j = 0; j + 1 < d.size(); ++j) orders.push_back(std::log2(d[j] / d[j + 1]));
  return orders;
}

PinchingResult pinching_check(const GeometryBundle& bundle) {
  if (!bundle.has_nabla_j()) throw Error(ErrorKind::BadParameter, "pinching check needs |nabla-bar J|^2");
  PinchingResult r;
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    if (!bundle.j_admissible[i]) continue;
    r.vacuous = false;
    const double m = bundle.nabla_bar_j2[i] - 0.5 * bundle.norm_h2[i];
    r.min_margin = std::min(r.min_margin, m);
    if (m < -1e-6) r.violating_nodes.push_back(i);
  }
  return r;
}

CutoffValue cutoff_psi(double r) {
  if (r <= 0.5) return {1.0, 0.0, 0.0};
  if (r >= 1.0) return {0.0, 0.0, 0.0};
  const double s = 2.0 * r - 1.0;
  const double s2 = s * s;
  // psi = 1 - S(s), S = 10 s^3 - 15 s^4 + 6 s^5, ds/dr = 2
  const double S = s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
  return {1.0 - S, -60.0 * s2 * (1.0 - s) * (1.0 - s), -240.0 * s * (1.0 - s) * (1.0 - 2.0 * s)};
}

double cutoff_grad_ratio(double r) {
  if (r <= 0.5 || r >= 1.0) return 0.0;
  const double s = 2.0 * r - 1.0;
  const double u = 1.0 - s;
  // 1 - S(s) = u^3 (1 + 3 s + 6 s^2), so psi'^2 / psi = 3600 s^4 u / (1 + 3 s + 6 s^2)
  return 3600.0 * s * s * s * s * u / (1.0 + 3.0 * s + 6.0 * s * s);
}

const CutoffConstants& cutoff_constants() {
  static const CutoffConstants k = [] {
    CutoffConstants c;
    constexpr int samples = 200000;
    for (int i = 0; i <= samples; ++i) {
      const double r = static_cast<double>(i) / samples;
      const auto p = cutoff_psi(r);
      const double ratio = cutoff_grad_ratio(r);
      c.sup_neg_d2 = std::max(c.sup_neg_d2, -p.d2);
      c.sup_grad_ratio = std::max(c.sup_grad_ratio, ratio);
      c.c1 = std::max(c.c1, 4.0 * std::abs(p.d1) + 4.0 * r * std::abs(p.d2));
      c.c2 = std::max(c.c2, 4.0 * r * ratio);
    }
    c.c_psi = std::max(c.sup_neg_d2, c.sup_grad_ratio);
    return c;
  }();
  return k;
}

std::vector<double> localizer(const SurfaceState& state, double radius, const Vec4& center) {
  std::vector<double> g(state.positions.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = cutoff_psi((state.positions[i] - center).squaredNorm() / (radius * radius)).value;
  }
  return g;
}

LocalizerBounds localizer_scan(const FlowTrace& trace, double radius, const Vec4& center) {
  require_states(trace, 3);
  if (!(radius > 0.0)) throw Error(ErrorKind::BadParameter, "localizer radius must be positive");
  const double R2 = radius * radius;
  auto dist2 = [&center](const SurfaceState& s) {
    std::vector<double> q(s.positions.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = (s.positions[i] - center).squaredNorm();
    return q;
  };
  // g is only C^2 across r = 1, so derivatives go through psi by the chain rule
  // and only the smooth field |X - center|^2 is differentiated numerically.
  LocalizerBounds out;
  for (std::size_t k = 1; k + 1 < trace.states.size(); ++k) {
    const auto& s = trace.states[k];
    const auto b = bundle_for(s, false);
    const auto w = centered_time_weights(trace.states[k - 1].time, s.time, trace.states[k + 1].time);
    const auto qp = dist2(trace.states[k - 1]);
    const auto qm = dist2(s);
    const auto qn = dist2(trace.states[k + 1]);
    const auto lap = laplace_beltrami(qm, b);
    const auto grad = tangential_gradient(qm, b);
    for (std::size_t i = 0; i < qm.size(); ++i) {
      if (frozen_node(b.grid, i)) continue;
      const double r = qm[i] / R2;
      if (r >= 1.0) continue;
      const auto psi = cutoff_psi(r);
      const double heat_q = lap[i] - (w[0] * qp[i] + w[1] * qm[i] + w[2] * qn[i]);
      const double heat = psi.d1 * heat_q / R2 + psi.d2 * grad[i] / (R2 * R2);
      out.max_heat = std::max(out.max_heat, R2 * std::abs(heat));
      out.max_grad_ratio = std::max(out.max_grad_ratio, cutoff_grad_ratio(r) * grad[i] / R2);
    }
  }
  return out;
}

double default_p(WeightKind kind) { return kind == WeightKind::lagrangian ? 0.9 : 0.45; }

void check_p(double p, WeightKind kind) {
  const double hi = kind == WeightKind::lagrangian ? 1.0 : 0.5;
  if (!(p > 0.0 && p < hi)) {
    throw Error(ErrorKind::BadP, "p = " + std::to_string(p) + " outside (0, " + std::to_string(hi) + ") for " +
                                     std::string(weight_kind_name(kind)));
  }
}

LocalizedField localized_f(const FlowTrace& trace, double p, double radius, WeightKind kind, const Vec4& center) {
  check_p(p, kind);
  if (!(radius > 0.0)) throw Error(ErrorKind::BadParameter, "localizer radius must be positive");
  LocalizedField out;
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    const auto& s = trace.states[k];
    const auto b = bundle_for(s, false);
    const auto c = angle_cosine(b, kind);
    const auto g = localizer(s, radius, center);
    std::vector<double> f(c.size()), gf(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (g[i] > 0.0 && !(c[i] >= kWeightFloor)) {
        throw Error(ErrorKind::DenominatorFloor, "cosine " + std::to_string(c[i]) + " at node " + std::to_string(i),
                    i);
      }
      f[i] = std::exp(p * b.norm_h2[i]) / (c[i] * c[i]);
      gf[i] = g[i] > 0.0 ? g[i] * f[i] : 0.0;
      if (gf[i] > out.max_gf.value) out.max_gf = {k, i, gf[i]};
    }
    out.times.push_back(s.time);
    out.f.push_back(std::move(f));
    out.gf.push_back(std::move(gf));
  }
  return out;
}

std::vector<double> area_ratio(const SurfaceState& state, const GeometryBundle& bundle, const Vec4& center,
                               std::span<const double> radii) {
  const SurfacePiece piece{&state, &bundle};
  return area_ratio(std::span<const SurfacePiece>(&piece, 1), center, radii);
}

std::vector<double> area_ratio(std::span<const SurfacePiece> pieces, const Vec4& center,
                               std::span<const double> radii) {
  std::vector<double> out(radii.size(), 0.0);
  if (radii.empty()) return out;
  for (double R : radii) {
    if (!(R > 0.0)) throw Error(ErrorKind::BadParameter, "radii must be positive");
  }
  const double reach = *std::max_element(radii.begin(), radii.end());
  for (const auto& piece : pieces) {
    const auto& s = *piece.state;
    const auto& b = *piece.bundle;
    const auto offsets = lattice_offsets(s, center, reach);
    const double cell = s.grid.cell_area();
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      const double dmu = b.area_element[i] * cell;
      for (const auto& o : offsets) {
        const double d = (s.positions[i] + o - center).norm();
        for (std::size_t r = 0; r < radii.size(); ++r) {
          if (d < radii[r]) out[r] += dmu;
        }
      }
    }
  }
  for (std::size_t r = 0; r < radii.size(); ++r) out[r] /= radii[r] * radii[r];
  return out;
}

}  // namespace mcf4d
