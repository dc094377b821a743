#include "mcf4d/geometry.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <string>

namespace mcf4d {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum NodeStatus : std::uint8_t { kOk = 0, kDegenerate = 1, kNonFinite = 2, kBadFrame = 3, kBadOmega = 4 };

template <class T>
std::array<T, 2> zero_shift() {
  if constexpr (std::is_same_v<T, double>) {
    return {0.0, 0.0};
  } else {
    return {T::Zero(), T::Zero()};
  }
}

struct Jet {
  Vec4 f1, f2, f11, f22, f12;
};

Jet position_jet(const GridOps& ops, const SurfaceState& s, int i1, int i2) {
  const std::span<const Vec4> f(s.positions);
  const std::array<Vec4, 2> shift{s.grid.axis[0].periodic ? s.period_shift[0] : Vec4::Zero(),
                                  s.grid.axis[1].periodic ? s.period_shift[1] : Vec4::Zero()};
  Jet j;
  j.f1 = ops.d1<Vec4>(0, f, i1, i2, shift);
  j.f2 = ops.d1<Vec4>(1, f, i1, i2, shift);
  j.f11 = ops.d2<Vec4>(0, f, i1, i2, shift);
  j.f22 = ops.d2<Vec4>(1, f, i1, i2, shift);
  j.f12 = ops.d12<Vec4>(f, i1, i2, shift);
  return j;
}

bool metric_degenerate(const Mat2& g) {
  const double det = g.determinant();
  return !(det > kDegenerateMetric * g(0, 0) * g(1, 1)) || !(g(0, 0) > 0.0) || !(g(1, 1) > 0.0);
}

double omega(const Vec4& a, const Vec4& b) {
  return a[0] * b[1] - a[1] * b[0] + a[2] * b[3] - a[3] * b[2];
}

std::complex<double> big_omega(const Vec4& a, const Vec4& b) {
  const std::complex<double> a1(a[0], a[1]), a2(a[2], a[3]);
  const std::complex<double> b1(b[0], b[1]), b2(b[2], b[3]);
  return a1 * b2 - a2 * b1;
}

std::array<Vec4, 2> canonical_normal_frame(const Vec4& e1, const Vec4& e2) {
  std::array<Vec4, 2> v{Vec4::Zero(), Vec4::Zero()};
  int found = 0;
  for (int b = 0; b < 4 && found < 2; ++b) {
    Vec4 w = Vec4::Unit(b);
    for (int pass = 0; pass < 2; ++pass) {
      w -= e1.dot(w) * e1;
      w -= e2.dot(w) * e2;
      for (int k = 0; k < found; ++k) w -= v[static_cast<std::size_t>(k)].dot(w) * v[static_cast<std::size_t>(k)];
    }
    const double norm = w.norm();
    if (norm < 1e-6) continue;
    v[static_cast<std::size_t>(found++)] = w / norm;
  }
  Mat4 m;
  m.col(0) = e1;
  m.col(1) = e2;
  m.col(2) = v[0];
  m.col(3) = v[1];
  if (m.determinant() < 0.0) v[1] = -v[1];
  return v;
}

std::array<Vec4, 2> rotate(const std::array<Vec4, 2>& frame, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * frame[0] + s * frame[1], -s * frame[0] + c * frame[1]};
}

Mat4 j_from_frames(const std::array<Vec4, 2>& e, const std::array<Vec4, 2>& v) {
  return e[1] * e[0].transpose() - e[0] * e[1].transpose() + v[1] * v[0].transpose() - v[0] * v[1].transpose();
}

void throw_status(const std::vector<std::uint8_t>& status, const char* where) {
  for (std::size_t n = 0; n < status.size(); ++n) {
    switch (status[n]) {
      case kOk:
        continue;
      case kDegenerate:
        throw Error(ErrorKind::DegenerateMetric, std::string(where) + ": det g collapsed at node " + std::to_string(n), n);
      case kNonFinite:
        throw Error(ErrorKind::NonFinite, std::string(where) + ": non-finite value at node " + std::to_string(n), n);
      case kBadFrame:
        throw Error(ErrorKind::DegenerateFrame, std::string(where) + ": ill-conditioned frame at node " + std::to_string(n), n);
      default:
        throw Error(ErrorKind::FrameInconsistent, std::string(where) + ": |omega(e1,e2)| > 1 at node " + std::to_string(n), n);
    }
  }
}

std::shared_ptr<const GridOps> ops_for(const ParamGrid& grid) { return std::make_shared<const GridOps>(grid); }

}  // namespace

double GeometryBundle::min_det_g() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& g : metric) m = std::min(m, g.determinant());
  return m;
}

double GeometryBundle::area() const {
  double a = 0.0;
  for (double w : area_element) a += w;
  return a * grid.cell_area();
}

GeometryBundle build_geometry(const SurfaceState& state, const BuildOptions& options) {
  state.grid.validate();
  const std::size_t n = state.grid.size();
  if (state.positions.size() != n) {
    throw Error(ErrorKind::BadParameter, "positions do not match the grid size");
  }

  GeometryBundle b;
  b.grid = state.grid;
  b.ops = ops_for(state.grid);
  b.tangents.resize(n);
  b.metric.resize(n);
  b.inverse_metric.resize(n);
  b.area_element.resize(n);
  b.christoffel.resize(n);
  b.tangent_frame.resize(n);
  b.normal_frame.resize(n);
  b.second_ff.resize(n);
  b.mean_curvature.resize(n);
  b.norm_a2.resize(n);
  b.norm_h2.resize(n);
  b.cos_alpha.resize(n);
  b.lag_angle_unit.resize(n);
  b.omega_modulus.resize(n);

  std::vector<std::uint8_t> status(n, kOk);
  const GridOps& ops = *b.ops;

  for_each_node(options.exec, n, [&](std::size_t node) {
    const auto [i1, i2] = state.grid.ij(node);
    const Jet jet = position_jet(ops, state, i1, i2);
    Mat2 g;
    g(0, 0) = jet.f1.dot(jet.f1);
    g(0, 1) = g(1, 0) = jet.f1.dot(jet.f2);
    g(1, 1) = jet.f2.dot(jet.f2);
    if (!g.allFinite()) {
      status[node] = kNonFinite;
      return;
    }
    if (metric_degenerate(g)) {
      status[node] = kDegenerate;
      return;
    }
    const double det = g.determinant();
    Mat2 gi;
    gi << g(1, 1) / det, -g(0, 1) / det, -g(1, 0) / det, g(0, 0) / det;

    b.tangents[node] = {jet.f1, jet.f2};
    b.metric[node] = g;
    b.inverse_metric[node] = gi;
    b.area_element[node] = std::sqrt(det);

    const std::array<const Vec4*, 2> df{&jet.f1, &jet.f2};
    const Vec4* ddf[2][2] = {{&jet.f11, &jet.f12}, {&jet.f12, &jet.f22}};
    for (int k = 0; k < 2; ++k) {
      Mat2 gamma;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          gamma(i, j) = gi(k, 0) * ddf[i][j]->dot(*df[0]) + gi(k, 1) * ddf[i][j]->dot(*df[1]);
        }
      }
      b.christoffel[node][static_cast<std::size_t>(k)] = gamma;
    }

    std::array<Vec4, 2> e;
    e[0] = jet.f1 / std::sqrt(g(0, 0));
    e[1] = jet.f2 - e[0].dot(jet.f2) * e[0];
    e[1] -= e[0].dot(e[1]) * e[0];
    e[1].normalize();
    std::array<Vec4, 2> v = canonical_normal_frame(e[0], e[1]);
    if (options.gauge) {
      const auto angles = options.gauge(node);
      e = rotate(e, angles[0]);
      v = rotate(v, angles[1]);
    }
    b.tangent_frame[node] = e;
    b.normal_frame[node] = v;

    Vec4 h = Vec4::Zero();
    double a2 = 0.0;
    for (int alpha = 0; alpha < 2; ++alpha) {
      const Vec4& va = v[static_cast<std::size_t>(alpha)];
      Mat2 hh;
      hh(0, 0) = jet.f11.dot(va);
      hh(0, 1) = hh(1, 0) = jet.f12.dot(va);
      hh(1, 1) = jet.f22.dot(va);
      b.second_ff[node][static_cast<std::size_t>(alpha)] = hh;
      const Mat2 mixed = gi * hh;
      h += mixed.trace() * va;
      a2 += (mixed * mixed).trace();
    }
    b.mean_curvature[node] = h;
    b.norm_a2[node] = a2;
    b.norm_h2[node] = h.squaredNorm();

    double ca = omega(e[0], e[1]);
    if (std::abs(ca) > 1.0 + 1e-10) {
      status[node] = kBadOmega;
      return;
    }
    b.cos_alpha[node] = std::clamp(ca, -1.0, 1.0);
    const std::complex<double> om = big_omega(e[0], e[1]);
    const double mod = std::abs(om);
    b.omega_modulus[node] = mod;
    b.lag_angle_unit[node] = mod < kOmegaVanishes ? std::complex<double>(kNaN, kNaN) : om / mod;

    if (!std::isfinite(a2) || !h.allFinite() || !std::isfinite(mod)) status[node] = kNonFinite;
  });
  throw_status(status, "build_geometry");

  if (options.with_nabla_j) {
    std::vector<Mat4> jfield(n);
    for_each_node(options.exec, n, [&](std::size_t node) {
      const auto& e = b.tangent_frame[node];
      const auto& v = b.normal_frame[node];
      jfield[node] = j_from_frames(e, v);
      // J_Sigma must be an orthogonal complex structure: |J|_F^2 = 4 and J^2 = -I.
      const double dev = (jfield[node] * jfield[node] + Mat4::Identity()).norm();
      if (!(dev < 1e-8)) status[node] = kBadFrame;
    });
    throw_status(status, "nabla_bar_J");

    b.nabla_bar_j2.resize(n);
    b.j_admissible.resize(n);
    const std::span<const Mat4> jf(jfield);
    const auto shift = zero_shift<Mat4>();
    for_each_node(options.exec, n, [&](std::size_t node) {
      const auto [i1, i2] = state.grid.ij(node);
      const Mat4 j1 = ops.d1<Mat4>(0, jf, i1, i2, shift);
      const Mat4 j2 = ops.d1<Mat4>(1, jf, i1, i2, shift);
      const Mat2& gi = b.inverse_metric[node];
      const double frob = gi(0, 0) * j1.squaredNorm() + 2.0 * gi(0, 1) * (j1.cwiseProduct(j2)).sum() +
                          gi(1, 1) * j2.squaredNorm();
      b.nabla_bar_j2[node] = kNablaJScale * frob;
      const double ca = b.cos_alpha[node];
      b.j_admissible[node] = (1.0 - ca * ca) >= kHolomorphicFilter ? 1 : 0;
      if (!std::isfinite(frob)) status[node] = kNonFinite;
    });
    throw_status(status, "nabla_bar_J");
  }
  return b;
}

std::vector<Vec4> mean_curvature_velocity(const SurfaceState& state, Exec exec) {
  state.grid.validate();
  const std::size_t n = state.grid.size();
  const GridOps ops(state.grid);
  std::vector<Vec4> out(n);
  std::vector<std::uint8_t> status(n, kOk);
  for_each_node(exec, n, [&](std::size_t node) {
    const auto [i1, i2] = state.grid.ij(node);
    const Jet jet = position_jet(ops, state, i1, i2);
    Mat2 g;
    g(0, 0) = jet.f1.dot(jet.f1);
    g(0, 1) = g(1, 0) = jet.f1.dot(jet.f2);
    g(1, 1) = jet.f2.dot(jet.f2);
    if (!g.allFinite()) {
      status[node] = kNonFinite;
      return;
    }
    if (metric_degenerate(g)) {
      status[node] = kDegenerate;
      return;
    }
    const double det = g.determinant();
    const double g00 = g(1, 1) / det, g01 = -g(0, 1) / det, g11 = g(0, 0) / det;
    const Vec4 lap = g00 * jet.f11 + 2.0 * g01 * jet.f12 + g11 * jet.f22;
    const double p1 = jet.f1.dot(lap), p2 = jet.f2.dot(lap);
    const Vec4 h = lap - (g00 * p1 + g01 * p2) * jet.f1 - (g01 * p1 + g11 * p2) * jet.f2;
    if (!h.allFinite()) status[node] = kNonFinite;
    out[node] = h;
  });
  throw_status(status, "mean_curvature_velocity");
  return out;
}

std::vector<double> kahler_angle(const SurfaceState& state, const GeometryBundle& bundle) {
  (void)state;
  std::vector<double> out(bundle.size());
  for (std::size_t node = 0; node < out.size(); ++node) {
    const auto& e = bundle.tangent_frame[node];
    const double ca = omega(e[0], e[1]);
    if (std::abs(ca) > 1.0 + 1e-10) {
      throw Error(ErrorKind::FrameInconsistent, "|omega(e1,e2)| exceeds 1 at node " + std::to_string(node), node);
    }
    out[node] = std::clamp(ca, -1.0, 1.0);
  }
  return out;
}

LagrangianAngle lagrangian_angle(const SurfaceState& state, const GeometryBundle& bundle) {
  (void)state;
  LagrangianAngle out;
  out.unit.resize(bundle.size());
  out.modulus.resize(bundle.size());
  for (std::size_t node = 0; node < bundle.size(); ++node) {
    const auto& e = bundle.tangent_frame[node];
    const std::complex<double> om = big_omega(e[0], e[1]);
    const double mod = std::abs(om);
    out.modulus[node] = mod;
    if (mod < kOmegaVanishes) {
      out.unit[node] = {kNaN, kNaN};
      out.vanishing.push_back(node);
    } else {
      out.unit[node] = om / mod;
    }
  }
  return out;
}

std::vector<std::optional<double>> nabla_bar_J_norm(const SurfaceState& state, const GeometryBundle& bundle) {
  (void)state;
  if (!bundle.has_nabla_j()) {
    throw Error(ErrorKind::BadParameter, "bundle was built without nabla-bar J");
  }
  std::vector<std::optional<double>> out(bundle.size());
  for (std::size_t node = 0; node < bundle.size(); ++node) {
    if (bundle.j_admissible[node]) out[node] = bundle.nabla_bar_j2[node];
  }
  return out;
}

std::vector<std::array<double, 2>> coordinate_gradient(std::span<const double> field, const GeometryBundle& bundle) {
  const GridOps& ops = *bundle.ops;
  const auto shift = zero_shift<double>();
  std::vector<std::array<double, 2>> out(bundle.size());
  for (std::size_t node = 0; node < out.size(); ++node) {
    const auto [i1, i2] = bundle.grid.ij(node);
    out[node] = {ops.d1<double>(0, field, i1, i2, shift), ops.d1<double>(1, field, i1, i2, shift)};
  }
  return out;
}

std::vector<double> laplace_beltrami(std::span<const double> field, const GeometryBundle& bundle) {
  const GridOps& ops = *bundle.ops;
  const auto shift = zero_shift<double>();
  std::vector<double> out(bundle.size());
  for (std::size_t node = 0; node < out.size(); ++node) {
    const auto [i1, i2] = bundle.grid.ij(node);
    const double f1 = ops.d1<double>(0, field, i1, i2, shift);
    const double f2 = ops.d1<double>(1, field, i1, i2, shift);
    Mat2 hess;
    hess(0, 0) = ops.d2<double>(0, field, i1, i2, shift);
    hess(1, 1) = ops.d2<double>(1, field, i1, i2, shift);
    hess(0, 1) = hess(1, 0) = ops.d12<double>(field, i1, i2, shift);
    const auto& gamma = bundle.christoffel[node];
    const Mat2 cov = hess - gamma[0] * f1 - gamma[1] * f2;
    out[node] = (bundle.inverse_metric[node].cwiseProduct(cov)).sum();
  }
  return out;
}

std::vector<double> tangential_gradient(std::span<const double> field, const GeometryBundle& bundle) {
  return gradient_dot(field, field, bundle);
}

std::vector<double> gradient_dot(std::span<const double> a, std::span<const double> b, const GeometryBundle& bundle) {
  const auto ga = coordinate_gradient(a, bundle);
  const auto gb = a.data() == b.data() ? ga : coordinate_gradient(b, bundle);
  std::vector<double> out(bundle.size());
  for (std::size_t node = 0; node < out.size(); ++node) {
    const Mat2& gi = bundle.inverse_metric[node];
    out[node] = gi(0, 0) * ga[node][0] * gb[node][0] + gi(0, 1) * (ga[node][0] * gb[node][1] + ga[node][1] * gb[node][0]) +
                gi(1, 1) * ga[node][1] * gb[node][1];
  }
  return out;
}

std::vector<double> normal_gradient_norm2(std::span<const Vec4> field, const GeometryBundle& bundle) {
  const GridOps& ops = *bundle.ops;
  const auto shift = zero_shift<Vec4>();
  std::vector<double> out(bundle.size());
  for (std::size_t node = 0; node < out.size(); ++node) {
    const auto [i1, i2] = bundle.grid.ij(node);
    const Vec4 d1 = ops.d1<Vec4>(0, field, i1, i2, shift);
    const Vec4 d2 = ops.d1<Vec4>(1, field, i1, i2, shift);
    const auto& v = bundle.normal_frame[node];
    const Eigen::Vector2d n1(v[0].dot(d1), v[1].dot(d1));
    const Eigen::Vector2d n2(v[0].dot(d2), v[1].dot(d2));
    const Mat2& gi = bundle.inverse_metric[node];
    out[node] = gi(0, 0) * n1.squaredNorm() + 2.0 * gi(0, 1) * n1.dot(n2) + gi(1, 1) * n2.squaredNorm();
  }
  return out;
}

std::vector<double> position_gradient_norm2(const SurfaceState& state, const GeometryBundle& bundle) {
  std::vector<double> out(bundle.size());
  for (std::size_t node = 0; node < out.size(); ++node) {
    const auto& t = bundle.tangents[node];
    const Mat2& gi = bundle.inverse_metric[node];
    double sum = 0.0;
    for (int beta = 0; beta < 4; ++beta) {
      const double a = t[0][beta], c = t[1][beta];
      sum += gi(0, 0) * a * a + 2.0 * gi(0, 1) * a * c + gi(1, 1) * c * c;
    }
    out[node] = sum;
  }
  (void)state;
  return out;
}

Mat4 j_sigma(const GeometryBundle& bundle, NodeIndex node) {
  return j_from_frames(bundle.tangent_frame[node], bundle.normal_frame[node]);
}

}  // namespace mcf4d
