#include "mcf4d/flow.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mcf4d {

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::blowup_detected: return "blowup_detected";
    case Termination::degenerate_mesh: return "degenerate_mesh";
    case Termination::step_limit: return "step_limit";
  }
  return "unknown";
}

std::string_view singularity_class_name(SingularityClass c) {
  switch (c) {
    case SingularityClass::TypeI: return "TypeI";
    case SingularityClass::TypeII: return "TypeII";
    case SingularityClass::Undetermined: return "Undetermined";
  }
  return "unknown";
}

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double cfl_dt(const GeometryBundle& bundle, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) {
    throw Error(ErrorKind::BadParameter, "CFL safety factor must lie in (0, 1]");
  }
  double lambda_min = std::numeric_limits<double>::infinity();
  for (const Mat2& g : bundle.metric) {
    const double tr = g.trace();
    const double det = g.determinant();
    // tr^2/4 - det written without cancellation; then det / lambda_max
    const double disc = std::hypot(0.5 * (g(0, 0) - g(1, 1)), g(0, 1));
    lambda_min = std::min(lambda_min, det / (0.5 * tr + disc));
  }
  if (!(lambda_min > 0.0)) {
    throw Error(ErrorKind::DegenerateMetric, "metric lost positive definiteness");
  }
  const double h = std::min(bundle.grid.axis[0].spacing, bundle.grid.axis[1].spacing);
  return safety * lambda_min * h * h / 8.0;
}

namespace {

bool held_fixed(const ParamGrid& grid, NodeIndex node) {
  const auto [i1, i2] = grid.ij(node);
  const auto near_edge = [](const GridAxis& ax, int i) { return !ax.periodic && (i < 2 || i > ax.count - 3); };
  return near_edge(grid.axis[0], i1) || near_edge(grid.axis[1], i2);
}

std::vector<Vec4> velocity(const SurfaceState& s, Exec exec) {
  std::vector<Vec4> v = mean_curvature_velocity(s, exec);
  if (!s.grid.axis[0].periodic || !s.grid.axis[1].periodic) {
    for (NodeIndex n = 0; n < v.size(); ++n) {
      if (held_fixed(s.grid, n)) v[n].setZero();
    }
  }
  return v;
}

SurfaceState advanced(const SurfaceState& s, const std::vector<Vec4>& k, double h, Exec exec) {
  SurfaceState out = s;
  for_each_node(exec, s.positions.size(), [&](std::size_t n) { out.positions[n] = s.positions[n] + h * k[n]; });
  return out;
}

}  // namespace

SurfaceState step(const SurfaceState& state, double dt, Exec exec) {
  const auto k1 = velocity(state, exec);
  const auto k2 = velocity(advanced(state, k1, 0.5 * dt, exec), exec);
  const auto k3 = velocity(advanced(state, k2, 0.5 * dt, exec), exec);
  const auto k4 = velocity(advanced(state, k3, dt, exec), exec);
  SurfaceState out = state;
  const double w = dt / 6.0;
  for_each_node(exec, state.positions.size(), [&](std::size_t n) {
    out.positions[n] = state.positions[n] + w * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
  });
  for (NodeIndex n = 0; n < out.positions.size(); ++n) {
    if (!out.positions[n].allFinite()) {
      throw Error(ErrorKind::NonFinite, "RK4 update produced a non-finite position at node " + std::to_string(n), n);
    }
  }
  out.time = state.time + dt;
  return out;
}

StepScalars summarize(const SurfaceState& state, const GeometryBundle& bundle, long step_index) {
  StepScalars s;
  s.step = step_index;
  s.time = state.time;
  s.area = bundle.area();
  s.max_a2 = *std::max_element(bundle.norm_a2.begin(), bundle.norm_a2.end());
  s.max_h2 = *std::max_element(bundle.norm_h2.begin(), bundle.norm_h2.end());
  s.min_cos_alpha = *std::min_element(bundle.cos_alpha.begin(), bundle.cos_alpha.end());
  double ct = std::numeric_limits<double>::infinity();
  for (const auto& z : bundle.lag_angle_unit) {
    if (std::isfinite(z.real())) ct = std::min(ct, z.real());
  }
  s.min_cos_theta = std::isfinite(ct) ? ct : StepScalars::kNaN;
  s.min_det_g = bundle.min_det_g();
  return s;
}

FlowTrace run_flow(const SurfaceState& initial, const FlowControls& controls, const StepHook& hook) {
  if (controls.stride < 1) throw Error(ErrorKind::BadParameter, "stride must be at least 1");
  if (!(controls.t_end > initial.time)) throw Error(ErrorKind::BadParameter, "t_end must exceed the initial time");

  BuildOptions opts;
  opts.exec = controls.exec;
  opts.with_nabla_j = false;

  FlowTrace trace;
  SurfaceState state = initial;
  GeometryBundle bundle = build_geometry(state, opts);
  {
    StepScalars row = summarize(state, bundle, 0);
    if (hook) hook(state, bundle, row);
    trace.scalars.push_back(row);
    trace.states.push_back(state);
  }

  if (controls.fixed_dt && *controls.fixed_dt > cfl_dt(bundle, 1.0)) {
    throw Error(ErrorKind::BadParameter, "fixed dt exceeds the CFL bound");
  }

  const double t0 = initial.time;
  long k = 0;
  bool stored_last = true;
  while (true) {
    if (state.time >= controls.t_end) {
      trace.reason = Termination::reached_t_end;
      break;
    }
    if (k >= controls.max_steps) {
      trace.reason = Termination::step_limit;
      break;
    }
    double dt;
    double next_time;
    if (controls.fixed_dt) {
      dt = *controls.fixed_dt;
      next_time = t0 + static_cast<double>(k + 1) * dt;
      if (next_time > controls.t_end - 1e-9 * dt) next_time = controls.t_end;
      dt = next_time - state.time;
    } else {
      try {
        dt = cfl_dt(bundle, controls.safety);
      } catch (const Error& e) {
        trace.reason = Termination::degenerate_mesh;
        trace.failure = e.what();
        break;
      }
      next_time = state.time + dt;
      if (next_time >= controls.t_end) {
        next_time = controls.t_end;
        dt = next_time - state.time;
      }
    }

    try {
      SurfaceState next = step(state, dt, controls.exec);
      next.time = next_time;
      GeometryBundle next_bundle = build_geometry(next, opts);
      state = std::move(next);
      bundle = std::move(next_bundle);
    } catch (const Error& e) {
      trace.reason = Termination::degenerate_mesh;
      trace.failure = e.what();
      break;
    }
    ++k;
    StepScalars row = summarize(state, bundle, k);
    if (hook) hook(state, bundle, row);
    trace.scalars.push_back(row);
    stored_last = false;
    if (k % controls.stride == 0) {
      trace.states.push_back(state);
      stored_last = true;
    }
    if (row.max_a2 > controls.blowup_threshold) {
      trace.reason = Termination::blowup_detected;
      break;
    }
  }
  if (!stored_last) trace.states.push_back(state);
  return trace;
}

FlowTrace run_sphere_ode(const SphereOdeState& initial, const FlowControls& controls) {
  if (!(initial.radius > 0.0)) throw Error(ErrorKind::BadParameter, "sphere radius must be positive");
  FlowTrace trace;
  double r = initial.radius;
  double t = initial.time;
  auto record = [&](long k) {
    StepScalars s;
    s.step = k;
    s.time = t;
    s.area = 4.0 * std::numbers::pi * r * r;
    s.max_a2 = 2.0 / (r * r);
    s.max_h2 = 4.0 / (r * r);
    s.min_cos_alpha = -1.0;
    trace.scalars.push_back(s);
    trace.reduced_radius.push_back(r);
  };
  record(0);
  const auto rhs = [](double x) { return -2.0 / x; };
  long k = 0;
  while (true) {
    if (t >= controls.t_end) {
      trace.reason = Termination::reached_t_end;
      break;
    }
    if (k >= controls.max_steps) {
      trace.reason = Termination::step_limit;
      break;
    }
    double dt = controls.fixed_dt ? *controls.fixed_dt : controls.safety * r * r / 2000.0;
    if (t + dt >= controls.t_end) dt = controls.t_end - t;
    const double k1 = rhs(r);
    const double k2 = rhs(r + 0.5 * dt * k1);
    const double k3 = rhs(r + 0.5 * dt * k2);
    const double k4 = rhs(r + dt * k3);
    const double next = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(next > 0.0) || !std::isfinite(next)) {
      trace.reason = Termination::degenerate_mesh;
      trace.failure = "sphere radius collapsed";
      break;
    }
    r = next;
    t += dt;
    ++k;
    record(k);
    if (trace.scalars.back().max_a2 > controls.blowup_threshold) {
      trace.reason = Termination::blowup_detected;
      break;
    }
  }
  return trace;
}

std::vector<std::array<SurfaceState, 3>> centered_samples(const SurfaceState& initial, double t_star,
                                                          std::span<const double> deltas, int substeps,
                                                          Exec exec) {
  if (deltas.empty() || substeps < 1) throw Error(ErrorKind::BadParameter, "need deltas and substeps >= 1");
  const double dt = deltas.back() / substeps;
  std::vector<long> steps;
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    const double m = deltas[j] / dt;
    if (!(deltas[j] > 0.0) || std::abs(m - std::round(m)) > 1e-9 * m || (j > 0 && !(deltas[j] < deltas[j - 1]))) {
      throw Error(ErrorKind::BadParameter, "deltas must decrease and be multiples of the finest step");
    }
    steps.push_back(std::lround(m));
  }
  if (!(t_star - deltas[0] > initial.time)) throw Error(ErrorKind::BadParameter, "t* - delta precedes the initial state");

  FlowControls approach;
  approach.t_end = t_star - deltas[0];
  approach.exec = exec;
  approach.stride = 1 << 30;
  FlowTrace a = run_flow(initial, approach);
  if (a.reason != Termination::reached_t_end) {
    throw Error(ErrorKind::DegenerateMetric, "flow stopped before t* - delta: " + a.failure);
  }

  FlowControls fine;
  fine.fixed_dt = dt;
  fine.t_end = t_star + deltas[0];
  fine.exec = exec;
  FlowTrace b = run_flow(a.states.back(), fine);
  if (b.reason != Termination::reached_t_end) {
    throw Error(ErrorKind::DegenerateMetric, "flow stopped inside the sampling window: " + b.failure);
  }
  const long mid = steps[0];
  std::vector<std::array<SurfaceState, 3>> out;
  for (long m : steps) out.push_back({b.states[mid - m], b.states[mid], b.states[mid + m]});
  return out;
}

SingularityVerdict estimate_singular_time(std::span<const double> times, std::span<const double> max_a2) {
  const std::size_t n = times.size();
  if (n != max_a2.size() || n < 2) {
    throw Error(ErrorKind::InsufficientBlowup, "need a (time, max|A|^2) series");
  }
  std::size_t hot = 0;
  for (double a : max_a2) hot += a > 10.0 * max_a2[0] ? 1 : 0;
  if (hot < 20) {
    throw Error(ErrorKind::InsufficientBlowup,
                "only " + std::to_string(hot) + " samples exceed 10x the initial max|A|^2 (need 20)");
  }
  const std::size_t begin = n - std::max<std::size_t>(n / 4, 5);

  // Least squares for 1/a = c0 + c1 t.
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double m = static_cast<double>(n - begin);
  const double tref = times[n - 1];
  for (std::size_t i = begin; i < n; ++i) {
    const double x = times[i] - tref;
    const double y = 1.0 / max_a2[i];
    st += x;
    sy += y;
    stt += x * x;
    sty += x * y;
  }
  const double slope = (m * sty - st * sy) / (m * stt - st * st);
  const double intercept = (sy - slope * st) / m;

  SingularityVerdict v;
  v.window_begin = begin;
  if (!(slope < 0.0)) {
    v.estimated_t = std::numeric_limits<double>::infinity();
    v.type_i_sup = std::numeric_limits<double>::infinity();
    v.classification = SingularityClass::Undetermined;
    return v;
  }
  v.estimated_t = tref - intercept / slope;
  if (!(v.estimated_t > times[n - 1])) {
    // 1/max|A|^2 reaches zero faster than linearly: the Type I model is
    // inconsistent with the data, (T - t) max|A|^2 is unbounded.
    v.estimated_t = times[n - 1];
    v.type_i_sup = std::numeric_limits<double>::infinity();
    v.classification = SingularityClass::TypeII;
    return v;
  }
  std::vector<double> prod;
  prod.reserve(n - begin);
  for (std::size_t i = begin; i < n; ++i) prod.push_back((v.estimated_t - times[i]) * max_a2[i]);
  const auto [lo, hi] = std::minmax_element(prod.begin(), prod.end());
  double mean = 0.0;
  for (double p : prod) mean += p;
  mean /= static_cast<double>(prod.size());
  v.type_i_sup = *hi;
  const bool increasing = std::is_sorted(prod.begin(), prod.end());
  if ((*hi - *lo) / mean < 0.2) {
    v.classification = SingularityClass::TypeI;
  } else if (increasing && prod.back() > 5.0 * prod.front()) {
    v.classification = SingularityClass::TypeII;
  } else {
    v.classification = SingularityClass::Undetermined;
  }
  return v;
}

SingularityVerdict estimate_singular_time(const FlowTrace& trace) {
  if (trace.reason != Termination::blowup_detected) {
    throw Error(ErrorKind::InsufficientBlowup, "trace did not terminate with a detected blow-up");
  }
  std::vector<double> t, a;
  t.reserve(trace.scalars.size());
  a.reserve(trace.scalars.size());
  for (const auto& s : trace.scalars) {
    t.push_back(s.time);
    a.push_back(s.max_a2);
  }
  return estimate_singular_time(t, a);
}

}  // namespace mcf4d
