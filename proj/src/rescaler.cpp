#include "mcf4d/rescaler.hpp"

#include <cmath>
#include <string>

namespace mcf4d {

namespace {

struct Peak {
  double value = -1.0;
  std::size_t state = 0;
  NodeIndex node = 0;
};

// Largest |A|^2 over states with time in [lo, hi] and nodes within `radius` of center.
// Strict comparison keeps the earliest state and then the smallest node on ties.
Peak region_max(const std::vector<CurvatureSample>& samples, double lo, double hi, const Vec4& center,
                double radius) {
  Peak best;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (s.time < lo || s.time > hi) continue;
    for (NodeIndex i = 0; i < s.positions.size(); ++i) {
      if ((s.positions[i] - center).norm() >= radius) continue;
      if (s.norm_a2[i] > best.value) best = {s.norm_a2[i], k, i};
    }
  }
  return best;
}

}  // namespace

std::vector<CurvatureSample> curvature_samples(const FlowTrace& trace, Exec exec) {
  std::vector<CurvatureSample> out;
  out.reserve(trace.states.size());
  BuildOptions opts;
  opts.exec = exec;
  opts.with_nabla_j = false;
  for (const auto& s : trace.states) {
    auto b = build_geometry(s, opts);
    out.push_back({s.time, s.positions, std::move(b.norm_a2)});
  }
  return out;
}

std::vector<double> sigma_candidates(double r_k) {
  std::vector<double> sigma(kSigmaCandidates);
  for (int j = 0; j < kSigmaCandidates; ++j) {
    sigma[j] = 0.5 * r_k * std::exp2(-static_cast<double>(kSigmaCandidates - 1 - j) / 8.0);
  }
  sigma.back() = 0.5 * r_k;
  return sigma;
}

RescaleRecord select_blowup_datum(const FlowTrace& trace, double t_hat, const Vec4& center, double r_k) {
  return select_blowup_datum(curvature_samples(trace), t_hat, center, r_k);
}

RescaleRecord select_blowup_datum(const std::vector<CurvatureSample>& samples, double t_hat, const Vec4& center,
                                  double r_k) {
  if (!(r_k > 0.0)) throw Error(ErrorKind::BadParameter, "r_k must be positive");
  const double t_hi = t_hat - 0.25 * r_k * r_k;
  int covered = 0;
  for (const auto& s : samples) {
    if (s.time >= t_hat - r_k * r_k && s.time <= t_hi) ++covered;
  }
  if (covered < 3) {
    throw Error(ErrorKind::InsufficientCoverage, "only " + std::to_string(covered) +
                                                     " stored states in [T - r^2, T - r^2/4] for r = " +
                                                     std::to_string(r_k));
  }

  const auto sigma = sigma_candidates(r_k);
  std::vector<Peak> peaks(sigma.size());
  for_each_node(Exec::parallel, sigma.size(), [&](std::size_t j) {
    const double rest = r_k - sigma[j];
    peaks[j] = region_max(samples, t_hat - rest * rest, t_hi, center, rest);
  });

  int best = -1;
  double best_score = -1.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (peaks[j].value < 0.0) continue;
    const double score = sigma[j] * sigma[j] * peaks[j].value;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(j);
    }
  }
  if (best < 0 || !(peaks[best].value > 0.0)) {
    throw Error(ErrorKind::InsufficientCoverage, "no surface nodes inside B_r(X0) during the selection window");
  }

  const Peak& p = peaks[best];
  RescaleRecord r;
  r.r_k = r_k;
  r.sigma_k = sigma[best];
  r.lambda_k = std::sqrt(p.value);
  r.peak_node = p.node;
  r.peak_state = p.state;
  r.peak_time = samples[p.state].time;
  r.peak_point = samples[p.state].positions[p.node];
  r.center = center;
  r.t_hat = t_hat;
  return r;
}

SurfaceState rescale_state(const SurfaceState& state, double lambda, const Vec4& origin, double t_origin) {
  SurfaceState out = state;
  for (auto& p : out.positions) p = lambda * (p - origin);
  for (auto& s : out.period_shift) s *= lambda;
  out.time = lambda * lambda * (state.time - t_origin);
  return out;
}

FlowTrace rescale_flow(const FlowTrace& trace, RescaleRecord& record) {
  if (record.peak_state >= trace.states.size() || trace.states[record.peak_state].time != record.peak_time) {
    throw Error(ErrorKind::BadParameter, "record was not selected from this trace");
  }
  const double lo = record.peak_time - 0.25 * record.sigma_k * record.sigma_k;
  FlowTrace out;
  out.reason = trace.reason;
  BuildOptions opts;
  opts.with_nabla_j = false;
  long row = 0;
  for (const auto& s : trace.states) {
    if (s.time < lo || s.time > record.t_hat) continue;
    SurfaceState scaled = rescale_state(s, record.lambda_k, record.peak_point, record.peak_time);
    out.scalars.push_back(summarize(scaled, build_geometry(scaled, opts), row++));
    out.states.push_back(std::move(scaled));
  }
  if (out.states.empty()) throw Error(ErrorKind::InsufficientCoverage, "no stored states in the rescaling window");
  record.rescaled = out;
  return out;
}

RescaleValidation validate_rescaled(const RescaleRecord& record) {
  if (record.rescaled.states.empty()) throw Error(ErrorKind::BadParameter, "record has no rescaled trace");
  RescaleValidation v;
  v.lambda_sigma_sq = record.lambda_k * record.lambda_k * record.sigma_k * record.sigma_k;

  const double lam = record.lambda_k;
  const double s_lo = -0.25 * lam * lam * record.sigma_k * record.sigma_k;
  const double radius = record.r_k - 0.5 * record.sigma_k;
  BuildOptions opts;
  opts.with_nabla_j = false;
  bool found_origin = false;
  for (const auto& s : record.rescaled.states) {
    if (s.time < s_lo || s.time > 0.0) continue;
    const auto b = build_geometry(s, opts);
    if (s.time == 0.0) {
      v.origin_norm = std::sqrt(b.norm_a2[record.peak_node]);
      found_origin = true;
    }
    for (NodeIndex i = 0; i < s.positions.size(); ++i) {
      const Vec4 original = s.positions[i] / lam + record.peak_point;
      if ((original - record.center).norm() < radius) v.sup_bound = std::max(v.sup_bound, b.norm_a2[i]);
    }
  }
  if (!found_origin) throw Error(ErrorKind::InsufficientCoverage, "rescaled trace lacks the s = 0 state");
  return v;
}

}  // namespace mcf4d
