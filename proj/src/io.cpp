#include "mcf4d/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcf4d {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

nlohmann::json real(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_timeseries(std::ostream& out, std::span<const StepScalars> rows) {
  out << kTimeseriesHeader << '\n';
  for (const auto& r : rows) {
    out << r.step;
    for (double v : {r.time, r.area, r.max_a2, r.max_h2, r.min_cos_alpha, r.min_cos_theta, r.psi, r.rhs_drift,
                     r.rhs_dissipation, r.rhs_gradient, r.min_det_g}) {
      out << ',' << format_real(v);
    }
    out << '\n';
  }
}

void write_timeseries(const std::filesystem::path& path, std::span<const StepScalars> rows) {
  auto out = open_out(path);
  write_timeseries(out, rows);
  finish(out, path);
}

void write_snapshot(std::ostream& out, const SurfaceState& state) {
  out << "MCF4D 1 " << state.grid.n1() << ' ' << state.grid.n2() << ' ' << (state.grid.axis[0].periodic ? 1 : 0)
      << ' ' << (state.grid.axis[1].periodic ? 1 : 0) << ' ' << format_real(state.time) << '\n';
  for (const auto& p : state.positions) {
    out << format_real(p[0]) << ' ' << format_real(p[1]) << ' ' << format_real(p[2]) << ' ' << format_real(p[3])
        << '\n';
  }
}

void write_snapshot(const std::filesystem::path& path, const SurfaceState& state) {
  auto out = open_out(path);
  write_snapshot(out, state);
  finish(out, path);
}

Snapshot read_snapshot(std::istream& in) {
  std::string magic;
  int version = 0, p1 = 0, p2 = 0;
  Snapshot s;
  if (!(in >> magic >> version >> s.n1 >> s.n2 >> p1 >> p2 >> s.time) || magic != "MCF4D" || version != 1) {
    throw Error(ErrorKind::Io, "bad snapshot header");
  }
  if (s.n1 < 1 || s.n2 < 1 || (p1 != 0 && p1 != 1) || (p2 != 0 && p2 != 1)) {
    throw Error(ErrorKind::Io, "bad snapshot header values");
  }
  s.periodic = {p1 == 1, p2 == 1};
  const std::size_t n = static_cast<std::size_t>(s.n1) * static_cast<std::size_t>(s.n2);
  s.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 4; ++c) {
      if (!(in >> s.positions[i][c])) throw Error(ErrorKind::Io, "snapshot truncated at row " + std::to_string(i));
    }
  }
  return s;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  return read_snapshot(in);
}

SurfaceState restore_state(const Snapshot& snap, const SurfaceState& like) {
  if (snap.n1 != like.grid.n1() || snap.n2 != like.grid.n2() || snap.periodic[0] != like.grid.axis[0].periodic ||
      snap.periodic[1] != like.grid.axis[1].periodic) {
    throw Error(ErrorKind::BadParameter, "snapshot layout does not match the template state");
  }
  SurfaceState s = like;
  s.positions = snap.positions;
  s.time = snap.time;
  return s;
}

nlohmann::json to_json(const TheoremReport& r) {
  return {
      {"kind", weight_kind_name(r.kind)},
      {"supA2Before", real(r.sup_a2_before)},
      {"scaleApplied", real(r.scale_applied)},
      {"h2", real(r.h2)},
      {"delta", real(r.delta)},
      {"lhs", real(r.lhs)},
      {"verdict", verdict_name(r.verdict)},
      {"hypotheses",
       {{"ancient", r.hypotheses.ancient},
        {"complete", r.hypotheses.complete},
        {"areaRatioChecked", r.hypotheses.area_ratio_checked},
        {"supA2Normalized", r.hypotheses.sup_a2_normalized}}},
      {"theoremApplies", r.theorem_applies},
      {"interpretation", r.interpretation},
  };
}

nlohmann::json to_json(const SingularityVerdict& v) {
  return {{"estimatedT", real(v.estimated_t)},
          {"typeISup", real(v.type_i_sup)},
          {"classification", singularity_class_name(v.classification)},
          {"windowBegin", v.window_begin}};
}

nlohmann::json to_json(const RescaleRecord& r, const RescaleValidation& v) {
  return {{"rK", real(r.r_k)},
          {"sigmaK", real(r.sigma_k)},
          {"lambdaK", real(r.lambda_k)},
          {"peakNode", r.peak_node},
          {"peakTime", real(r.peak_time)},
          {"peakPoint", {real(r.peak_point[0]), real(r.peak_point[1]), real(r.peak_point[2]), real(r.peak_point[3])}},
          {"center", {real(r.center[0]), real(r.center[1]), real(r.center[2]), real(r.center[3])}},
          {"tHat", real(r.t_hat)},
          {"rescaledStates", r.rescaled.states.size()},
          {"originNorm", real(v.origin_norm)},
          {"supBound", real(v.sup_bound)},
          {"lambdaSigmaSq", real(v.lambda_sigma_sq)}};
}

nlohmann::json to_json(const MonotonicityReport& r) {
  auto arr = [](const std::vector<double>& xs) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : xs) a.push_back(real(x));
    return a;
  };
  nlohmann::json j{{"weightKind", weight_kind_name(r.kind)},
                   {"times", arr(r.times)},
                   {"psi", arr(r.psi)},
                   {"lhs", arr(r.lhs)},
                   {"rhsDrift", arr(r.rhs_drift)},
                   {"rhsDissipation", arr(r.rhs_dissipation)},
                   {"rhsGradient", arr(r.rhs_gradient)},
                   {"residual", arr(r.residual)}};
  if (!r.rhs_dissipation_half_h2.empty()) j["rhsDissipationHalfH2"] = arr(r.rhs_dissipation_half_h2);
  return j;
}

nlohmann::json to_json(const GradientProbe& g) {
  return {{"maxGF", real(g.max_gf)},
          {"maxTimeIndex", g.max_time_index},
          {"maxNode", g.max_node},
          {"interiorMax", g.interior_max},
          {"inequalityResidualMin", real(g.inequality_residual_min)},
          {"identityDefect", real(g.identity_defect)},
          {"supA2", real(g.sup_a2)},
          {"evaluatedNodes", g.evaluated_nodes}};
}

nlohmann::json to_json(const CutoffConstants& k) {
  return {{"supNegSecondDeriv", real(k.sup_neg_d2)},
          {"supGradRatio", real(k.sup_grad_ratio)},
          {"cPsi", real(k.c_psi)},
          {"c1", real(k.c1)},
          {"c2", real(k.c2)}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace mcf4d
