#include "mcf4d/cli.hpp"

#include "mcf4d/config.hpp"
#include "mcf4d/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

namespace mcf4d {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::string out;
  std::string quantity = "cos_theta";
  int refine = 3;
};

fs::path output_dir(const RunConfig& cfg, const Options& o) { return o.out.empty() ? cfg.output_dir : fs::path(o.out); }

GaussianWeight resolve_weight(const RunConfig& cfg, const SurfaceState& initial) {
  if (!cfg.weight) throw Error(ErrorKind::BadConfig, "this command needs weight.t0 (and weight.x0)");
  GaussianWeight w = *cfg.weight;
  if (cfg.weight_at_node0) w.center = initial.positions.front();
  return w;
}

json scenario_json(const ScenarioSpec& s) {
  return {{"name", scenario_name(s.name)},
          {"n1", s.n1},
          {"n2", s.n2},
          {"radius", s.radius},
          {"amplitude", s.amplitude},
          {"xMax", s.x_max},
          {"halfWidth", s.half_width},
          {"periodic", s.periodic}};
}

json trace_json(const FlowTrace& tr) {
  return {{"termination", termination_name(tr.reason)},
          {"steps", tr.scalars.empty() ? 0 : tr.scalars.back().step},
          {"storedStates", tr.states.size()},
          {"finalTime", tr.scalars.empty() ? 0.0 : tr.scalars.back().time},
          {"failure", tr.failure}};
}

FlowTrace simulate_trace(const RunConfig& cfg, const StepHook& hook = {}) {
  if (cfg.scenario.name == ScenarioName::sphere_ode) {
    return run_sphere_ode(generate_sphere_ode(cfg.scenario), cfg.controls);
  }
  return run_flow(generate_scenario(cfg.scenario), cfg.controls, hook);
}

int cmd_simulate(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const fs::path dir = output_dir(cfg, o);
  StepHook hook;
  if (cfg.weight && cfg.scenario.name != ScenarioName::sphere_ode) {
    hook = psi_hook(resolve_weight(cfg, generate_scenario(cfg.scenario)), cfg.kind);
  }
  const FlowTrace tr = simulate_trace(cfg, hook);
  write_timeseries(dir / "timeseries.csv", tr.scalars);
  if (cfg.snapshots) {
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%05zu.txt", k);
      write_snapshot(dir / "snapshots" / name, tr.states[k]);
    }
  }
  json report{{"command", "simulate"}, {"scenario", scenario_json(cfg.scenario)}, {"trace", trace_json(tr)}};
  if (tr.reason == Termination::blowup_detected) {
    try {
      report["singularity"] = to_json(estimate_singular_time(tr));
    } catch (const Error& e) {
      report["singularity"] = {{"error", error_name(e.kind())}, {"message", e.what()}};
    }
  }
  write_json(dir / "report.json", report);
  out << "simulate: " << termination_name(tr.reason) << " after " << trace_json(tr)["steps"] << " steps, t = "
      << format_real(tr.scalars.back().time) << '\n';
  return kExitOk;
}

int cmd_rescale(const RunConfig& cfg, const Options& o, std::ostream& out) {
  if (cfg.rescale_radii.empty()) throw Error(ErrorKind::BadConfig, "rescale needs rescale.radii");
  const fs::path dir = output_dir(cfg, o);
  const FlowTrace tr = simulate_trace(cfg);
  const SingularityVerdict v = estimate_singular_time(tr);
  const auto samples = curvature_samples(tr);
  json records = json::array();
  for (std::size_t j = 0; j < cfg.rescale_radii.size(); ++j) {
    const double r = cfg.rescale_radii[j];
    Vec4 center = tr.states.front().positions.front();
    if (cfg.rescale_center) {
      center = *cfg.rescale_center;
    } else {
      for (const auto& s : tr.states) {
        if (s.time <= v.estimated_t - 0.25 * r * r) center = s.positions.front();
      }
    }
    RescaleRecord rec = select_blowup_datum(samples, v.estimated_t, center, r);
    rescale_flow(tr, rec);
    const RescaleValidation val = validate_rescaled(rec);
    records.push_back(to_json(rec, val));
    write_timeseries(dir / ("rescaled_" + std::to_string(j) + ".csv"), rec.rescaled.scalars);
    out << "rescale r = " << format_real(r) << ": |A_k|(0,0) = " << format_real(val.origin_norm)
        << ", sup |A_k|^2 = " << format_real(val.sup_bound) << ", lambda^2 sigma^2 = "
        << format_real(val.lambda_sigma_sq) << '\n';
  }
  write_json(dir / "rescale.json", {{"command", "rescale"},
                                    {"scenario", scenario_json(cfg.scenario)},
                                    {"trace", trace_json(tr)},
                                    {"singularity", to_json(v)},
                                    {"records", records}});
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const Options& o, std::ostream& out) {
  if (o.refine < 3) throw Error(ErrorKind::BadParameter, "--refine needs at least 3 levels");
  const Quantity q = parse_quantity(o.quantity);
  const fs::path dir = output_dir(cfg, o);
  std::vector<double> deltas;
  for (int j = 0; j < o.refine; ++j) deltas.push_back(cfg.verify_delta / std::exp2(j));
  const auto triples =
      centered_samples(generate_scenario(cfg.scenario), cfg.verify_t_star, deltas, cfg.verify_substeps);

  std::vector<std::vector<double>> fields;
  for (const auto& t : triples) fields.push_back(evolution_residual_at(t[0], t[1], t[2], q));
  const auto orders = successive_difference_orders(fields);

  std::ofstream csv;
  const fs::path csv_path = dir / "verify.csv";
  fs::create_directories(dir);
  csv.open(csv_path, std::ios::binary);
  if (!csv) throw Error(ErrorKind::Io, "cannot write " + csv_path.string());
  csv << "level,delta,max_residual,successive_difference,order\n";
  json levels = json::array();
  bool ok = true;
  for (std::size_t j = 0; j < fields.size(); ++j) {
    double m = 0.0;
    for (double x : fields[j]) {
      if (std::isfinite(x)) m = std::max(m, std::abs(x));
    }
    const double diff = j + 1 < fields.size() ? max_abs_difference(fields[j], fields[j + 1]) : NAN;
    const double order = j >= 1 && j - 1 < orders.size() ? orders[j - 1] : NAN;
    if (std::isfinite(order) && !(order >= 1.5)) ok = false;
    csv << j << ',' << format_real(deltas[j]) << ',' << format_real(m) << ',' << format_real(diff) << ','
        << format_real(order) << '\n';
    levels.push_back({{"delta", deltas[j]}, {"maxResidual", m}});
    out << "level " << j << " delta " << format_real(deltas[j]) << " max|residual| " << format_real(m);
    if (std::isfinite(order)) out << " order " << format_real(order);
    out << '\n';
  }
  json jo = json::array();
  for (double x : orders) jo.push_back(x);
  write_json(dir / "verify.json", {{"command", "verify"},
                                   {"quantity", quantity_name(q)},
                                   {"tStar", cfg.verify_t_star},
                                   {"levels", levels},
                                   {"orders", jo},
                                   {"passed", ok}});
  if (!ok) {
    out << "observed order below 1.5\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_monotonicity(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const fs::path dir = output_dir(cfg, o);
  const SurfaceState initial = generate_scenario(cfg.scenario);
  const GaussianWeight w = resolve_weight(cfg, initial);
  const FlowTrace tr = run_flow(initial, cfg.controls);
  const MonotonicityReport rep = monotonicity_scan(tr, w, cfg.kind);
  const TestField field = cfg.kind == WeightKind::lagrangian ? TestField::inv_cos_theta : TestField::inv_cos_alpha;
  const IdentitySeries id = weighted_integral_identity_check(tr, w, field);

  double max_lhs = -INFINITY, mismatch = 0.0;
  for (std::size_t i = 0; i < rep.lhs.size(); ++i) {
    max_lhs = std::max(max_lhs, rep.lhs[i]);
    mismatch = std::max(mismatch, std::abs(rep.residual[i] - id.residual[i]));
  }
  json j{{"command", "monotonicity"},
         {"scenario", scenario_json(cfg.scenario)},
         {"trace", trace_json(tr)},
         {"report", to_json(rep)},
         {"maxDPsiDt", max_lhs},
         {"monotone", max_lhs <= 1e-6},
         {"identityResidual", id.residual},
         {"identityMismatch", mismatch}};
  write_json(dir / "monotonicity.json", j);
  out << "monotonicity: max dPsi/dt = " << format_real(max_lhs) << ", identity mismatch = " << format_real(mismatch)
      << '\n';
  return kExitOk;
}

int cmd_theorem(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const fs::path dir = output_dir(cfg, o);
  FlowTrace tr;
  if (cfg.scenario.name == ScenarioName::grim_reaper_product) {
    std::vector<double> times;
    for (int k = 0; k < cfg.theorem_samples; ++k) {
      times.push_back(cfg.theorem_samples == 1 ? 0.0 : cfg.theorem_t_end * k / (cfg.theorem_samples - 1));
    }
    tr.states = grim_reaper_translating_states(cfg.scenario, times);
  } else {
    tr = simulate_trace(cfg);
    if (tr.states.empty()) throw Error(ErrorKind::BadConfig, "theorem needs a parametric scenario");
  }
  const TheoremReport rep = check_main_theorem(tr, cfg.kind);
  json j = to_json(rep);
  if (cfg.theorem_probe) j["gradientProbe"] = to_json(gradient_estimate_probe(tr, cfg.diagnostic_p(), cfg.radius, cfg.kind));
  write_json(dir / "report.json", j);
  out << "theorem (" << weight_kind_name(rep.kind) << "): lhs = " << format_real(rep.lhs) << ", "
      << verdict_name(rep.verdict) << " on sampled data; hypotheses met: no (flow is not ancient)\n";
  return kExitOk;
}

int cmd_cutoff_scan(const Options& o, std::ostream& out) {
  fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
  if (!o.config.empty()) dir = output_dir(load_run_config(o.config), o);
  fs::create_directories(dir);
  const fs::path csv_path = dir / "cutoff.csv";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw Error(ErrorKind::Io, "cannot write " + csv_path.string());
  csv << "r,psi,d1,d2,grad_ratio\n";
  constexpr int samples = 10000;
  for (int i = 0; i <= samples; ++i) {
    const double r = static_cast<double>(i) / samples;
    const auto p = cutoff_psi(r);
    csv << format_real(r) << ',' << format_real(p.value) << ',' << format_real(p.d1) << ',' << format_real(p.d2)
        << ',' << format_real(cutoff_grad_ratio(r)) << '\n';
  }
  const auto& k = cutoff_constants();
  write_json(dir / "cutoff.json", to_json(k));
  out << "C_psi = " << format_real(k.c_psi) << ", C1 = " << format_real(k.c1) << ", C2 = " << format_real(k.c2)
      << '\n';
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mean curvature flow of surfaces in R^4", "mcf4d"};
  app.require_subcommand(1);
  Options o;
  auto add = [&](const char* name, const char* help, bool needs_config) {
    auto* sub = app.add_subcommand(name, help);
    auto* opt = sub->add_option("--config", o.config, "flat key = value run configuration");
    if (needs_config) opt->required();
    sub->add_option("--out", o.out, "output directory (overrides output.dir)");
    return sub;
  };
  auto* simulate = add("simulate", "run a flow and write timeseries, snapshots and report", true);
  auto* rescale = add("rescale", "blow-up rescaling at the configured radii", true);
  auto* verify = add("verify", "time-refinement study of an evolution identity", true);
  verify->add_option("--quantity", o.quantity, "cos_theta, inv_cos_theta, cos_alpha, inv_cos2_alpha or H2");
  verify->add_option("--refine", o.refine, "number of refinement levels (>= 3)");
  auto* mono = add("monotonicity", "weighted Gaussian monotonicity along a flow", true);
  auto* theorem = add("theorem", "evaluate the extremal inequality on a flow", true);
  auto* cutoff = add("cutoff-scan", "tabulate the cutoff profile and its constants", false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  }

  try {
    if (cutoff->parsed()) return cmd_cutoff_scan(o, out);
    const RunConfig cfg = load_run_config(o.config);
    if (simulate->parsed()) return cmd_simulate(cfg, o, out);
    if (rescale->parsed()) return cmd_rescale(cfg, o, out);
    if (verify->parsed()) return cmd_verify(cfg, o, out);
    if (mono->parsed()) return cmd_monotonicity(cfg, o, out);
    if (theorem->parsed()) return cmd_theorem(cfg, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_precondition_error(e.kind()) ? kExitPrecondition : kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: Io: " << e.what() << '\n';
    return kExitPrecondition;
  }
  return kExitPrecondition;
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace mcf4d
