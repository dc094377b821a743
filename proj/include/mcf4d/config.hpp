#pragma once

#include "mcf4d/flow.hpp"
#include "mcf4d/functionals.hpp"
#include "mcf4d/scenario.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mcf4d {

/// Flat `key = value` file; `#` starts a comment. Duplicate keys are an error.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::filesystem::path& path);

struct RunConfig {
  ScenarioSpec scenario;
  FlowControls controls;
  std::optional<GaussianWeight> weight;  // set when weight.t0 is given
  bool weight_at_node0 = false;          // weight.x0 = node0
  WeightKind kind = WeightKind::lagrangian;
  std::optional<double> p;               // default_p(kind) when absent
  double radius = 2.5;                   // diag.R
  std::filesystem::path output_dir = "out";
  bool snapshots = true;
  std::vector<double> rescale_radii;
  std::optional<Vec4> rescale_center;    // absent: node 0 of the last state before the window
  double verify_t_star = 0.1;
  double verify_delta = 0.02;
  int verify_substeps = 8;               // fixed steps per delta at the finest level
  double theorem_t_end = 1.0;            // analytic translating traces
  int theorem_samples = 5;
  bool theorem_probe = false;            // also run the gradient-estimate probe

  double diagnostic_p() const { return p ? *p : default_p(kind); }
};

/// Unknown keys and malformed values raise BadConfig.
RunConfig make_run_config(const ConfigMap& map);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mcf4d
