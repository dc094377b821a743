#include "mcf4d/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace mcf4d {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorKind::BadConfig, key + " = '" + value + "': expected " + expected);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(key, v, "a number");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(key, v, "an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, v, "true or false");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) bad(key, v, "a comma-separated list");
  return out;
}

Vec4 to_vec4(const std::string& key, const std::string& v) {
  const auto xs = to_list(key, v);
  if (xs.size() != 4) bad(key, v, "four comma-separated numbers");
  return Vec4(xs[0], xs[1], xs[2], xs[3]);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::BadConfig, "line " + std::to_string(lineno) + ": missing '='");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::BadConfig, "line " + std::to_string(lineno) + ": empty key");
    if (!map.emplace(key, value).second) {
      throw Error(ErrorKind::BadConfig, "line " + std::to_string(lineno) + ": duplicate key " + key);
    }
  }
  return map;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig make_run_config(const ConfigMap& map) {
  RunConfig c;
  std::optional<Vec4> x0;
  std::optional<double> t0;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"scenario.name", [&](auto&, auto& v) { c.scenario.name = parse_scenario_name(v); }},
      {"scenario.n1", [&](auto& k, auto& v) { c.scenario.n1 = static_cast<int>(to_long(k, v)); }},
      {"scenario.n2", [&](auto& k, auto& v) { c.scenario.n2 = static_cast<int>(to_long(k, v)); }},
      {"scenario.radius", [&](auto& k, auto& v) { c.scenario.radius = to_double(k, v); }},
      {"scenario.amplitude", [&](auto& k, auto& v) { c.scenario.amplitude = to_double(k, v); }},
      {"scenario.x_max", [&](auto& k, auto& v) { c.scenario.x_max = to_double(k, v); }},
      {"scenario.half_width", [&](auto& k, auto& v) { c.scenario.half_width = to_double(k, v); }},
      {"scenario.periodic", [&](auto& k, auto& v) { c.scenario.periodic = to_bool(k, v); }},
      {"controls.t_end", [&](auto& k, auto& v) { c.controls.t_end = to_double(k, v); }},
      {"controls.max_steps", [&](auto& k, auto& v) { c.controls.max_steps = to_long(k, v); }},
      {"controls.blowup_threshold", [&](auto& k, auto& v) { c.controls.blowup_threshold = to_double(k, v); }},
      {"controls.stride", [&](auto& k, auto& v) { c.controls.stride = static_cast<int>(to_long(k, v)); }},
      {"controls.safety", [&](auto& k, auto& v) { c.controls.safety = to_double(k, v); }},
      {"controls.dt", [&](auto& k, auto& v) { c.controls.fixed_dt = to_double(k, v); }},
      {"weight.x0",
       [&](auto& k, auto& v) {
         if (v == "node0") {
           c.weight_at_node0 = true;
         } else {
           x0 = to_vec4(k, v);
         }
       }},
      {"weight.t0", [&](auto& k, auto& v) { t0 = to_double(k, v); }},
      {"diag.kind", [&](auto&, auto& v) { c.kind = parse_weight_kind(v); }},
      {"diag.p", [&](auto& k, auto& v) { c.p = to_double(k, v); }},
      {"diag.R", [&](auto& k, auto& v) { c.radius = to_double(k, v); }},
      {"output.dir", [&](auto&, auto& v) { c.output_dir = v; }},
      {"output.snapshots", [&](auto& k, auto& v) { c.snapshots = to_bool(k, v); }},
      {"rescale.radii", [&](auto& k, auto& v) { c.rescale_radii = to_list(k, v); }},
      {"rescale.center", [&](auto& k, auto& v) { c.rescale_center = to_vec4(k, v); }},
      {"verify.t_star", [&](auto& k, auto& v) { c.verify_t_star = to_double(k, v); }},
      {"verify.delta", [&](auto& k, auto& v) { c.verify_delta = to_double(k, v); }},
      {"verify.substeps", [&](auto& k, auto& v) { c.verify_substeps = static_cast<int>(to_long(k, v)); }},
      {"theorem.t_end", [&](auto& k, auto& v) { c.theorem_t_end = to_double(k, v); }},
      {"theorem.samples", [&](auto& k, auto& v) { c.theorem_samples = static_cast<int>(to_long(k, v)); }},
      {"theorem.probe", [&](auto& k, auto& v) { c.theorem_probe = to_bool(k, v); }},
  };
  for (const auto& [key, value] : map) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorKind::BadConfig, "unknown key " + key);
    it->second(key, value);
  }

  if (x0 && c.weight_at_node0) throw Error(ErrorKind::BadConfig, "weight.x0 given twice");
  if ((x0 || c.weight_at_node0) && !t0) throw Error(ErrorKind::BadConfig, "weight.x0 needs weight.t0");
  if (t0) c.weight = GaussianWeight{x0.value_or(Vec4::Zero()), *t0};
  if (c.p) check_p(*c.p, c.kind);
  if (!(c.radius > 0.0)) throw Error(ErrorKind::BadConfig, "diag.R must be positive");
  if (c.controls.stride < 1) throw Error(ErrorKind::BadConfig, "controls.stride must be at least 1");
  if (!(c.verify_delta > 0.0) || c.verify_substeps < 1) {
    throw Error(ErrorKind::BadConfig, "verify.delta and verify.substeps must be positive");
  }
  if (c.theorem_samples < 1) throw Error(ErrorKind::BadConfig, "theorem.samples must be positive");
  c.scenario.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return make_run_config(read_config_file(path)); }

}  // namespace mcf4d
