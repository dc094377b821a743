#pragma once

#include "mcf4d/flow.hpp"
#include "mcf4d/functionals.hpp"
#include "mcf4d/rescaler.hpp"
#include "mcf4d/theorem.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>

namespace mcf4d {

inline constexpr const char* kTimeseriesHeader =
    "step,t,area,max_A2,max_H2,min_cos_alpha,min_cos_theta,psi,rhs_drift,rhs_dissipation,rhs_gradient,min_detg";

/// %.17g; non-finite values print as nan / inf / -inf.
std::string format_real(double x);

void write_timeseries(std::ostream& out, std::span<const StepScalars> rows);
void write_timeseries(const std::filesystem::path& path, std::span<const StepScalars> rows);

/// `MCF4D 1 n1 n2 periodic1 periodic2 time`, then n1*n2 rows of x1 y1 x2 y2.
void write_snapshot(std::ostream& out, const SurfaceState& state);
void write_snapshot(const std::filesystem::path& path, const SurfaceState& state);

struct Snapshot {
  int n1 = 0;
  int n2 = 0;
  std::array<bool, 2> periodic{false, false};
  double time = 0.0;
  std::vector<Vec4> positions;
};

Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

/// The file carries neither spacing nor lattice shifts; they come from `like`,
/// which must have the same layout.
SurfaceState restore_state(const Snapshot& snap, const SurfaceState& like);

nlohmann::json to_json(const TheoremReport& r);
nlohmann::json to_json(const SingularityVerdict& v);
nlohmann::json to_json(const RescaleRecord& r, const RescaleValidation& v);
nlohmann::json to_json(const MonotonicityReport& r);
nlohmann::json to_json(const GradientProbe& g);
nlohmann::json to_json(const CutoffConstants& k);

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mcf4d
