#pragma once

#include "mcf4d/flow.hpp"
#include "mcf4d/types.hpp"

#include <vector>

namespace mcf4d {

/// Number of sigma candidates; consecutive candidates differ by 2^(1/8), so
/// sigma / 2 is again a candidate for all but the smallest eight.
inline constexpr int kSigmaCandidates = 64;

/// |A|^2 at the nodes of one stored state.
struct CurvatureSample {
  double time = 0.0;
  std::vector<Vec4> positions;
  std::vector<double> norm_a2;
};

std::vector<CurvatureSample> curvature_samples(const FlowTrace& trace, Exec exec = Exec::parallel);

struct RescaleRecord {
  double r_k = 0.0;
  double sigma_k = 0.0;
  double lambda_k = 0.0;
  NodeIndex peak_node = 0;
  double peak_time = 0.0;
  std::size_t peak_state = 0;  // index into the source trace's stored states
  Vec4 peak_point = Vec4::Zero();
  Vec4 center = Vec4::Zero();  // X0
  double t_hat = 0.0;
  FlowTrace rescaled;          // empty until rescale_flow
};

std::vector<double> sigma_candidates(double r_k);

/// Maximize sigma^2 max |A|^2 over Sigma_t ∩ B_{r_k - sigma}(X0),
/// t in [T - (r_k - sigma)^2, T - (r_k / 2)^2].
RescaleRecord select_blowup_datum(const FlowTrace& trace, double t_hat, const Vec4& center, double r_k);
RescaleRecord select_blowup_datum(const std::vector<CurvatureSample>& samples, double t_hat, const Vec4& center,
                                  double r_k);

/// lambda (F - origin), time lambda^2 (t - t_origin); lattice shifts scale with lambda.
SurfaceState rescale_state(const SurfaceState& state, double lambda, const Vec4& origin, double t_origin);

/// Rescaled flow F_k(s) = lambda_k (F(t_k + s / lambda_k^2) - X_k) over stored
/// states with t in [t_k - sigma_k^2 / 4, t_hat]. Fills record.rescaled.
FlowTrace rescale_flow(const FlowTrace& trace, RescaleRecord& record);

struct RescaleValidation {
  double origin_norm = 0.0;      // |A_k| at the peak node, s = 0
  double sup_bound = 0.0;        // sup |A_k|^2 over the half-size parabolic region
  double lambda_sigma_sq = 0.0;
};

RescaleValidation validate_rescaled(const RescaleRecord& record);

}  // namespace mcf4d
