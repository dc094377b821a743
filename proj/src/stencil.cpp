#include "mcf4d/stencil.hpp"

#include <string>

namespace mcf4d {

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> xs, int max_order) {
  const int n = static_cast<int>(xs.size()) - 1;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(max_order + 1),
                                     std::vector<double>(xs.size(), 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[static_cast<std::size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

Stencil make_stencil(int first, int length, int order, double h) {
  std::vector<double> xs(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) xs[static_cast<std::size_t>(k)] = first + k;
  const auto w = fornberg_weights(0.0, xs, order);
  Stencil s;
  s.first = first;
  s.length = length;
  const double scale = order == 1 ? 1.0 / h : 1.0 / (h * h);
  for (int k = 0; k < length; ++k) {
    s.weight[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(order)][static_cast<std::size_t>(k)] * scale;
  }
  return s;
}

}  // namespace

AxisStencils::AxisStencils(const GridAxis& axis) : axis_(axis) {
  const int n = axis.count;
  const double h = axis.spacing;
  first_.resize(static_cast<std::size_t>(n));
  second_.resize(static_cast<std::size_t>(n));
  const Stencil c1 = make_stencil(-2, 5, 1, h);
  const Stencil c2 = make_stencil(-2, 5, 2, h);
  for (int i = 0; i < n; ++i) {
    Stencil s1 = c1;
    Stencil s2 = c2;
    if (!axis.periodic) {
      // First derivatives need 5 points, second derivatives 6, for fourth order.
      if (i < 2) {
        s1 = make_stencil(-i, 5, 1, h);
        s2 = make_stencil(-i, 6, 2, h);
      } else if (i > n - 3) {
        const int right = n - 1 - i;
        s1 = make_stencil(right - 4, 5, 1, h);
        s2 = make_stencil(right - 5, 6, 2, h);
      }
    }
    first_[static_cast<std::size_t>(i)] = s1;
    second_[static_cast<std::size_t>(i)] = s2;
  }
}

GridOps::GridOps(const ParamGrid& grid)
    : grid_(grid), axis_{AxisStencils(grid.axis[0]), AxisStencils(grid.axis[1])} {}

void ParamGrid::validate() const {
  for (int a = 0; a < 2; ++a) {
    const GridAxis& ax = axis[static_cast<std::size_t>(a)];
    if (ax.count < kMinNodes) {
      throw Error(ErrorKind::BadParameter,
                  "axis " + std::to_string(a + 1) + " has " + std::to_string(ax.count) +
                      " nodes; at least " + std::to_string(kMinNodes) + " are required");
    }
    if (!(ax.spacing > 0.0)) {
      throw Error(ErrorKind::BadParameter, "axis " + std::to_string(a + 1) + " spacing must be positive");
    }
  }
}

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::FrameInconsistent: return "FrameInconsistent";
    case ErrorKind::OmegaVanishes: return "OmegaVanishes";
    case ErrorKind::DegenerateFrame: return "DegenerateFrame";
    case ErrorKind::TimeOrder: return "TimeOrder";
    case ErrorKind::WeightFloor: return "WeightFloor";
    case ErrorKind::ShortTrace: return "ShortTrace";
    case ErrorKind::DenominatorFloor: return "DenominatorFloor";
    case ErrorKind::InsufficientBlowup: return "InsufficientBlowup";
    case ErrorKind::InsufficientCoverage: return "InsufficientCoverage";
    case ErrorKind::ZeroCurvature: return "ZeroCurvature";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::BadP: return "BadP";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_precondition_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TimeOrder:
    case ErrorKind::ShortTrace:
    case ErrorKind::InsufficientCoverage:
    case ErrorKind::KindMismatch:
    case ErrorKind::BadP:
    case ErrorKind::BadParameter:
    case ErrorKind::BadConfig:
    case ErrorKind::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace mcf4d
