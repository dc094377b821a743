#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcf4d {

/// Ambient point or vector in R^4 = C^2, coordinates ordered (x1, y1, x2, y2).
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

using NodeIndex = std::size_t;

/// One parameter direction of a structured surface grid.
struct GridAxis {
  int count = 0;
  double spacing = 0.0;
  double origin = 0.0;
  bool periodic = false;

  double coord(int i) const { return origin + spacing * i; }
  /// Length of the parameter domain covered by a periodic axis.
  double period() const { return spacing * count; }
};

/// Uniform tensor-product parameter grid. Nodes are stored row-major:
/// node = i1 * n2 + i2.
struct ParamGrid {
  std::array<GridAxis, 2> axis;

  static constexpr int kMinNodes = 8;

  int n1() const { return axis[0].count; }
  int n2() const { return axis[1].count; }
  std::size_t size() const { return static_cast<std::size_t>(n1()) * static_cast<std::size_t>(n2()); }
  double cell_area() const { return axis[0].spacing * axis[1].spacing; }

  NodeIndex node(int i1, int i2) const {
    return static_cast<NodeIndex>(i1) * static_cast<NodeIndex>(n2()) + static_cast<NodeIndex>(i2);
  }
  std::array<int, 2> ij(NodeIndex node) const {
    return {static_cast<int>(node / static_cast<NodeIndex>(n2())),
            static_cast<int>(node % static_cast<NodeIndex>(n2()))};
  }

  /// Periodic axis of `count` nodes covering [origin, origin + length).
  static GridAxis periodic_axis(int count, double length, double origin = 0.0) {
    return GridAxis{count, length / count, origin, true};
  }
  /// Clamped axis of `count` nodes covering [lo, hi] including both ends.
  static GridAxis clamped_axis(int count, double lo, double hi) {
    return GridAxis{count, (hi - lo) / (count - 1), lo, false};
  }

  /// Throws Error(BadParameter) when the grid violates the stencil requirements.
  void validate() const;
};

/// Immersion F of a parametric surface at flow time `time`.
///
/// Periodic axes may carry a lattice translation: F(i + n) = F(i) + period_shift.
/// Closed surfaces (tori) use a zero shift; doubly periodic graphs use the
/// translation of one period so the stored cell tiles an entire surface.
struct SurfaceState {
  ParamGrid grid;
  std::vector<Vec4> positions;
  std::array<Vec4, 2> period_shift{Vec4::Zero(), Vec4::Zero()};
  double time = 0.0;

  bool has_lattice() const {
    return (grid.axis[0].periodic && !period_shift[0].isZero(0.0)) ||
           (grid.axis[1].periodic && !period_shift[1].isZero(0.0));
  }
};

enum class ErrorKind {
  DegenerateMetric,
  NonFinite,
  FrameInconsistent,
  OmegaVanishes,
  DegenerateFrame,
  TimeOrder,
  WeightFloor,
  ShortTrace,
  DenominatorFloor,
  InsufficientBlowup,
  InsufficientCoverage,
  ZeroCurvature,
  KindMismatch,
  BadP,
  BadParameter,
  BadConfig,
  Io,
};

std::string_view error_name(ErrorKind kind);

/// True for errors caused by invalid input or configuration (CLI exit code 2);
/// false for failures of the numerics themselves (exit code 3).
bool is_precondition_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<NodeIndex> node = std::nullopt)
      : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind), node_(node) {}

  ErrorKind kind() const { return kind_; }
  std::optional<NodeIndex> node() const { return node_; }

 private:
  ErrorKind kind_;
  std::optional<NodeIndex> node_;
};

}  // namespace mcf4d
