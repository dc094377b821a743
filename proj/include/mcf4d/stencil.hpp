#pragma once

#include "mcf4d/types.hpp"

#include <array>
#include <span>
#include <vector>

namespace mcf4d {

/// Finite-difference weights for derivatives of order 0..max_order at x0 from
/// samples at `xs` (Fornberg's recursion). Result is indexed [order][sample].
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> xs, int max_order);

/// A one-dimensional stencil: value ~= sum_k weight[k] * f[i + first + k].
struct Stencil {
  int first = 0;
  int length = 0;
  std::array<double, 6> weight{};
};

/// Fourth-order first/second derivative stencils for every node of an axis.
/// Periodic axes use the 5-point central stencil everywhere; clamped axes
/// switch to one-sided stencils on the two outermost nodes of each end.
class AxisStencils {
 public:
  explicit AxisStencils(const GridAxis& axis);

  const Stencil& first(int i) const { return first_[static_cast<std::size_t>(i)]; }
  const Stencil& second(int i) const { return second_[static_cast<std::size_t>(i)]; }
  const GridAxis& axis() const { return axis_; }

 private:
  GridAxis axis_;
  std::vector<Stencil> first_;
  std::vector<Stencil> second_;
};

/// Derivative operators on a ParamGrid for node-valued fields.
///
/// `shift` is the jump of the field across one period of each axis; it is
/// nonzero only for positions on lattice-periodic graphs.
class GridOps {
 public:
  explicit GridOps(const ParamGrid& grid);

  const ParamGrid& grid() const { return grid_; }
  const AxisStencils& stencils(int axis) const { return axis_[static_cast<std::size_t>(axis)]; }

  template <class T>
  T d1(int axis, std::span<const T> f, int i1, int i2, const std::array<T, 2>& shift) const {
    const Stencil& s = axis == 0 ? axis_[0].first(i1) : axis_[1].first(i2);
    return apply1(axis, s, f, i1, i2, shift);
  }

  template <class T>
  T d2(int axis, std::span<const T> f, int i1, int i2, const std::array<T, 2>& shift) const {
    const Stencil& s = axis == 0 ? axis_[0].second(i1) : axis_[1].second(i2);
    return apply1(axis, s, f, i1, i2, shift);
  }

  /// Mixed derivative d^2 f / du1 du2 as the tensor product of first-derivative stencils.
  template <class T>
  T d12(std::span<const T> f, int i1, int i2, const std::array<T, 2>& shift) const {
    const Stencil& a = axis_[0].first(i1);
    const Stencil& b = axis_[1].first(i2);
    T acc = f[0] * 0.0;
    for (int ka = 0; ka < a.length; ++ka) {
      int k1 = 0;
      const int j1 = wrap(0, i1 + a.first + ka, k1);
      T row = f[0] * 0.0;
      for (int kb = 0; kb < b.length; ++kb) {
        int k2 = 0;
        const int j2 = wrap(1, i2 + b.first + kb, k2);
        T v = f[grid_.node(j1, j2)];
        if (k2 != 0) v += static_cast<double>(k2) * shift[1];
        row += b.weight[static_cast<std::size_t>(kb)] * v;
      }
      if (k1 != 0) {
        double wsum = 0.0;
        for (int kb = 0; kb < b.length; ++kb) wsum += b.weight[static_cast<std::size_t>(kb)];
        row += (static_cast<double>(k1) * wsum) * shift[0];
      }
      acc += a.weight[static_cast<std::size_t>(ka)] * row;
    }
    return acc;
  }

 private:
  // Maps an index onto [0, n) on periodic axes, reporting the number of periods crossed.
  int wrap(int axis, int j, int& periods) const {
    const GridAxis& ax = grid_.axis[static_cast<std::size_t>(axis)];
    periods = 0;
    if (!ax.periodic) return j;
    while (j < 0) {
      j += ax.count;
      --periods;
    }
    while (j >= ax.count) {
      j -= ax.count;
      ++periods;
    }
    return j;
  }

  template <class T>
  T apply1(int axis, const Stencil& s, std::span<const T> f, int i1, int i2,
           const std::array<T, 2>& shift) const {
    T acc = f[0] * 0.0;
    for (int k = 0; k < s.length; ++k) {
      int periods = 0;
      NodeIndex n;
      if (axis == 0) {
        n = grid_.node(wrap(0, i1 + s.first + k, periods), i2);
      } else {
        n = grid_.node(i1, wrap(1, i2 + s.first + k, periods));
      }
      T v = f[n];
      if (periods != 0) v += static_cast<double>(periods) * shift[static_cast<std::size_t>(axis)];
      acc += s.weight[static_cast<std::size_t>(k)] * v;
    }
    return acc;
  }

  ParamGrid grid_;
  std::array<AxisStencils, 2> axis_;
};

}  // namespace mcf4d
