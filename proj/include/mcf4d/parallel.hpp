#pragma once

#include <cstddef>

namespace mcf4d {

/// Execution policy for per-node kernels. Both policies run the same kernel
/// body per node and produce bit-identical results; `serial` is the reference.
enum class Exec { serial, parallel };

template <class Body>
void for_each_node(Exec exec, std::size_t count, Body&& body) {
#if defined(MCF4D_HAVE_OPENMP)
  if (exec == Exec::parallel) {
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#endif
  (void)exec;
  for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace mcf4d
