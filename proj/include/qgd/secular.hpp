#pragma once

// Locating the jumps of a monotone integer-valued counting function, such as
// the number of negative eigenvalues of a Hermitian family M(E) between two
// of its poles. Every jump is a root; its height is the multiplicity.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace qgd {

struct CountJump {
  double location = 0.0;
  int height = 0; ///< signed change of the count across the jump
};

struct CountScan {
  std::vector<CountJump> jumps;
  bool monotone = true;
  std::size_t evaluations = 0;
};

/// Samples `count` on a grid of spacing <= `grid_step` over [a, b] and
/// bisects every cell whose end counts differ until its width falls below
/// rel_tol * max(1, |E|). Cells are split recursively, so several roots in one
/// cell are all found. `monotone` is false when the grid counts both rise and
/// fall, meaning hidden pairs of roots may have been missed.
template <typename CountFn>
CountScan count_jumps(CountFn&& count, double a, double b, double grid_step, double rel_tol) {
  CountScan scan;
  if (!(b > a)) return scan;

  auto eval = [&](double e) {
    ++scan.evaluations;
    return count(e);
  };

  auto refine = [&](auto&& self, double lo, int clo, double hi, int chi) -> void {
    if (clo == chi) return;
    const double width = hi - lo;
    const double mid = 0.5 * (lo + hi);
    if (width <= rel_tol * std::max(1.0, std::abs(mid)) || mid <= lo || mid >= hi) {
      scan.jumps.push_back({mid, chi - clo});
      return;
    }
    const int cm = eval(mid);
    self(self, lo, clo, mid, cm);
    self(self, mid, cm, hi, chi);
  };

  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / grid_step)));
  double lo = a;
  int clo = eval(a);
  int direction = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double hi = i == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    const int chi = eval(hi);
    if (chi != clo) {
      const int dir = chi > clo ? 1 : -1;
      if (direction != 0 && dir != direction) scan.monotone = false;
      direction = dir;
      refine(refine, lo, clo, hi, chi);
    }
    lo = hi;
    clo = chi;
  }
  std::sort(scan.jumps.begin(), scan.jumps.end(),
            [](const CountJump& x, const CountJump& y) { return x.location < y.location; });
  return scan;
}

} // namespace qgd
