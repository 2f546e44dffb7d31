#include "qgd/spectrum.hpp"

#include "qgd/error.hpp"
#include "qgd/secular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace qgd {

std::vector<double> SpectrumResult::eigenvalues() const {
  std::vector<double> out;
  for (const auto& r : roots)
    for (int i = 0; i < r.multiplicity; ++i) out.push_back(r.energy);
  return out;
}

bool SpectrumResult::excluded(double energy) const {
  return std::any_of(unsearched.begin(), unsearched.end(),
                     [&](const ExclusionWindow& w) { return energy >= w.lo && energy <= w.hi; });
}

std::vector<ExclusionWindow> exclusion_windows(const Graph& g, CouplingKind kind, double e_min, double e_max,
                                               double exclusion_k) {
  const double pad = exclusion_half_width(std::max(std::abs(e_min), std::abs(e_max)), exclusion_k) + 1e-12;
  const auto points = exceptional_points(g, kind, e_min - pad, e_max + pad);
  std::vector<ExclusionWindow> windows;
  for (const auto& p : points) {
    const double h = exclusion_half_width(p.energy, exclusion_k);
    const double lo = p.energy - h, hi = p.energy + h;
    if (hi < e_min || lo > e_max) continue;
    if (!windows.empty() && lo <= windows.back().hi) {
      auto& w = windows.back();
      w.hi = std::max(w.hi, hi);
      w.centers.push_back(p.energy);
      w.edges.push_back(g.edge(p.edge).id);
    } else {
      windows.push_back({lo, hi, {p.energy}, {g.edge(p.edge).id}});
    }
  }
  return windows;
}

std::vector<std::pair<double, double>> searchable_segments(double e_min, double e_max,
                                                           const std::vector<ExclusionWindow>& windows) {
  std::vector<std::pair<double, double>> segs;
  double cursor = e_min;
  for (const auto& w : windows) {
    if (w.lo > cursor) segs.emplace_back(cursor, std::min(w.lo, e_max));
    cursor = std::max(cursor, w.hi);
    if (cursor >= e_max) break;
  }
  if (cursor < e_max) segs.emplace_back(cursor, e_max);
  std::erase_if(segs, [](const auto& s) { return !(s.second > s.first); });
  return segs;
}

int negative_inertia(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0;
  if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real(), Eigen::EigenvaluesOnly);
    return static_cast<int>((es.eigenvalues().array() < 0.0).count());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() < 0.0).count());
}

SpectrumResult secular_roots(const std::function<Eigen::MatrixXcd(double)>& matrix_at,
                             const std::vector<std::pair<double, double>>& segments, const SpectrumOptions& opts) {
  if (!(opts.grid_step > 0.0)) throw Error("spectral-engine", "grid step must be positive");
  SpectrumResult res;
  res.e_min = opts.e_min;
  res.e_max = opts.e_max;
  res.grid_step = opts.grid_step;
  res.searched = segments;

  for (const auto& [a, b] : segments) {
    const auto scan = count_jumps([&](double e) { return negative_inertia(matrix_at(e)); }, a, b, opts.grid_step,
                                  opts.rel_tol);
    res.evaluations += scan.evaluations;
    if (!scan.monotone)
      res.warnings.push_back("inertia is not monotone on [" + std::to_string(a) + ", " + std::to_string(b) +
                             "]; grid too coarse, try a smaller --grid-step");
    for (const auto& jump : scan.jumps) {
      SpectralRoot root;
      root.energy = jump.location;
      root.multiplicity = std::abs(jump.height);
      const Eigen::MatrixXcd m = matrix_at(root.energy);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
      const auto& evals = es.eigenvalues();
      const double scale = std::max(evals.cwiseAbs().maxCoeff(), 1e-300);
      std::vector<Eigen::Index> order(static_cast<std::size_t>(evals.size()));
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](Eigen::Index x, Eigen::Index y) { return std::abs(evals(x)) < std::abs(evals(y)); });
      for (auto i : order)
        if (std::abs(evals(i)) < opts.mult_tol * scale) ++root.near_zero_count;
      for (int i = 0; i < root.multiplicity && i < static_cast<int>(order.size()); ++i)
        root.kernel.push_back(es.eigenvectors().col(order[static_cast<std::size_t>(i)]).normalized());
      res.roots.push_back(std::move(root));
    }
  }
  std::sort(res.roots.begin(), res.roots.end(),
            [](const SpectralRoot& x, const SpectralRoot& y) { return x.energy < y.energy; });
  return res;
}

SpectrumResult spectrum(const Graph& g, CouplingKind kind, const SpectrumOptions& opts) {
  if (!(opts.e_max > opts.e_min)) throw Error("spectral-engine", "empty energy range");
  if (!(opts.exclusion_k > 0.0)) throw Error("spectral-engine", "exclusion window must be positive");
  if (g.interior_vertices().empty()) throw Error("spectral-engine", "graph has no interior vertices");

  const auto windows = exclusion_windows(g, kind, opts.e_min, opts.e_max, opts.exclusion_k);
  const auto segments = searchable_segments(opts.e_min, opts.e_max, windows);
  if (segments.empty()) throw Error("spectral-engine", "empty searchable region");

  AssemblyOptions aopts;
  aopts.check_exclusion = false;
  auto res = secular_roots([&](double e) { return assemble_dual(g, e, kind, aopts).matrix; }, segments, opts);
  res.kind = kind;
  res.unsearched = windows;
  return res;
}

namespace {

struct ScaledRow {
  double s1, s2, f;
};

// Lattice row divided by k, written with entire functions of E.
ScaledRow scaled_rect_row(const BandQuery& q, double energy) {
  const double s1 = sturm::S(q.l1, energy);
  const double s2 = sturm::S(q.l2, energy);
  const double s12 = sturm::S(q.l1 + q.l2, energy);
  const double f = q.kind == CouplingKind::Delta ? -q.constant * s1 * s2 - 2.0 * s12
                                                 : -q.constant * energy * s1 * s2 + 2.0 * s12;
  return {s1, s2, f};
}

double margin_scale(double energy) {
  return energy == 0.0 ? 1.0 : std::sqrt(std::abs(energy));
}

} // namespace

BandVerdict band_test_rect(const BandQuery& q, double energy) {
  if (q.flux_p % std::max(q.flux_q, 1) != 0)
    throw Error("spectral-engine", "band_test_rect handles zero flux only; use magnetic_band_spectrum");
  const auto row = scaled_rect_row(q, energy);
  const double margin = 2.0 * std::abs(row.s1) + 2.0 * std::abs(row.s2) - std::abs(row.f);
  return {energy, margin >= 0.0, margin * margin_scale(energy)};
}

std::vector<double> band_edges_rect(const BandQuery& q, double e_min, double e_max, double grid_step, double tol) {
  std::vector<double> edges;
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((e_max - e_min) / grid_step)));
  double a = e_min;
  bool ia = band_test_rect(q, a).in_band;
  for (std::size_t i = 1; i <= n; ++i) {
    const double b = i == n ? e_max : e_min + (e_max - e_min) * static_cast<double>(i) / static_cast<double>(n);
    const bool ib = band_test_rect(q, b).in_band;
    if (ia != ib) {
      double lo = a, hi = b;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (band_test_rect(q, mid).in_band == ia)
          lo = mid;
        else
          hi = mid;
      }
      edges.push_back(0.5 * (lo + hi));
    }
    a = b;
    ia = ib;
  }
  return edges;
}

Eigen::MatrixXcd magnetic_bloch_matrix(const BandQuery& q, double energy, double theta1, double theta2) {
  const auto row = scaled_rect_row(q, energy);
  const int n = q.flux_q;
  const double flux = 2.0 * std::numbers::pi * q.flux_p / q.flux_q;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) += 2.0 * row.s1 * std::cos(flux * i + theta2) + row.f;
    const int j = (i + 1) % n;
    const cdouble phase = i + 1 == n ? std::polar(1.0, theta1) : cdouble(1.0);
    h(i, j) += row.s2 * phase;
    h(j, i) += row.s2 * std::conj(phase);
  }
  return h;
}

namespace {

struct BandRange {
  std::vector<double> lo, hi;
};

Eigen::VectorXd bloch_eigenvalues(const BandQuery& q, double energy, double t1, double t2) {
  const auto h = magnetic_bloch_matrix(q, energy, t1, t2);
  if (h.rows() == 1) return Eigen::VectorXd::Constant(1, h(0, 0).real());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

BandRange sampled_bands(const BandQuery& q, double energy) {
  const int grid = q.bloch_grid;
  const int nb = q.flux_q;
  const double step = 2.0 * std::numbers::pi / grid;
  BandRange r;
  r.lo.assign(static_cast<std::size_t>(nb), std::numeric_limits<double>::infinity());
  r.hi.assign(static_cast<std::size_t>(nb), -std::numeric_limits<double>::infinity());
  std::vector<std::pair<double, double>> arg_lo(static_cast<std::size_t>(nb)), arg_hi(static_cast<std::size_t>(nb));

  auto visit = [&](double t1, double t2) {
    const auto ev = bloch_eigenvalues(q, energy, t1, t2);
    for (int b = 0; b < nb; ++b) {
      const auto ub = static_cast<std::size_t>(b);
      if (ev(b) < r.lo[ub]) {
        r.lo[ub] = ev(b);
        arg_lo[ub] = {t1, t2};
      }
      if (ev(b) > r.hi[ub]) {
        r.hi[ub] = ev(b);
        arg_hi[ub] = {t1, t2};
      }
    }
  };
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) visit(step * i, step * j);

  // Midpoint refinement around the extremal phases.
  if (nb > 1) {
    for (int level = 1; level <= 4; ++level) {
      const double d = step / (1 << level);
      const auto lo_args = arg_lo;
      const auto hi_args = arg_hi;
      for (const auto* args : {&lo_args, &hi_args})
        for (const auto& [t1, t2] : *args)
          for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
              if (a != 0 || b != 0) visit(t1 + a * d, t2 + b * d);
    }
  }
  return r;
}

} // namespace

std::vector<BandVerdict> magnetic_band_spectrum(const BandQuery& q, const std::vector<double>& energies) {
  if (q.flux_q < 1 || q.flux_q > q.max_q)
    throw Error("spectral-engine", "flux denominator must lie in [1, " + std::to_string(q.max_q) + "]");
  if (std::gcd(q.flux_p, q.flux_q) != 1) throw Error("spectral-engine", "flux p/q must be in lowest terms");
  if (q.bloch_grid < 2 || q.bloch_grid % 2 != 0) throw Error("spectral-engine", "Bloch grid must be even and >= 2");

  std::vector<BandVerdict> out;
  out.reserve(energies.size());
  for (double e : energies) {
    const auto bands = sampled_bands(q, e);
    double margin = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < bands.lo.size(); ++b) margin = std::max(margin, std::min(-bands.lo[b], bands.hi[b]));
    out.push_back({e, margin >= 0.0, margin * margin_scale(e)});
  }
  return out;
}

} // namespace qgd
