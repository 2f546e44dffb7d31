#pragma once

#include "qgd/dual.hpp"
#include "qgd/edge_solver.hpp"
#include "qgd/graph.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace qgd {

struct SpectrumOptions {
  double e_min = 0.0;
  double e_max = 50.0;
  double grid_step = 0.1;
  /// Exclusion radius in k-units around exceptional energies.
  double exclusion_k = 1e-4;
  /// Relative bisection width.
  double rel_tol = 1e-11;
  /// Eigenvalues of M(E*) below mult_tol * max|eig| count as near-zero.
  double mult_tol = 1e-6;
};

struct SpectralRoot {
  double energy = 0.0;
  int multiplicity = 0;
  /// Unit-norm kernel vectors of M(E*), one per multiplicity.
  std::vector<VertexVector> kernel;
  /// Diagnostic: eigenvalues of M(E*) below the near-zero threshold.
  int near_zero_count = 0;
};

struct ExclusionWindow {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> centers;
  std::vector<std::string> edges;
};

struct SpectrumResult {
  CouplingKind kind = CouplingKind::Delta;
  double e_min = 0.0;
  double e_max = 0.0;
  std::vector<SpectralRoot> roots;
  std::vector<ExclusionWindow> unsearched;
  std::vector<std::pair<double, double>> searched;
  std::vector<std::string> warnings;
  double grid_step = 0.0;
  std::size_t evaluations = 0;

  /// Root energies repeated by multiplicity.
  std::vector<double> eigenvalues() const;
  bool excluded(double energy) const;
};

/// Merged exclusion windows around the exceptional points of `g` that reach
/// into [e_min, e_max].
std::vector<ExclusionWindow> exclusion_windows(const Graph& g, CouplingKind kind, double e_min, double e_max,
                                               double exclusion_k);

/// Complement of the windows within [e_min, e_max].
std::vector<std::pair<double, double>> searchable_segments(double e_min, double e_max,
                                                           const std::vector<ExclusionWindow>& windows);

/// Number of negative eigenvalues of a Hermitian matrix.
int negative_inertia(const Eigen::MatrixXcd& m);

/// Secular roots of an arbitrary Hermitian family on given segments, by
/// inertia jumps. Shared by the graph solver and the finite-window models.
SpectrumResult secular_roots(const std::function<Eigen::MatrixXcd(double)>& matrix_at,
                             const std::vector<std::pair<double, double>>& segments, const SpectrumOptions& opts);

/// Eigenvalues of the graph operator in [e_min, e_max] away from the
/// exceptional windows, as zeros of M(E).
SpectrumResult spectrum(const Graph& g, CouplingKind kind, const SpectrumOptions& opts);

/// Uniform rectangular lattice query. `constant` is alpha or beta for all
/// vertices; the flux per cell is 2 pi p / q.
struct BandQuery {
  double l1 = 1.0;
  double l2 = 1.0;
  CouplingKind kind = CouplingKind::Delta;
  double constant = 0.0;
  int flux_p = 0;
  int flux_q = 1;
  int bloch_grid = 64;
  int max_q = 64;
};

struct BandVerdict {
  double energy = 0.0;
  bool in_band = false;
  double margin = 0.0;
};

/// Bloch test of the non-magnetic lattice row: with
///   F = V^C(k) -+ 2 sin k(l1 + l2),
/// E is in the spectrum iff |F| <= 2|sin k l1| + 2|sin k l2|. The margin is
/// RHS - |F| for E > 0; for E <= 0 the row is rescaled by 1/sqrt|E| first.
BandVerdict band_test_rect(const BandQuery& q, double energy);

/// Energies in [e_min, e_max] where the margin changes sign, refined by
/// bisection to `tol`.
std::vector<double> band_edges_rect(const BandQuery& q, double e_min, double e_max, double grid_step,
                                    double tol = 1e-8);

/// q x q magnetic Bloch matrix of the lattice row in Landau gauge, scaled by
/// 1/k (entire in E).
Eigen::MatrixXcd magnetic_bloch_matrix(const BandQuery& q, double energy, double theta1, double theta2);

/// For each energy: whether 0 lies in the sampled eigenvalue range of the
/// magnetic Bloch matrix over the phase grid.
std::vector<BandVerdict> magnetic_band_spectrum(const BandQuery& q, const std::vector<double>& energies);

} // namespace qgd
