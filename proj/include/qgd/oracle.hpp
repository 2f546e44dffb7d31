#pragma once

// Reference solvers that never form the dual matrix: a finite-element
// discretization of the graph operator (delta coupling only) and the direct
// matching system on per-edge coefficients (both couplings, valid at
// exceptional energies).

#include "qgd/dual.hpp"
#include "qgd/graph.hpp"
#include "qgd/spectrum.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qgd {

struct FDConfig {
  /// Target element size; every potential piece of length d gets
  /// ceil(d / h) elements.
  double h = 0.01;
  /// Number of lowest eigenvalues returned by fd_spectrum.
  int count = 8;
  /// Combine h and h/2 as (4 E_{h/2} - E_h) / 3.
  bool richardson = true;
  /// Absolute bisection tolerance on each eigenvalue.
  double tol = 1e-12;
};

/// Lowest `cfg.count` eigenvalues (repeated by multiplicity).
std::vector<double> fd_spectrum(const Graph& g, CouplingKind kind, const FDConfig& cfg);

/// All eigenvalues in [e_min, e_max] as seen at the finest mesh.
std::vector<double> fd_spectrum_in(const Graph& g, CouplingKind kind, const FDConfig& cfg, double e_min,
                                   double e_max);

/// Unextrapolated eigenvalues with indices [first, first + n) on the mesh
/// refined `level` times. Exposed for convergence studies.
std::vector<double> fd_eigenvalues(const Graph& g, const FDConfig& cfg, int level, int first, int n);

/// Number of eigenvalues below `sigma` on the mesh refined `level` times.
int fd_count_below(const Graph& g, const FDConfig& cfg, int level, double sigma);

/// Matching matrix S(E) acting on (a_0, b_0, a_1, b_1, ...), where edge e
/// carries f_e = a_e c + b_e s in its stored coordinate and from-gauge. Rows
/// come in vertex order: continuity (delta) or derivative matching
/// (delta'_s) rows, then the coupling row; one Robin row per boundary vertex.
Eigen::MatrixXcd matching_matrix(const Graph& g, double energy, CouplingKind kind);

/// Sign of det S(E) from an LU factorization (real systems only); 0 when a
/// pivot vanishes.
int matching_det_sign(const Graph& g, double energy, CouplingKind kind);

struct MatchingOptions {
  double e_min = 0.0;
  double e_max = 50.0;
  double grid_step = 0.01;
  /// Candidates with sigma_min / sigma_max above this are rejected.
  double accept_tol = 1e-8;
  /// Singular values below mult_tol * sigma_max count toward the multiplicity.
  double mult_tol = 1e-6;
};

struct MatchingRoot {
  double energy = 0.0;
  int multiplicity = 0;
  double sigma_ratio = 0.0;
  /// Kernel basis of S(E*), as per-edge coefficients.
  std::vector<std::vector<EdgeWave>> kernel;
};

struct MatchingResult {
  std::vector<MatchingRoot> roots;
  /// Sign changes of det S over the scan (real systems), counted on the grid.
  int det_sign_changes = 0;
  std::vector<std::string> warnings;

  std::vector<double> eigenvalues() const;
};

MatchingResult matching_spectrum(const Graph& g, CouplingKind kind, const MatchingOptions& opts);

enum class CompareStatus { Matched, ExpectedExclusion, Missing, Spurious, MultiplicityMismatch };

std::string to_string(CompareStatus s);

struct CompareRow {
  CompareStatus status = CompareStatus::Matched;
  double duality = 0.0;   ///< NaN when absent
  double reference = 0.0; ///< NaN when absent
  int duality_multiplicity = 0;
  int reference_multiplicity = 0;
};

struct CompareReport {
  double tol = 0.0;
  std::vector<CompareRow> rows;
  int matched = 0;
  int expected_exclusions = 0;
  int failures = 0;

  bool ok() const { return failures == 0; }
};

/// Matches duality roots to a reference list (repeated by multiplicity)
/// within `tol`. Reference values outside [e_min, e_max] of the duality run
/// are ignored; unmatched reference values inside its unsearched windows are
/// expected.
CompareReport compare(const SpectrumResult& duality, const std::vector<double>& reference, double tol);

} // namespace qgd
