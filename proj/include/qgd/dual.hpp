#pragma once

#include "qgd/edge_solver.hpp"
#include "qgd/graph.hpp"

#include <Eigen/Dense>

#include <complex>
#include <ostream>
#include <vector>

namespace qgd {

using cdouble = std::complex<double>;

/// Values on interior vertices, in Graph::interior_vertices() order: psi_j for
/// delta coupling, the common outward derivative psi'_j for delta'_s.
using VertexVector = Eigen::VectorXcd;

/// Energy-dependent dual matrix. Row j reads
///   delta:    sum_n e^{i theta_jn} phi_n / W_jn - (sum_n v'_jn(l)/W_jn - alpha_j) phi_j = 0
///   delta'_s: sum_n e^{i theta_jn} phi_n / W_jn + (sum_n v_jn(l)/W_jn + beta_j) phi_j = 0
/// where n runs over interior neighbours in the off-diagonal sum and over all
/// neighbours in the diagonal sum.
struct DualSystem {
  double energy = 0.0;
  CouplingKind kind = CouplingKind::Delta;
  std::vector<std::size_t> row_vertex;
  Eigen::MatrixXcd matrix;
  bool complex_entries = false;

  Eigen::Index size() const { return matrix.rows(); }
  Eigen::MatrixXd real_matrix() const { return matrix.real(); }
};

struct AssemblyOptions {
  /// Exclusion radius in k-units around zeros of edge Wronskians.
  double exclusion_k = 1e-4;
  /// Skip the per-edge exclusion test (callers that already removed the
  /// exceptional windows from their search region).
  bool check_exclusion = true;
};

/// Dense dual matrix for a given scalar type; `Scalar = double` requires a
/// graph without magnetic phases.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dual_matrix(const Graph& g, double energy, CouplingKind kind);

/// Throws ExceptionalEnergyError when `energy` lies inside the exclusion window
/// of a Wronskian zero of some edge.
DualSystem assemble_dual(const Graph& g, double energy, CouplingKind kind, const AssemblyOptions& opts = {});

/// Solution on one edge written as f(x) = a c(x) + b s(x) in the stored
/// coordinate. The coefficients use the gauge of the `from` vertex: the value
/// seen by the `to` vertex is e^{-i phase} f(l).
struct EdgeWave {
  cdouble a{0.0, 0.0};
  cdouble b{0.0, 0.0};
};

struct Wavefunction {
  double energy = 0.0;
  CouplingKind kind = CouplingKind::Delta;
  std::vector<EdgeWave> edges;
};

/// Builds edge solutions from vertex data through the normalized u, v pair of
/// every edge. Throws ExceptionalEnergyError if some W vanishes.
Wavefunction reconstruct(const Graph& g, double energy, const VertexVector& phi, CouplingKind kind);

/// f(x) on edge `edge` (from-gauge).
cdouble evaluate(const Graph& g, const Wavefunction& w, std::size_t edge, double x);
/// (f(x), f'(x)) on edge `edge` (from-gauge).
sturm::State<cdouble> evaluate_state(const Graph& g, const Wavefunction& w, std::size_t edge, double x);

/// Vertex data (psi_j or psi'_j per coupling) read off an edge representation.
VertexVector sample_vertices(const Graph& g, const Wavefunction& w);

struct ResidualReport {
  double ode_residual = 0.0;
  double vertex_residual = 0.0;
  double l2_norm = 0.0;
  double vertex_norm = 0.0;
  double ratio = 0.0; ///< l2_norm^2 / vertex_norm^2
};

ResidualReport residual_and_norms(const Graph& g, const Wavefunction& w, const VertexVector& phi);

/// Delimited table: edge id, x, Re psi, Im psi. Values are shown in the gauge
/// where the phase is spread linearly along each edge, so the table is
/// continuous at every vertex.
void write_wavefunction_table(std::ostream& os, const Graph& g, const Wavefunction& w, double samples_per_unit);

} // namespace qgd
