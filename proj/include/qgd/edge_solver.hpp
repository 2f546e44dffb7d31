#pragma once

#include "qgd/graph.hpp"
#include "qgd/sturm.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace qgd {

using Transfer2 = sturm::Transfer<double>;
using State2 = sturm::State<double>;

/// Endpoint data of the canonical solutions c, s of -f'' + V f = E f on an
/// edge, in the edge's stored coordinate (x = 0 at `from`).
struct EdgeBasis {
  double energy = 0.0;
  double length = 0.0;
  /// [[c(l), s(l)], [c'(l), s'(l)]]
  Transfer2 transfer;

  double c() const { return transfer(0, 0); }
  double s() const { return transfer(0, 1); }
  double dc() const { return transfer(1, 0); }
  double ds() const { return transfer(1, 1); }
  double det() const { return transfer.determinant(); }

  /// Transfer matrix in the reflected coordinate (x = 0 at `to`). Its s entry
  /// equals the stored one.
  Transfer2 reversed() const;
};

EdgeBasis edge_basis(const EdgeData& e, double energy);

/// State (f, f') at `x` of the solution with state `initial` at x = 0.
template <typename Scalar>
sturm::State<Scalar> propagate(const EdgeData& e, double energy, const sturm::State<Scalar>& initial, double x);

/// Value and second derivative at `x` (for representation checks).
template <typename Scalar>
std::pair<Scalar, Scalar> value_and_second(const EdgeData& e, double energy, const sturm::State<Scalar>& initial,
                                           double x);

/// Normalized solutions on an edge directed toward vertex j from its far
/// vertex n, in the local coordinate x in [0, l] with n at 0 and j at l.
/// u is fixed at the j-end, v at the n-end (or by the Robin angle when n is a
/// boundary vertex); W = u v' - u' v.
struct CouplingEdgeData {
  std::size_t edge = 0;
  std::size_t toward = 0;
  std::size_t far = 0;
  bool far_is_boundary = false;
  double u0 = 0.0, du0 = 0.0; ///< u(0), u'(0)
  double v0 = 0.0, dv0 = 0.0; ///< v(0), v'(0)
  double vl = 0.0, dvl = 0.0; ///< v(l), v'(l)
  double ul = 0.0, dul = 0.0; ///< u(l), u'(l)
  double wronskian = 0.0;
  /// Transfer matrix in the local coordinate.
  Transfer2 local;
};

CouplingEdgeData coupling_data(const Graph& g, std::size_t edge, double energy, CouplingKind kind,
                               std::size_t toward);

/// W^C of the edge as seen from `toward`; a real-analytic function of E.
double wronskian(const Graph& g, std::size_t edge, double energy, CouplingKind kind, std::size_t toward);

struct ExceptionalPoint {
  double energy;
  std::size_t edge;
};

/// Energies in [e_min, e_max] where some edge's decoupled problem (Dirichlet
/// for delta / Neumann for delta'_s at interior ends, Robin kept at boundary
/// ends) has an eigenvalue, i.e. W^C(E) = 0. Sorted by energy.
std::vector<ExceptionalPoint> exceptional_points(const Graph& g, CouplingKind kind, double e_min, double e_max);

/// Scan step used for the Wronskian scan of one edge.
double exceptional_scan_step(const EdgeData& e);

/// Half-width in E of the exclusion window of radius `delta_k` in k-units
/// around an exceptional energy.
double exclusion_half_width(double energy, double delta_k);

} // namespace qgd
