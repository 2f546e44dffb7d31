#pragma once

// Closed-form dual rows for the rectangular lattice (optionally with a
// homogeneous magnetic field) and for comb graphs, their finite truncation
// windows, and the explicit graphs they are dual to.

#include "qgd/graph.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace qgd::models {

using cdouble = std::complex<double>;

enum class Gauge { Circular, Landau };

/// Vertex (n, m) sits at (n l1, m l2): east/west hops run along edges of
/// length l1, north/south hops along edges of length l2.
struct RectLatticeParams {
  double l1 = 1.0;
  double l2 = 1.0;
  CouplingKind kind = CouplingKind::Delta;
  std::function<double(int, int)> constant = [](int, int) { return 0.0; };
  /// Flux per cell, B l1 l2.
  double flux = 0.0;
  Gauge gauge = Gauge::Circular;
};

RectLatticeParams uniform_rect(double l1, double l2, CouplingKind kind, double constant, double flux = 0.0,
                               Gauge gauge = Gauge::Circular);

/// Row of the lattice equation at (n, m):
///   north phi_{n,m+1} + south phi_{n,m-1} + east phi_{n+1,m} + west phi_{n-1,m} + diagonal phi_{n,m} = 0
/// with hop magnitudes sin k l1 (north/south) and sin k l2 (east/west) and
///   diagonal = V^C_nm(k) -+ 2 sin k(l1 + l2),
///   V^alpha = -(alpha/k) sin k l1 sin k l2,   V^beta = -beta k sin k l1 sin k l2.
struct RectRow {
  cdouble north, south, east, west;
  double diagonal = 0.0;
};

RectRow rect_row(const RectLatticeParams& p, int n, int m, double k);

/// Peierls phase of the hop (n, m) -> (n, m + 1) and (n, m) -> (n + 1, m).
/// Circular gauge: Phi n / 2 and -Phi m / 2. Landau gauge: Phi n and 0.
double north_phase(const RectLatticeParams& p, int n, int m);
double east_phase(const RectLatticeParams& p, int n, int m);

/// Factor relating the generic dual row to rect_row:
/// -sin k l1 sin k l2 / k for delta, -k sin k l1 sin k l2 for delta'_s.
double rect_row_scalar(const RectLatticeParams& p, double k);

struct RectWindow {
  int n0 = 0, n1 = 0, m0 = 0, m1 = 0;
  int width() const { return n1 - n0 + 1; }
  int height() const { return m1 - m0 + 1; }
  /// Row-major in n, then m.
  Eigen::Index index(int n, int m) const { return static_cast<Eigen::Index>((n - n0) * height() + (m - m0)); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(width() * height()); }
};

/// Hops leaving the window are dropped.
Eigen::MatrixXcd rect_window_matrix(const RectLatticeParams& p, const RectWindow& w, double k);

/// Interior vertices on the window, each perimeter vertex closed off by legs
/// to boundary vertices (Dirichlet for delta, Neumann for delta'_s). Interior
/// vertices appear in RectWindow::index order. Phases follow the gauge.
Graph rect_lattice_graph(const RectLatticeParams& p, const RectWindow& w);

/// A tooth hanging off line vertex j. length == 0 means no tooth.
struct Tooth {
  double length = 0.0;
  double omega = 0.0;
  PotentialSpec potential;
};

struct CombParams {
  double spacing = 1.0;
  CouplingKind kind = CouplingKind::Delta;
  std::function<Tooth(int)> tooth = [](int) { return Tooth{}; };
  std::function<double(int)> constant = [](int) { return 0.0; };
};

/// Tooth lengths |j| unit, common end angle and line coupling.
CombParams maryland(double spacing, double unit, CouplingKind kind, double omega, double constant);

/// Row (phi_{j-1} + phi_{j+1}) + diagonal phi_j = 0 with
///   diagonal = V^C_j(k) -+ 2 cos kL.
struct CombRow {
  double left = 1.0;
  double right = 1.0;
  double diagonal = 0.0;
};

/// Zero-potential teeth use the closed form
///   V^alpha_j = -(cot(k l_j - eta_j) + alpha_j / k) sin kL,
///   V^beta_j  = -(tan(k l_j - eta_j) + beta_j k) sin kL,
/// eta_j = arctan(k tan omega_j); other teeth go through the edge solver.
CombRow comb_row(const CombParams& p, int j, double k);

/// V^C_j from the closed form (zero tooth potential required).
double comb_potential_closed(const CombParams& p, int j, double k);
/// V^C_j from the tooth's normalized solution v, valid for any tooth potential:
///   V^alpha_j = -(v'(l)/v(l) + alpha_j) sin kL / k,  V^beta_j = -(v(l)/v'(l) + beta_j) k sin kL.
double comb_potential_general(const CombParams& p, int j, double k);

/// -sin kL / k for delta, -k sin kL for delta'_s.
double comb_row_scalar(const CombParams& p, double k);

Eigen::MatrixXcd comb_window_matrix(const CombParams& p, int j0, int j1, double k);

/// Line vertices j0..j1 (interior, in order), end legs of length L to
/// boundary vertices (Dirichlet for delta, Neumann for delta'_s), and teeth.
Graph comb_graph(const CombParams& p, int j0, int j1);

/// Bloch matrix of the discrete magnetic Laplacian (Harper form) with flux
/// 2 pi p / q per plaquette, Landau gauge:
///   H_nn = 2 cos(2 pi p n / q + theta2), unit hops along n with wrap e^{i theta1}.
Eigen::MatrixXcd harper_bloch_matrix(int p, int q, double theta1, double theta2);

} // namespace qgd::models
