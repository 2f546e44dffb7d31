#include "qgd/models.hpp"

#include "qgd/edge_solver.hpp"
#include "qgd/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qgd::models {

namespace {

constexpr double exceptional_tol = 1e-12;

cdouble unit(double theta) { return theta == 0.0 ? cdouble(1.0) : std::polar(1.0, theta); }

void require_positive_k(double k, const char* what) {
  if (!(k > 0.0)) throw Error("model-zoo", std::string(what) + " requires k > 0");
}

std::string vid(int n, int m) { return "v" + std::to_string(n) + "," + std::to_string(m); }

} // namespace

RectLatticeParams uniform_rect(double l1, double l2, CouplingKind kind, double constant, double flux, Gauge gauge) {
  RectLatticeParams p;
  p.l1 = l1;
  p.l2 = l2;
  p.kind = kind;
  p.constant = [constant](int, int) { return constant; };
  p.flux = flux;
  p.gauge = gauge;
  return p;
}

double north_phase(const RectLatticeParams& p, int n, int) {
  return p.gauge == Gauge::Circular ? 0.5 * p.flux * n : p.flux * n;
}

double east_phase(const RectLatticeParams& p, int, int m) {
  return p.gauge == Gauge::Circular ? -0.5 * p.flux * m : 0.0;
}

RectRow rect_row(const RectLatticeParams& p, int n, int m, double k) {
  require_positive_k(k, "rect_row");
  const double s1 = std::sin(k * p.l1);
  const double s2 = std::sin(k * p.l2);
  if (std::abs(s1) < exceptional_tol || std::abs(s2) < exceptional_tol)
    throw ExceptionalEnergyError("model-zoo", "lattice", k * k);

  RectRow row;
  row.north = s1 * unit(north_phase(p, n, m));
  row.south = s1 * unit(-north_phase(p, n, m - 1));
  row.east = s2 * unit(east_phase(p, n, m));
  row.west = s2 * unit(-east_phase(p, n - 1, m));
  const double c = p.constant(n, m);
  const double sum = std::sin(k * (p.l1 + p.l2));
  row.diagonal = p.kind == CouplingKind::Delta ? -(c / k) * s1 * s2 - 2.0 * sum : -c * k * s1 * s2 + 2.0 * sum;
  return row;
}

double rect_row_scalar(const RectLatticeParams& p, double k) {
  const double prod = std::sin(k * p.l1) * std::sin(k * p.l2);
  return p.kind == CouplingKind::Delta ? -prod / k : -k * prod;
}

Eigen::MatrixXcd rect_window_matrix(const RectLatticeParams& p, const RectWindow& w, double k) {
  if (w.width() < 1 || w.height() < 1) throw Error("model-zoo", "empty lattice window");
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(w.size(), w.size());
  for (int n = w.n0; n <= w.n1; ++n) {
    for (int m = w.m0; m <= w.m1; ++m) {
      const auto row = rect_row(p, n, m, k);
      const auto r = w.index(n, m);
      h(r, r) = row.diagonal;
      if (m < w.m1) h(r, w.index(n, m + 1)) = row.north;
      if (m > w.m0) h(r, w.index(n, m - 1)) = row.south;
      if (n < w.n1) h(r, w.index(n + 1, m)) = row.east;
      if (n > w.n0) h(r, w.index(n - 1, m)) = row.west;
    }
  }
  return h;
}

Graph rect_lattice_graph(const RectLatticeParams& p, const RectWindow& w) {
  if (w.width() < 1 || w.height() < 1) throw Error("model-zoo", "empty lattice window");
  const double omega = p.kind == CouplingKind::Delta ? 0.0 : 0.5 * std::numbers::pi;
  GraphDescription d;
  for (int n = w.n0; n <= w.n1; ++n)
    for (int m = w.m0; m <= w.m1; ++m) d.vertices.push_back(VertexData::interior(vid(n, m), p.constant(n, m)));

  auto inside = [&](int n, int m) { return n >= w.n0 && n <= w.n1 && m >= w.m0 && m <= w.m1; };
  auto name = [&](int n, int m, const std::string& owner) {
    if (inside(n, m)) return vid(n, m);
    auto id = "b" + std::to_string(n) + "," + std::to_string(m) + "@" + owner;
    d.vertices.push_back(VertexData::boundary(id, omega));
    return id;
  };

  for (int n = w.n0 - 1; n <= w.n1; ++n) {
    for (int m = w.m0 - 1; m <= w.m1; ++m) {
      // East edge (n, m) -> (n + 1, m), present when one end is inside.
      if (m >= w.m0 && (inside(n, m) || inside(n + 1, m))) {
        const auto owner = inside(n, m) ? vid(n, m) : vid(n + 1, m);
        const auto from = name(n, m, owner);
        const auto to = name(n + 1, m, owner);
        d.edges.push_back({"e" + std::to_string(n) + "," + std::to_string(m), from, to, p.l1, PotentialSpec::zero(),
                           east_phase(p, n, m)});
      }
      // North edge (n, m) -> (n, m + 1).
      if (n >= w.n0 && (inside(n, m) || inside(n, m + 1))) {
        const auto owner = inside(n, m) ? vid(n, m) : vid(n, m + 1);
        const auto from = name(n, m, owner);
        const auto to = name(n, m + 1, owner);
        d.edges.push_back({"n" + std::to_string(n) + "," + std::to_string(m), from, to, p.l2, PotentialSpec::zero(),
                           north_phase(p, n, m)});
      }
    }
  }
  return build_graph(d);
}

CombParams maryland(double spacing, double unit_length, CouplingKind kind, double omega, double constant) {
  CombParams p;
  p.spacing = spacing;
  p.kind = kind;
  p.tooth = [unit_length, omega](int j) { return Tooth{std::abs(j) * unit_length, omega, PotentialSpec::zero()}; };
  p.constant = [constant](int) { return constant; };
  return p;
}

double comb_potential_closed(const CombParams& p, int j, double k) {
  require_positive_k(k, "comb row");
  const auto tooth = p.tooth(j);
  if (!tooth.potential.is_zero()) throw Error("model-zoo", "closed-form comb row needs a potential-free tooth");
  const double c = p.constant(j);
  const double skl = std::sin(k * p.spacing);
  if (tooth.length == 0.0) return p.kind == CouplingKind::Delta ? -(c / k) * skl : -c * k * skl;

  // arctan(k tan omega), continued through omega = pi/2.
  const double eta = std::atan2(k * std::sin(tooth.omega), std::cos(tooth.omega));
  const double phase = k * tooth.length - eta;
  if (p.kind == CouplingKind::Delta) {
    if (std::abs(std::sin(phase)) < exceptional_tol) throw ExceptionalEnergyError("model-zoo", "tooth", k * k);
    return -(std::cos(phase) / std::sin(phase) + c / k) * skl;
  }
  if (std::abs(std::cos(phase)) < exceptional_tol) throw ExceptionalEnergyError("model-zoo", "tooth", k * k);
  return -(std::tan(phase) + c * k) * skl;
}

double comb_potential_general(const CombParams& p, int j, double k) {
  require_positive_k(k, "comb row");
  const auto tooth = p.tooth(j);
  const double c = p.constant(j);
  const double skl = std::sin(k * p.spacing);
  if (tooth.length == 0.0) return p.kind == CouplingKind::Delta ? -(c / k) * skl : -c * k * skl;

  // v from the loose end (x = 0) to the line vertex (x = l).
  EdgeData e;
  e.length = tooth.length;
  e.potential = tooth.potential;
  const auto t = edge_basis(e, k * k).transfer;
  const State2 v = t * State2(std::sin(tooth.omega), -std::cos(tooth.omega));
  if (p.kind == CouplingKind::Delta) {
    if (std::abs(v(0)) < exceptional_tol) throw ExceptionalEnergyError("model-zoo", "tooth", k * k);
    return -(v(1) / v(0) + c) * skl / k;
  }
  if (std::abs(v(1)) < exceptional_tol) throw ExceptionalEnergyError("model-zoo", "tooth", k * k);
  return -(v(0) / v(1) + c) * k * skl;
}

double comb_row_scalar(const CombParams& p, double k) {
  const double skl = std::sin(k * p.spacing);
  return p.kind == CouplingKind::Delta ? -skl / k : -k * skl;
}

CombRow comb_row(const CombParams& p, int j, double k) {
  require_positive_k(k, "comb row");
  if (std::abs(std::sin(k * p.spacing)) < exceptional_tol) throw ExceptionalEnergyError("model-zoo", "line", k * k);
  const auto tooth = p.tooth(j);
  const double v = tooth.potential.is_zero() ? comb_potential_closed(p, j, k) : comb_potential_general(p, j, k);
  const double ckl = 2.0 * std::cos(k * p.spacing);
  return {1.0, 1.0, p.kind == CouplingKind::Delta ? v - ckl : v + ckl};
}

Eigen::MatrixXcd comb_window_matrix(const CombParams& p, int j0, int j1, double k) {
  if (j1 < j0) throw Error("model-zoo", "empty comb window");
  const Eigen::Index n = j1 - j0 + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int j = j0; j <= j1; ++j) {
    const auto row = comb_row(p, j, k);
    const Eigen::Index r = j - j0;
    h(r, r) = row.diagonal;
    if (j > j0) h(r, r - 1) = row.left;
    if (j < j1) h(r, r + 1) = row.right;
  }
  return h;
}

Graph comb_graph(const CombParams& p, int j0, int j1) {
  if (j1 < j0) throw Error("model-zoo", "empty comb window");
  const double end_omega = p.kind == CouplingKind::Delta ? 0.0 : 0.5 * std::numbers::pi;
  GraphDescription d;
  auto line = [](int j) { return "j" + std::to_string(j); };
  for (int j = j0; j <= j1; ++j) d.vertices.push_back(VertexData::interior(line(j), p.constant(j)));
  d.vertices.push_back(VertexData::boundary("end_left", end_omega));
  d.vertices.push_back(VertexData::boundary("end_right", end_omega));
  d.edges.push_back({"line_left", "end_left", line(j0), p.spacing, PotentialSpec::zero(), 0.0});
  for (int j = j0; j < j1; ++j)
    d.edges.push_back({"line" + std::to_string(j), line(j), line(j + 1), p.spacing, PotentialSpec::zero(), 0.0});
  d.edges.push_back({"line_right", line(j1), "end_right", p.spacing, PotentialSpec::zero(), 0.0});
  for (int j = j0; j <= j1; ++j) {
    const auto tooth = p.tooth(j);
    if (tooth.length == 0.0) continue;
    const auto tip = "t" + std::to_string(j);
    d.vertices.push_back(VertexData::boundary(tip, tooth.omega));
    d.edges.push_back({"tooth" + std::to_string(j), tip, line(j), tooth.length, tooth.potential, 0.0});
  }
  return build_graph(d);
}

Eigen::MatrixXcd harper_bloch_matrix(int p, int q, double theta1, double theta2) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(q, q);
  const double flux = 2.0 * std::numbers::pi * p / q;
  for (int i = 0; i < q; ++i) {
    h(i, i) += 2.0 * std::cos(flux * i + theta2);
    const int j = (i + 1) % q;
    const cdouble phase = i + 1 == q ? std::polar(1.0, theta1) : cdouble(1.0);
    h(i, j) += phase;
    h(j, i) += std::conj(phase);
  }
  return h;
}

} // namespace qgd::models
