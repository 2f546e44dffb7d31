#include "qgd/dual.hpp"

#include "qgd/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>

namespace qgd {

namespace {

template <typename Scalar>
Scalar phase_factor(double theta) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return 1.0;
  } else {
    return theta == 0.0 ? Scalar(1.0) : std::polar(1.0, theta);
  }
}

// Wronskian anchor: coupling data toward an interior endpoint.
std::optional<std::size_t> anchor_vertex(const Graph& g, const EdgeData& e) {
  if (!g.vertex(e.to).is_boundary()) return e.to;
  if (!g.vertex(e.from).is_boundary()) return e.from;
  return std::nullopt;
}

void check_exclusion(const Graph& g, double energy, CouplingKind kind, double exclusion_k) {
  const double h = exclusion_half_width(energy, exclusion_k);
  for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
    const auto anchor = anchor_vertex(g, g.edge(ei));
    if (!anchor) continue;
    const double w0 = wronskian(g, ei, energy, kind, *anchor);
    const double wl = wronskian(g, ei, energy - h, kind, *anchor);
    const double wr = wronskian(g, ei, energy + h, kind, *anchor);
    if (w0 == 0.0 || (wl < 0.0) != (wr < 0.0) || wl == 0.0 || wr == 0.0)
      throw ExceptionalEnergyError("dual-assembler", g.edge(ei).id, energy);
  }
}

// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
  static constexpr int n = 16;
  std::array<double, n> x{}, w{};
  GaussLegendre() {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre gl;
  return gl;
}

// Value and outward derivative of the edge solution at one of its ends, in the
// gauge of the vertex sitting there.
struct EndData {
  cdouble value;
  cdouble derivative;
};

EndData end_data(const Graph& g, const Wavefunction& w, const Incidence& inc) {
  const auto& e = g.edge(inc.edge);
  const auto& ew = w.edges[inc.edge];
  if (inc.at_from) return {ew.a, ew.b};
  const auto t = edge_basis(e, w.energy).transfer;
  const cdouble f = t(0, 0) * ew.a + t(0, 1) * ew.b;
  const cdouble df = t(1, 0) * ew.a + t(1, 1) * ew.b;
  const cdouble gauge = std::polar(1.0, -e.phase);
  return {gauge * f, -gauge * df};
}

} // namespace

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dual_matrix(const Graph& g, double energy, CouplingKind kind) {
  if constexpr (std::is_same_v<Scalar, double>) {
    if (g.has_phases()) throw Error("dual-assembler", "real dual matrix requested for a graph with magnetic phases");
  }
  if (!g.multi_links().empty())
    throw Error("dual-assembler", "graph has multiple links between a vertex pair; normalize it first");

  const auto& rows = g.interior_vertices();
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);

  for (Eigen::Index r = 0; r < n; ++r) {
    const auto j = rows[static_cast<std::size_t>(r)];
    double diagonal = 0.0;
    for (const auto& inc : g.incident(j)) {
      const auto d = coupling_data(g, inc.edge, energy, kind, j);
      if (d.wronskian == 0.0) throw ExceptionalEnergyError("dual-assembler", g.edge(inc.edge).id, energy);
      diagonal += (kind == CouplingKind::Delta ? d.dvl : d.vl) / d.wronskian;
      if (!d.far_is_boundary) {
        const auto c = static_cast<Eigen::Index>(*g.interior_index(d.far));
        m(r, c) += phase_factor<Scalar>(g.edge(inc.edge).phase_from(j)) / d.wronskian;
      }
    }
    const double constant = g.vertex(j).constant;
    m(r, r) += kind == CouplingKind::Delta ? -(diagonal - constant) : diagonal + constant;
  }
  return m;
}

template Eigen::MatrixXd dual_matrix<double>(const Graph&, double, CouplingKind);
template Eigen::MatrixXcd dual_matrix<cdouble>(const Graph&, double, CouplingKind);

DualSystem assemble_dual(const Graph& g, double energy, CouplingKind kind, const AssemblyOptions& opts) {
  if (!std::isfinite(energy)) throw Error("dual-assembler", "energy must be finite");
  if (opts.check_exclusion) check_exclusion(g, energy, kind, opts.exclusion_k);
  DualSystem sys;
  sys.energy = energy;
  sys.kind = kind;
  sys.row_vertex = g.interior_vertices();
  sys.complex_entries = g.has_phases();
  if (sys.complex_entries)
    sys.matrix = dual_matrix<cdouble>(g, energy, kind);
  else
    sys.matrix = dual_matrix<double>(g, energy, kind).cast<cdouble>();
  return sys;
}

Wavefunction reconstruct(const Graph& g, double energy, const VertexVector& phi, CouplingKind kind) {
  if (phi.size() != static_cast<Eigen::Index>(g.interior_vertices().size()))
    throw Error("dual-assembler", "vertex vector has wrong dimension");

  Wavefunction w;
  w.energy = energy;
  w.kind = kind;
  w.edges.resize(g.edge_count());

  for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
    const auto& e = g.edge(ei);
    const auto j = anchor_vertex(g, e);
    if (!j) continue; // no interior end: zero on this edge
    const auto d = coupling_data(g, ei, energy, kind, *j);
    if (d.wronskian == 0.0) throw ExceptionalEnergyError("dual-assembler", e.id, energy);

    // Local coordinate: far vertex n at 0, j at l. Values are in from-gauge,
    // so the to-end value carries e^{i phase}.
    const bool j_is_to = *j == e.to;
    const cdouble phi_j = phi(static_cast<Eigen::Index>(*g.interior_index(*j))) *
                          (j_is_to ? std::polar(1.0, e.phase) : cdouble(1.0));
    // delta:    psi = ( phi_n u - phi_j v) / W
    // delta'_s: psi = (-phi_n u - phi_j v) / W
    // A boundary far end drops the u term in both cases.
    cdouble coef_u = 0.0;
    const cdouble coef_v = -phi_j / d.wronskian;
    if (!d.far_is_boundary) {
      const cdouble phi_n = phi(static_cast<Eigen::Index>(*g.interior_index(d.far)));
      coef_u = (kind == CouplingKind::Delta ? phi_n : -phi_n) / d.wronskian;
    }
    const cdouble f0 = coef_u * d.u0 + coef_v * d.v0;
    const cdouble df0 = coef_u * d.du0 + coef_v * d.dv0;

    if (j_is_to) {
      w.edges[ei] = {f0, df0};
    } else {
      // Local x = 0 is the stored x = l.
      const auto inv = sturm::unimodular_inverse(edge_basis(e, energy).transfer);
      const cdouble fl = f0, dfl = -df0;
      w.edges[ei] = {inv(0, 0) * fl + inv(0, 1) * dfl, inv(1, 0) * fl + inv(1, 1) * dfl};
    }
  }
  return w;
}

sturm::State<cdouble> evaluate_state(const Graph& g, const Wavefunction& w, std::size_t edge, double x) {
  const auto& ew = w.edges.at(edge);
  return propagate<cdouble>(g.edge(edge), w.energy, sturm::State<cdouble>(ew.a, ew.b), x);
}

cdouble evaluate(const Graph& g, const Wavefunction& w, std::size_t edge, double x) {
  return evaluate_state(g, w, edge, x)(0);
}

VertexVector sample_vertices(const Graph& g, const Wavefunction& w) {
  const auto& rows = g.interior_vertices();
  VertexVector phi(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& inc = g.incident(rows[r]);
    // Average over incident ends; they coincide for an eigenfunction.
    cdouble sum = 0.0;
    for (const auto& i : inc) {
      const auto end = end_data(g, w, i);
      sum += w.kind == CouplingKind::Delta ? end.value : end.derivative;
    }
    phi(static_cast<Eigen::Index>(r)) = sum / static_cast<double>(inc.size());
  }
  return phi;
}

ResidualReport residual_and_norms(const Graph& g, const Wavefunction& w, const VertexVector& phi) {
  ResidualReport rep;

  // Vertex conditions.
  double value_scale = 0.0, deriv_scale = 0.0;
  std::vector<std::vector<EndData>> ends(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    for (const auto& inc : g.incident(v)) {
      ends[v].push_back(end_data(g, w, inc));
      value_scale = std::max(value_scale, std::abs(ends[v].back().value));
      deriv_scale = std::max(deriv_scale, std::abs(ends[v].back().derivative));
    }
  }
  // Values and derivatives compared on one footing through the wave number.
  const double kscale = std::max(1.0, std::sqrt(std::abs(w.energy)));
  value_scale = std::max(value_scale, deriv_scale / kscale);
  deriv_scale = std::max(deriv_scale, value_scale * kscale);
  auto rel = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  double vres = 0.0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& vd = g.vertex(v);
    const auto& es = ends[v];
    if (vd.is_boundary()) {
      const double c = std::cos(vd.omega), s = std::sin(vd.omega);
      vres = std::max(vres, rel(std::abs(es[0].value * c + es[0].derivative * s),
                                std::abs(c) * value_scale + std::abs(s) * deriv_scale));
      continue;
    }
    cdouble sum_d = 0.0, sum_p = 0.0;
    for (std::size_t i = 0; i < es.size(); ++i) {
      sum_d += es[i].derivative;
      sum_p += es[i].value;
      if (i == 0) continue;
      if (w.kind == CouplingKind::Delta)
        vres = std::max(vres, rel(std::abs(es[i].value - es[0].value), value_scale));
      else
        vres = std::max(vres, rel(std::abs(es[i].derivative - es[0].derivative), deriv_scale));
    }
    const double k = std::abs(vd.constant);
    const double deg = static_cast<double>(es.size());
    if (w.kind == CouplingKind::Delta)
      vres = std::max(vres, rel(std::abs(sum_d - vd.constant * es[0].value), deg * deriv_scale + k * value_scale));
    else
      vres = std::max(vres, rel(std::abs(sum_p - vd.constant * es[0].derivative), deg * value_scale + k * deriv_scale));
  }
  rep.vertex_residual = vres;

  // Edge ODE and L2 norm.
  const auto& gl = gauss_legendre();
  double ode = 0.0, norm2 = 0.0;
  for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
    const auto& e = g.edge(ei);
    sturm::State<cdouble> state(w.edges[ei].a, w.edges[ei].b);
    double fmax = 0.0, rmax = 0.0;
    for (const auto& piece : e.potential.pieces(e.length)) {
      const double mu = w.energy - piece.value;
      const double len = piece.x1 - piece.x0;
      const int chunks = std::max(1, static_cast<int>(std::ceil(std::sqrt(std::abs(mu)) * len / 2.0)));
      const double hc = len / chunks;
      for (int c = 0; c < chunks; ++c) {
        for (int q = 0; q < GaussLegendre::n; ++q) {
          const double d = hc * (c + 0.5 * (gl.x[q] + 1.0));
          const cdouble f = state(0) * sturm::C(d, mu) + state(1) * sturm::S(d, mu);
          const cdouble f2 = state(0) * sturm::C_second(d, mu) + state(1) * sturm::S_second(d, mu);
          norm2 += 0.5 * hc * gl.w[q] * std::norm(f);
          fmax = std::max(fmax, std::abs(f));
          rmax = std::max(rmax, std::abs(-f2 - mu * f) / std::max(1.0, std::abs(mu)));
        }
      }
      state = (sturm::interval_transfer(len, mu).cast<cdouble>() * state).eval();
    }
    if (fmax > 0.0) ode = std::max(ode, rmax / fmax);
  }
  rep.ode_residual = ode;
  rep.l2_norm = std::sqrt(norm2);
  rep.vertex_norm = phi.norm();
  rep.ratio = rep.vertex_norm > 0.0 ? norm2 / (rep.vertex_norm * rep.vertex_norm) : 0.0;
  return rep;
}

void write_wavefunction_table(std::ostream& os, const Graph& g, const Wavefunction& w, double samples_per_unit) {
  os << "# wavefunction E=" << std::setprecision(17) << w.energy << " coupling=" << to_string(w.kind) << "\n";
  os << "# edge,x,re_psi,im_psi\n";
  os << std::setprecision(12);
  for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
    const auto& e = g.edge(ei);
    const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(e.length * samples_per_unit)) + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = e.length * static_cast<double>(i) / static_cast<double>(n - 1);
      const cdouble f = evaluate(g, w, ei, x) * std::polar(1.0, -e.phase * x / e.length);
      os << e.id << ',' << x << ',' << f.real() << ',' << f.imag() << '\n';
    }
  }
}

} // namespace qgd
