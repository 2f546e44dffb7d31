#include "qgd/edge_solver.hpp"

#include "qgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace qgd {

Transfer2 EdgeBasis::reversed() const {
  Transfer2 r;
  r << ds(), s(), dc(), c();
  return r;
}

EdgeBasis edge_basis(const EdgeData& e, double energy) {
  EdgeBasis b;
  b.energy = energy;
  b.length = e.length;
  b.transfer.setIdentity();
  for (const auto& piece : e.potential.pieces(e.length))
    b.transfer = sturm::interval_transfer(piece.x1 - piece.x0, energy - piece.value) * b.transfer;
  return b;
}

template <typename Scalar>
sturm::State<Scalar> propagate(const EdgeData& e, double energy, const sturm::State<Scalar>& initial, double x) {
  sturm::State<Scalar> state = initial;
  for (const auto& piece : e.potential.pieces(e.length)) {
    if (x <= piece.x0) break;
    const double d = std::min(x, piece.x1) - piece.x0;
    state = (sturm::interval_transfer(d, energy - piece.value).template cast<Scalar>() * state).eval();
  }
  return state;
}

template <typename Scalar>
std::pair<Scalar, Scalar> value_and_second(const EdgeData& e, double energy, const sturm::State<Scalar>& initial,
                                           double x) {
  sturm::State<Scalar> state = initial;
  const auto pieces = e.potential.pieces(e.length);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& piece = pieces[i];
    const double mu = energy - piece.value;
    if (x <= piece.x1 || i + 1 == pieces.size()) {
      const double d = std::max(0.0, x - piece.x0);
      const Scalar f = state(0) * sturm::C(d, mu) + state(1) * sturm::S(d, mu);
      const Scalar f2 = state(0) * sturm::C_second(d, mu) + state(1) * sturm::S_second(d, mu);
      return {f, f2};
    }
    state = (sturm::interval_transfer(piece.x1 - piece.x0, mu).template cast<Scalar>() * state).eval();
  }
  return {Scalar(0), Scalar(0)};
}

template sturm::State<double> propagate(const EdgeData&, double, const sturm::State<double>&, double);
template sturm::State<std::complex<double>> propagate(const EdgeData&, double,
                                                      const sturm::State<std::complex<double>>&, double);
template std::pair<double, double> value_and_second(const EdgeData&, double, const sturm::State<double>&, double);
template std::pair<std::complex<double>, std::complex<double>>
value_and_second(const EdgeData&, double, const sturm::State<std::complex<double>>&, double);

CouplingEdgeData coupling_data(const Graph& g, std::size_t edge, double energy, CouplingKind kind,
                               std::size_t toward) {
  const auto& e = g.edge(edge);
  if (toward != e.from && toward != e.to)
    throw Error("edge-solver", "vertex is not an endpoint of edge '" + e.id + "'");

  CouplingEdgeData d;
  d.edge = edge;
  d.toward = toward;
  d.far = e.other(toward);
  const auto& far = g.vertex(d.far);
  d.far_is_boundary = far.is_boundary();

  const auto basis = edge_basis(e, energy);
  d.local = toward == e.to ? basis.transfer : basis.reversed();
  const double c = d.local(0, 0), s = d.local(0, 1), dc = d.local(1, 0), ds = d.local(1, 1);

  // u: fixed at the j-end (x = l), propagated back to 0 with the inverse map.
  if (kind == CouplingKind::Delta) {
    d.ul = 0.0, d.dul = 1.0;
    d.u0 = -s, d.du0 = c;
  } else {
    d.ul = 1.0, d.dul = 0.0;
    d.u0 = ds, d.du0 = -dc;
  }

  // v: fixed at the n-end.
  if (d.far_is_boundary) {
    d.v0 = std::sin(far.omega);
    d.dv0 = -std::cos(far.omega);
  } else if (kind == CouplingKind::Delta) {
    d.v0 = 0.0, d.dv0 = 1.0;
  } else {
    d.v0 = 1.0, d.dv0 = 0.0;
  }
  d.vl = c * d.v0 + s * d.dv0;
  d.dvl = dc * d.v0 + ds * d.dv0;

  // W = u v' - u' v evaluated at the j-end, where u is normalized.
  d.wronskian = d.ul * d.dvl - d.dul * d.vl;
  return d;
}

double wronskian(const Graph& g, std::size_t edge, double energy, CouplingKind kind, std::size_t toward) {
  return coupling_data(g, edge, energy, kind, toward).wronskian;
}

double exceptional_scan_step(const EdgeData& e) {
  const double pi = std::numbers::pi;
  return (pi / e.length) * (pi / e.length) / 8.0;
}

double exclusion_half_width(double energy, double delta_k) {
  const double k = std::sqrt(std::abs(energy));
  return 2.0 * k * delta_k + delta_k * delta_k;
}

namespace {

// Direction from which the edge's Wronskian is taken: toward an interior end.
// When both ends are boundary (single-edge graph) there is no interior row and
// the edge contributes no exceptional set.
std::optional<std::size_t> wronskian_anchor(const Graph& g, const EdgeData& e) {
  if (!g.vertex(e.to).is_boundary()) return e.to;
  if (!g.vertex(e.from).is_boundary()) return e.from;
  return std::nullopt;
}

} // namespace

std::vector<ExceptionalPoint> exceptional_points(const Graph& g, CouplingKind kind, double e_min, double e_max) {
  std::vector<ExceptionalPoint> out;
  if (!(e_max > e_min)) return out;

  for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
    const auto& e = g.edge(ei);
    const auto anchor = wronskian_anchor(g, e);
    if (!anchor) continue;
    auto w = [&](double E) { return wronskian(g, ei, E, kind, *anchor); };

    const double step = exceptional_scan_step(e);
    const auto n = static_cast<std::size_t>(std::ceil((e_max - e_min) / step));
    double a = e_min, wa = w(a);
    if (wa == 0.0) out.push_back({a, ei});
    for (std::size_t i = 1; i <= n; ++i) {
      const double b = i == n ? e_max : e_min + (e_max - e_min) * static_cast<double>(i) / static_cast<double>(n);
      const double wb = w(b);
      if (wb == 0.0) {
        out.push_back({b, ei});
      } else if (wa != 0.0 && (wa < 0.0) != (wb < 0.0)) {
        double lo = a, hi = b, wlo = wa;
        while (hi - lo > 1e-14 * std::max(1.0, std::abs(lo))) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const double wm = w(mid);
          if (wm == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((wm < 0.0) == (wlo < 0.0)) {
            lo = mid;
            wlo = wm;
          } else {
            hi = mid;
          }
        }
        out.push_back({0.5 * (lo + hi), ei});
      }
      a = b;
      wa = wb;
    }
  }
  std::sort(out.begin(), out.end(), [](const ExceptionalPoint& x, const ExceptionalPoint& y) {
    return x.energy != y.energy ? x.energy < y.energy : x.edge < y.edge;
  });
  return out;
}

} // namespace qgd
