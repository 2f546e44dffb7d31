#include "qgd/oracle.hpp"

#include "qgd/edge_solver.hpp"
#include "qgd/error.hpp"
#include "qgd/secular.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qgd {

namespace {

// ---------------------------------------------------------------------------
// Finite elements: piecewise-linear on each edge, lumped mass, nodes on every
// potential breakpoint. Dirichlet boundary vertices are eliminated.

template <typename Scalar>
struct FemSystem {
  Eigen::SparseMatrix<Scalar> stiffness;
  Eigen::VectorXd mass;
};

template <typename Scalar>
Scalar hop_phase(double theta) {
  if constexpr (std::is_same_v<Scalar, double>) {
    (void)theta;
    return 1.0;
  } else {
    return std::polar(1.0, theta);
  }
}

template <typename Scalar>
FemSystem<Scalar> assemble_fem(const Graph& g, const FDConfig& cfg, int level) {
  const double refine = std::ldexp(1.0, level);
  std::vector<std::ptrdiff_t> vertex_node(g.vertex_count(), -1);
  std::ptrdiff_t nodes = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& vd = g.vertex(v);
    if (vd.is_boundary() && std::sin(vd.omega) == 0.0) continue;
    vertex_node[v] = nodes++;
  }

  struct Element {
    std::ptrdiff_t a, b;
    double h, potential;
    Scalar phase; // factor on the hop a -> b
  };
  std::vector<Element> elements;
  for (const auto& e : g.edges()) {
    std::vector<std::pair<double, double>> steps; // (size, potential)
    for (const auto& piece : e.potential.pieces(e.length)) {
      const double d = piece.x1 - piece.x0;
      const auto count = static_cast<long>(std::ceil(d / cfg.h - 1e-9) * refine);
      for (long i = 0; i < count; ++i) steps.emplace_back(d / static_cast<double>(count), piece.value);
    }
    std::ptrdiff_t prev = vertex_node[e.from];
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const bool last = i + 1 == steps.size();
      const std::ptrdiff_t next = last ? vertex_node[e.to] : nodes++;
      elements.push_back({prev, next, steps[i].first, steps[i].second,
                          last ? hop_phase<Scalar>(e.phase) : Scalar(1.0)});
      prev = next;
    }
  }

  FemSystem<Scalar> sys;
  sys.mass = Eigen::VectorXd::Zero(nodes);
  std::vector<Eigen::Triplet<Scalar>> trip;
  for (const auto& el : elements) {
    const double k = 1.0 / el.h;
    const double m = 0.5 * el.h;
    if (el.a >= 0) {
      trip.emplace_back(el.a, el.a, Scalar(k + el.potential * m));
      sys.mass(el.a) += m;
    }
    if (el.b >= 0) {
      trip.emplace_back(el.b, el.b, Scalar(k + el.potential * m));
      sys.mass(el.b) += m;
    }
    if (el.a >= 0 && el.b >= 0) {
      trip.emplace_back(el.a, el.b, -k * el.phase);
      if constexpr (std::is_same_v<Scalar, double>)
        trip.emplace_back(el.b, el.a, -k * el.phase);
      else
        trip.emplace_back(el.b, el.a, -k * std::conj(el.phase));
    }
  }
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (vertex_node[v] < 0) continue;
    const auto& vd = g.vertex(v);
    const double term = vd.is_boundary() ? -std::cos(vd.omega) / std::sin(vd.omega) : vd.constant;
    trip.emplace_back(vertex_node[v], vertex_node[v], Scalar(term));
  }
  sys.stiffness.resize(nodes, nodes);
  sys.stiffness.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

template <typename Scalar>
class SturmCounter {
public:
  SturmCounter(const Graph& g, const FDConfig& cfg, int level) : sys_(assemble_fem<Scalar>(g, cfg, level)) {
    shifted_ = sys_.stiffness;
    shifted_.makeCompressed();
    ldlt_.analyzePattern(shifted_);
  }

  Eigen::Index size() const { return sys_.mass.size(); }

  /// Eigenvalues of the pencil strictly below sigma.
  int count(double sigma) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double s = sigma * (1.0 + attempt * 1e-14) + attempt * 1e-300;
      shifted_ = sys_.stiffness;
      for (Eigen::Index i = 0; i < sys_.mass.size(); ++i) shifted_.coeffRef(i, i) -= Scalar(s * sys_.mass(i));
      ldlt_.factorize(shifted_);
      if (ldlt_.info() != Eigen::Success) continue;
      const auto d = ldlt_.vectorD();
      int neg = 0;
      bool zero = false;
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double di = std::real(d(i));
        if (di < 0.0) ++neg;
        if (di == 0.0) zero = true;
      }
      if (!zero) return neg;
    }
    throw Error("oracle", "singular shifted stiffness matrix at sigma = " + std::to_string(sigma));
  }

  /// Gershgorin lower bound of M^{-1/2} K M^{-1/2}.
  double lower_bound() const {
    Eigen::VectorXd bound = Eigen::VectorXd::Constant(size(), 0.0);
    Eigen::VectorXd off = Eigen::VectorXd::Zero(size());
    for (Eigen::Index c = 0; c < sys_.stiffness.outerSize(); ++c) {
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(sys_.stiffness, c); it; ++it) {
        const double scaled = std::abs(it.value()) / std::sqrt(sys_.mass(it.row()) * sys_.mass(it.col()));
        if (it.row() == it.col())
          bound(it.row()) = std::real(it.value()) / sys_.mass(it.row());
        else
          off(it.row()) += scaled;
      }
    }
    return size() == 0 ? 0.0 : (bound - off).minCoeff();
  }

private:
  FemSystem<Scalar> sys_;
  Eigen::SparseMatrix<Scalar> shifted_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Scalar>> ldlt_;
};

template <typename Scalar>
std::vector<double> fem_eigenvalues(const Graph& g, const FDConfig& cfg, int level, int first, int n) {
  if (n <= 0) return {};
  SturmCounter<Scalar> counter(g, cfg, level);
  const int want = first + n;
  if (want > counter.size()) throw Error("oracle", "mesh has fewer eigenvalues than requested");
  const double lo = counter.lower_bound() - 1.0;
  double span = 1.0;
  double hi = lo + span;
  while (counter.count(hi) < want) {
    span *= 2.0;
    hi = lo + span;
  }
  const auto scan = count_jumps([&](double s) { return counter.count(s); }, lo, hi, hi - lo, cfg.tol);
  std::vector<double> all;
  for (const auto& j : scan.jumps)
    for (int i = 0; i < j.height; ++i) all.push_back(j.location);
  if (static_cast<int>(all.size()) < want) throw Error("oracle", "Sturm count bisection lost eigenvalues");
  return {all.begin() + first, all.begin() + want};
}

void check_fd(const Graph& g, CouplingKind kind, const FDConfig& cfg) {
  if (kind != CouplingKind::Delta) throw Error("oracle", "the finite-element oracle supports delta coupling only");
  if (!(cfg.h > 0.0) || cfg.h >= g.summary().min_length / 8.0)
    throw Error("oracle", "mesh step h must satisfy 0 < h < (shortest edge) / 8");
}

std::vector<double> richardson(const std::vector<double>& coarse, const std::vector<double>& fine) {
  std::vector<double> out(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return out;
}

// ---------------------------------------------------------------------------
// Matching system.

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matching_matrix_t(const Graph& g, double energy,
                                                                         CouplingKind kind) {
  using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  const auto n = static_cast<Eigen::Index>(2 * g.edge_count());
  std::vector<EdgeBasis> basis;
  basis.reserve(g.edge_count());
  for (const auto& e : g.edges()) basis.push_back(edge_basis(e, energy));

  // Boundary value and outward derivative of one edge end, as functionals.
  auto end_forms = [&](const Incidence& inc) {
    Row p = Row::Zero(n), d = Row::Zero(n);
    const auto col = static_cast<Eigen::Index>(2 * inc.edge);
    if (inc.at_from) {
      p(col) = 1.0;
      d(col + 1) = 1.0;
    } else {
      const auto& t = basis[inc.edge];
      const Scalar gauge = hop_phase<Scalar>(-g.edge(inc.edge).phase);
      p(col) = gauge * t.c();
      p(col + 1) = gauge * t.s();
      d(col) = -gauge * t.dc();
      d(col + 1) = -gauge * t.ds();
    }
    return std::pair{p, d};
  };

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> s(n, n);
  Eigen::Index row = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& vd = g.vertex(v);
    std::vector<Row> ps, ds;
    for (const auto& inc : g.incident(v)) {
      auto [p, d] = end_forms(inc);
      ps.push_back(std::move(p));
      ds.push_back(std::move(d));
    }
    if (vd.is_boundary()) {
      s.row(row++) = std::cos(vd.omega) * ps[0] + std::sin(vd.omega) * ds[0];
      continue;
    }
    const auto& matched = kind == CouplingKind::Delta ? ps : ds;
    const auto& summed = kind == CouplingKind::Delta ? ds : ps;
    for (std::size_t i = 1; i < matched.size(); ++i) s.row(row++) = matched[i] - matched[0];
    Row sum = Row::Zero(n);
    for (const auto& r : summed) sum += r;
    s.row(row++) = sum - vd.constant * matched[0];
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    const double scale = s.row(r).cwiseAbs().maxCoeff();
    if (scale > 0.0) s.row(r) /= scale;
  }
  return s;
}

int det_sign(const Eigen::MatrixXd& s) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(s);
  const auto& u = lu.matrixLU();
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (u(i, i) == 0.0) return 0;
    if (u(i, i) < 0.0) sign = -sign;
  }
  return sign;
}

// Reciprocal condition estimate from an LU factorization; a cheap stand-in
// for sigma_min / sigma_max while scanning.
template <typename Scalar>
double singularity(const Graph& g, double e, CouplingKind kind) {
  return Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(matching_matrix_t<Scalar>(g, e, kind))
      .rcond();
}

template <typename Scalar>
MatchingRoot finish_root(const Graph& g, double e, CouplingKind kind, double mult_tol) {
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(matching_matrix_t<Scalar>(g, e, kind),
                                                                             Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  MatchingRoot r;
  r.energy = e;
  r.sigma_ratio = sv(sv.size() - 1) / sv(0);
  for (Eigen::Index i = sv.size() - 1; i >= 0 && sv(i) < mult_tol * sv(0); --i) {
    ++r.multiplicity;
    std::vector<EdgeWave> waves(g.edge_count());
    const auto col = svd.matrixV().col(i);
    for (std::size_t k = 0; k < g.edge_count(); ++k)
      waves[k] = {cdouble(col(static_cast<Eigen::Index>(2 * k))), cdouble(col(static_cast<Eigen::Index>(2 * k + 1)))};
    r.kernel.push_back(std::move(waves));
  }
  return r;
}

template <typename Scalar>
MatchingResult matching_scan(const Graph& g, CouplingKind kind, const MatchingOptions& opts) {
  constexpr bool real = std::is_same_v<Scalar, double>;
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((opts.e_max - opts.e_min) / opts.grid_step)));
  std::vector<double> grid(n + 1), ratio(n + 1);
  std::vector<int> sign(n + 1, 0);
  for (std::size_t i = 0; i <= n; ++i) {
    grid[i] = i == n ? opts.e_max : opts.e_min + (opts.e_max - opts.e_min) * static_cast<double>(i) / static_cast<double>(n);
    const auto s = matching_matrix_t<Scalar>(g, grid[i], kind);
    ratio[i] = Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(s).rcond();
    if constexpr (real) sign[i] = det_sign(s);
  }

  MatchingResult res;
  std::vector<std::pair<double, bool>> candidates; // (energy, from a sign change)
  for (std::size_t i = 0; i <= n && real; ++i) {
    if (sign[i] == 0) candidates.emplace_back(grid[i], true);
    if (i < n && sign[i] * sign[i + 1] < 0) {
      ++res.det_sign_changes;
      double lo = grid[i], hi = grid[i + 1];
      const int slo = sign[i];
      while (hi - lo > 1e-14 * std::max(1.0, std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const int sm = det_sign(matching_matrix_t<double>(g, mid, kind));
        if (sm == 0) {
          lo = hi = mid;
          break;
        }
        (sm == slo ? lo : hi) = mid;
      }
      candidates.emplace_back(0.5 * (lo + hi), true);
    }
  }
  // Even-multiplicity roots show no sign change; catch them as minima.
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (std::size_t i = 1; i < n; ++i) {
    if (!(ratio[i] <= ratio[i - 1] && ratio[i] <= ratio[i + 1])) continue;
    double a = grid[i - 1], b = grid[i + 1];
    double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
    double f1 = singularity<Scalar>(g, x1, kind), f2 = singularity<Scalar>(g, x2, kind);
    while (b - a > 1e-14 * std::max(1.0, std::abs(a))) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - golden * (b - a);
        f1 = singularity<Scalar>(g, x1, kind);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + golden * (b - a);
        f2 = singularity<Scalar>(g, x2, kind);
      }
      if (!(x1 < x2)) break;
    }
    candidates.emplace_back(f1 < f2 ? x1 : x2, false);
  }

  std::sort(candidates.begin(), candidates.end());
  std::vector<MatchingRoot> roots;
  for (const auto& [e, from_sign] : candidates) {
    auto r = finish_root<Scalar>(g, e, kind, opts.mult_tol);
    if (r.sigma_ratio > opts.accept_tol) continue;
    r.multiplicity = std::max(r.multiplicity, 1);
    if (!roots.empty() && std::abs(roots.back().energy - e) < 1e-7 * std::max(1.0, std::abs(e))) {
      if (r.sigma_ratio < roots.back().sigma_ratio) roots.back() = std::move(r);
      continue;
    }
    roots.push_back(std::move(r));
  }
  std::erase_if(roots, [&](const MatchingRoot& r) { return r.energy < opts.e_min || r.energy > opts.e_max; });
  res.roots = std::move(roots);
  return res;
}

} // namespace

std::vector<double> fd_eigenvalues(const Graph& g, const FDConfig& cfg, int level, int first, int n) {
  return g.has_phases() ? fem_eigenvalues<cdouble>(g, cfg, level, first, n)
                        : fem_eigenvalues<double>(g, cfg, level, first, n);
}

int fd_count_below(const Graph& g, const FDConfig& cfg, int level, double sigma) {
  if (g.has_phases()) return SturmCounter<cdouble>(g, cfg, level).count(sigma);
  return SturmCounter<double>(g, cfg, level).count(sigma);
}

std::vector<double> fd_spectrum(const Graph& g, CouplingKind kind, const FDConfig& cfg) {
  check_fd(g, kind, cfg);
  const auto coarse = fd_eigenvalues(g, cfg, 0, 0, cfg.count);
  if (!cfg.richardson) return coarse;
  return richardson(coarse, fd_eigenvalues(g, cfg, 1, 0, cfg.count));
}

std::vector<double> fd_spectrum_in(const Graph& g, CouplingKind kind, const FDConfig& cfg, double e_min,
                                   double e_max) {
  check_fd(g, kind, cfg);
  const int level = cfg.richardson ? 1 : 0;
  const int first = fd_count_below(g, cfg, level, e_min);
  const int last = fd_count_below(g, cfg, level, e_max);
  const auto fine = fd_eigenvalues(g, cfg, level, first, last - first);
  if (!cfg.richardson) return fine;
  return richardson(fd_eigenvalues(g, cfg, 0, first, last - first), fine);
}

Eigen::MatrixXcd matching_matrix(const Graph& g, double energy, CouplingKind kind) {
  return matching_matrix_t<cdouble>(g, energy, kind);
}

int matching_det_sign(const Graph& g, double energy, CouplingKind kind) {
  if (g.has_phases()) throw Error("oracle", "determinant sign is defined for real matching systems only");
  return det_sign(matching_matrix_t<double>(g, energy, kind));
}

std::vector<double> MatchingResult::eigenvalues() const {
  std::vector<double> out;
  for (const auto& r : roots)
    for (int i = 0; i < r.multiplicity; ++i) out.push_back(r.energy);
  return out;
}

MatchingResult matching_spectrum(const Graph& g, CouplingKind kind, const MatchingOptions& opts) {
  if (!(opts.e_max > opts.e_min)) throw Error("oracle", "empty energy range");
  if (!(opts.grid_step > 0.0)) throw Error("oracle", "grid step must be positive");
  return g.has_phases() ? matching_scan<cdouble>(g, kind, opts) : matching_scan<double>(g, kind, opts);
}

std::string to_string(CompareStatus s) {
  switch (s) {
  case CompareStatus::Matched: return "matched";
  case CompareStatus::ExpectedExclusion: return "expected_exclusion";
  case CompareStatus::Missing: return "missing";
  case CompareStatus::Spurious: return "spurious";
  case CompareStatus::MultiplicityMismatch: return "multiplicity_mismatch";
  }
  return "unknown";
}

CompareReport compare(const SpectrumResult& duality, const std::vector<double>& reference, double tol) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> ref = reference;
  std::sort(ref.begin(), ref.end());
  std::erase_if(ref, [&](double e) { return e < duality.e_min || e > duality.e_max; });

  struct Cluster {
    double energy;
    int count;
    bool used = false;
  };
  std::vector<Cluster> clusters;
  for (double e : ref) {
    if (!clusters.empty() && e - clusters.back().energy <= tol) {
      auto& c = clusters.back();
      c.energy = (c.energy * c.count + e) / (c.count + 1);
      ++c.count;
    } else {
      clusters.push_back({e, 1});
    }
  }

  CompareReport rep;
  rep.tol = tol;
  for (const auto& root : duality.roots) {
    Cluster* best = nullptr;
    for (auto& c : clusters)
      if (!c.used && std::abs(c.energy - root.energy) <= tol &&
          (!best || std::abs(c.energy - root.energy) < std::abs(best->energy - root.energy)))
        best = &c;
    CompareRow row;
    row.duality = root.energy;
    row.duality_multiplicity = root.multiplicity;
    if (!best) {
      row.status = CompareStatus::Spurious;
      row.reference = nan;
    } else {
      best->used = true;
      row.reference = best->energy;
      row.reference_multiplicity = best->count;
      row.status = best->count == root.multiplicity ? CompareStatus::Matched : CompareStatus::MultiplicityMismatch;
    }
    rep.rows.push_back(row);
  }
  for (const auto& c : clusters) {
    if (c.used) continue;
    CompareRow row;
    row.duality = nan;
    row.reference = c.energy;
    row.reference_multiplicity = c.count;
    row.status = duality.excluded(c.energy) ? CompareStatus::ExpectedExclusion : CompareStatus::Missing;
    rep.rows.push_back(row);
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const CompareRow& a, const CompareRow& b) {
    const double ea = std::isnan(a.duality) ? a.reference : a.duality;
    const double eb = std::isnan(b.duality) ? b.reference : b.duality;
    return ea < eb;
  });
  for (const auto& row : rep.rows) {
    if (row.status == CompareStatus::Matched) ++rep.matched;
    else if (row.status == CompareStatus::ExpectedExclusion) ++rep.expected_exclusions;
    else ++rep.failures;
  }
  return rep;
}

} // namespace qgd
