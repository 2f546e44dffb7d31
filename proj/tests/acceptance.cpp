// Acceptance run: one PASS/FAIL line per criterion. Usage: acceptance <configs dir>

#include "qgd/document.hpp"
#include "qgd/dual.hpp"
#include "qgd/error.hpp"
#include "qgd/models.hpp"
#include "qgd/oracle.hpp"
#include "qgd/spectrum.hpp"
#include "support/oracles.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

using namespace qgd;
using std::numbers::pi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

int failures = 0;

void run(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double t = seconds_since(t0);
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s (%.2fs)%s%s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), t,
              o.detail.empty() ? "" : "  ", o.detail.c_str());
  std::fflush(stdout);
}

struct FixtureRun {
  std::string name;
  double matching_dev = 0.0;
  double fd_dev = 0.0;
  bool matching_ok = true;
  bool fd_ok = true;
  bool has_fd = false;
  std::vector<ResidualReport> residuals;
};

std::string configs;
std::vector<FixtureRun> fixture_runs;

InputDocument load(const std::string& name) { return load_document(configs + "/" + name + ".json"); }

double max_deviation(const CompareReport& rep) {
  double d = 0.0;
  for (const auto& row : rep.rows)
    if (row.status == CompareStatus::Matched) d = std::max(d, std::abs(row.duality - row.reference));
  return d;
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto doc = load("star");
  SpectrumOptions so;
  so.e_max = 24.0;
  const auto d = spectrum(doc.graph, doc.kind, so);
  const std::vector<double> analytic{pi * pi / 4.0, 9.0 * pi * pi / 4.0};
  o.require(d.roots.size() == 2, "expected 2 duality roots");
  double dev = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, d.roots.size()); ++i)
    dev = std::max(dev, std::abs(d.roots[i].energy - analytic[i]));
  o.require(dev < 1e-9, "root deviation " + fmt("%.2e", dev));

  MatchingOptions mo;
  mo.e_max = 24.0;
  const auto m = matching_spectrum(doc.graph, doc.kind, mo);
  bool doublet = false;
  for (const auto& r : m.roots) doublet = doublet || (std::abs(r.energy - pi * pi) < 1e-9 && r.multiplicity == 2);
  o.require(doublet, "matching oracle misses the doublet at pi^2");
  const auto rep = compare(d, m.eigenvalues(), 1e-9);
  bool flagged = false;
  for (const auto& row : rep.rows)
    flagged = flagged || (row.status == CompareStatus::ExpectedExclusion && std::abs(row.reference - pi * pi) < 1e-9);
  o.require(flagged && rep.ok(), "pi^2 not flagged as expected exclusion");
  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime " + fmt("%.2fs", t));
  o.detail = o.pass ? "max |dE| " + fmt("%.1e", dev) : o.detail;
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto doc = load("star_prime");
  SpectrumOptions so;
  so.e_max = 24.0;
  const auto d = spectrum(doc.graph, doc.kind, so);
  o.require(!d.roots.empty(), "no duality roots");
  MatchingOptions mo;
  mo.e_max = 24.0;
  const auto m = matching_spectrum(doc.graph, doc.kind, mo);
  double dev = 1.0;
  if (!d.roots.empty()) {
    for (const auto& r : m.roots) dev = std::min(dev, std::abs(r.energy - d.roots[0].energy));
    o.require(std::abs(d.roots[0].energy - pi * pi) < 1e-9, "lowest root is not pi^2");
  }
  o.require(dev < 1e-9, "matching deviation " + fmt("%.2e", dev));

  const auto ex = exceptional_points(doc.graph, doc.kind, 0.0, 24.0);
  bool ok = !ex.empty();
  for (const auto& p : ex) {
    const double m_half = std::sqrt(p.energy) / pi - 0.5;
    ok = ok && std::abs(m_half - std::round(m_half)) < 1e-9;
  }
  o.require(ok, "exceptional set differs from ((m + 1/2) pi)^2");
  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime " + fmt("%.2fs", t));
  o.detail = o.pass ? "|dE| " + fmt("%.1e", dev) : o.detail;
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<std::string> names{"star",    "star_prime", "path",     "lattice_patch",    "comb_window",
                                       "piecewise", "maryland",  "magnetic_window", "magnetic_triangle"};
  double worst_m = 0.0, worst_fd = 0.0;
  for (const auto& name : names) {
    const auto doc = load(name);
    FixtureRun fr;
    fr.name = name;
    SpectrumOptions so;
    so.e_max = 30.0;
    so.grid_step = 0.05;
    const auto d = spectrum(doc.graph, doc.kind, so);
    MatchingOptions mo;
    mo.e_max = 30.0;
    const auto rep = compare(d, matching_spectrum(doc.graph, doc.kind, mo).eigenvalues(), 1e-9);
    fr.matching_ok = rep.ok() && rep.matched > 0;
    fr.matching_dev = max_deviation(rep);
    o.require(fr.matching_ok, name + ": matching compare failed");
    if (doc.kind == CouplingKind::Delta) {
      fr.has_fd = true;
      const auto fd = fd_spectrum_in(doc.graph, doc.kind, FDConfig{}, 0.0, 30.0);
      const auto frep = compare(d, fd, 1e-6);
      fr.fd_ok = frep.ok();
      fr.fd_dev = max_deviation(frep);
      o.require(fr.fd_ok, name + ": FD compare failed");
      worst_fd = std::max(worst_fd, fr.fd_dev);
    }
    worst_m = std::max(worst_m, fr.matching_dev);
    for (const auto& root : d.roots)
      for (const auto& phi : root.kernel)
        fr.residuals.push_back(residual_and_norms(doc.graph, reconstruct(doc.graph, root.energy, phi, doc.kind), phi));
    fixture_runs.push_back(std::move(fr));
  }
  const double t = seconds_since(t0);
  o.require(t < 30.0, "runtime " + fmt("%.2fs", t));
  if (o.pass)
    o.detail = std::to_string(names.size()) + " fixtures, matching " + fmt("%.1e", worst_m) + ", FD " +
               fmt("%.1e", worst_fd);
  return o;
}

Outcome criterion4() {
  Outcome o;
  double vres = 0.0, ode = 0.0;
  std::size_t n = 0;
  for (const auto& fr : fixture_runs)
    for (const auto& r : fr.residuals) {
      vres = std::max(vres, r.vertex_residual);
      ode = std::max(ode, r.ode_residual);
      ++n;
    }
  o.require(n > 0, "no roots from criterion 3");
  o.require(vres < 1e-8, "vertex residual " + fmt("%.2e", vres));
  o.require(ode < 1e-10, "ODE residual " + fmt("%.2e", ode));
  if (o.pass)
    o.detail = std::to_string(n) + " eigenfunctions, vertex " + fmt("%.1e", vres) + ", ODE " + fmt("%.1e", ode);
  return o;
}

double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

bool nonexceptional(double k, std::initializer_list<double> lengths) {
  for (const double l : lengths)
    if (std::abs(std::sin(k * l)) < 0.02 || std::abs(std::cos(k * l)) < 0.02) return false;
  return true;
}

Outcome criterion5() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> kdist(0.1, 10.0);
  AssemblyOptions ao;
  ao.check_exclusion = false;
  double worst = 0.0;

  const auto lattice = load("lattice_patch").model;
  const auto magnetic = load("magnetic_window").model;
  const auto comb = load("comb_window").model;
  const auto maryland = load("maryland").model;
  const auto lattice_graph = models::rect_lattice_graph(lattice->rect, lattice->rect_window);
  const auto magnetic_graph = models::rect_lattice_graph(magnetic->rect, magnetic->rect_window);
  const auto comb_graph = models::comb_graph(comb->comb, comb->j0, comb->j1);
  const auto maryland_graph = models::comb_graph(maryland->comb, maryland->j0, maryland->j1);

  int samples = 0;
  while (samples < 100) {
    const double k = kdist(rng);
    if (!nonexceptional(k, {lattice->rect.l1, lattice->rect.l2, 1.0, comb->comb.spacing})) continue;
    try {
      const auto rows_l = models::rect_window_matrix(lattice->rect, lattice->rect_window, k);
      const auto rows_m = models::rect_window_matrix(magnetic->rect, magnetic->rect_window, k);
      const auto rows_c = models::comb_window_matrix(comb->comb, comb->j0, comb->j1, k);
      const auto rows_y = models::comb_window_matrix(maryland->comb, maryland->j0, maryland->j1, k);
      const double E = k * k;
      worst = std::max(worst, rel_diff(assemble_dual(lattice_graph, E, lattice->rect.kind, ao).matrix *
                                           models::rect_row_scalar(lattice->rect, k),
                                       rows_l));
      worst = std::max(worst, rel_diff(assemble_dual(magnetic_graph, E, magnetic->rect.kind, ao).matrix *
                                           models::rect_row_scalar(magnetic->rect, k),
                                       rows_m));
      worst = std::max(worst, rel_diff(assemble_dual(comb_graph, E, comb->comb.kind, ao).matrix *
                                           models::comb_row_scalar(comb->comb, k),
                                       rows_c));
      worst = std::max(worst, rel_diff(assemble_dual(maryland_graph, E, maryland->comb.kind, ao).matrix *
                                           models::comb_row_scalar(maryland->comb, k),
                                       rows_y));
    } catch (const ExceptionalEnergyError&) {
      continue;
    }
    ++samples;
  }
  o.require(worst < 1e-12, "max relative row deviation " + fmt("%.2e", worst));
  if (o.pass) o.detail = "100 k values, max rel " + fmt("%.1e", worst);
  return o;
}

Outcome criterion6() {
  Outcome o;
  BandQuery q;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> edist(0.0, 100.0);
  int sampled = 0, outside = 0;
  while (sampled < 10000) {
    const double E = edist(rng);
    if (E <= 0.0) continue;
    const double k = std::sqrt(E);
    const double m = std::round(k / pi);
    if (m > 0 && std::abs(k - m * pi) < 1e-4) continue;
    if (!band_test_rect(q, E).in_band) ++outside;
    ++sampled;
  }
  o.require(outside == 0, std::to_string(outside) + " alpha = 0 samples outside the band");

  q.constant = 2.0;
  const double kp = pi + 0.01, km = pi - 0.01;
  const double lhs_p = std::abs(4.0 * std::cos(kp) + (2.0 / kp) * std::sin(kp));
  const double lhs_m = std::abs(4.0 * std::cos(km) + (2.0 / km) * std::sin(km));
  o.require(std::abs(lhs_p - 4.0061) < 1e-4 && std::abs(lhs_m - 3.9934) < 1e-4, "row values off");
  const auto above = band_test_rect(q, kp * kp);
  const auto below = band_test_rect(q, km * km);
  o.require(!above.in_band && above.margin < 0.0, "no gap just above pi^2");
  o.require(below.in_band && below.margin > 0.0, "no band just below pi^2");
  if (o.pass)
    o.detail = "10^4 samples in band; " + fmt("%.4f", lhs_p) + " > 4 (gap), " + fmt("%.4f", lhs_m) + " < 4 (band)";
  return o;
}

Eigen::VectorXd eigenvalues_of(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Outcome criterion7() {
  Outcome o;
  const models::RectWindow w{-2, 2, -2, 2};
  const double flux = 2.0 * pi / 3.0;
  const auto circular = models::uniform_rect(1.0, 0.8, CouplingKind::Delta, 0.7, flux, models::Gauge::Circular);
  const auto landau = models::uniform_rect(1.0, 0.8, CouplingKind::Delta, 0.7, flux, models::Gauge::Landau);
  double worst = 0.0;
  for (const double k : {0.45, 1.3, 2.2, 3.7, 5.9}) {
    const auto a = eigenvalues_of(models::rect_window_matrix(circular, w, k));
    const auto b = eigenvalues_of(models::rect_window_matrix(landau, w, k));
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  o.require(worst < 1e-10, "gauge spectra differ by " + fmt("%.2e", worst));

  // Secular roots of the two window graphs.
  auto roots = [&](const models::RectLatticeParams& p) {
    SpectrumOptions so;
    so.e_max = 12.0;
    so.grid_step = 0.05;
    return spectrum(models::rect_lattice_graph(p, {0, 2, 0, 2}), CouplingKind::Delta, so).eigenvalues();
  };
  const auto ra = roots(circular), rb = roots(landau);
  bool same = ra.size() == rb.size() && !ra.empty();
  double dev = 0.0;
  for (std::size_t i = 0; same && i < ra.size(); ++i) dev = std::max(dev, std::abs(ra[i] - rb[i]));
  o.require(same && dev < 1e-10, "window graph roots differ");

  const auto plain = models::uniform_rect(1.0, 0.8, CouplingKind::Delta, 0.7);
  double exact = 0.0;
  for (const auto gauge : {models::Gauge::Circular, models::Gauge::Landau}) {
    const auto zero = models::uniform_rect(1.0, 0.8, CouplingKind::Delta, 0.7, 0.0, gauge);
    for (const double k : {0.45, 1.3, 2.2})
      exact = std::max(exact, (models::rect_window_matrix(zero, w, k) - models::rect_window_matrix(plain, w, k))
                                  .cwiseAbs()
                                  .maxCoeff());
    const auto g0 = models::rect_lattice_graph(zero, w);
    const auto gp = models::rect_lattice_graph(plain, w);
    exact = std::max(exact, (assemble_dual(g0, 1.1, CouplingKind::Delta).matrix -
                             assemble_dual(gp, 1.1, CouplingKind::Delta).matrix)
                                .cwiseAbs()
                                .maxCoeff());
  }
  o.require(exact == 0.0, "zero-flux matrix differs by " + fmt("%.2e", exact));
  if (o.pass) o.detail = "5x5 spectra " + fmt("%.1e", worst) + ", roots " + fmt("%.1e", dev) + ", zero flux exact";
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> kdist(0.1, 10.0), angle(0.0, pi);
  double worst = 0.0;
  int samples = 0;
  while (samples < 100) {
    const double omega = samples % 3 == 0 ? 0.0 : samples % 3 == 1 ? pi / 2.0 : angle(rng);
    const auto kind = samples % 2 ? CouplingKind::Delta : CouplingKind::DeltaPrimeS;
    const auto p = models::maryland(1.0, 0.7, kind, omega, 0.4);
    const int j = static_cast<int>(rng() % 21) - 10;
    const double k = kdist(rng);
    try {
      const double closed = models::comb_potential_closed(p, j, k);
      const double general = models::comb_potential_general(p, j, k);
      worst = std::max(worst, std::abs(closed - general) / std::max(1.0, std::abs(closed)));
    } catch (const ExceptionalEnergyError&) {
      continue;
    }
    ++samples;
  }
  o.require(worst < 1e-12, "closed vs general " + fmt("%.2e", worst));

  double dev = 0.0;
  for (const auto* name : {"maryland", "comb_window"}) {
    const auto doc = load(name);
    const auto& m = *doc.model;
    SpectrumOptions so;
    so.e_min = 1e-6;
    so.e_max = 30.0;
    so.grid_step = 0.05;
    const auto windows = exclusion_windows(doc.graph, doc.kind, so.e_min, so.e_max, so.exclusion_k);
    auto res = secular_roots([&](double e) { return models::comb_window_matrix(m.comb, m.j0, m.j1, std::sqrt(e)); },
                             searchable_segments(so.e_min, so.e_max, windows), so);
    res.kind = doc.kind;
    res.e_min = so.e_min;
    res.e_max = so.e_max;
    res.unsearched = windows;
    MatchingOptions mo;
    mo.e_max = 30.0;
    const auto rep = compare(res, matching_spectrum(doc.graph, doc.kind, mo).eigenvalues(), 1e-9);
    o.require(rep.ok() && rep.matched > 0, std::string(name) + ": window spectrum vs matching failed");
    dev = std::max(dev, max_deviation(rep));
  }
  if (o.pass) o.detail = "V_j " + fmt("%.1e", worst) + ", window spectra " + fmt("%.1e", dev);
  return o;
}

Outcome criterion9() {
  Outcome o;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& fr : fixture_runs)
    for (const auto& r : fr.residuals) {
      o.require(r.ratio > 0.0 && std::isfinite(r.ratio), fr.name + ": non-positive norm ratio");
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
  o.require(hi > 0.0, "no eigenfunctions");
  const double spread = hi / lo;
  o.require(spread < 1e3, "spread " + fmt("%.3g", spread));
  if (o.pass) o.detail = "ratio in [" + fmt("%.3g", lo) + ", " + fmt("%.3g", hi) + "], spread " + fmt("%.3g", spread);
  return o;
}

double safe_energy(const Graph& g, CouplingKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 60.0);
  const auto windows = exclusion_windows(g, kind, -10.0, 60.0, 1e-3);
  for (;;) {
    const double E = u(rng);
    bool ok = true;
    for (const auto& w : windows) ok = ok && (E < w.lo || E > w.hi);
    if (ok) return E;
  }
}

Outcome criterion10() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> angle(-pi, pi), energy(-50.0, 200.0);
  int det_fail = 0, herm_fail = 0, w_fail = 0, gauge_fail = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    oracle::GraphGen gen;
    gen.phases = true;
    auto desc = oracle::random_graph(rng, gen);
    const auto g = build_graph(desc);
    const auto kind = i % 2 ? CouplingKind::Delta : CouplingKind::DeltaPrimeS;

    for (const auto& e : g.edges()) {
      const auto t = edge_basis(e, energy(rng)).transfer;
      const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
      if (std::abs(t.determinant() - 1.0) > 1e-10 * scale * scale) ++det_fail;
    }
    for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
      const auto& e = g.edge(ei);
      if (g.vertex(e.from).is_boundary() || g.vertex(e.to).is_boundary()) continue;
      const double E = energy(rng);
      const double a = wronskian(g, ei, E, kind, e.from), b = wronskian(g, ei, E, kind, e.to);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) ++w_fail;
    }

    const double E = safe_energy(g, kind, rng);
    const auto m = assemble_dual(g, E, kind).matrix;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) ++herm_fail;

    std::vector<double> chi(g.vertex_count());
    for (auto& c : chi) c = angle(rng);
    for (auto& e : desc.edges) e.phase += chi[*g.find_vertex(e.to)] - chi[*g.find_vertex(e.from)];
    const auto mh = assemble_dual(build_graph(desc), E, kind).matrix;
    if ((eigenvalues_of(m) - eigenvalues_of(mh)).cwiseAbs().maxCoeff() > 1e-10 * scale) ++gauge_fail;
  }
  o.require(det_fail == 0, std::to_string(det_fail) + " det T failures");
  o.require(herm_fail == 0, std::to_string(herm_fail) + " Hermiticity failures");
  o.require(w_fail == 0, std::to_string(w_fail) + " W symmetry failures");
  o.require(gauge_fail == 0, std::to_string(gauge_fail) + " gauge failures");
  const double t = seconds_since(t0);
  o.require(t < 60.0, "runtime " + fmt("%.2fs", t));
  if (o.pass) o.detail = std::to_string(n) + " random graphs per invariant";
  return o;
}

} // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <configs dir>\n", argv[0]);
    return 2;
  }
  configs = argv[1];
  const auto t0 = Clock::now();
  run(1, "star, delta: duality roots and excluded doublet", criterion1);
  run(2, "star, delta'_s: lowest root and exceptional set", criterion2);
  run(3, "fixtures: duality vs matching and FD oracles", criterion3);
  run(4, "reconstruction residuals", criterion4);
  run(5, "closed-form rows vs generic assembly", criterion5);
  run(6, "square lattice: gapless at alpha = 0, gap at alpha = 2", criterion6);
  run(7, "gauge invariance and zero-flux reduction", criterion7);
  run(8, "Maryland comb potentials and window spectra", criterion8);
  run(9, "norm-ratio spread", criterion9);
  run(10, "structural invariants", criterion10);
  std::printf("total %.2fs, %d failed\n", seconds_since(t0), failures);
  return failures == 0 ? 0 : 1;
}
