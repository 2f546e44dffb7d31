#include "qgd/document.hpp"
#include "qgd/dual.hpp"
#include "qgd/error.hpp"
#include "qgd/models.hpp"
#include "qgd/oracle.hpp"
#include "qgd/report.hpp"
#include "qgd/spectrum.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

using namespace qgd;
using report::ordered_json;

namespace {

struct RunConfig {
  std::string input;
  std::string output = "-";
  std::string format;
  double e_min = 0.0;
  double e_max = 50.0;
  double grid_step = 0.05;
  double excl_window = 1e-4;
  double mesh = 0.01;
  int bloch_grid = 64;
  std::string flux;
  std::uint64_t seed = 1;
  int root_index = 0;
  double samples_per_unit = 20.0;
  std::string method = "both";
  double energy = std::numeric_limits<double>::quiet_NaN();
  double tol_matching = 1e-9;
  double tol_fd = 1e-6;
  int instances = 200;
};

class Output {
public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DocumentError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

void emit_json(const RunConfig& cfg, const ordered_json& j) {
  Output out(cfg.output);
  out.stream() << j.dump(2) << '\n';
}

void require_format(const RunConfig& cfg, std::initializer_list<const char*> allowed) {
  if (cfg.format.empty()) return;
  for (const char* a : allowed)
    if (cfg.format == a) return;
  throw DocumentError("unsupported --format '" + cfg.format + "' for this subcommand");
}

SpectrumOptions spectrum_options(const RunConfig& cfg) {
  SpectrumOptions o;
  o.e_min = cfg.e_min;
  o.e_max = cfg.e_max;
  o.grid_step = cfg.grid_step;
  o.exclusion_k = cfg.excl_window;
  return o;
}

std::pair<int, int> parse_flux(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return {std::stoi(s), 1};
    return {std::stoi(s.substr(0, slash)), std::stoi(s.substr(slash + 1))};
  } catch (const std::exception&) {
    throw DocumentError("--flux expects p/q, got '" + s + "'");
  }
}

ResidualReport root_residual(const Graph& g, CouplingKind kind, const SpectralRoot& root) {
  ResidualReport worst;
  bool first = true;
  for (const auto& phi : root.kernel) {
    const auto w = reconstruct(g, root.energy, phi, kind);
    const auto r = residual_and_norms(g, w, phi);
    if (first || r.vertex_residual > worst.vertex_residual) worst = r;
    first = false;
  }
  return worst;
}

int run_validate(const RunConfig& cfg) {
  require_format(cfg, {"json"});
  const auto doc = load_document(cfg.input);
  const auto& g = doc.graph;
  auto j = report::summary(g, doc.kind);
  if (doc.model) j["model"] = doc.model->name;

  // Randomized self-check of the structural identities at non-exceptional energies.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> pick(cfg.e_min, cfg.e_max);
  const auto windows = exclusion_windows(g, doc.kind, cfg.e_min, cfg.e_max, cfg.excl_window);
  double det_err = 0.0, sym_err = 0.0, w_err = 0.0;
  int done = 0;
  for (int attempt = 0; done < cfg.instances && attempt < 50 * cfg.instances; ++attempt) {
    const double e = pick(rng);
    if (std::any_of(windows.begin(), windows.end(), [&](const ExclusionWindow& w) { return e >= w.lo && e <= w.hi; }))
      continue;
    for (const auto& edge : g.edges()) det_err = std::max(det_err, std::abs(edge_basis(edge, e).det() - 1.0));
    for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
      const auto& edge = g.edge(ei);
      if (g.vertex(edge.from).is_boundary() || g.vertex(edge.to).is_boundary()) continue;
      const double a = wronskian(g, ei, e, doc.kind, edge.to);
      const double b = wronskian(g, ei, e, doc.kind, edge.from);
      w_err = std::max(w_err, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    AssemblyOptions aopts;
    aopts.check_exclusion = false;
    const auto m = assemble_dual(g, e, doc.kind, aopts).matrix;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    sym_err = std::max(sym_err, (m - m.adjoint()).cwiseAbs().maxCoeff() / scale);
    ++done;
  }
  const bool ok = det_err < 1e-10 && sym_err < 1e-12 && w_err < 1e-10;
  j["self_check"] = {{"seed", cfg.seed},
                     {"instances", done},
                     {"max_det_error", det_err},
                     {"max_hermitian_error", sym_err},
                     {"max_wronskian_asymmetry", w_err},
                     {"passed", ok}};
  emit_json(cfg, j);
  return ok ? 0 : 1;
}

int run_spectrum(const RunConfig& cfg) {
  require_format(cfg, {"json", "csv"});
  const auto doc = load_document(cfg.input);
  const auto res = spectrum(doc.graph, doc.kind, spectrum_options(cfg));
  std::vector<ResidualReport> residuals;
  for (const auto& root : res.roots) residuals.push_back(root_residual(doc.graph, doc.kind, root));
  if (cfg.format == "csv") {
    Output out(cfg.output);
    auto& os = out.stream();
    os << "# spectrum coupling=" << to_string(doc.kind) << " range=" << report::csv_number(cfg.e_min) << ':'
       << report::csv_number(cfg.e_max) << '\n';
    for (const auto& w : res.unsearched)
      os << "# unsearched " << report::csv_number(w.lo) << ':' << report::csv_number(w.hi) << '\n';
    os << "# energy,multiplicity,vertex_residual,norm_ratio\n";
    for (std::size_t i = 0; i < res.roots.size(); ++i)
      os << report::csv_number(res.roots[i].energy) << ',' << res.roots[i].multiplicity << ','
         << report::csv_number(residuals[i].vertex_residual) << ',' << report::csv_number(residuals[i].ratio) << '\n';
    return 0;
  }
  emit_json(cfg, report::spectrum(res, residuals));
  return 0;
}

int run_bands(const RunConfig& cfg) {
  require_format(cfg, {"csv", "json"});
  const auto doc = load_document(cfg.input);
  if (!doc.model || !doc.model->is_lattice())
    throw DocumentError("bands needs a square, rect or magnetic-rect model document");
  const auto& m = *doc.model;
  BandQuery q;
  q.l1 = m.rect.l1;
  q.l2 = m.rect.l2;
  q.kind = doc.kind;
  q.constant = m.constant;
  q.flux_p = m.flux_p;
  q.flux_q = m.flux_q;
  if (!cfg.flux.empty()) std::tie(q.flux_p, q.flux_q) = parse_flux(cfg.flux);
  q.bloch_grid = cfg.bloch_grid;
  if (!(cfg.grid_step > 0.0) || !(cfg.e_max > cfg.e_min)) throw DocumentError("bands needs e_max > e_min and grid_step > 0");

  std::vector<double> energies;
  const auto n = static_cast<long>(std::floor((cfg.e_max - cfg.e_min) / cfg.grid_step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double e = cfg.e_min + static_cast<double>(i) * cfg.grid_step;
    if (e != 0.0) energies.push_back(e);
  }
  std::vector<BandVerdict> rows;
  std::vector<double> edges;
  if (q.flux_p == 0) {
    for (double e : energies) rows.push_back(band_test_rect(q, e));
    edges = band_edges_rect(q, cfg.e_min, cfg.e_max, cfg.grid_step);
  } else {
    rows = magnetic_band_spectrum(q, energies);
  }

  if (cfg.format == "json") {
    ordered_json j;
    j["model"] = m.name;
    j["flux"] = {q.flux_p, q.flux_q};
    j["rows"] = ordered_json::array();
    for (const auto& r : rows) j["rows"].push_back({{"energy", r.energy}, {"in_band", r.in_band}, {"margin", r.margin}});
    if (q.flux_p == 0) j["band_edges"] = edges;
    emit_json(cfg, j);
    return 0;
  }
  std::vector<std::string> header{"bands model=" + m.name + " coupling=" + to_string(doc.kind) +
                                  " l1=" + report::csv_number(q.l1) + " l2=" + report::csv_number(q.l2) +
                                  " constant=" + report::csv_number(q.constant) + " flux=" +
                                  std::to_string(q.flux_p) + "/" + std::to_string(q.flux_q)};
  if (q.flux_p == 0) {
    std::string line = "band_edges";
    for (double e : edges) line += ' ' + report::csv_number(e);
    header.push_back(line);
  }
  Output out(cfg.output);
  report::band_table(out.stream(), rows, header);
  return 0;
}

int run_comb(const RunConfig& cfg) {
  require_format(cfg, {"json", "csv"});
  const auto doc = load_document(cfg.input);
  if (!doc.model || !doc.model->is_comb()) throw DocumentError("comb needs a comb or maryland model document");
  const auto& m = *doc.model;

  if (!std::isnan(cfg.energy)) {
    if (!(cfg.energy > 0.0)) throw DocumentError("--energy must be positive for comb rows");
    const double k = std::sqrt(cfg.energy);
    if (cfg.format == "csv") {
      Output out(cfg.output);
      auto& os = out.stream();
      os << "# comb rows model=" << m.name << " E=" << report::csv_number(cfg.energy) << '\n';
      os << "# j,tooth_length,potential,diagonal\n";
      for (int j = m.j0; j <= m.j1; ++j) {
        const auto row = models::comb_row(m.comb, j, k);
        const double v = row.diagonal + (doc.kind == CouplingKind::Delta ? 2.0 : -2.0) * std::cos(k * m.comb.spacing);
        os << j << ',' << report::csv_number(m.comb.tooth(j).length) << ',' << report::csv_number(v) << ','
           << report::csv_number(row.diagonal) << '\n';
      }
      return 0;
    }
  } else if (cfg.format == "csv") {
    throw DocumentError("comb --format csv needs --energy");
  }

  ordered_json j;
  j["model"] = m.name;
  j["window"] = {m.j0, m.j1};
  if (!std::isnan(cfg.energy)) {
    const double k = std::sqrt(cfg.energy);
    j["rows"] = ordered_json::array();
    for (int jj = m.j0; jj <= m.j1; ++jj) {
      const auto row = models::comb_row(m.comb, jj, k);
      j["rows"].push_back({{"j", jj}, {"left", row.left}, {"right", row.right}, {"diagonal", row.diagonal}});
    }
  }

  // Finite-window spectrum from the closed-form rows.
  auto opts = spectrum_options(cfg);
  opts.e_min = std::max(opts.e_min, 1e-6);
  const auto windows = exclusion_windows(doc.graph, doc.kind, opts.e_min, opts.e_max, opts.exclusion_k);
  const auto segments = searchable_segments(opts.e_min, opts.e_max, windows);
  auto res = secular_roots([&](double e) { return models::comb_window_matrix(m.comb, m.j0, m.j1, std::sqrt(e)); },
                           segments, opts);
  res.kind = doc.kind;
  res.unsearched = windows;
  j["spectrum"] = report::spectrum(res);
  emit_json(cfg, j);
  return 0;
}

int run_oracle(const RunConfig& cfg) {
  require_format(cfg, {"json"});
  const auto doc = load_document(cfg.input);
  const auto opts = spectrum_options(cfg);
  const auto dual = spectrum(doc.graph, doc.kind, opts);
  ordered_json j;
  j["duality"] = report::spectrum(dual);
  bool ok = true;
  if (cfg.method == "matching" || cfg.method == "both") {
    MatchingOptions mo;
    mo.e_min = cfg.e_min;
    mo.e_max = cfg.e_max;
    mo.grid_step = std::min(cfg.grid_step, 0.01);
    const auto ref = matching_spectrum(doc.graph, doc.kind, mo);
    const auto rep = compare(dual, ref.eigenvalues(), cfg.tol_matching);
    j["matching"] = report::matching(ref);
    j["matching_compare"] = report::comparison(rep);
    ok = ok && rep.ok();
  }
  if ((cfg.method == "fd" || cfg.method == "both") && doc.kind == CouplingKind::Delta) {
    FDConfig fc;
    fc.h = cfg.mesh;
    const auto ref = fd_spectrum_in(doc.graph, doc.kind, fc, cfg.e_min, cfg.e_max);
    const auto rep = compare(dual, ref, cfg.tol_fd);
    j["fd"] = {{"mesh", cfg.mesh}, {"richardson", true}, {"eigenvalues", ref}};
    j["fd_compare"] = report::comparison(rep);
    ok = ok && rep.ok();
  } else if (cfg.method == "fd") {
    throw Error("oracle", "the finite-element oracle supports delta coupling only");
  }
  j["passed"] = ok;
  emit_json(cfg, j);
  return ok ? 0 : 1;
}

int run_reconstruct(const RunConfig& cfg) {
  require_format(cfg, {"csv"});
  const auto doc = load_document(cfg.input);
  const auto res = spectrum(doc.graph, doc.kind, spectrum_options(cfg));
  if (cfg.root_index < 0 || cfg.root_index >= static_cast<int>(res.roots.size()))
    throw Error("spectral-engine", "root index " + std::to_string(cfg.root_index) + " out of range (" +
                                       std::to_string(res.roots.size()) + " roots found)");
  const auto& root = res.roots[static_cast<std::size_t>(cfg.root_index)];
  const auto w = reconstruct(doc.graph, root.energy, root.kernel.front(), doc.kind);
  Output out(cfg.output);
  write_wavefunction_table(out.stream(), doc.graph, w, cfg.samples_per_unit);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of Schroedinger operators on metric graphs through their dual Jacobi matrices"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--input,-i", cfg.input, "Graph or model document (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--output,-o", cfg.output, "Output path, '-' for stdout")->capture_default_str();
    sub->add_option("--format", cfg.format, "Output format: json | csv");
    sub->add_option("--e-min", cfg.e_min, "Lower end of the energy range")->capture_default_str();
    sub->add_option("--e-max", cfg.e_max, "Upper end of the energy range")->capture_default_str();
    sub->add_option("--grid-step", cfg.grid_step, "Energy grid step")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--excl-window", cfg.excl_window, "Exclusion radius around exceptional energies, in k units")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "Seed for randomized checks")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check a document and report the assumption summary");
  common(validate);
  validate->add_option("--instances", cfg.instances, "Random energies in the self-check")->capture_default_str();

  auto* spec = app.add_subcommand("spectrum", "Eigenvalues from the dual matrix, with reconstruction residuals");
  common(spec);

  auto* bands = app.add_subcommand("bands", "Band test of the rectangular lattice, optionally with flux");
  common(bands);
  bands->add_option("--bloch-grid", cfg.bloch_grid, "Bloch phase grid per direction (even)")->capture_default_str();
  bands->add_option("--flux", cfg.flux, "Flux per cell as p/q (times 2 pi)");

  auto* comb = app.add_subcommand("comb", "Comb rows and finite-window spectra");
  common(comb);
  comb->add_option("--energy", cfg.energy, "Energy at which to print the rows");

  auto* oracle = app.add_subcommand("oracle", "Compare the dual spectrum with the reference solvers");
  common(oracle);
  oracle->add_option("--method", cfg.method, "fd | matching | both")
      ->capture_default_str()
      ->check(CLI::IsMember({"fd", "matching", "both"}));
  oracle->add_option("--mesh", cfg.mesh, "Finite-element mesh step")->capture_default_str()->check(
      CLI::PositiveNumber);
  oracle->add_option("--tol-matching", cfg.tol_matching, "Agreement tolerance vs matching")->capture_default_str();
  oracle->add_option("--tol-fd", cfg.tol_fd, "Agreement tolerance vs finite elements")->capture_default_str();

  auto* recon = app.add_subcommand("reconstruct", "Wavefunction table for one root");
  common(recon);
  recon->add_option("--root-index", cfg.root_index, "Index of the root, ascending from 0")->capture_default_str();
  recon->add_option("--samples-per-unit", cfg.samples_per_unit, "Samples per unit length")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return run_validate(cfg);
    if (*spec) return run_spectrum(cfg);
    if (*bands) return run_bands(cfg);
    if (*comb) return run_comb(cfg);
    if (*oracle) return run_oracle(cfg);
    if (*recon) return run_reconstruct(cfg);
  } catch (const Error& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
