#include "qgd/report.hpp"

#include <cmath>
#include <cstdio>

namespace qgd::report {

ordered_json summary(const Graph& g, CouplingKind kind) {
  const auto& s = g.summary();
  std::size_t boundary = 0;
  for (const auto& v : g.vertices()) boundary += v.is_boundary() ? 1 : 0;
  ordered_json j;
  j["coupling"] = to_string(kind);
  j["vertices"] = g.vertex_count();
  j["interior_vertices"] = g.interior_vertices().size();
  j["boundary_vertices"] = boundary;
  j["edges"] = g.edge_count();
  j["magnetic"] = g.has_phases();
  j["assumptions"] = {{"potential_bound", s.potential_bound},
                      {"min_length", s.min_length},
                      {"max_length", s.max_length},
                      {"max_degree", s.max_degree}};
  return j;
}

ordered_json spectrum(const SpectrumResult& r, const std::vector<ResidualReport>& residuals) {
  ordered_json j;
  j["coupling"] = to_string(r.kind);
  j["range"] = {r.e_min, r.e_max};
  j["grid_step"] = r.grid_step;
  j["roots"] = ordered_json::array();
  for (std::size_t i = 0; i < r.roots.size(); ++i) {
    const auto& root = r.roots[i];
    ordered_json row;
    row["energy"] = root.energy;
    row["multiplicity"] = root.multiplicity;
    if (i < residuals.size()) {
      const auto& res = residuals[i];
      row["vertex_residual"] = res.vertex_residual;
      row["ode_residual"] = res.ode_residual;
      row["l2_norm"] = res.l2_norm;
      row["vertex_norm"] = res.vertex_norm;
      row["norm_ratio"] = res.ratio;
    }
    j["roots"].push_back(row);
  }
  j["searched"] = ordered_json::array();
  for (const auto& [a, b] : r.searched) j["searched"].push_back({a, b});
  j["unsearched"] = ordered_json::array();
  for (const auto& w : r.unsearched)
    j["unsearched"].push_back({{"lo", w.lo}, {"hi", w.hi}, {"exceptional", w.centers}, {"edges", w.edges}});
  j["warnings"] = r.warnings;
  j["evaluations"] = r.evaluations;
  return j;
}

ordered_json comparison(const CompareReport& c) {
  ordered_json j;
  j["tolerance"] = c.tol;
  j["matched"] = c.matched;
  j["expected_exclusions"] = c.expected_exclusions;
  j["failures"] = c.failures;
  j["rows"] = ordered_json::array();
  for (const auto& row : c.rows) {
    ordered_json r;
    r["status"] = to_string(row.status);
    r["duality"] = std::isnan(row.duality) ? ordered_json(nullptr) : ordered_json(row.duality);
    r["reference"] = std::isnan(row.reference) ? ordered_json(nullptr) : ordered_json(row.reference);
    r["duality_multiplicity"] = row.duality_multiplicity;
    r["reference_multiplicity"] = row.reference_multiplicity;
    j["rows"].push_back(r);
  }
  return j;
}

ordered_json matching(const MatchingResult& m) {
  ordered_json j;
  j["roots"] = ordered_json::array();
  for (const auto& r : m.roots)
    j["roots"].push_back({{"energy", r.energy}, {"multiplicity", r.multiplicity}, {"sigma_ratio", r.sigma_ratio}});
  j["det_sign_changes"] = m.det_sign_changes;
  j["warnings"] = m.warnings;
  return j;
}

std::string csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void band_table(std::ostream& os, const std::vector<BandVerdict>& rows, const std::vector<std::string>& header) {
  for (const auto& h : header) os << "# " << h << '\n';
  os << "# E,in_band,margin\n";
  for (const auto& r : rows) os << csv_number(r.energy) << ',' << (r.in_band ? 1 : 0) << ',' << csv_number(r.margin) << '\n';
}

} // namespace qgd::report
