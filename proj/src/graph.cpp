#include "qgd/graph.hpp"

#include "qgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace qgd {

std::string to_string(CouplingKind kind) {
  return kind == CouplingKind::Delta ? "delta" : "delta_prime_s";
}

CouplingKind coupling_from_string(const std::string& name) {
  if (name == "delta") return CouplingKind::Delta;
  if (name == "delta_prime_s") return CouplingKind::DeltaPrimeS;
  throw DocumentError("unknown coupling '" + name + "' (expected delta | delta_prime_s)");
}

PotentialSpec PotentialSpec::constant(double value) {
  if (!std::isfinite(value)) throw GraphError("potential value must be finite");
  PotentialSpec p;
  p.kind_ = value == 0.0 ? Kind::Zero : Kind::Constant;
  if (value != 0.0) p.values_ = {value};
  return p;
}

PotentialSpec PotentialSpec::piecewise(std::vector<double> breakpoints, std::vector<double> values) {
  if (values.empty() || breakpoints.size() != values.size() + 1)
    throw GraphError("piecewise potential needs n values and n+1 breakpoints");
  if (breakpoints.front() != 0.0) throw GraphError("piecewise potential must start at x = 0");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw GraphError("potential breakpoints must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw GraphError("potential values must be finite");
  PotentialSpec p;
  p.kind_ = Kind::PiecewiseConstant;
  p.breakpoints_ = std::move(breakpoints);
  p.values_ = std::move(values);
  return p;
}

std::vector<PotentialPiece> PotentialSpec::pieces(double length) const {
  switch (kind_) {
  case Kind::Zero: return {{0.0, length, 0.0}};
  case Kind::Constant: return {{0.0, length, values_.front()}};
  case Kind::PiecewiseConstant: break;
  }
  std::vector<PotentialPiece> out;
  out.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i)
    out.push_back({breakpoints_[i], breakpoints_[i + 1], values_[i]});
  out.back().x1 = length;
  return out;
}

double PotentialSpec::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool PotentialSpec::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

PotentialSpec PotentialSpec::slice(double x0, double x1, double length) const {
  if (kind_ != Kind::PiecewiseConstant) return *this;
  std::vector<double> bp{0.0};
  std::vector<double> vals;
  for (const auto& piece : pieces(length)) {
    const double a = std::max(piece.x0, x0);
    const double b = std::min(piece.x1, x1);
    if (b <= a) continue;
    if (!vals.empty() && vals.back() == piece.value) {
      bp.back() = b - x0;
    } else {
      vals.push_back(piece.value);
      bp.push_back(b - x0);
    }
  }
  bp.back() = x1 - x0;
  if (vals.size() == 1) return constant(vals.front());
  return piecewise(std::move(bp), std::move(vals));
}

PotentialSpec PotentialSpec::reversed(double length) const {
  if (kind_ != Kind::PiecewiseConstant) return *this;
  const auto ps = pieces(length);
  std::vector<double> bp{0.0};
  std::vector<double> vals;
  for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
    vals.push_back(it->value);
    bp.push_back(length - it->x0);
  }
  bp.back() = length;
  return piecewise(std::move(bp), std::move(vals));
}

VertexData VertexData::interior(std::string id, double constant) {
  return {std::move(id), VertexKind::Interior, constant, 0.0};
}

VertexData VertexData::boundary(std::string id, double omega) {
  return {std::move(id), VertexKind::Boundary, 0.0, omega};
}

std::optional<std::size_t> Graph::interior_index(std::size_t v) const {
  const auto r = interior_row_.at(v);
  if (r < 0) return std::nullopt;
  return static_cast<std::size_t>(r);
}

std::optional<std::size_t> Graph::find_vertex(const std::string& id) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> Graph::find_edge(const std::string& id) const {
  for (std::size_t i = 0; i < edges_.size(); ++i)
    if (edges_[i].id == id) return i;
  return std::nullopt;
}

bool Graph::has_phases() const {
  return std::any_of(edges_.begin(), edges_.end(), [](const EdgeData& e) { return e.phase != 0.0; });
}

std::vector<std::vector<std::size_t>> Graph::multi_links() const {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    groups[{std::min(e.from, e.to), std::max(e.from, e.to)}].push_back(i);
  }
  std::vector<std::vector<std::size_t>> out;
  for (auto& [pair, members] : groups)
    if (members.size() > 1) out.push_back(std::move(members));
  return out;
}

GraphDescription Graph::description() const {
  GraphDescription d;
  d.vertices = vertices_;
  for (const auto& e : edges_)
    d.edges.push_back({e.id, vertices_[e.from].id, vertices_[e.to].id, e.length, e.potential, e.phase});
  return d;
}

Graph build_graph(const GraphDescription& desc) {
  if (desc.vertices.empty()) throw GraphError("graph has no vertices");
  if (desc.edges.empty()) throw GraphError("graph has no edges");

  Graph g;
  std::unordered_map<std::string, std::size_t> vindex;
  for (const auto& v : desc.vertices) {
    if (v.id.empty()) throw GraphError("vertex with empty id");
    if (!vindex.emplace(v.id, g.vertices_.size()).second) throw GraphError("duplicate vertex id '" + v.id + "'");
    if (v.is_boundary() ? !std::isfinite(v.omega) : !std::isfinite(v.constant))
      throw GraphError("vertex '" + v.id + "' has a non-finite coupling parameter");
    g.vertices_.push_back(v);
  }

  std::set<std::string> eids;
  g.incidence_.resize(g.vertices_.size());
  for (const auto& spec : desc.edges) {
    if (spec.id.empty()) throw GraphError("edge with empty id");
    if (!eids.insert(spec.id).second) throw GraphError("duplicate edge id '" + spec.id + "'");
    const auto from = vindex.find(spec.from);
    const auto to = vindex.find(spec.to);
    if (from == vindex.end() || to == vindex.end())
      throw GraphError("edge '" + spec.id + "' references an unknown vertex");
    if (from->second == to->second) throw GraphError("edge '" + spec.id + "' is a self-loop");
    if (!(spec.length > 0.0) || !std::isfinite(spec.length))
      throw GraphError("edge '" + spec.id + "' has non-positive length");
    if (!std::isfinite(spec.phase)) throw GraphError("edge '" + spec.id + "' has a non-finite phase");
    if (spec.potential.kind() == PotentialSpec::Kind::PiecewiseConstant) {
      const double last = spec.potential.breakpoints().back();
      if (std::abs(last - spec.length) > 1e-12 * spec.length)
        throw GraphError("potential breakpoints of edge '" + spec.id + "' must end at the edge length");
    }
    EdgeData e{spec.id, from->second, to->second, spec.length, spec.potential, spec.phase};
    g.incidence_[e.from].push_back({g.edges_.size(), true});
    g.incidence_[e.to].push_back({g.edges_.size(), false});
    g.edges_.push_back(std::move(e));
  }

  for (std::size_t v = 0; v < g.vertices_.size(); ++v) {
    const auto deg = g.incidence_[v].size();
    const auto& vd = g.vertices_[v];
    if (vd.is_boundary() && deg != 1)
      throw GraphError("boundary vertex '" + vd.id + "' has degree " + std::to_string(deg) + " (boundary vertex degree != 1)");
    if (!vd.is_boundary() && deg < 2)
      throw GraphError("interior vertex '" + vd.id + "' has degree " + std::to_string(deg) + " (needs >= 2)");
  }

  // Connectivity by DFS from vertex 0.
  std::vector<char> seen(g.vertices_.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (const auto& inc : g.incidence_[v]) {
      const auto w = g.edges_[inc.edge].other(v);
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw GraphError("graph is disconnected");

  g.interior_row_.assign(g.vertices_.size(), -1);
  for (std::size_t v = 0; v < g.vertices_.size(); ++v) {
    if (g.vertices_[v].is_boundary()) continue;
    g.interior_row_[v] = static_cast<std::ptrdiff_t>(g.interior_.size());
    g.interior_.push_back(v);
  }

  auto& s = g.summary_;
  s.min_length = g.edges_.front().length;
  for (const auto& e : g.edges_) {
    s.potential_bound = std::max(s.potential_bound, e.potential.sup_norm());
    s.min_length = std::min(s.min_length, e.length);
    s.max_length = std::max(s.max_length, e.length);
  }
  for (const auto& inc : g.incidence_) s.max_degree = std::max(s.max_degree, inc.size());
  return g;
}

namespace {

std::string fresh_id(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.count(base)) return base;
  for (int i = 2;; ++i) {
    auto candidate = base + "_" + std::to_string(i);
    if (!taken.count(candidate)) return candidate;
  }
}

struct Cut {
  double position;
  double strength;
};

// Replaces `spec` by consecutive pieces separated by new interior vertices.
void split_edge(const EdgeSpec& spec, const std::vector<Cut>& cuts, GraphDescription& out,
                std::set<std::string>& vertex_ids, std::set<std::string>& edge_ids) {
  std::string prev = spec.from;
  double x0 = 0.0;
  for (std::size_t i = 0; i <= cuts.size(); ++i) {
    const double x1 = i < cuts.size() ? cuts[i].position : spec.length;
    std::string next = spec.to;
    if (i < cuts.size()) {
      next = fresh_id(spec.id + "#v" + std::to_string(i + 1), vertex_ids);
      vertex_ids.insert(next);
      out.vertices.push_back(VertexData::interior(next, cuts[i].strength));
    }
    const auto eid = fresh_id(spec.id + "." + std::to_string(i + 1), edge_ids);
    edge_ids.insert(eid);
    out.edges.push_back({eid, prev, next, x1 - x0, spec.potential.slice(x0, x1, spec.length),
                         spec.phase * (x1 - x0) / spec.length});
    prev = next;
    x0 = x1;
  }
}

} // namespace

Graph normalize(const Graph& g, const std::vector<std::string>& split_edges,
                const std::vector<PointInteraction>& point_interactions) {
  if (split_edges.empty() && point_interactions.empty()) return g;

  std::map<std::string, std::vector<Cut>> cuts;
  for (const auto& pi : point_interactions) {
    const auto e = g.find_edge(pi.edge);
    if (!e) throw GraphError("point interaction on unknown edge '" + pi.edge + "'");
    const double len = g.edge(*e).length;
    if (!(pi.position > 0.0 && pi.position < len))
      throw GraphError("point interaction on edge '" + pi.edge + "' must lie strictly inside (0, length)");
    if (!std::isfinite(pi.strength)) throw GraphError("point interaction strength must be finite");
    cuts[pi.edge].push_back({pi.position, pi.strength});
  }
  for (const auto& id : split_edges) {
    const auto e = g.find_edge(id);
    if (!e) throw GraphError("split requested for unknown edge '" + id + "'");
    if (cuts.count(id)) continue; // already broken by a point interaction
    cuts[id].push_back({0.5 * g.edge(*e).length, 0.0});
  }

  const auto base = g.description();
  GraphDescription out;
  out.vertices = base.vertices;
  std::set<std::string> vertex_ids, edge_ids;
  for (const auto& v : base.vertices) vertex_ids.insert(v.id);
  for (const auto& e : base.edges) edge_ids.insert(e.id);

  for (const auto& spec : base.edges) {
    auto it = cuts.find(spec.id);
    if (it == cuts.end()) {
      out.edges.push_back(spec);
      continue;
    }
    auto& list = it->second;
    std::sort(list.begin(), list.end(), [](const Cut& a, const Cut& b) { return a.position < b.position; });
    for (std::size_t i = 1; i < list.size(); ++i)
      if (!(list[i].position > list[i - 1].position))
        throw GraphError("coincident point interactions on edge '" + spec.id + "' would create a zero-length edge");
    edge_ids.erase(spec.id);
    split_edge(spec, list, out, vertex_ids, edge_ids);
  }
  return build_graph(out);
}

Graph normalize_multi_links(const Graph& g) {
  std::vector<std::string> ids;
  for (const auto& group : g.multi_links())
    for (auto e : group) ids.push_back(g.edge(e).id);
  return normalize(g, ids, {});
}

} // namespace qgd
