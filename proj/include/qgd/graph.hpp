#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace qgd {

/// Vertex coupling family used by a whole analysis run.
enum class CouplingKind { Delta, DeltaPrimeS };

std::string to_string(CouplingKind kind);
CouplingKind coupling_from_string(const std::string& name);

/// One interval of a piecewise-constant potential, in edge coordinates.
struct PotentialPiece {
  double x0;
  double x1;
  double value;
};

/// Bounded potential on an edge. Only piecewise-constant profiles are
/// representable; `Zero` and `Constant` do not depend on the edge length.
class PotentialSpec {
public:
  enum class Kind { Zero, Constant, PiecewiseConstant };

  PotentialSpec() = default;
  static PotentialSpec zero() { return {}; }
  static PotentialSpec constant(double value);
  /// `breakpoints` must start at 0, be strictly increasing, and have one more
  /// entry than `values`. The last breakpoint is checked against the edge
  /// length when the graph is built.
  static PotentialSpec piecewise(std::vector<double> breakpoints, std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::vector<PotentialPiece> pieces(double length) const;
  double sup_norm() const;
  bool is_zero() const;

  /// Restriction to [x0, x1] re-based to start at 0.
  PotentialSpec slice(double x0, double x1, double length) const;
  /// Same profile seen from the other end of an edge of the given length.
  PotentialSpec reversed(double length) const;

  friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;

private:
  Kind kind_ = Kind::Zero;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

enum class VertexKind { Interior, Boundary };

/// Interior vertices carry the coupling constant (alpha or beta, depending on
/// the run's CouplingKind); boundary vertices carry the Robin angle omega for
/// psi cos(omega) + psi' sin(omega) = 0.
struct VertexData {
  std::string id;
  VertexKind kind = VertexKind::Interior;
  double constant = 0.0;
  double omega = 0.0;

  static VertexData interior(std::string id, double constant);
  static VertexData boundary(std::string id, double omega);

  bool is_boundary() const noexcept { return kind == VertexKind::Boundary; }
};

/// x = 0 sits at `from`, x = length at `to`. The Peierls phase is accumulated
/// going from -> to; the reverse traversal contributes -phase.
struct EdgeSpec {
  std::string id;
  std::string from;
  std::string to;
  double length = 1.0;
  PotentialSpec potential;
  double phase = 0.0;
};

struct GraphDescription {
  std::vector<VertexData> vertices;
  std::vector<EdgeSpec> edges;
};

struct EdgeData {
  std::string id;
  std::size_t from = 0;
  std::size_t to = 0;
  double length = 1.0;
  PotentialSpec potential;
  double phase = 0.0;

  std::size_t other(std::size_t v) const { return v == from ? to : from; }
  /// Phase picked up when leaving `v` along this edge.
  double phase_from(std::size_t v) const { return v == from ? phase : -phase; }
};

struct Incidence {
  std::size_t edge;
  bool at_from; // the vertex sits at x = 0 of the edge
};

/// Witnesses of the standing assumptions: potential bound C, shortest and
/// longest edge, maximal degree.
struct AssumptionSummary {
  double potential_bound = 0.0;
  double min_length = 0.0;
  double max_length = 0.0;
  std::size_t max_degree = 0;
};

/// Finite connected metric graph. Immutable once built.
class Graph {
public:
  const std::vector<VertexData>& vertices() const noexcept { return vertices_; }
  const std::vector<EdgeData>& edges() const noexcept { return edges_; }
  const VertexData& vertex(std::size_t i) const { return vertices_.at(i); }
  const EdgeData& edge(std::size_t i) const { return edges_.at(i); }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::vector<Incidence>& incident(std::size_t v) const { return incidence_.at(v); }
  std::size_t degree(std::size_t v) const { return incidence_.at(v).size(); }

  /// Interior vertices in declaration order; this is the row order of the
  /// dual matrix.
  const std::vector<std::size_t>& interior_vertices() const noexcept { return interior_; }
  /// Row of vertex `v` in the dual matrix, or nullopt for boundary vertices.
  std::optional<std::size_t> interior_index(std::size_t v) const;

  std::optional<std::size_t> find_vertex(const std::string& id) const;
  std::optional<std::size_t> find_edge(const std::string& id) const;

  const AssumptionSummary& summary() const noexcept { return summary_; }
  bool has_phases() const;
  /// Groups of edge indices joining the same unordered vertex pair.
  std::vector<std::vector<std::size_t>> multi_links() const;

  GraphDescription description() const;

private:
  friend Graph build_graph(const GraphDescription&);

  std::vector<VertexData> vertices_;
  std::vector<EdgeData> edges_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<std::size_t> interior_;
  std::vector<std::ptrdiff_t> interior_row_;
  AssumptionSummary summary_;
};

/// Validates and indexes a description. Throws GraphError on duplicate ids,
/// dangling endpoints, non-positive lengths, self-loops, boundary vertices of
/// degree != 1, interior vertices of degree < 2, or a disconnected graph.
Graph build_graph(const GraphDescription& desc);

struct PointInteraction {
  std::string edge;
  double position;
  double strength;
};

/// Splits each listed edge at its midpoint through a fresh free vertex
/// (constant 0), and inserts a degree-2 vertex carrying `strength` at each
/// point interaction. Potentials and phases are re-based onto the halves.
Graph normalize(const Graph& g, const std::vector<std::string>& split_edges,
                const std::vector<PointInteraction>& point_interactions);

/// Splits every member of every multi-link group.
Graph normalize_multi_links(const Graph& g);

} // namespace qgd
