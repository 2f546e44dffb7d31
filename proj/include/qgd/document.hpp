#pragma once

// JSON input documents: explicit graphs and named model presets. Field names
// are listed in docs/graph_schema.md. Unknown keys are rejected.

#include "qgd/graph.hpp"
#include "qgd/models.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace qgd {

struct ModelDocument {
  /// square | rect | magnetic-rect | comb | maryland
  std::string name;
  models::RectLatticeParams rect;
  models::RectWindow rect_window;
  int flux_p = 0;
  int flux_q = 1;
  models::CombParams comb;
  int j0 = 0;
  int j1 = 0;
  double constant = 0.0;

  bool is_lattice() const { return name == "square" || name == "rect" || name == "magnetic-rect"; }
  bool is_comb() const { return name == "comb" || name == "maryland"; }
};

struct InputDocument {
  CouplingKind kind = CouplingKind::Delta;
  /// Explicit graph, or the window graph of a model preset.
  Graph graph;
  std::optional<ModelDocument> model;
};

InputDocument parse_document(const nlohmann::json& doc);
InputDocument load_document(const std::string& path);

/// Graph part only (vertices, edges, magnetic, point_interactions).
Graph parse_graph(const nlohmann::json& doc);

} // namespace qgd
