#include "qgd/document.hpp"

#include "qgd/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

namespace qgd {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw DocumentError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw DocumentError(where + ": unknown key '" + key + "'");
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw DocumentError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double number(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number()) throw DocumentError(where + ": '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw DocumentError(where + ": '" + key + "' must be finite");
  return x;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

int integer(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number_integer()) throw DocumentError(where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

std::string text(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw DocumentError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_array()) throw DocumentError(where + ": '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw DocumentError(where + ": '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::pair<int, int> int_range(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw DocumentError(where + ": '" + key + "' must be [first, last]");
  const int a = v[0].get<int>(), b = v[1].get<int>();
  if (b < a) throw DocumentError(where + ": '" + key + "' is empty");
  return {a, b};
}

PotentialSpec parse_potential(const json& p, const std::string& where) {
  check_keys(p, {"type", "value", "breakpoints", "values"}, where);
  const auto type = text(p, "type", where);
  if (type == "zero") return PotentialSpec::zero();
  if (type == "constant") return PotentialSpec::constant(number(p, "value", where));
  if (type == "piecewise") return PotentialSpec::piecewise(numbers(p, "breakpoints", where), numbers(p, "values", where));
  throw DocumentError(where + ": unknown potential type '" + type + "'");
}

CouplingKind parse_coupling(const json& doc) {
  try {
    return coupling_from_string(text(doc, "coupling", "document"));
  } catch (const DocumentError&) {
    throw;
  } catch (const std::exception& e) {
    throw DocumentError(std::string("document: ") + e.what());
  }
}

ModelDocument parse_model(const json& doc, CouplingKind kind) {
  ModelDocument m;
  m.name = text(doc, "model", "model");
  const std::string where = "model '" + m.name + "'";
  m.constant = number_or(doc, "constant", 0.0, where);

  if (m.name == "square" || m.name == "rect" || m.name == "magnetic-rect") {
    std::set<std::string> keys{"model", "coupling", "constant", "window"};
    if (m.name == "square") keys.insert("length");
    else keys.insert({"l1", "l2"});
    if (m.name == "magnetic-rect") keys.insert({"flux", "gauge"});
    check_keys(doc, keys, where);

    double l1 = 1.0, l2 = 1.0;
    if (m.name == "square") l1 = l2 = number_or(doc, "length", 1.0, where);
    else {
      l1 = number(doc, "l1", where);
      l2 = number(doc, "l2", where);
    }
    if (!(l1 > 0.0) || !(l2 > 0.0)) throw DocumentError(where + ": lengths must be positive");

    models::Gauge gauge = models::Gauge::Circular;
    double flux = 0.0;
    if (m.name == "magnetic-rect") {
      const auto& f = require(doc, "flux", where);
      check_keys(f, {"p", "q"}, where + " flux");
      m.flux_p = integer(f, "p", where + " flux");
      m.flux_q = integer(f, "q", where + " flux");
      if (m.flux_q <= 0) throw DocumentError(where + ": flux q must be positive");
      flux = 2.0 * std::numbers::pi * m.flux_p / m.flux_q;
      if (doc.contains("gauge")) {
        const auto g = text(doc, "gauge", where);
        if (g == "landau") gauge = models::Gauge::Landau;
        else if (g != "circular") throw DocumentError(where + ": gauge must be 'circular' or 'landau'");
      }
    }
    m.rect = models::uniform_rect(l1, l2, kind, m.constant, flux, gauge);
    m.rect_window = {0, 1, 0, 1};
    if (doc.contains("window")) {
      const auto& w = doc.at("window");
      check_keys(w, {"n", "m"}, where + " window");
      const auto [n0, n1] = int_range(w, "n", where + " window");
      const auto [m0, m1] = int_range(w, "m", where + " window");
      m.rect_window = {n0, n1, m0, m1};
    }
    return m;
  }

  if (m.name == "comb" || m.name == "maryland") {
    if (m.name == "comb") check_keys(doc, {"model", "coupling", "constant", "spacing", "teeth", "window"}, where);
    else check_keys(doc, {"model", "coupling", "constant", "spacing", "unit", "omega", "window"}, where);
    const double spacing = number_or(doc, "spacing", 1.0, where);
    if (!(spacing > 0.0)) throw DocumentError(where + ": spacing must be positive");
    const auto [j0, j1] = int_range(require(doc, "window", where), "j", where + " window");
    check_keys(doc.at("window"), {"j"}, where + " window");
    m.j0 = j0;
    m.j1 = j1;

    if (m.name == "maryland") {
      const double unit = number_or(doc, "unit", 1.0, where);
      if (!(unit > 0.0)) throw DocumentError(where + ": unit must be positive");
      m.comb = models::maryland(spacing, unit, kind, number_or(doc, "omega", 0.0, where), m.constant);
      return m;
    }

    std::map<int, models::Tooth> teeth;
    if (doc.contains("teeth")) {
      if (!doc.at("teeth").is_array()) throw DocumentError(where + ": 'teeth' must be an array");
      for (const auto& t : doc.at("teeth")) {
        const std::string tw = where + " tooth";
        check_keys(t, {"j", "length", "omega", "potential"}, tw);
        models::Tooth tooth;
        tooth.length = number(t, "length", tw);
        if (tooth.length < 0.0) throw DocumentError(tw + ": length must be >= 0");
        tooth.omega = number_or(t, "omega", 0.0, tw);
        if (t.contains("potential")) tooth.potential = parse_potential(t.at("potential"), tw + " potential");
        if (!teeth.emplace(integer(t, "j", tw), tooth).second) throw DocumentError(tw + ": duplicate j");
      }
    }
    m.comb.spacing = spacing;
    m.comb.kind = kind;
    m.comb.tooth = [teeth](int j) {
      const auto it = teeth.find(j);
      return it == teeth.end() ? models::Tooth{} : it->second;
    };
    const double c = m.constant;
    m.comb.constant = [c](int) { return c; };
    return m;
  }

  throw DocumentError("unknown model '" + m.name + "' (expected square, rect, magnetic-rect, comb or maryland)");
}

} // namespace

Graph parse_graph(const json& doc) {
  GraphDescription d;
  const auto& vs = require(doc, "vertices", "document");
  if (!vs.is_array()) throw DocumentError("'vertices' must be an array");
  for (const auto& v : vs) {
    const std::string where = "vertex";
    check_keys(v, {"id", "kind", "constant", "omega"}, where);
    const auto id = text(v, "id", where);
    const auto kind = text(v, "kind", where + " '" + id + "'");
    if (kind == "interior") {
      if (v.contains("omega")) throw DocumentError("vertex '" + id + "': interior vertices take 'constant'");
      d.vertices.push_back(VertexData::interior(id, number_or(v, "constant", 0.0, "vertex '" + id + "'")));
    } else if (kind == "boundary") {
      if (v.contains("constant")) throw DocumentError("vertex '" + id + "': boundary vertices take 'omega'");
      d.vertices.push_back(VertexData::boundary(id, number_or(v, "omega", 0.0, "vertex '" + id + "'")));
    } else {
      throw DocumentError("vertex '" + id + "': kind must be 'interior' or 'boundary'");
    }
  }

  const auto& es = require(doc, "edges", "document");
  if (!es.is_array()) throw DocumentError("'edges' must be an array");
  for (const auto& e : es) {
    check_keys(e, {"id", "from", "to", "length", "potential"}, "edge");
    EdgeSpec spec;
    spec.id = text(e, "id", "edge");
    const std::string where = "edge '" + spec.id + "'";
    spec.from = text(e, "from", where);
    spec.to = text(e, "to", where);
    spec.length = number(e, "length", where);
    if (e.contains("potential")) spec.potential = parse_potential(e.at("potential"), where + " potential");
    d.edges.push_back(std::move(spec));
  }

  if (doc.contains("magnetic")) {
    if (!doc.at("magnetic").is_array()) throw DocumentError("'magnetic' must be an array");
    for (const auto& m : doc.at("magnetic")) {
      check_keys(m, {"edge", "phase"}, "magnetic entry");
      const auto id = text(m, "edge", "magnetic entry");
      auto it = std::find_if(d.edges.begin(), d.edges.end(), [&](const EdgeSpec& s) { return s.id == id; });
      if (it == d.edges.end()) throw DocumentError("magnetic entry: unknown edge '" + id + "'");
      it->phase = number(m, "phase", "magnetic entry");
    }
  }

  auto g = normalize_multi_links(build_graph(d));

  if (doc.contains("point_interactions")) {
    if (!doc.at("point_interactions").is_array()) throw DocumentError("'point_interactions' must be an array");
    std::vector<PointInteraction> points;
    for (const auto& p : doc.at("point_interactions")) {
      check_keys(p, {"edge", "position", "strength"}, "point interaction");
      points.push_back({text(p, "edge", "point interaction"), number(p, "position", "point interaction"),
                        number(p, "strength", "point interaction")});
    }
    g = normalize(g, {}, points);
  }
  return g;
}

InputDocument parse_document(const json& doc) {
  if (!doc.is_object()) throw DocumentError("top level must be an object");
  InputDocument out;
  out.kind = parse_coupling(doc);
  if (doc.contains("model")) {
    auto m = parse_model(doc, out.kind);
    out.graph = m.is_lattice() ? models::rect_lattice_graph(m.rect, m.rect_window) : models::comb_graph(m.comb, m.j0, m.j1);
    out.model = std::move(m);
    return out;
  }
  check_keys(doc, {"coupling", "vertices", "edges", "magnetic", "point_interactions"}, "document");
  out.graph = parse_graph(doc);
  return out;
}

InputDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DocumentError("cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DocumentError("'" + path + "': " + e.what());
  }
  return parse_document(doc);
}

} // namespace qgd
