#pragma once

#include <stdexcept>
#include <string>

namespace qgd {

/// Base error. `module()` names the subsystem that raised it so the CLI can
/// report provenance.
class Error : public std::runtime_error {
public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

private:
  std::string module_;
};

class GraphError : public Error {
public:
  explicit GraphError(const std::string& what) : Error("graph-core", what) {}
};

class DocumentError : public Error {
public:
  explicit DocumentError(const std::string& what) : Error("document", what) {}
};

/// Raised when an energy falls inside the exclusion window of a zero of some
/// edge Wronskian.
class ExceptionalEnergyError : public Error {
public:
  ExceptionalEnergyError(std::string module, std::string edge, double energy)
      : Error(std::move(module), "exceptional energy E = " + std::to_string(energy) +
                                     " on edge '" + edge + "'"),
        edge_(std::move(edge)), energy_(energy) {}

  const std::string& edge() const noexcept { return edge_; }
  double energy() const noexcept { return energy_; }

private:
  std::string edge_;
  double energy_;
};

} // namespace qgd
