#pragma once

// Structured (JSON) and delimited (CSV) output. Formatting is deterministic:
// JSON numbers use shortest round-trip form, CSV uses fixed %.12g.

#include "qgd/dual.hpp"
#include "qgd/graph.hpp"
#include "qgd/oracle.hpp"
#include "qgd/spectrum.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace qgd::report {

using ordered_json = nlohmann::ordered_json;

ordered_json summary(const Graph& g, CouplingKind kind);

/// `residuals` is either empty or parallel to `r.roots`.
ordered_json spectrum(const SpectrumResult& r, const std::vector<ResidualReport>& residuals = {});

ordered_json comparison(const CompareReport& c);

ordered_json matching(const MatchingResult& m);

std::string csv_number(double x);

/// Rows E,in_band,margin with '#' header lines.
void band_table(std::ostream& os, const std::vector<BandVerdict>& rows, const std::vector<std::string>& header);

} // namespace qgd::report
