#pragma once

// Deterministic JSON reports: insertion-ordered keys, two-space indent,
// floating point values printed with 17 significant digits.

#include <json.hpp>
#include <string>

#include "solitons/fit.hpp"
#include "solitons/quadrature.hpp"
#include "solitons/soliton.hpp"

namespace solitons {

using Json = nlohmann::ordered_json;

/// Serializes with %.17g doubles; non-finite doubles become null.
std::string dump_report(const Json& doc);

Json to_json(const GridSpec& grid);
Json to_json(const CheckReport& report);
Json to_json(const SolitonSpec& spec, const std::vector<std::string>& coords);
Json to_json(const FitResult& result);
Json to_json(const Tolerances& tol);

}  // namespace solitons
