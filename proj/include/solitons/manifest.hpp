#pragma once

// JSON manifests: a manifold block, an optional soliton block and an
// optional fit block. See README.md for the schema.

#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "solitons/fit.hpp"
#include "solitons/geometry.hpp"
#include "solitons/soliton.hpp"

namespace solitons {

/// Schema violation; the message starts with the offending field path.
class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct FitBlock {
  SolitonKind kind = SolitonKind::HyperbolicYamabe;
  std::vector<BasisFamily> families;  // empty: automatic
  int degree = 2;
  std::vector<double> init_coefficients;  // empty: zeros, or random with a seed
  std::optional<unsigned long long> init_seed;
  double init_lambda = 1.0;
  double init_mu = 0.0;
  FitOptions options;
};

struct Manifest {
  ChartSpec chart;
  std::vector<int> grid;  // empty: defaults
  std::optional<SolitonSpec> soliton;
  std::optional<FitBlock> fit;
};

Manifest parse_manifest(const nlohmann::json& doc);
Manifest load_manifest(const std::string& path);

/// Grid for a chart: explicit counts if given, otherwise the defaults.
GridSpec grid_for(const Chart& chart, const std::vector<int>& counts);

}  // namespace solitons
