#pragma once

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "solitons/manifest.hpp"
#include "solitons/soliton.hpp"

namespace support {

inline std::string manifest_path(const std::string& name) {
  return std::string(SOLITONS_MANIFEST_DIR) + "/" + name + ".json";
}

inline solitons::Manifest manifest(const std::string& name) {
  return solitons::load_manifest(manifest_path(name));
}

inline solitons::Chart chart(const std::string& name) { return solitons::Chart(manifest(name).chart); }

inline solitons::GridSpec grid(const std::string& name, const solitons::Chart& c) {
  return solitons::grid_for(c, manifest(name).grid);
}

/// Chart from metric component sources; `metric` is the full n x n table.
inline solitons::Chart make_chart(const std::string& name, std::vector<std::string> coords,
                                  std::vector<solitons::Interval> domain, std::vector<bool> periodic,
                                  const std::vector<std::vector<std::string>>& metric) {
  solitons::ChartSpec spec;
  spec.name = name;
  spec.coords = std::move(coords);
  spec.domain = std::move(domain);
  spec.periodic = std::move(periodic);
  spec.exclusion_margin.assign(spec.coords.size(), 0.0);
  for (const auto& row : metric) {
    std::vector<solitons::Expr> r;
    for (const auto& src : row) r.push_back(solitons::Expr::parse(src, spec.coords));
    spec.metric.push_back(std::move(r));
  }
  return solitons::Chart(std::move(spec));
}

/// Smooth functions on the manifold written in chart coordinates (restrictions
/// of coordinate functions of an embedding, or trig monomials on tori).
inline std::vector<std::string> embedding(const std::string& name) {
  if (name == "unit_s2" || name == "ellipsoid")
    return {"sin(th)*cos(ph)", "sin(th)*sin(ph)", "cos(th)"};
  if (name == "unit_s3")
    return {"sin(eta)*cos(u)", "sin(eta)*sin(u)", "cos(eta)*cos(v)", "cos(eta)*sin(v)"};
  if (name == "flat_t2") return {"cos(x)", "sin(x)", "cos(y)", "sin(y)"};
  if (name == "flat_t3") return {"cos(x)", "sin(x)", "cos(y)", "sin(y)", "cos(z)", "sin(z)"};
  if (name == "s2_times_s1")
    return {"sin(th)*cos(ph)", "sin(th)*sin(ph)", "cos(th)", "cos(z)", "sin(z)"};
  return {};
}

/// Smooth vector fields (contravariant components) on the manifold.
inline std::vector<std::vector<std::string>> smooth_fields(const std::string& name) {
  if (name == "unit_s2" || name == "ellipsoid")
    return {{"sin(th)", "0"}, {"0", "1"}, {"cos(th)*cos(ph)", "-sin(ph)/sin(th)"}};
  if (name == "unit_s3")
    return {{"sin(2*eta)", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"},
            {"cos(eta)*cos(u)", "-sin(u)/sin(eta)", "0"}};
  if (name == "flat_t2") return {{"1", "0"}, {"0", "1"}};
  if (name == "flat_t3") return {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}};
  if (name == "s2_times_s1")
    return {{"sin(th)", "0", "0"},
            {"0", "1", "0"},
            {"0", "0", "1"},
            {"cos(th)*cos(ph)", "-sin(ph)/sin(th)", "0"}};
  return {};
}

inline std::string coefficient(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "(%.6f)", u(rng));
  return buf;
}

/// Random polynomial of degree <= `degree` in the embedding functions.
inline std::string random_polynomial(const std::string& name, std::mt19937_64& rng,
                                     int degree = 3, int terms = 6) {
  const auto e = embedding(name);
  std::uniform_int_distribution<std::size_t> pick(0, e.size() - 1);
  std::uniform_int_distribution<int> deg(1, degree);
  std::string s = coefficient(rng);
  for (int t = 0; t < terms; ++t) {
    s += " + " + coefficient(rng);
    const int d = deg(rng);
    for (int k = 0; k < d; ++k) s += "*" + e[pick(rng)];
  }
  return s;
}

inline std::vector<std::string> random_vector(const std::string& name, std::mt19937_64& rng) {
  const auto fields = smooth_fields(name);
  std::vector<std::string> out(fields[0].size(), "0");
  for (const auto& v : fields) {
    const std::string p = "(" + random_polynomial(name, rng, 2, 3) + ")";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] != "0") out[i] += " + " + p + "*(" + v[i] + ")";
    }
  }
  return out;
}

inline solitons::ScalarField scalar(const std::string& src, const solitons::Chart& c) {
  return solitons::ScalarField{solitons::Expr::parse(src, c.coords())};
}

inline solitons::VectorField vector(const std::vector<std::string>& src,
                                    const solitons::Chart& c) {
  solitons::VectorField v;
  for (const auto& s : src) v.components.push_back(solitons::Expr::parse(s, c.coords()));
  return v;
}

inline const std::vector<std::string>& suite_charts() {
  static const std::vector<std::string> names = {"unit_s2", "unit_s3", "flat_t2",
                                                 "flat_t3", "s2_times_s1", "ellipsoid"};
  return names;
}

}  // namespace support
