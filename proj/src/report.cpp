#include "solitons/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace solitons {

namespace {

void write_string(const std::string& s, std::string& out) {
  out += Json(s).dump();
}

void write_double(double v, std::string& out) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
  // keep the value a JSON float
  const std::string s(buf);
  if (s.find_first_of(".en") == std::string::npos) out += ".0";
}

void write(const Json& v, int depth, std::string& out) {
  const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_string(k, out);
        out += ": ";
        write(item, depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write(v[i], depth + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(v[i], depth + 1, out);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      write_double(v.get<double>(), out);
      return;
    case Json::value_t::string:
      write_string(v.get<std::string>(), out);
      return;
    default:
      out += v.dump();
  }
}

Json measures(const std::vector<Measure>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) {
    out.push_back({{"name", m.name}, {"value", m.value}, {"tolerance", m.tolerance}, {"ok", m.ok()}});
  }
  return out;
}

Json named_values(const std::vector<std::pair<std::string, double>>& vs) {
  Json out = Json::object();
  for (const auto& [k, v] : vs) out[k] = v;
  return out;
}

}  // namespace

std::string dump_report(const Json& doc) {
  std::string out;
  write(doc, 0, out);
  out += "\n";
  return out;
}

Json to_json(const GridSpec& grid) {
  Json counts = Json::array(), rules = Json::array();
  std::size_t nodes = 1;
  for (std::size_t i = 0; i < grid.counts.size(); ++i) {
    counts.push_back(grid.counts[i]);
    rules.push_back(grid.rules[i] == QuadratureRule::Trapezoid ? "trapezoid" : "gauss_legendre");
    nodes *= static_cast<std::size_t>(grid.counts[i]);
  }
  return {{"counts", counts}, {"rules", rules}, {"nodes", nodes}};
}

Json to_json(const CheckReport& r) {
  Json out;
  out["id"] = r.id;
  out["verdict"] = to_string(r.verdict);
  out["applicable"] = r.applicable;
  out["max_residual"] = r.max_residual;
  out["residuals"] = measures(r.residuals);
  out["hypotheses"] = measures(r.hypotheses);
  out["integrals"] = named_values(r.integrals);
  out["values"] = named_values(r.values);
  out["notes"] = r.notes;
  out["grid"] = to_json(r.grid);
  return out;
}

Json to_json(const SolitonSpec& spec, const std::vector<std::string>& coords) {
  Json out;
  out["kind"] = to_string(spec.kind);
  if (const auto* f = std::get_if<ScalarField>(&spec.potential)) {
    out["potential"] = {{"gradient", f->expr.to_string(coords)}};
  } else {
    Json v = Json::array();
    for (const auto& c : std::get<VectorField>(spec.potential).components) v.push_back(c.to_string(coords));
    out["potential"] = {{"vector", v}};
  }
  out["lambda"] = spec.lambda;
  out["mu"] = spec.mu;
  return out;
}

Json to_json(const FitResult& r) {
  Json out;
  out["coefficients"] = r.coefficients;
  out["lambda"] = r.lambda;
  out["mu"] = r.mu;
  out["objective"] = r.objective;
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["termination"] = r.termination;
  out["lambda_clamped"] = r.lambda_clamped;
  out["gradient_norm"] = r.gradient_norm;
  out["history"] = r.history;
  return out;
}

Json to_json(const Tolerances& tol) {
  return {{"pointwise", tol.pointwise}, {"integral", tol.integral}, {"hypothesis", tol.hypothesis}};
}

}  // namespace solitons
