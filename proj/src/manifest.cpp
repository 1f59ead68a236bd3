#include "solitons/manifest.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

namespace solitons {

namespace {

using nlohmann::json;

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::string dot(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void only_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.contains(k)) throw ManifestError(dot(path, k), "unknown field");
  }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) throw ManifestError(dot(path, key), "missing");
  return obj.at(key);
}

const json& require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ManifestError(path, "expected an object");
  return v;
}

const json& require_array(const json& v, const std::string& path, std::size_t size) {
  if (!v.is_array()) throw ManifestError(path, "expected an array");
  if (size && v.size() != size) {
    throw ManifestError(path, "expected " + std::to_string(size) + " entries, got " +
                                  std::to_string(v.size()));
  }
  return v;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ManifestError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ManifestError(path, "expected a finite number");
  return d;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ManifestError(path, "expected an integer");
  return v.get<int>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ManifestError(path, "expected true or false");
  return v.get<bool>();
}

std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ManifestError(path, "expected a string");
  return v.get<std::string>();
}

Expr expression(const json& v, const std::string& path, const std::vector<std::string>& coords) {
  if (v.is_number()) return Expr::constant(number(v, path), static_cast<int>(coords.size()));
  const std::string src = string(v, path);
  try {
    return Expr::parse(src, coords);
  } catch (const ParseError& e) {
    throw ManifestError(path, e.what());
  }
}

// Number or a constant expression such as "2*pi".
double constant_value(const json& v, const std::string& path) {
  if (v.is_number()) return number(v, path);
  const Expr e = expression(v, path, {});
  if (!e.is_constant()) throw ManifestError(path, "expected a constant expression");
  try {
    const double d = e.eval({});
    if (!std::isfinite(d)) throw ManifestError(path, "expression is not finite");
    return d;
  } catch (const EvalError& err) {
    throw ManifestError(path, err.what());
  }
}

SolitonKind kind_of(const json& v, const std::string& path) {
  const std::string s = string(v, path);
  if (s == "hyperbolic_ricci") return SolitonKind::HyperbolicRicci;
  if (s == "hyperbolic_yamabe") return SolitonKind::HyperbolicYamabe;
  throw ManifestError(path, "unknown kind '" + s +
                                "' (expected hyperbolic_ricci or hyperbolic_yamabe)");
}

std::vector<int> grid_counts(const json& v, const std::string& path, int n) {
  require_array(v, path, static_cast<std::size_t>(n));
  std::vector<int> counts;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const int c = integer(v[i], at(path, i));
    if (c < 8) throw ManifestError(at(path, i), "node count must be at least 8");
    counts.push_back(c);
  }
  return counts;
}

void parse_manifold(const json& m, Manifest& out) {
  const std::string p = "manifold";
  require_object(m, p);
  only_keys(m, p,
            {"name", "dim", "coords", "domain", "periodic", "exclusion_margin", "metric", "grid"});
  ChartSpec& c = out.chart;
  c.name = string(require(m, p, "name"), dot(p, "name"));
  const int n = integer(require(m, p, "dim"), dot(p, "dim"));
  if (n < 2 || n > kMaxDim) throw ManifestError(dot(p, "dim"), "dimension must be in 2..4");
  const auto un = static_cast<std::size_t>(n);

  const std::string pc = dot(p, "coords");
  const json& coords = require_array(require(m, p, "coords"), pc, un);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < un; ++i) {
    std::string name = string(coords[i], at(pc, i));
    bool ok = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
    for (char ch : name) ok = ok && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
    if (!ok) throw ManifestError(at(pc, i), "'" + name + "' is not an identifier");
    if (name == "pi" || name == "sin" || name == "cos" || name == "exp" || name == "log" ||
        name == "sqrt") {
      throw ManifestError(at(pc, i), "'" + name + "' is a reserved name");
    }
    if (!seen.insert(name).second) throw ManifestError(at(pc, i), "duplicate coordinate name");
    c.coords.push_back(std::move(name));
  }

  const std::string pd = dot(p, "domain");
  const json& dom = require_array(require(m, p, "domain"), pd, un);
  for (std::size_t i = 0; i < un; ++i) {
    const json& iv = require_array(dom[i], at(pd, i), 2);
    const double lo = constant_value(iv[0], at(at(pd, i), 0));
    const double hi = constant_value(iv[1], at(at(pd, i), 1));
    if (!(hi > lo)) throw ManifestError(at(pd, i), "interval must satisfy lo < hi");
    c.domain.push_back({lo, hi});
  }

  const std::string pp = dot(p, "periodic");
  if (m.contains("periodic")) {
    const json& per = require_array(m.at("periodic"), pp, un);
    for (std::size_t i = 0; i < un; ++i) c.periodic.push_back(boolean(per[i], at(pp, i)));
  } else {
    c.periodic.assign(un, false);
  }

  const std::string pe = dot(p, "exclusion_margin");
  if (m.contains("exclusion_margin")) {
    const json& em = require_array(m.at("exclusion_margin"), pe, un);
    for (std::size_t i = 0; i < un; ++i) {
      const double v = constant_value(em[i], at(pe, i));
      if (v < 0.0) throw ManifestError(at(pe, i), "margin must be nonnegative");
      if (2 * v >= c.domain[i].hi - c.domain[i].lo) {
        throw ManifestError(at(pe, i), "margin leaves an empty sampled interval");
      }
      if (v > 0.0 && c.periodic[i]) {
        throw ManifestError(at(pe, i), "periodic coordinates take no exclusion margin");
      }
      c.exclusion_margin.push_back(v);
    }
  } else {
    c.exclusion_margin.assign(un, 0.0);
  }

  const std::string pm = dot(p, "metric");
  const json& g = require_array(require(m, p, "metric"), pm, un);
  c.metric.assign(un, std::vector<Expr>(un));
  for (std::size_t i = 0; i < un; ++i) {
    const json& row = require_array(g[i], at(pm, i), 0);
    if (row.size() > un) throw ManifestError(at(pm, i), "more than " + std::to_string(n) + " entries");
    for (std::size_t j = 0; j < un; ++j) {
      const std::string pij = at(at(pm, i), j);
      if (j >= row.size() || row[j].is_null()) {
        if (j >= i) throw ManifestError(pij, "missing (entries on or above the diagonal are required)");
        continue;
      }
      c.metric[i][j] = expression(row[j], pij, c.coords);
    }
  }
  try {
    Chart check(c);
  } catch (const GeometryError& e) {
    throw ManifestError(p, e.what());
  }

  if (m.contains("grid")) out.grid = grid_counts(m.at("grid"), dot(p, "grid"), n);
}

void parse_soliton(const json& s, Manifest& out) {
  const std::string p = "soliton";
  require_object(s, p);
  only_keys(s, p, {"kind", "potential", "lambda", "mu"});
  SolitonSpec spec;
  spec.kind = kind_of(require(s, p, "kind"), dot(p, "kind"));
  const std::string pp = dot(p, "potential");
  const json& pot = require_object(require(s, p, "potential"), pp);
  if (pot.size() != 1 || !(pot.contains("gradient") || pot.contains("vector"))) {
    throw ManifestError(pp, "expected exactly one of {\"gradient\": expr} or {\"vector\": [exprs]}");
  }
  const auto& coords = out.chart.coords;
  if (pot.contains("gradient")) {
    spec.potential = ScalarField{expression(pot.at("gradient"), dot(pp, "gradient"), coords)};
  } else {
    const std::string pv = dot(pp, "vector");
    const json& v = require_array(pot.at("vector"), pv, coords.size());
    VectorField xi;
    for (std::size_t i = 0; i < v.size(); ++i) xi.components.push_back(expression(v[i], at(pv, i), coords));
    spec.potential = std::move(xi);
  }
  spec.lambda = number(require(s, p, "lambda"), dot(p, "lambda"));
  spec.mu = number(require(s, p, "mu"), dot(p, "mu"));
  out.soliton = std::move(spec);
}

void parse_fit(const json& f, Manifest& out) {
  const std::string p = "fit";
  require_object(f, p);
  only_keys(f, p, {"kind", "basis", "degree", "init", "options"});
  FitBlock b;
  if (f.contains("kind")) {
    b.kind = kind_of(f.at("kind"), dot(p, "kind"));
  } else if (out.soliton) {
    b.kind = out.soliton->kind;
  } else {
    throw ManifestError(dot(p, "kind"), "missing (no soliton block to take it from)");
  }
  if (f.contains("basis")) {
    const json& basis = f.at("basis");
    const std::string pb = dot(p, "basis");
    if (basis.is_string()) {
      if (basis.get<std::string>() != "auto") {
        throw ManifestError(pb, "expected \"auto\" or one family per coordinate");
      }
    } else {
      require_array(basis, pb, out.chart.coords.size());
      for (std::size_t i = 0; i < basis.size(); ++i) {
        const std::string fam = string(basis[i], at(pb, i));
        if (fam == "fourier") {
          b.families.push_back(BasisFamily::Fourier);
        } else if (fam == "cos_poly") {
          b.families.push_back(BasisFamily::CosPolynomial);
        } else {
          throw ManifestError(at(pb, i), "unknown basis family '" + fam +
                                             "' (expected fourier or cos_poly)");
        }
      }
    }
  }
  if (f.contains("degree")) {
    b.degree = integer(f.at("degree"), dot(p, "degree"));
    if (b.degree < 0 || b.degree > 8) throw ManifestError(dot(p, "degree"), "degree must be in 0..8");
  }
  if (f.contains("init")) {
    const std::string pi = dot(p, "init");
    const json& init = require_object(f.at("init"), pi);
    only_keys(init, pi, {"lambda", "mu", "coefficients", "seed"});
    if (init.contains("lambda")) b.init_lambda = number(init.at("lambda"), dot(pi, "lambda"));
    if (init.contains("mu")) b.init_mu = number(init.at("mu"), dot(pi, "mu"));
    if (init.contains("coefficients") && init.contains("seed")) {
      throw ManifestError(pi, "give either coefficients or seed, not both");
    }
    if (init.contains("coefficients")) {
      const std::string pcoef = dot(pi, "coefficients");
      const json& cs = require_array(init.at("coefficients"), pcoef, 0);
      for (std::size_t i = 0; i < cs.size(); ++i) b.init_coefficients.push_back(number(cs[i], at(pcoef, i)));
    }
    if (init.contains("seed")) {
      const json& sd = init.at("seed");
      if (!sd.is_number_unsigned()) throw ManifestError(dot(pi, "seed"), "expected a nonnegative integer");
      b.init_seed = sd.get<unsigned long long>();
    }
  }
  if (f.contains("options")) {
    const std::string po = dot(p, "options");
    const json& o = require_object(f.at("options"), po);
    only_keys(o, po, {"max_iterations", "gradient_tolerance", "step_tolerance", "lambda_clamp",
                      "initial_damping", "jacobian_step"});
    auto positive = [&](const char* key, double& slot) {
      if (!o.contains(key)) return;
      const double v = number(o.at(key), dot(po, key));
      if (!(v > 0.0)) throw ManifestError(dot(po, key), "must be positive");
      slot = v;
    };
    if (o.contains("max_iterations")) {
      b.options.max_iterations = integer(o.at("max_iterations"), dot(po, "max_iterations"));
      if (b.options.max_iterations < 1) throw ManifestError(dot(po, "max_iterations"), "must be at least 1");
    }
    positive("gradient_tolerance", b.options.gradient_tolerance);
    positive("step_tolerance", b.options.step_tolerance);
    positive("lambda_clamp", b.options.lambda_clamp);
    positive("initial_damping", b.options.initial_damping);
    positive("jacobian_step", b.options.jacobian_step);
  }
  out.fit = std::move(b);
}

}  // namespace

Manifest parse_manifest(const json& doc) {
  if (!doc.is_object()) throw ManifestError("$", "manifest must be a JSON object");
  only_keys(doc, "", {"manifold", "soliton", "fit"});
  Manifest out;
  parse_manifold(require(doc, "", "manifold"), out);
  if (doc.contains("soliton")) parse_soliton(doc.at("soliton"), out);
  if (doc.contains("fit")) parse_fit(doc.at("fit"), out);
  return out;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError(path, "cannot open manifest");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ManifestError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_manifest(doc);
}

GridSpec grid_for(const Chart& chart, const std::vector<int>& counts) {
  return counts.empty() ? GridSpec::defaults(chart) : GridSpec::with_counts(chart, counts);
}

}  // namespace solitons
