#include "solitons/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace solitons {

namespace {

enum class Type { Scalar, Vector };

bool is_vector_name(const std::string& s) { return s == "gradf" || s == "gradr" || s == "xi"; }

bool uses_symbol(const Node& n, const std::string& name) {
  if (n.kind == NodeKind::Symbol && n.name == name) return true;
  return std::any_of(n.args.begin(), n.args.end(),
                     [&](const NodePtr& a) { return uses_symbol(*a, name); });
}

std::string span_text(const std::string& src, const Node& n) {
  return "'" + src.substr(n.begin, n.end - n.begin) + "' at offset " + std::to_string(n.begin);
}

class Checker {
 public:
  Checker(const std::string& src, bool gradient, bool have_potential)
      : src_(src), gradient_(gradient), have_potential_(have_potential) {}

  Type check(const Node& n, bool in_jet) {
    switch (n.kind) {
      case NodeKind::Constant:
      case NodeKind::Variable:
        return Type::Scalar;
      case NodeKind::Symbol:
        if ((n.name == "f" || n.name == "gradf") && !gradient_) {
          throw IntegrandError(span_text(src_, n) + ": '" + n.name +
                               "' needs a gradient potential in the soliton block");
        }
        if (n.name == "xi" && !have_potential_) {
          throw IntegrandError(span_text(src_, n) + ": 'xi' needs a soliton block");
        }
        if (is_vector_name(n.name)) {
          if (in_jet) throw IntegrandError(span_text(src_, n) + ": vectors cannot appear inside lap/norm2_hess");
          return Type::Vector;
        }
        return Type::Scalar;
      case NodeKind::Call: {
        if (n.builtin != Builtin::None) {
          scalar(*n.args[0], in_jet);
          return Type::Scalar;
        }
        if (in_jet) throw IntegrandError(span_text(src_, n) + ": '" + n.name + "' cannot be nested inside lap/norm2_hess");
        if (n.name == "ric" || n.name == "g") {
          for (const auto& a : n.args) {
            if (a->kind != NodeKind::Symbol || !is_vector_name(a->name)) {
              throw IntegrandError(span_text(src_, *a) + ": arguments of '" + n.name +
                                   "' must be one of gradf, gradr, xi");
            }
            check(*a, false);
          }
          return Type::Scalar;
        }
        scalar(*n.args[0], true);
        return Type::Scalar;
      }
      default:
        for (const auto& a : n.args) scalar(*a, in_jet);
        return Type::Scalar;
    }
  }

  void scalar(const Node& n, bool in_jet) {
    if (check(n, in_jet) != Type::Scalar) {
      throw IntegrandError(span_text(src_, n) + ": expected a scalar, got a vector");
    }
  }

 private:
  const std::string& src_;
  bool gradient_;
  bool have_potential_;
};

template <int K>
struct Context {
  const Frame<K>& fr;
  std::span<const double> x;
  JetBindings<K> jets;  // f, r
  Vec<Jet<K>> gradf{}, gradr{}, xi{};
};

template <int K>
const Vec<Jet<K>>& vector_named(const Context<K>& c, const std::string& name) {
  if (name == "gradf") return c.gradf;
  if (name == "gradr") return c.gradr;
  return c.xi;
}

template <int K>
double eval(const Node& n, const Context<K>& c) {
  switch (n.kind) {
    case NodeKind::Constant: return n.value;
    case NodeKind::Variable: return c.x[n.variable];
    case NodeKind::Symbol: return c.jets.at(n.name).value();
    case NodeKind::Negate: return -eval(*n.args[0], c);
    case NodeKind::Add: return eval(*n.args[0], c) + eval(*n.args[1], c);
    case NodeKind::Sub: return eval(*n.args[0], c) - eval(*n.args[1], c);
    case NodeKind::Mul: return eval(*n.args[0], c) * eval(*n.args[1], c);
    case NodeKind::Div: {
      const double b = eval(*n.args[1], c);
      if (b == 0.0) throw EvalError("division by zero", n.begin, n.end);
      return eval(*n.args[0], c) / b;
    }
    case NodeKind::Pow: {
      const double a = eval(*n.args[0], c), p = eval(*n.args[1], c);
      if (a <= 0.0 && p != std::floor(p)) {
        throw EvalError("non-integer power of a nonpositive base", n.begin, n.end);
      }
      return std::pow(a, p);
    }
    case NodeKind::Call:
      if (n.builtin != Builtin::None) {
        const double a = eval(*n.args[0], c);
        switch (n.builtin) {
          case Builtin::Sin: return std::sin(a);
          case Builtin::Cos: return std::cos(a);
          case Builtin::Exp: return std::exp(a);
          case Builtin::Log:
            if (!(a > 0.0)) throw EvalError("log of a nonpositive value", n.begin, n.end);
            return std::log(a);
          case Builtin::Sqrt:
            if (a < 0.0) throw EvalError("sqrt of a negative value", n.begin, n.end);
            return std::sqrt(a);
          case Builtin::None: break;
        }
      }
      if (n.name == "ric") {
        return contract(c.fr.ricci(), vector_named(c, n.args[0]->name),
                        vector_named(c, n.args[1]->name), c.fr.dim())
            .value();
      }
      if (n.name == "g") {
        return inner(vector_named(c, n.args[0]->name), vector_named(c, n.args[1]->name), c.fr)
            .value();
      }
      {
        const Jet<K> s = eval_jet<K>(*n.args[0], c.x, c.jets);
        if (n.name == "lap") return laplacian(s, c.fr).value();
        return norm2(hessian(s, c.fr), c.fr).value();
      }
  }
  throw IntegrandError("malformed integrand node");
}

template <int K>
double evaluate(const Expr& e, const Chart& chart, const std::optional<SolitonSpec>& soliton,
                std::span<const double> x) {
  const Frame<K> fr(chart, x);
  Context<K> c{fr, x, {}, {}, {}, {}};
  c.jets.emplace("r", fr.scalar_curvature());
  c.gradr = gradient(fr.scalar_curvature(), fr);
  if (soliton) {
    if (const auto* f = std::get_if<ScalarField>(&soliton->potential)) {
      const Jet<K> fj = f->jet<K>(x);
      c.jets.emplace("f", fj);
      c.gradf = gradient(fj, fr);
      c.xi = c.gradf;
    } else {
      c.xi = std::get<VectorField>(soliton->potential).jet<K>(x);
    }
  }
  return eval(e.root(), c);
}

}  // namespace

Integrand Integrand::parse(const std::string& src, const Chart& chart,
                           const std::optional<SolitonSpec>& soliton) {
  ParseOptions opts;
  opts.coords = chart.coords();
  opts.symbols = {"r", "f", "gradf", "gradr", "xi"};
  opts.functions = {{"ric", 2}, {"g", 2}, {"lap", 1}, {"norm2_hess", 1}};
  Integrand out;
  out.expr_ = Expr::parse(src, opts);
  const bool gradient = soliton && soliton->is_gradient();
  Checker(src, gradient, soliton.has_value()).scalar(out.expr_.root(), false);
  out.chart_ = &chart;
  out.soliton_ = soliton;
  // lap(r) and norm2_hess(r) need r exact through second order.
  std::function<bool(const Node&)> twice_r = [&](const Node& n) {
    if (n.kind == NodeKind::Call && (n.name == "lap" || n.name == "norm2_hess") &&
        n.builtin == Builtin::None && uses_symbol(*n.args[0], "r")) {
      return true;
    }
    return std::any_of(n.args.begin(), n.args.end(), [&](const NodePtr& a) { return twice_r(*a); });
  };
  out.order_ = twice_r(out.expr_.root()) ? 4 : 3;
  return out;
}

double Integrand::operator()(std::span<const double> x) const {
  return order_ == 4 ? evaluate<4>(expr_, *chart_, soliton_, x)
                     : evaluate<3>(expr_, *chart_, soliton_, x);
}

}  // namespace solitons
