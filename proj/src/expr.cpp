#include "solitons/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace solitons {

namespace {

constexpr int kMaxDepth = 200;

Builtin lookup_builtin(const std::string& name) {
  if (name == "sin") return Builtin::Sin;
  if (name == "cos") return Builtin::Cos;
  if (name == "exp") return Builtin::Exp;
  if (name == "log") return Builtin::Log;
  if (name == "sqrt") return Builtin::Sqrt;
  return Builtin::None;
}

class Parser {
 public:
  Parser(const std::string& src, const ParseOptions& opts) : src_(src), opts_(opts) {}

  NodePtr run() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = expr();
    skip_ws();
    if (pos_ < src_.size()) {
      throw ParseError(std::string("unexpected character '") + src_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(NodeKind kind, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->begin = lhs->begin;
    n->end = rhs->end;
    n->args = {std::move(lhs), std::move(rhs)};
    return n;
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxDepth) throw ParseError("expression nested too deeply", p_.pos_);
    }
    ~DepthGuard() { --p_.depth_; }
    Parser& p_;
  };

  NodePtr expr() {
    DepthGuard guard(*this);
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(NodeKind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = binary(NodeKind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(NodeKind::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = binary(NodeKind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    DepthGuard guard(*this);
    skip_ws();
    const std::size_t start = pos_;
    if (accept('-')) {
      NodePtr operand = unary();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Negate;
      n->begin = start;
      n->end = operand->end;
      n->args = {std::move(operand)};
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary(NodeKind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    const std::size_t start = pos_;
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name = identifier();
      skip_ws();
      const bool call = pos_ < src_.size() && src_[pos_] == '(';
      if (call) return call_node(name, start);
      return name_node(name, start);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    std::size_t p = pos_;
    auto digits = [&] {
      const std::size_t s = p;
      while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
      return p - s;
    };
    std::size_t mantissa = digits();
    if (p < src_.size() && src_[p] == '.') {
      ++p;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
      ++p;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (digits() == 0) throw ParseError("malformed exponent", p);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + p, v);
    if (ec != std::errc() || ptr != src_.data() + p) throw ParseError("malformed number", start);
    pos_ = p;
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Constant;
    n->value = v;
    n->begin = start;
    n->end = p;
    return n;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    return src_.substr(start, pos_ - start);
  }

  NodePtr name_node(const std::string& name, std::size_t start) {
    auto n = std::make_shared<Node>();
    n->begin = start;
    n->end = pos_;
    const auto& coords = opts_.coords;
    if (auto it = std::find(coords.begin(), coords.end(), name); it != coords.end()) {
      n->kind = NodeKind::Variable;
      n->variable = static_cast<int>(it - coords.begin());
      n->name = name;
      return n;
    }
    if (name == "pi") {
      n->kind = NodeKind::Constant;
      n->value = std::numbers::pi;
      n->name = "pi";
      return n;
    }
    if (std::find(opts_.symbols.begin(), opts_.symbols.end(), name) != opts_.symbols.end()) {
      n->kind = NodeKind::Symbol;
      n->name = name;
      return n;
    }
    if (lookup_builtin(name) != Builtin::None || opts_.functions.count(name)) {
      throw ParseError("function '" + name + "' requires parenthesised arguments", start);
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  NodePtr call_node(const std::string& name, std::size_t start) {
    const Builtin b = lookup_builtin(name);
    int arity = 1;
    if (b == Builtin::None) {
      auto it = opts_.functions.find(name);
      if (it == opts_.functions.end()) throw ParseError("unknown function '" + name + "'", start);
      arity = it->second;
    }
    accept('(');
    std::vector<NodePtr> args;
    if (!accept(')')) {
      for (;;) {
        args.push_back(expr());
        if (accept(',')) continue;
        if (accept(')')) break;
        throw ParseError("expected ',' or ')'", pos_);
      }
    }
    if (static_cast<int>(args.size()) != arity) {
      throw ParseError("function '" + name + "' expects " + std::to_string(arity) +
                           " argument(s), got " + std::to_string(args.size()),
                       start);
    }
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Call;
    n->name = name;
    n->builtin = b;
    n->args = std::move(args);
    n->begin = start;
    n->end = pos_;
    return n;
  }

  const std::string& src_;
  const ParseOptions& opts_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

bool references_free_names(const Node& n) {
  if (n.kind == NodeKind::Variable || n.kind == NodeKind::Symbol) return true;
  if (n.kind == NodeKind::Call && n.builtin == Builtin::None) return true;
  return std::any_of(n.args.begin(), n.args.end(),
                     [](const NodePtr& a) { return references_free_names(*a); });
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print(const Node& n, const std::vector<std::string>& coords, std::ostream& os) {
  auto sub = [&](int i) { print(*n.args[i], coords, os); };
  switch (n.kind) {
    case NodeKind::Constant:
      if (n.name == "pi") {
        os << "pi";
      } else {
        os << format_number(n.value);
      }
      return;
    case NodeKind::Variable:
      os << (n.variable < static_cast<int>(coords.size()) ? coords[n.variable] : n.name);
      return;
    case NodeKind::Symbol:
      os << n.name;
      return;
    case NodeKind::Negate:
      os << "(-";
      sub(0);
      os << ")";
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Pow: {
      static const char ops[] = {'+', '-', '*', '/', '^'};
      const char op = ops[static_cast<int>(n.kind) - static_cast<int>(NodeKind::Add)];
      os << "(";
      sub(0);
      os << " " << op << " ";
      sub(1);
      os << ")";
      return;
    }
    case NodeKind::Call:
      os << n.name << "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << ", ";
        sub(static_cast<int>(i));
      }
      os << ")";
      return;
  }
}

template <int K>
Jet<K> eval_node(const Node& n, std::span<const double> x, const JetBindings<K>* symbols) {
  const int dim = static_cast<int>(x.size());
  try {
    switch (n.kind) {
      case NodeKind::Constant:
        return Jet<K>::constant(dim, n.value);
      case NodeKind::Variable:
        return Jet<K>::seed(x, n.variable);
      case NodeKind::Symbol: {
        if (symbols) {
          const auto it = symbols->find(n.name);
          if (it != symbols->end()) return it->second;
        }
        throw EvalError("unbound symbol '" + n.name + "'", n.begin, n.end);
      }
      case NodeKind::Negate:
        return -eval_node<K>(*n.args[0], x, symbols);
      case NodeKind::Add:
        return eval_node<K>(*n.args[0], x, symbols) + eval_node<K>(*n.args[1], x, symbols);
      case NodeKind::Sub:
        return eval_node<K>(*n.args[0], x, symbols) - eval_node<K>(*n.args[1], x, symbols);
      case NodeKind::Mul:
        return eval_node<K>(*n.args[0], x, symbols) * eval_node<K>(*n.args[1], x, symbols);
      case NodeKind::Div:
        return eval_node<K>(*n.args[0], x, symbols) / eval_node<K>(*n.args[1], x, symbols);
      case NodeKind::Pow: {
        const Jet<K> base = eval_node<K>(*n.args[0], x, symbols);
        const Jet<K> expo = eval_node<K>(*n.args[1], x, symbols);
        if (expo.is_constant()) return pow(base, expo.value());
        return exp(expo * log(base));
      }
      case NodeKind::Call: {
        if (n.builtin == Builtin::None) {
          throw EvalError("function '" + n.name + "' is not available here", n.begin, n.end);
        }
        const Jet<K> a = eval_node<K>(*n.args[0], x, symbols);
        switch (n.builtin) {
          case Builtin::Sin: return sin(a);
          case Builtin::Cos: return cos(a);
          case Builtin::Exp: return exp(a);
          case Builtin::Log: return log(a);
          case Builtin::Sqrt: return sqrt(a);
          case Builtin::None: break;
        }
        break;
      }
    }
  } catch (const JetDomainError& e) {
    std::ostringstream os;
    os << e.what() << " in [" << n.begin << ", " << n.end << ") at x = (";
    for (int i = 0; i < dim; ++i) os << (i ? ", " : "") << format_number(x[i]);
    os << ")";
    throw EvalError(os.str(), n.begin, n.end);
  }
  throw EvalError("malformed expression node", n.begin, n.end);
}

}  // namespace

std::string builtin_name(Builtin b) {
  switch (b) {
    case Builtin::Sin: return "sin";
    case Builtin::Cos: return "cos";
    case Builtin::Exp: return "exp";
    case Builtin::Log: return "log";
    case Builtin::Sqrt: return "sqrt";
    case Builtin::None: break;
  }
  return "";
}

Expr Expr::parse(const std::string& src, const std::vector<std::string>& coords) {
  ParseOptions opts;
  opts.coords = coords;
  return parse(src, opts);
}

Expr Expr::parse(const std::string& src, const ParseOptions& options) {
  Expr e;
  e.source_ = src;
  e.n_coords_ = static_cast<int>(options.coords.size());
  e.root_ = Parser(src, options).run();
  return e;
}

Expr Expr::constant(double v, int n_coords) {
  Expr e;
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->value = v;
  e.root_ = n;
  e.source_ = format_number(v);
  e.n_coords_ = n_coords;
  return e;
}

std::string Expr::to_string(const std::vector<std::string>& coords) const {
  std::ostringstream os;
  print(*root_, coords, os);
  return os.str();
}

bool Expr::is_constant() const { return !references_free_names(*root_); }

template <int K>
Jet<K> Expr::eval_jet(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_coords_) {
    throw std::invalid_argument("Expr::eval_jet: point has " + std::to_string(x.size()) +
                                " coordinates, expression expects " + std::to_string(n_coords_));
  }
  return eval_node<K>(*root_, x, nullptr);
}

double Expr::eval(std::span<const double> x) const { return eval_jet<1>(x).value(); }

template Jet<1> Expr::eval_jet<1>(std::span<const double>) const;
template Jet<2> Expr::eval_jet<2>(std::span<const double>) const;
template Jet<3> Expr::eval_jet<3>(std::span<const double>) const;
template Jet<4> Expr::eval_jet<4>(std::span<const double>) const;

template <int K>
Jet<K> eval_jet(const Node& node, std::span<const double> x, const JetBindings<K>& symbols) {
  return eval_node<K>(node, x, &symbols);
}

template Jet<1> eval_jet<1>(const Node&, std::span<const double>, const JetBindings<1>&);
template Jet<2> eval_jet<2>(const Node&, std::span<const double>, const JetBindings<2>&);
template Jet<3> eval_jet<3>(const Node&, std::span<const double>, const JetBindings<3>&);
template Jet<4> eval_jet<4>(const Node&, std::span<const double>, const JetBindings<4>&);

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::Constant:
      if (a.value != b.value || a.name != b.name) return false;
      break;
    case NodeKind::Variable:
      if (a.variable != b.variable) return false;
      break;
    case NodeKind::Symbol:
    case NodeKind::Call:
      if (a.name != b.name) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

}  // namespace solitons
