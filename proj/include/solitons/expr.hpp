#pragma once

// Expression DSL for metric components, potentials and vector fields.
// Grammar (see docs/dsl.md):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' args ')' | '(' expr ')'

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "solitons/jet.hpp"

namespace solitons {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation failure (domain error, unbound symbol) with the source span of
/// the failing subexpression and the evaluation point.
class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& message, std::size_t begin, std::size_t end)
      : std::runtime_error(message), begin_(begin), end_(end) {}
  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }

 private:
  std::size_t begin_, end_;
};

enum class NodeKind { Constant, Variable, Symbol, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Builtin { None, Sin, Cos, Exp, Log, Sqrt };

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;         // Constant
  int variable = -1;          // Variable: coordinate index
  std::string name;           // Symbol / Call name / "pi" for the builtin constant
  Builtin builtin = Builtin::None;
  std::vector<std::shared_ptr<const Node>> args;  // operands or call arguments
  std::size_t begin = 0, end = 0;                 // source span
};

using NodePtr = std::shared_ptr<const Node>;

struct ParseOptions {
  std::vector<std::string> coords;
  /// Extra bound names accepted as identifiers (integrand DSL).
  std::vector<std::string> symbols;
  /// Extra functions with their arity (integrand DSL).
  std::map<std::string, int> functions;
};

class Expr {
 public:
  Expr() = default;

  static Expr parse(const std::string& src, const std::vector<std::string>& coords);
  static Expr parse(const std::string& src, const ParseOptions& options);
  static Expr constant(double v, int n_coords);

  const Node& root() const { return *root_; }
  const std::string& source() const { return source_; }
  int n_coords() const { return n_coords_; }
  bool empty() const { return root_ == nullptr; }

  /// Fully parenthesised canonical form; reparses to a structurally equal AST.
  std::string to_string(const std::vector<std::string>& coords) const;

  /// True if the expression references no coordinate or symbol.
  bool is_constant() const;

  /// Jet of the expression at x (x.size() == number of coordinates).
  template <int K>
  Jet<K> eval_jet(std::span<const double> x) const;

  double eval(std::span<const double> x) const;

 private:
  NodePtr root_;
  std::string source_;
  int n_coords_ = 0;
};

bool structurally_equal(const Node& a, const Node& b);

/// Jets bound to Symbol nodes by name.
template <int K>
using JetBindings = std::map<std::string, Jet<K>, std::less<>>;

/// Jet of a subtree at x with symbols resolved from `symbols`.
template <int K>
Jet<K> eval_jet(const Node& node, std::span<const double> x, const JetBindings<K>& symbols);

std::string builtin_name(Builtin b);

extern template Jet<1> Expr::eval_jet<1>(std::span<const double>) const;
extern template Jet<2> Expr::eval_jet<2>(std::span<const double>) const;
extern template Jet<3> Expr::eval_jet<3>(std::span<const double>) const;
extern template Jet<4> Expr::eval_jet<4>(std::span<const double>) const;
extern template Jet<3> eval_jet<3>(const Node&, std::span<const double>, const JetBindings<3>&);
extern template Jet<4> eval_jet<4>(const Node&, std::span<const double>, const JetBindings<4>&);

}  // namespace solitons
