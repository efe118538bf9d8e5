#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "fjq/expr.hpp"
#include "fjq/operator_entry.hpp"

namespace fjq {

enum class IndexKind { Internal, Spatial, Spacetime };

// Range of concrete values for an index kind.
std::vector<int> index_range(IndexKind k);
// Kind implied by an abstract index name; throws on unknown shapes.
IndexKind index_kind_of(const std::string& name);
bool is_index_name(const std::string& name);

struct FieldDecl {
  std::string name;
  bool has_internal = false;
  bool internal_up = true;
  bool variance_known = true;
  bool has_spatial = false;
};

struct ParseContext {
  std::set<std::string> params{"Lambda"};
  std::map<std::string, FieldDecl> fields;
};

struct IndexArg {
  std::string name;  // abstract name, empty when concrete or absent
  int value = -1;
  bool absent() const { return name.empty() && value < 0; }
  bool concrete() const { return name.empty() && value >= 0; }
};

struct FreeIndex {
  std::string name;
  IndexKind kind;
  int variance = 0;  // +1 up, -1 down, 0 unspecified
};

struct Node {
  enum Kind { Num, Param, Field, Tensor, Deriv, OpD, InvLap, Add, Mul, Neg, Div, Pow };
  Kind kind = Num;
  Rational num;
  std::string name;
  std::vector<IndexArg> idx;
  std::vector<std::shared_ptr<Node>> kids;
  int power = 1;
  int line = 1, column = 1;
  // Filled by analyze(): indices summed at this node and the free ones.
  std::vector<FreeIndex> dummies;
  std::vector<FreeIndex> frees;
  // For fields: which argument is internal / spatial.
  int internal_arg = -1, spatial_arg = -1;
  bool internal_up = true;
  bool variance_known = true;
};

using NodePtr = std::shared_ptr<Node>;
using Binding = std::map<std::string, int>;

NodePtr parse(const std::string& text, const ParseContext& ctx, int line = 1, int column = 1);

// Validates index structure (each dummy exactly twice, internal dummies once
// up and once down, equal free sets across sums). Returns the free indices in
// order of first appearance.
std::vector<FreeIndex> analyze(Node& n);

Expr expand_expr(const Node& n, const Binding& b = {});
OperatorEntry expand_op(const Node& n, const Binding& b = {});

// parse + analyze + expand. Throws if free indices are left unbound.
Expr parse_expr(const std::string& text, const ParseContext& ctx = {}, const Binding& b = {});
OperatorEntry parse_op(const std::string& text, const ParseContext& ctx = {}, const Binding& b = {});

// All bindings of the given free indices, first index outermost.
std::vector<Binding> enumerate_bindings(const std::vector<FreeIndex>& frees);

// Declaration such as e(I^,i), p(I_,0) or q.
struct VariableDecl {
  FieldDecl field;
  std::string internal_name;
  std::string spatial_name;  // abstract spatial/spacetime index, if any
  int spatial_value = -1;    // concrete spatial slot, if any
  std::vector<Symbol> components() const;
};
VariableDecl parse_declaration(const std::string& text, int line = 1, int column = 1);

}  // namespace fjq
