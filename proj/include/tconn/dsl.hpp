#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tconn/connection.hpp"
#include "tconn/transport.hpp"

namespace tconn::dsl {

struct Pos {
  int line = 1;
  int column = 1;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class NodeKind { Number, Var, Name, Neg, Binary, Call, Tuple, Interval };

// `key: a, b;` or `key = (a, b);` inside a block following a call.
struct Field {
  std::string key;
  char sep = ':';
  std::vector<NodePtr> values;
  Pos pos;
};

struct Node {
  NodeKind kind = NodeKind::Number;
  Pos pos;
  double number = 0.0;
  int index = 0;          // x[index]
  std::string name;       // Name, Call
  char op = 0;            // Binary
  std::vector<NodePtr> args;
  std::optional<std::vector<Field>> block;
};

struct Decl {
  std::string keyword;  // space, map, point, curve, bundle, connection
  std::string name;
  Pos pos;
  NodePtr dom;  // map source or curve interval
  NodePtr cod;  // map, point and curve target space
  NodePtr value;
};

struct Ast {
  std::vector<Decl> decls;
};

Ast parse(std::string_view text);
std::string print(const Ast& ast);
std::string print(const Node& n);
// Structural equality; positions are ignored.
bool equal(const Ast& a, const Ast& b);
bool equal(const Node& a, const Node& b);

struct MapValue {
  SmoothMap map;
  SpacePtr dom, cod;
};

struct PointValue {
  SpacePtr space;
  std::vector<double> coords;
};

struct CurveValue {
  SmoothMap map;
  CurveObject interval;
  SpacePtr space;
};

// Vertical part, horizontal part, or both.
struct ConnectionValue {
  std::optional<VerticalConnection> vertical;
  std::optional<HorizontalConnection> horizontal;
  const DifferentialBundle& bundle() const;
  std::optional<Connection> full() const;
};

class Program {
 public:
  static Program from_text(std::string_view text);
  static Program from_ast(Ast ast);

  const Ast& ast() const { return ast_; }
  // (keyword, name) in declaration order.
  const std::vector<std::pair<std::string, std::string>>& names() const { return order_; }
  std::optional<std::string> kind_of(const std::string& name) const;

  const SpacePtr& space(const std::string& name) const;
  const MapValue& map(const std::string& name) const;
  const PointValue& point(const std::string& name) const;
  const CurveValue& curve(const std::string& name) const;
  const DifferentialBundle& bundle(const std::string& name) const;
  const ConnectionValue& connection(const std::string& name) const;

 private:
  friend class Elaborator;
  Ast ast_;
  std::vector<std::pair<std::string, std::string>> order_;
  std::map<std::string, SpacePtr> spaces_;
  std::map<std::string, MapValue> maps_;
  std::map<std::string, PointValue> points_;
  std::map<std::string, CurveValue> curves_;
  std::map<std::string, DifferentialBundle> bundles_;
  std::map<std::string, ConnectionValue> connections_;
};

}  // namespace tconn::dsl
