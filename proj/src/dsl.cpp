#include "tconn/dsl.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

#include "tconn/error.hpp"

namespace tconn::dsl {

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  Pos pos;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::Ident: return "identifier '" + t.text + "'";
    case Tok::Number: return "number " + t.text;
    case Tok::Punct: return "'" + t.text + "'";
    case Tok::End: return "end of input";
  }
  return {};
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < s.size(); ++k, ++i) {
      const auto c = static_cast<unsigned char>(s[i]);
      if (c == '\n') {
        ++line;
        col = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(s.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(s.substr(i, j - i));
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
        throw ParseError(Errc::ParseError, line, col, {"number"}, "malformed number '" + t.text + "'");
      advance(j - i);
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      t.kind = Tok::Punct;
      t.text = "->";
      advance(2);
    } else if (std::string_view("()[]{},;:=+-*/").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      advance(1);
    } else {
      std::size_t len = 1;
      const auto u = static_cast<unsigned char>(c);
      if (u >= 0xF0) len = 4;
      else if (u >= 0xE0) len = 3;
      else if (u >= 0xC0) len = 2;
      throw ParseError(Errc::ParseError, line, col, {}, "unexpected character '" + std::string(s.substr(i, len)) + "'");
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

Node node(NodeKind k, Pos p) {
  Node n;
  n.kind = k;
  n.pos = p;
  return n;
}

const std::vector<std::string> kKeywords = {"space", "map", "point", "curve", "bundle", "connection"};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  Ast program() {
    Ast ast;
    while (peek().kind != Tok::End) {
      ast.decls.push_back(decl());
      expect(";");
    }
    return ast;
  }

 private:
  std::vector<Token> toks_;
  std::size_t at_ = 0;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(at_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }
  bool is(const char* p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool accept(const char* p) {
    if (!is(p)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    throw ParseError(Errc::ParseError, t.pos.line, t.pos.column, std::move(expected), "unexpected " + describe(t));
  }
  const Token& expect(const char* p) {
    if (!is(p)) fail({std::string("'") + p + "'"});
    return next();
  }
  const Token& ident() {
    if (peek().kind != Tok::Ident) fail({"identifier"});
    return next();
  }

  Decl decl() {
    const Token& kw = peek();
    if (kw.kind != Tok::Ident ||
        std::find(kKeywords.begin(), kKeywords.end(), kw.text) == kKeywords.end()) {
      auto exp = kKeywords;
      exp.push_back("end of input");
      fail(exp);
    }
    Decl d;
    d.keyword = next().text;
    d.pos = kw.pos;
    d.name = ident().text;
    if (d.keyword == "map") {
      expect(":");
      d.dom = expr();
      expect("->");
      d.cod = expr();
      expect("=");
      d.value = is("(") ? tuple() : expr();
    } else if (d.keyword == "point") {
      expect(":");
      d.cod = expr();
      expect("=");
      d.value = tuple();
    } else if (d.keyword == "curve") {
      expect(":");
      Node iv = node(NodeKind::Interval, expect("[").pos);
      iv.args.push_back(expr());
      expect(",");
      iv.args.push_back(expr());
      expect("]");
      d.dom = make(std::move(iv));
      expect("->");
      d.cod = expr();
      expect("=");
      d.value = tuple();
    } else {
      expect("=");
      d.value = expr();
    }
    return d;
  }

  // "(" expr {"," expr} ")" kept as a tuple even with one item.
  NodePtr tuple() {
    Node t = node(NodeKind::Tuple, expect("(").pos);
    t.args = list(")");
    expect(")");
    return make(std::move(t));
  }

  std::vector<NodePtr> list(const char* close) {
    std::vector<NodePtr> out;
    if (is(close)) return out;
    out.push_back(expr());
    while (accept(",")) out.push_back(expr());
    if (!is(close)) fail({"','", std::string("'") + close + "'"});
    return out;
  }

  NodePtr expr() {
    auto lhs = term();
    while (is("+") || is("-")) {
      Node b = node(NodeKind::Binary, lhs->pos);
      b.op = next().text[0];
      b.args = {lhs, term()};
      lhs = make(std::move(b));
    }
    return lhs;
  }

  NodePtr term() {
    auto lhs = unary();
    while (is("*") || is("/")) {
      Node b = node(NodeKind::Binary, lhs->pos);
      b.op = next().text[0];
      b.args = {lhs, unary()};
      lhs = make(std::move(b));
    }
    return lhs;
  }

  NodePtr unary() {
    if (is("-")) {
      Node n = node(NodeKind::Neg, next().pos);
      n.args = {unary()};
      return make(std::move(n));
    }
    return primary();
  }

  NodePtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      Node n = node(NodeKind::Number, t.pos);
      n.number = t.number;
      return make(std::move(n));
    }
    if (is("(")) {
      Pos p = next().pos;
      auto items = list(")");
      expect(")");
      if (items.size() == 1) return items[0];
      Node tup = node(NodeKind::Tuple, p);
      tup.args = std::move(items);
      return make(std::move(tup));
    }
    if (t.kind != Tok::Ident) fail({"number", "identifier", "'('", "'-'"});
    next();
    if (t.text == "x" && is("[")) {
      next();
      const Token& k = peek();
      if (k.kind != Tok::Number || k.number != std::floor(k.number) || k.text.find_first_of(".eE") != std::string::npos)
        fail({"component index"});
      next();
      expect("]");
      Node n = node(NodeKind::Var, t.pos);
      n.index = static_cast<int>(k.number);
      return make(std::move(n));
    }
    if (!is("(")) {
      Node n = node(NodeKind::Name, t.pos);
      n.name = t.text;
      return make(std::move(n));
    }
    next();
    Node call = node(NodeKind::Call, t.pos);
    call.name = t.text;
    call.args = list(")");
    expect(")");
    if (is("{")) call.block = block();
    return make(std::move(call));
  }

  std::vector<Field> block() {
    expect("{");
    std::vector<Field> out;
    while (!is("}")) {
      if (peek().kind != Tok::Ident) fail({"identifier", "'}'"});
      Field f;
      f.pos = peek().pos;
      f.key = next().text;
      if (is(":") || is("=")) f.sep = next().text[0];
      else fail({"':'", "'='"});
      // Either a parenthesized list or a bare comma list.
      auto first = expr();
      if (first->kind == NodeKind::Tuple && !is(",")) {
        f.values = first->args;
      } else {
        f.values.push_back(first);
        while (accept(",")) f.values.push_back(expr());
      }
      expect(";");
      out.push_back(std::move(f));
    }
    expect("}");
    return out;
  }
};

int precedence(const Node& n) {
  if (n.kind == NodeKind::Binary) return (n.op == '+' || n.op == '-') ? 1 : 2;
  if (n.kind == NodeKind::Neg) return 3;
  return 4;
}

std::string print_at(const Node& n, int min_prec);

std::string join(const std::vector<NodePtr>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += print_at(*xs[i], 0);
  }
  return s;
}

std::string print_at(const Node& n, int min_prec) {
  std::string s;
  switch (n.kind) {
    case NodeKind::Number: s = format_number(n.number); break;
    case NodeKind::Var: s = "x[" + std::to_string(n.index) + "]"; break;
    case NodeKind::Name: s = n.name; break;
    case NodeKind::Neg: s = "-" + print_at(*n.args[0], 3); break;
    case NodeKind::Binary: {
      const int p = precedence(n);
      s = print_at(*n.args[0], p) + " " + n.op + " " + print_at(*n.args[1], p + 1);
      break;
    }
    case NodeKind::Call:
      s = n.name + "(" + join(n.args) + ")";
      if (n.block) {
        s += " {";
        for (const auto& f : *n.block) {
          s += " " + f.key + (f.sep == ':' ? ": " + join(f.values) : " = (" + join(f.values) + ")") + ";";
        }
        s += " }";
      }
      break;
    case NodeKind::Tuple: s = "(" + join(n.args) + ")"; break;
    case NodeKind::Interval: s = "[" + join(n.args) + "]"; break;
  }
  if (precedence(n) < min_prec) s = "(" + s + ")";
  return s;
}

bool equal_ptr(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal_list(const std::vector<NodePtr>& a, const std::vector<NodePtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(*a[i], *b[i])) return false;
  return true;
}

}  // namespace

Ast parse(std::string_view text) { return Parser(text).program(); }

std::string print(const Node& n) { return print_at(n, 0); }

std::string print(const Ast& ast) {
  std::string out;
  for (const auto& d : ast.decls) {
    out += d.keyword + " " + d.name;
    if (d.keyword == "map") out += " : " + print(*d.dom) + " -> " + print(*d.cod);
    if (d.keyword == "point") out += " : " + print(*d.cod);
    if (d.keyword == "curve") out += " : " + print(*d.dom) + " -> " + print(*d.cod);
    out += " = " + print(*d.value) + ";\n";
  }
  return out;
}

bool equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.number != b.number || a.index != b.index || a.name != b.name || a.op != b.op ||
      !equal_list(a.args, b.args) || a.block.has_value() != b.block.has_value())
    return false;
  if (a.block) {
    if (a.block->size() != b.block->size()) return false;
    for (std::size_t i = 0; i < a.block->size(); ++i) {
      const auto &fa = (*a.block)[i], &fb = (*b.block)[i];
      if (fa.key != fb.key || fa.sep != fb.sep || !equal_list(fa.values, fb.values)) return false;
    }
  }
  return true;
}

bool equal(const Ast& a, const Ast& b) {
  if (a.decls.size() != b.decls.size()) return false;
  for (std::size_t i = 0; i < a.decls.size(); ++i) {
    const auto &x = a.decls[i], &y = b.decls[i];
    if (x.keyword != y.keyword || x.name != y.name || !equal_ptr(x.dom, y.dom) || !equal_ptr(x.cod, y.cod) ||
        !equal_ptr(x.value, y.value))
      return false;
  }
  return true;
}

// ---- elaboration ----

const DifferentialBundle& ConnectionValue::bundle() const {
  return vertical ? vertical->bundle : horizontal->bundle;
}

std::optional<Connection> ConnectionValue::full() const {
  if (!vertical || !horizontal) return std::nullopt;
  return Connection{*vertical, *horizontal};
}

class Elaborator {
 public:
  explicit Elaborator(Program& p) : p_(p) {}

  void run() {
    for (const auto& d : p_.ast_.decls) {
      if (p_.kind_of(d.name))
        throw ParseError(Errc::ParseError, d.pos.line, d.pos.column, {}, "'" + d.name + "' is already defined");
      try {
        declare(d);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.code(), d.pos.line, d.pos.column, {}, std::string(e.what()));
      }
      p_.order_.emplace_back(d.keyword, d.name);
    }
  }

 private:
  Program& p_;

  [[noreturn]] static void fail(const Node& n, Errc code, const std::string& msg,
                                std::vector<std::string> expected = {}) {
    throw ParseError(code, n.pos.line, n.pos.column, std::move(expected), msg);
  }

  static void arity(const Node& n, std::size_t k) {
    if (n.args.size() != k)
      fail(n, Errc::ArityMismatch,
           n.name + " takes " + std::to_string(k) + " argument" + (k == 1 ? "" : "s") + ", got " +
               std::to_string(n.args.size()));
  }

  static void no_block(const Node& n) {
    if (n.block) fail(n, Errc::ParseError, n.name + " does not take a block");
  }

  // Constant real expressions: numbers, pi, arithmetic and the unary functions.
  static double constant(const Node& n) {
    auto e = to_expr(n, 0);
    return expr_map(0, {e})(std::vector<double>{})[0];
  }

  static long integer(const Node& n) {
    double v = 0.0;
    if (n.kind == NodeKind::Number) v = n.number;
    else if (n.kind == NodeKind::Neg && n.args[0]->kind == NodeKind::Number) v = -n.args[0]->number;
    else fail(n, Errc::ParseError, "expected an integer literal", {"integer"});
    if (v != std::floor(v) || std::abs(v) > 1e6) fail(n, Errc::ParseError, "expected an integer literal", {"integer"});
    return static_cast<long>(v);
  }

  static std::size_t dimension(const Node& n) {
    long v = integer(n);
    if (v < 0) fail(n, Errc::ParseError, "dimension must be non-negative");
    return static_cast<std::size_t>(v);
  }

  static ExprPtr to_expr(const Node& n, std::size_t in_dim) {
    switch (n.kind) {
      case NodeKind::Number: return ex::constant(n.number);
      case NodeKind::Var:
        if (static_cast<std::size_t>(n.index) >= in_dim)
          fail(n, Errc::ArityMismatch,
               "component index x[" + std::to_string(n.index) + "] out of range for input dimension " +
                   std::to_string(in_dim));
        return ex::var(n.index);
      case NodeKind::Name:
        if (n.name == "pi") return ex::constant(std::numbers::pi);
        fail(n, Errc::UnknownIdentifier, "unknown identifier '" + n.name + "' in expression");
      case NodeKind::Neg: return ex::neg(to_expr(*n.args[0], in_dim));
      case NodeKind::Binary: {
        auto a = to_expr(*n.args[0], in_dim), b = to_expr(*n.args[1], in_dim);
        switch (n.op) {
          case '+': return ex::add(a, b);
          case '-': return ex::sub(a, b);
          case '*': return ex::mul(a, b);
          default: return ex::div(a, b);
        }
      }
      case NodeKind::Call: {
        no_block(n);
        auto unary = [&](ExprPtr (*f)(ExprPtr)) {
          arity(n, 1);
          return f(to_expr(*n.args[0], in_dim));
        };
        if (n.name == "sin") return unary(ex::sin);
        if (n.name == "cos") return unary(ex::cos);
        if (n.name == "exp") return unary(ex::exp);
        if (n.name == "sqrt") return unary(ex::sqrt);
        if (n.name == "pow") {
          arity(n, 2);
          return ex::pow(to_expr(*n.args[0], in_dim), static_cast<int>(integer(*n.args[1])));
        }
        if (n.name == "dot") {
          arity(n, 2);
          return ex::dot(to_expr(*n.args[0], in_dim), to_expr(*n.args[1], in_dim));
        }
        if (n.name == "vec") {
          std::vector<ExprPtr> items;
          for (const auto& a : n.args) items.push_back(to_expr(*a, in_dim));
          return ex::vec(std::move(items));
        }
        fail(n, Errc::UnknownIdentifier, "unknown function '" + n.name + "'",
             {"sin", "cos", "exp", "sqrt", "pow", "dot", "vec"});
      }
      default: fail(n, Errc::ParseError, "expected a scalar expression");
    }
  }

  static std::vector<ExprPtr> to_exprs(const std::vector<NodePtr>& xs, std::size_t in_dim) {
    std::vector<ExprPtr> out;
    for (const auto& x : xs) out.push_back(to_expr(*x, in_dim));
    return out;
  }

  const Field& field(const Node& n, const std::string& key) const {
    if (n.block)
      for (const auto& f : *n.block)
        if (f.key == key) return f;
    fail(n, Errc::ParseError, n.name + " needs a '" + key + "' field", {key});
  }

  static void only_fields(const Node& n, std::set<std::string> keys) {
    if (!n.block) return;
    for (const auto& f : *n.block)
      if (!keys.count(f.key)) {
        std::vector<std::string> exp(keys.begin(), keys.end());
        throw ParseError(Errc::ParseError, f.pos.line, f.pos.column, exp, "unknown field '" + f.key + "'");
      }
  }

  template <class M>
  const typename M::mapped_type& lookup(const M& table, const Node& n, const char* what) const {
    if (n.kind != NodeKind::Name) fail(n, Errc::ParseError, std::string("expected a ") + what + " name", {what});
    auto it = table.find(n.name);
    if (it == table.end()) {
      auto k = p_.kind_of(n.name);
      fail(n, Errc::UnknownIdentifier,
           k ? "'" + n.name + "' is a " + *k + ", not a " + what : "unknown " + std::string(what) + " '" + n.name + "'");
    }
    return it->second;
  }

  SpacePtr space(const Node& n) const {
    if (n.kind == NodeKind::Name) return lookup(p_.spaces_, n, "space");
    if (n.kind != NodeKind::Call) fail(n, Errc::ParseError, "expected a space", {"space"});
    if (n.name == "R") {
      no_block(n);
      arity(n, 1);
      return euclidean(dimension(*n.args[0]));
    }
    if (n.name == "T") {
      no_block(n);
      arity(n, 1);
      return tangent_space(space(*n.args[0]), 1);
    }
    if (n.name == "sphere") {
      no_block(n);
      arity(n, 1);
      return sphere(dimension(*n.args[0]));
    }
    if (n.name == "submanifold") {
      arity(n, 1);
      only_fields(n, {"constraint", "retraction"});
      const std::size_t d = dimension(*n.args[0]);
      const auto& c = field(n, "constraint");
      const auto& r = field(n, "retraction");
      if (r.values.size() != 1) fail(n, Errc::ArityMismatch, "retraction takes one map");
      auto ret = map(*r.values[0]);
      if (ret.in_dim() != d || ret.out_dim() != d)
        fail(*r.values[0], Errc::DimensionMismatch, "retraction must map R(" + std::to_string(d) + ") to itself");
      return submanifold(d, expr_map(d, to_exprs(c.values, d)), ret, "submanifold");
    }
    fail(n, Errc::UnknownIdentifier, "unknown space constructor '" + n.name + "'", {"R", "T", "sphere", "submanifold"});
  }

  SmoothMap map(const Node& n) const {
    if (n.kind == NodeKind::Name) return lookup(p_.maps_, n, "map").map;
    if (n.kind != NodeKind::Call) fail(n, Errc::ParseError, "expected a map", {"map"});
    no_block(n);
    if (n.name == "identity") {
      arity(n, 1);
      return identity_map(dimension(*n.args[0]));
    }
    if (n.name == "normalize") {
      arity(n, 1);
      return normalize_map(dimension(*n.args[0]));
    }
    if (n.name == "proj") {
      arity(n, 3);
      auto total = dimension(*n.args[0]), off = dimension(*n.args[1]), len = dimension(*n.args[2]);
      if (off + len > total) fail(n, Errc::DimensionMismatch, "projection runs past the input");
      return projection(total, off, len);
    }
    if (n.name == "tangent") {
      arity(n, 1);
      return tangent(map(*n.args[0]));
    }
    if (n.name == "compose" || n.name == "pair") {
      if (n.args.empty()) fail(n, Errc::ArityMismatch, n.name + " needs at least one map");
      std::vector<SmoothMap> fs;
      for (const auto& a : n.args) fs.push_back(map(*a));
      if (n.name == "pair") {
        for (std::size_t i = 1; i < fs.size(); ++i)
          if (fs[i].in_dim() != fs[0].in_dim()) fail(*n.args[i], Errc::DimensionMismatch, "pair: sources differ");
        return pair(fs);
      }
      SmoothMap out = fs[0];
      for (std::size_t i = 1; i < fs.size(); ++i) {
        if (out.out_dim() != fs[i].in_dim()) fail(*n.args[i], Errc::DimensionMismatch, "compose: dimensions differ");
        out = compose(out, fs[i]);
      }
      return out;
    }
    fail(n, Errc::UnknownIdentifier, "unknown map constructor '" + n.name + "'",
         {"identity", "normalize", "proj", "tangent", "compose", "pair"});
  }

  DifferentialBundle bundle(const Node& n) const {
    if (n.kind == NodeKind::Name) return lookup(p_.bundles_, n, "bundle");
    if (n.kind != NodeKind::Call) fail(n, Errc::ParseError, "expected a bundle", {"bundle"});
    no_block(n);
    if (n.name == "tangent") {
      arity(n, 1);
      return tangent_bundle(space(*n.args[0]));
    }
    if (n.name == "t") {
      arity(n, 1);
      return t_of_bundle(bundle(*n.args[0]));
    }
    if (n.name == "pullback") {
      arity(n, 2);
      const auto& f = lookup(p_.maps_, *n.args[0], "map");
      return pullback_bundle(f.map, f.dom, bundle(*n.args[1]));
    }
    if (n.name == "whitney") {
      arity(n, 2);
      return whitney_sum(bundle(*n.args[0]), bundle(*n.args[1]));
    }
    if (n.name == "finsler") {
      arity(n, 1);
      return finsler_bundle(bundle(*n.args[0]));
    }
    if (n.name == "diffobj") {
      arity(n, 1);
      return differential_object(dimension(*n.args[0]));
    }
    if (n.name == "trivial") {
      arity(n, 2);
      return trivial_bundle(dimension(*n.args[0]), space(*n.args[1]));
    }
    fail(n, Errc::UnknownIdentifier, "unknown bundle constructor '" + n.name + "'",
         {"tangent", "t", "pullback", "whitney", "finsler", "diffobj", "trivial"});
  }

  ConnectionValue connection(const Node& n) const {
    if (n.kind == NodeKind::Name) return lookup(p_.connections_, n, "connection");
    if (n.kind != NodeKind::Call) fail(n, Errc::ParseError, "expected a connection", {"connection"});
    if (n.name != "christoffel") no_block(n);
    auto full = [](const Connection& c) { return ConnectionValue{c.vertical, c.horizontal}; };
    auto need_v = [&](const ConnectionValue& c, const Node& at) -> const VerticalConnection& {
      if (!c.vertical) fail(at, Errc::PreconditionFailed, "connection has no vertical part");
      return *c.vertical;
    };
    auto need_h = [&](const ConnectionValue& c, const Node& at) -> const HorizontalConnection& {
      if (!c.horizontal) fail(at, Errc::PreconditionFailed, "connection has no horizontal part");
      return *c.horizontal;
    };
    if (n.name == "sphere") {
      arity(n, 1);
      return full(sphere_connection(dimension(*n.args[0])));
    }
    if (n.name == "flat") {
      arity(n, 1);
      return full(canonical_affine_connection(dimension(*n.args[0])));
    }
    if (n.name == "diffobj") {
      arity(n, 1);
      return full(canonical_connection_diff_object(dimension(*n.args[0])));
    }
    if (n.name == "christoffel") {
      arity(n, 1);
      only_fields(n, {"psi"});
      auto m = space(*n.args[0]);
      if (m->kind != SpaceKind::Euclidean || m->tangent_order != 0)
        fail(*n.args[0], Errc::PreconditionFailed, "christoffel needs a Euclidean base R(n)");
      const auto& psi = field(n, "psi");
      const std::size_t d = m->dim;
      if (psi.values.size() != d * d * d)
        throw ParseError(Errc::ArityMismatch, psi.pos.line, psi.pos.column, {},
                         "psi needs " + std::to_string(d * d * d) + " entries, got " +
                             std::to_string(psi.values.size()));
      return {christoffel_vertical(christoffel_data(d, to_exprs(psi.values, d))), std::nullopt};
    }
    if (n.name == "vertical" || n.name == "horizontal") {
      arity(n, 2);
      auto b = bundle(*n.args[0]);
      auto f = map(*n.args[1]);
      const bool v = n.name == "vertical";
      const std::size_t in = v ? b.TE->dim : b.TM_x_E->dim, out = v ? b.dE() : b.TE->dim;
      if (f.in_dim() != in || f.out_dim() != out)
        fail(*n.args[1], Errc::DimensionMismatch,
             n.name + " map must go from R(" + std::to_string(in) + ") to R(" + std::to_string(out) + ")");
      if (v) return {VerticalConnection{b, f}, std::nullopt};
      return {std::nullopt, HorizontalConnection{b, f}};
    }
    if (n.name == "pair") {
      arity(n, 2);
      auto k = connection(*n.args[0]), h = connection(*n.args[1]);
      return {need_v(k, *n.args[0]), need_h(h, *n.args[1])};
    }
    if (n.name == "derive_h") {
      arity(n, 2);
      auto k = connection(*n.args[0]), j = connection(*n.args[1]);
      return {std::nullopt, horizontal_from_vertical(need_v(k, *n.args[0]), need_h(j, *n.args[1])).horizontal};
    }
    if (n.name == "derive_k") {
      arity(n, 1);
      auto h = connection(*n.args[0]);
      return {vertical_from_horizontal(need_h(h, *n.args[0])).vertical, std::nullopt};
    }
    if (n.name == "t") {
      arity(n, 1);
      auto c = connection(*n.args[0]);
      ConnectionValue out;
      if (c.vertical) out.vertical = t_of_vertical(*c.vertical);
      if (c.horizontal) out.horizontal = t_of_horizontal(*c.horizontal);
      return out;
    }
    if (n.name == "pullback") {
      arity(n, 2);
      const auto& f = lookup(p_.maps_, *n.args[0], "map");
      auto c = connection(*n.args[1]);
      ConnectionValue out;
      if (c.vertical) out.vertical = pullback_vertical(f.map, f.dom, *c.vertical);
      if (c.horizontal) out.horizontal = pullback_horizontal(f.map, f.dom, *c.horizontal);
      return out;
    }
    if (n.name == "retract") {
      arity(n, 2);
      auto c = connection(*n.args[0]);
      auto sub = space(*n.args[1]);
      if (!sub->retraction) fail(*n.args[1], Errc::PreconditionFailed, "retract needs a space with a retraction");
      auto s = identity_map(sub->dim);
      ConnectionValue out;
      if (c.vertical) out.vertical = retract_affine(*c.vertical, sub, s, *sub->retraction);
      if (c.horizontal) out.horizontal = retract_affine_horizontal(*c.horizontal, sub, s, *sub->retraction);
      return out;
    }
    fail(n, Errc::UnknownIdentifier, "unknown connection constructor '" + n.name + "'",
         {"sphere", "flat", "diffobj", "christoffel", "vertical", "horizontal", "pair", "derive_h", "derive_k", "t",
          "pullback", "retract"});
  }

  void declare(const Decl& d) {
    if (d.keyword == "space") {
      auto s = std::make_shared<Space>(*space(*d.value));
      s->name = d.name;
      p_.spaces_[d.name] = s;
    } else if (d.keyword == "map") {
      auto dom = space(*d.dom), cod = space(*d.cod);
      SmoothMap f;
      if (d.value->kind == NodeKind::Tuple) {
        if (d.value->args.size() != cod->dim)
          fail(*d.value, Errc::ArityMismatch,
               "map body has " + std::to_string(d.value->args.size()) + " components, target " + cod->name +
                   " needs " + std::to_string(cod->dim));
        f = expr_map(dom->dim, to_exprs(d.value->args, dom->dim), d.name);
      } else {
        f = map(*d.value).named(d.name);
        if (f.in_dim() != dom->dim || f.out_dim() != cod->dim)
          fail(*d.value, Errc::DimensionMismatch,
               "map goes R(" + std::to_string(f.in_dim()) + ") -> R(" + std::to_string(f.out_dim()) +
                   "), declared " + dom->name + " -> " + cod->name);
      }
      p_.maps_[d.name] = {f, dom, cod};
    } else if (d.keyword == "point") {
      auto s = space(*d.cod);
      if (d.value->args.size() != s->dim)
        fail(*d.value, Errc::ArityMismatch,
             "point has " + std::to_string(d.value->args.size()) + " coordinates, " + s->name + " needs " +
                 std::to_string(s->dim));
      std::vector<double> xs;
      for (const auto& a : d.value->args) xs.push_back(constant(*a));
      auto r = constraint_residual(*s, xs);
      if (!(r.residual <= 1e-9))
        fail(*d.value, Errc::ConstraintViolation,
             "point is not on " + s->name + " (residual " + format_number(r.residual) + ")");
      p_.points_[d.name] = {s, xs};
    } else if (d.keyword == "curve") {
      auto s = space(*d.cod);
      const double a = constant(*d.dom->args[0]), b = constant(*d.dom->args[1]);
      if (!(a <= 0.0 && 0.0 <= b && a < b)) fail(*d.dom, Errc::Config, "curve interval must satisfy a <= 0 <= b, a < b");
      if (d.value->args.size() != s->dim)
        fail(*d.value, Errc::ArityMismatch,
             "curve has " + std::to_string(d.value->args.size()) + " components, " + s->name + " needs " +
                 std::to_string(s->dim));
      auto f = expr_map(1, to_exprs(d.value->args, 1), d.name);
      for (int k = 0; k <= 16; ++k) {
        std::vector<double> t{a + (b - a) * k / 16.0};
        auto r = constraint_residual(*s, f(t));
        if (!(r.residual <= 1e-9))
          fail(*d.value, Errc::ConstraintViolation,
               "curve leaves " + s->name + " at t = " + format_number(t[0]) + " (residual " +
                   format_number(r.residual) + ")");
      }
      p_.curves_[d.name] = {f, curve_object(a, b), s};
    } else if (d.keyword == "bundle") {
      auto b = bundle(*d.value);
      b.name = d.name;
      p_.bundles_[d.name] = b;
    } else {
      p_.connections_[d.name] = connection(*d.value);
    }
  }
};

Program Program::from_ast(Ast ast) {
  Program p;
  p.ast_ = std::move(ast);
  Elaborator(p).run();
  return p;
}

Program Program::from_text(std::string_view text) { return from_ast(parse(text)); }

std::optional<std::string> Program::kind_of(const std::string& name) const {
  if (spaces_.count(name)) return "space";
  if (maps_.count(name)) return "map";
  if (points_.count(name)) return "point";
  if (curves_.count(name)) return "curve";
  if (bundles_.count(name)) return "bundle";
  if (connections_.count(name)) return "connection";
  return std::nullopt;
}

namespace {

template <class M>
const typename M::mapped_type& find(const M& table, const std::string& name, const char* what) {
  auto it = table.find(name);
  if (it == table.end()) throw Error(Errc::UnknownIdentifier, std::string("no ") + what + " named '" + name + "'");
  return it->second;
}

}  // namespace

const SpacePtr& Program::space(const std::string& name) const { return find(spaces_, name, "space"); }
const MapValue& Program::map(const std::string& name) const { return find(maps_, name, "map"); }
const PointValue& Program::point(const std::string& name) const { return find(points_, name, "point"); }
const CurveValue& Program::curve(const std::string& name) const { return find(curves_, name, "curve"); }
const DifferentialBundle& Program::bundle(const std::string& name) const { return find(bundles_, name, "bundle"); }
const ConnectionValue& Program::connection(const std::string& name) const {
  return find(connections_, name, "connection");
}

}  // namespace tconn::dsl
