#include "tconn/expr.hpp"

#include <charconv>
#include <cmath>

#include "tconn/error.hpp"

namespace tconn {

namespace {

ExprPtr make(Op op, std::vector<ExprPtr> args, std::size_t width) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = std::move(args);
  e->width = width;
  return e;
}

ExprPtr scalar_fn(Op op, ExprPtr a, const char* name) {
  if (a->width != 1)
    throw Error(Errc::DimensionMismatch, std::string(name) + " expects a scalar argument");
  return make(op, {std::move(a)}, 1);
}

}  // namespace

namespace ex {

ExprPtr constant(double v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Const;
  e->value = v;
  return e;
}

ExprPtr var(int i) {
  if (i < 0) throw Error(Errc::ArityMismatch, "negative component index");
  auto e = std::make_shared<Expr>();
  e->op = Op::Var;
  e->index = i;
  return e;
}

ExprPtr neg(ExprPtr a) {
  std::size_t w = a->width;
  return make(Op::Neg, {std::move(a)}, w);
}

ExprPtr add(ExprPtr a, ExprPtr b) {
  if (a->width != b->width) throw Error(Errc::DimensionMismatch, "'+' on vectors of different length");
  std::size_t w = a->width;
  return make(Op::Add, {std::move(a), std::move(b)}, w);
}

ExprPtr sub(ExprPtr a, ExprPtr b) {
  if (a->width != b->width) throw Error(Errc::DimensionMismatch, "'-' on vectors of different length");
  std::size_t w = a->width;
  return make(Op::Sub, {std::move(a), std::move(b)}, w);
}

ExprPtr mul(ExprPtr a, ExprPtr b) {
  if (a->width != 1 && b->width != 1)
    throw Error(Errc::DimensionMismatch, "'*' needs a scalar factor; use dot for vectors");
  std::size_t w = std::max(a->width, b->width);
  return make(Op::Mul, {std::move(a), std::move(b)}, w);
}

ExprPtr div(ExprPtr a, ExprPtr b) {
  if (b->width != 1) throw Error(Errc::DimensionMismatch, "'/' needs a scalar denominator");
  std::size_t w = a->width;
  return make(Op::Div, {std::move(a), std::move(b)}, w);
}

ExprPtr sin(ExprPtr a) { return scalar_fn(Op::Sin, std::move(a), "sin"); }
ExprPtr cos(ExprPtr a) { return scalar_fn(Op::Cos, std::move(a), "cos"); }
ExprPtr exp(ExprPtr a) { return scalar_fn(Op::Exp, std::move(a), "exp"); }
ExprPtr sqrt(ExprPtr a) { return scalar_fn(Op::Sqrt, std::move(a), "sqrt"); }

ExprPtr pow(ExprPtr a, int k) {
  auto e = std::make_shared<Expr>(*scalar_fn(Op::Pow, std::move(a), "pow"));
  e->index = k;
  return e;
}

ExprPtr vec(std::vector<ExprPtr> items) {
  std::size_t w = 0;
  for (const auto& i : items) w += i->width;
  return make(Op::Vec, std::move(items), w);
}

ExprPtr dot(ExprPtr a, ExprPtr b) {
  if (a->width != b->width) throw Error(Errc::DimensionMismatch, "dot of vectors of different length");
  return make(Op::Dot, {std::move(a), std::move(b)}, 1);
}

}  // namespace ex

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_string(const Expr& e) {
  auto bin = [&](const char* op) {
    return "(" + to_string(*e.args[0]) + " " + op + " " + to_string(*e.args[1]) + ")";
  };
  auto fn = [&](const char* name) { return std::string(name) + "(" + to_string(*e.args[0]) + ")"; };
  switch (e.op) {
    case Op::Const: return format_number(e.value);
    case Op::Var: return "x[" + std::to_string(e.index) + "]";
    case Op::Neg: return "(-" + to_string(*e.args[0]) + ")";
    case Op::Add: return bin("+");
    case Op::Sub: return bin("-");
    case Op::Mul: return bin("*");
    case Op::Div: return bin("/");
    case Op::Sin: return fn("sin");
    case Op::Cos: return fn("cos");
    case Op::Exp: return fn("exp");
    case Op::Sqrt: return fn("sqrt");
    case Op::Pow: return "pow(" + to_string(*e.args[0]) + ", " + std::to_string(e.index) + ")";
    case Op::Dot: return "dot(" + to_string(*e.args[0]) + ", " + to_string(*e.args[1]) + ")";
    case Op::Vec: {
      std::string s = "[";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(*e.args[i]);
      }
      return s + "]";
    }
  }
  return "?";
}

bool equal(const Expr& a, const Expr& b) {
  if (a.op != b.op || a.args.size() != b.args.size() || a.width != b.width) return false;
  if (a.op == Op::Const && !(a.value == b.value || (std::isnan(a.value) && std::isnan(b.value))))
    return false;
  if ((a.op == Op::Var || a.op == Op::Pow) && a.index != b.index) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(*a.args[i], *b.args[i])) return false;
  return true;
}

int max_var(const Expr& e) {
  int m = e.op == Op::Var ? e.index : -1;
  for (const auto& a : e.args) m = std::max(m, max_var(*a));
  return m;
}

ExprPtr shift_vars(const ExprPtr& e, int offset) {
  if (e->op == Op::Var) return ex::var(e->index + offset);
  if (e->args.empty()) return e;
  auto copy = std::make_shared<Expr>(*e);
  for (auto& a : copy->args) a = shift_vars(a, offset);
  return copy;
}

namespace {

[[noreturn]] void domain_fail(const Expr& node, const std::string& why) {
  throw Error(Errc::DomainError, why + " in " + to_string(node));
}

void eval_into(const Expr& e, std::span<const Jet> x, int depth, std::vector<Jet>& out) {
  auto one = [&](const Expr& sub) {
    std::vector<Jet> v;
    eval_into(sub, x, depth, v);
    return v;
  };
  switch (e.op) {
    case Op::Const: out.emplace_back(depth, e.value); return;
    case Op::Var:
      if (static_cast<std::size_t>(e.index) >= x.size())
        throw Error(Errc::ArityMismatch, "component index " + std::to_string(e.index) +
                                             " out of range for input of length " +
                                             std::to_string(x.size()));
      out.push_back(x[e.index]);
      return;
    case Op::Neg:
      for (auto& j : one(*e.args[0])) out.push_back(-j);
      return;
    case Op::Add:
    case Op::Sub: {
      auto a = one(*e.args[0]);
      auto b = one(*e.args[1]);
      for (std::size_t i = 0; i < a.size(); ++i) out.push_back(e.op == Op::Add ? a[i] + b[i] : a[i] - b[i]);
      return;
    }
    case Op::Mul: {
      auto a = one(*e.args[0]);
      auto b = one(*e.args[1]);
      if (a.size() == 1)
        for (const auto& j : b) out.push_back(a[0] * j);
      else
        for (const auto& j : a) out.push_back(j * b[0]);
      return;
    }
    case Op::Div: {
      auto a = one(*e.args[0]);
      auto b = one(*e.args[1]);
      if (!(std::abs(b[0].value()) > 1e-300)) domain_fail(e, "division by zero");
      Jet r = reciprocal(b[0]);
      for (const auto& j : a) out.push_back(j * r);
      return;
    }
    case Op::Sin: out.push_back(sin(one(*e.args[0])[0])); return;
    case Op::Cos: out.push_back(cos(one(*e.args[0])[0])); return;
    case Op::Exp: out.push_back(exp(one(*e.args[0])[0])); return;
    case Op::Sqrt: {
      Jet a = one(*e.args[0])[0];
      if (a.value() < 0.0) domain_fail(e, "sqrt of negative value");
      if (a.value() == 0.0 && !a.nilpotent_part_zero()) domain_fail(e, "sqrt not differentiable at 0");
      out.push_back(sqrt(a));
      return;
    }
    case Op::Pow: {
      Jet a = one(*e.args[0])[0];
      if (e.index < 0 && !(std::abs(a.value()) > 1e-300)) domain_fail(e, "negative power of zero");
      out.push_back(pow(a, e.index));
      return;
    }
    case Op::Vec:
      for (const auto& a : e.args) eval_into(*a, x, depth, out);
      return;
    case Op::Dot: {
      auto a = one(*e.args[0]);
      auto b = one(*e.args[1]);
      Jet acc(depth, 0.0);
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
      out.push_back(acc);
      return;
    }
  }
}

}  // namespace

std::vector<Jet> evaluate(const Expr& e, std::span<const Jet> x, int depth) {
  std::vector<Jet> out;
  out.reserve(e.width);
  eval_into(e, x, depth, out);
  return out;
}

}  // namespace tconn
