#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tconn/jet.hpp"

namespace tconn {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Sin, Cos, Exp, Sqrt, Pow, Vec, Dot };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int index = 0;       // Var: component; Pow: exponent
  std::vector<ExprPtr> args;
  std::size_t width = 1;  // static vector length of the value
};

namespace ex {
ExprPtr constant(double v);
ExprPtr var(int i);
ExprPtr neg(ExprPtr a);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr sin(ExprPtr a);
ExprPtr cos(ExprPtr a);
ExprPtr exp(ExprPtr a);
ExprPtr sqrt(ExprPtr a);
ExprPtr pow(ExprPtr a, int k);
ExprPtr vec(std::vector<ExprPtr> items);
ExprPtr dot(ExprPtr a, ExprPtr b);
}  // namespace ex

// Evaluates over the jet algebra; x holds one jet per input component.
std::vector<Jet> evaluate(const Expr& e, std::span<const Jet> x, int depth);

// Canonical text; parsing it yields an equal tree.
std::string to_string(const Expr& e);
std::string format_number(double v);

bool equal(const Expr& a, const Expr& b);
int max_var(const Expr& e);
ExprPtr shift_vars(const ExprPtr& e, int offset);

}  // namespace tconn
