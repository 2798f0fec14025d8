#pragma once

#include <cstdint>
#include <string_view>

namespace classr {

using TokenId = std::uint16_t;

// Operator set of the search grammar. Inv is the unary reciprocal 1/x,
// Sq the unary square, Neg the unary minus; all three are first-class
// tokens, not syntactic sugar.
enum class OpCode : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Inv,
  Sqrt,
  Sq,
  Neg,
  Exp,
  Log,
  Cos,
  Sin,
};

constexpr int op_arity(OpCode op) {
  switch (op) {
    case OpCode::Add:
    case OpCode::Sub:
    case OpCode::Mul:
    case OpCode::Div:
      return 2;
    default:
      return 1;
  }
}

// exp/log/cos/sin accept and produce dimensionless quantities only.
constexpr bool op_is_transcendental(OpCode op) {
  return op == OpCode::Exp || op == OpCode::Log || op == OpCode::Cos ||
         op == OpCode::Sin;
}

constexpr std::string_view op_name(OpCode op) {
  switch (op) {
    case OpCode::Add: return "add";
    case OpCode::Sub: return "sub";
    case OpCode::Mul: return "mul";
    case OpCode::Div: return "div";
    case OpCode::Inv: return "inv";
    case OpCode::Sqrt: return "sqrt";
    case OpCode::Sq: return "sq";
    case OpCode::Neg: return "neg";
    case OpCode::Exp: return "exp";
    case OpCode::Log: return "log";
    case OpCode::Cos: return "cos";
    case OpCode::Sin: return "sin";
  }
  return "?";
}

}  // namespace classr
