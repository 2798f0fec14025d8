#include "classr/units.hpp"

#include <sstream>

#include "classr/expr.hpp"

namespace classr {

std::string UnitVector::str() const {
  static constexpr const char* dims[] = {"m", "kg", "s", "A", "K", "mol", "cd"};
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < kDims; ++i) {
    if (e_[static_cast<size_t>(i)].is_zero()) continue;
    if (!first) os << " ";
    os << dims[i] << "^" << e_[static_cast<size_t>(i)].str();
    first = false;
  }
  if (first) os << "1";
  return os.str();
}

UnitVector UnitVector::from_exponents(std::span<const Rational> exps) {
  if (exps.size() != static_cast<size_t>(kDims))
    throw std::invalid_argument("unit vector needs exactly 7 exponents");
  UnitVector u;
  for (int i = 0; i < kDims; ++i) u[i] = exps[static_cast<size_t>(i)];
  return u;
}

UnitConstraint combine_units(OpCode op, std::span<const UnitConstraint> children) {
  if (static_cast<int>(children.size()) != op_arity(op))
    throw std::invalid_argument("combine_units: child count != operator arity");
  for (const auto& c : children)
    if (c.is_contradiction()) return UnitConstraint::contradiction();

  const auto& a = children[0];
  switch (op) {
    case OpCode::Add:
    case OpCode::Sub: {
      const auto& b = children[1];
      if (a.is_exact() && b.is_exact())
        return a.units == b.units ? a : UnitConstraint::contradiction();
      if (a.is_exact()) return a;
      if (b.is_exact()) return b;
      return UnitConstraint::free();
    }
    case OpCode::Mul: {
      const auto& b = children[1];
      if (a.is_exact() && b.is_exact())
        return UnitConstraint::exact(a.units + b.units);
      return UnitConstraint::free();
    }
    case OpCode::Div: {
      const auto& b = children[1];
      if (a.is_exact() && b.is_exact())
        return UnitConstraint::exact(a.units - b.units);
      return UnitConstraint::free();
    }
    case OpCode::Neg:
      return a;
    case OpCode::Inv:
      return a.is_exact() ? UnitConstraint::exact(-a.units) : a;
    case OpCode::Sq:
      return a.is_exact() ? UnitConstraint::exact(a.units.scaled(Rational(2)))
                          : a;
    case OpCode::Sqrt:
      return a.is_exact()
                 ? UnitConstraint::exact(a.units.scaled(Rational(1, 2)))
                 : a;
    case OpCode::Exp:
    case OpCode::Log:
    case OpCode::Cos:
    case OpCode::Sin:
      if (a.is_exact() && !a.units.is_dimensionless())
        return UnitConstraint::contradiction();
      return UnitConstraint::exact(UnitVector::dimensionless());
  }
  return UnitConstraint::free();
}

namespace {

UnitConstraint leaf_units(const Token& t) {
  if (t.units_free) return UnitConstraint::free();
  return UnitConstraint::exact(t.units);
}

}  // namespace

GenState::GenState(const TokenLibrary& library, UnitConstraint target_units)
    : library_(&library),
      target_(std::move(target_units)),
      occurrence_(library.size(), 0) {}

// Requirement on frame f's next child slot, given the requirement on f and
// the resolved units of its completed children.
UnitConstraint GenState::child_requirement(const Frame& f) const {
  const Token& op_tok = (*library_)[f.op];
  const OpCode op = op_tok.op;
  const UnitConstraint& q = f.requirement;
  if (q.is_contradiction()) return q;

  switch (op) {
    case OpCode::Add:
    case OpCode::Sub:
      if (q.is_exact()) return q;
      if (f.filled == 1 && f.child_units[0].is_exact()) return f.child_units[0];
      return UnitConstraint::free();
    case OpCode::Mul:
      if (f.filled == 0) return UnitConstraint::free();
      if (q.is_exact() && f.child_units[0].is_exact())
        return UnitConstraint::exact(q.units - f.child_units[0].units);
      return UnitConstraint::free();
    case OpCode::Div:
      if (f.filled == 0) return UnitConstraint::free();
      if (q.is_exact() && f.child_units[0].is_exact())
        return UnitConstraint::exact(f.child_units[0].units - q.units);
      return UnitConstraint::free();
    case OpCode::Neg:
      return q;
    case OpCode::Inv:
      return q.is_exact() ? UnitConstraint::exact(-q.units) : q;
    case OpCode::Sq:
      return q.is_exact() ? UnitConstraint::exact(q.units.scaled(Rational(1, 2)))
                          : q;
    case OpCode::Sqrt:
      return q.is_exact() ? UnitConstraint::exact(q.units.scaled(Rational(2)))
                          : q;
    case OpCode::Exp:
    case OpCode::Log:
    case OpCode::Cos:
    case OpCode::Sin:
      return UnitConstraint::exact(UnitVector::dimensionless());
  }
  return UnitConstraint::free();
}

void GenState::push(TokenId token) {
  if (complete_) throw std::logic_error("GenState::push on complete sequence");
  const Token& t = (*library_)[token];
  tokens_.push_back(token);
  occurrence_[token] += 1;
  dangling_ += t.arity - 1;

  if (t.arity > 0) {
    Frame f;
    f.op = token;
    f.requirement = stack_.empty() ? target_ : child_requirement(stack_.back());
    stack_.push_back(std::move(f));
    return;
  }

  // A leaf completes a subtree; bubble completions up the pending stack.
  UnitConstraint sub_units = leaf_units(t);
  TokenId sub_root = token;
  while (true) {
    if (stack_.empty()) {
      complete_ = true;
      root_result_ = sub_units;
      return;
    }
    Frame& top = stack_.back();
    top.child_units.push_back(sub_units);
    top.child_roots.push_back(sub_root);
    top.filled += 1;
    const Token& op_tok = (*library_)[top.op];
    if (top.filled < op_tok.arity) return;
    sub_units = combine_units(op_tok.op, top.child_units);
    sub_root = top.op;
    stack_.pop_back();
  }
}

std::optional<TokenId> GenState::parent() const {
  if (complete_ || stack_.empty()) return std::nullopt;
  return stack_.back().op;
}

std::optional<TokenId> GenState::sibling() const {
  if (complete_ || stack_.empty()) return std::nullopt;
  const Frame& top = stack_.back();
  if (top.child_roots.empty()) return std::nullopt;
  return top.child_roots.back();
}

UnitConstraint GenState::next_requirement() const {
  if (complete_)
    throw std::logic_error("next_requirement on complete sequence");
  if (stack_.empty()) return target_;
  return child_requirement(stack_.back());
}

UnitConstraint GenState::root_units() const {
  if (!complete_) throw std::logic_error("root_units on incomplete sequence");
  return root_result_;
}

UnitConstraint required_units(std::span<const TokenId> partial,
                              const TokenLibrary& library,
                              const UnitConstraint& target) {
  GenState state(library, target);
  for (TokenId t : partial) state.push(t);
  if (state.complete())
    throw std::invalid_argument("required_units: sequence already complete");
  return state.next_requirement();
}

std::vector<char> units_mask(std::span<const TokenId> partial,
                             const TokenLibrary& library,
                             const UnitConstraint& target, bool enabled) {
  std::vector<char> mask(library.size(), 1);
  GenState state(library, target);
  for (TokenId t : partial) state.push(t);
  if (state.complete()) {
    std::fill(mask.begin(), mask.end(), 0);
    return mask;
  }
  if (!enabled) return mask;

  const UnitConstraint req = state.next_requirement();
  for (TokenId id = 0; id < static_cast<TokenId>(library.size()); ++id) {
    const Token& t = library[id];
    if (req.is_contradiction()) {
      mask[id] = 0;
      continue;
    }
    if (t.arity > 0) {
      // One token of lookahead: only transcendental operators pin their own
      // units (dimensionless); every other operator can still meet any Exact
      // requirement through its children.
      if (op_is_transcendental(t.op) && req.is_exact() &&
          !req.units.is_dimensionless())
        mask[id] = 0;
      continue;
    }
    if (req.is_exact() && !t.units_free && !(t.units == req.units)) mask[id] = 0;
  }
  return mask;
}

}  // namespace classr
