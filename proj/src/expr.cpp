#include "classr/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace classr {

TokenId TokenLibrary::add(Token t) {
  if (tokens_.size() >= 60000) throw std::length_error("token library full");
  t.id = static_cast<TokenId>(tokens_.size());
  if (by_symbol_.count(t.symbol))
    throw std::invalid_argument("duplicate token symbol: " + t.symbol);
  by_symbol_.emplace(t.symbol, t.id);
  tokens_.push_back(std::move(t));
  return tokens_.back().id;
}

TokenId TokenLibrary::add_operator(OpCode op) {
  Token t;
  t.symbol = std::string(op_name(op));
  t.arity = op_arity(op);
  t.kind = TokenKind::Operator;
  t.op = op;
  t.units_free = true;  // operator units follow from children
  return add(std::move(t));
}

TokenId TokenLibrary::add_variable(std::string symbol, std::optional<UnitVector> units) {
  Token t;
  t.symbol = std::move(symbol);
  t.kind = TokenKind::Variable;
  t.var_index = n_variables_++;
  t.units_free = !units.has_value();
  if (units) t.units = *units;
  return add(std::move(t));
}

TokenId TokenLibrary::add_fixed_constant(std::string symbol, double value,
                                         std::optional<UnitVector> units) {
  Token t;
  t.symbol = std::move(symbol);
  t.kind = TokenKind::FixedConst;
  t.value = value;
  t.units_free = !units.has_value();
  if (units) t.units = *units;
  return add(std::move(t));
}

TokenId TokenLibrary::add_class_constant(std::string symbol, std::optional<UnitVector> units) {
  Token t;
  t.symbol = std::move(symbol);
  t.kind = TokenKind::ClassConst;
  t.const_index = n_class_++;
  t.units_free = !units.has_value();
  if (units) t.units = *units;
  return add(std::move(t));
}

TokenId TokenLibrary::add_spe_constant(std::string symbol, std::optional<UnitVector> units) {
  Token t;
  t.symbol = std::move(symbol);
  t.kind = TokenKind::SpeConst;
  t.const_index = n_spe_++;
  t.units_free = !units.has_value();
  if (units) t.units = *units;
  return add(std::move(t));
}

namespace {

std::string literal_symbol(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace

TokenId TokenLibrary::intern_literal(double value) {
  const std::string sym = literal_symbol(value);
  if (auto id = find(sym)) return *id;
  Token t;
  t.symbol = sym;
  t.kind = TokenKind::FixedConst;
  t.value = value;
  t.units_free = true;  // literals from targets adapt to context
  t.sampleable = false;
  return add(std::move(t));
}

std::optional<TokenId> TokenLibrary::find(std::string_view symbol) const {
  auto it = by_symbol_.find(std::string(symbol));
  if (it == by_symbol_.end()) return std::nullopt;
  return it->second;
}

std::optional<TokenId> TokenLibrary::find_operator(OpCode op) const {
  for (const Token& t : tokens_)
    if (t.kind == TokenKind::Operator && t.op == op) return t.id;
  return std::nullopt;
}

std::optional<TokenId> TokenLibrary::fixed_one() const {
  for (const Token& t : tokens_)
    if (t.kind == TokenKind::FixedConst && t.value == 1.0 && t.sampleable)
      return t.id;
  return std::nullopt;
}

bool is_complete(std::span<const TokenId> tokens, const TokenLibrary& library) {
  if (tokens.empty()) throw std::invalid_argument("empty token sequence");
  int dangling = 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= library.size())
      throw std::invalid_argument("unknown token id " + std::to_string(tokens[i]));
    dangling += library[tokens[i]].arity - 1;
    if (dangling == 0) return i + 1 == tokens.size();
    if (dangling < 0) return false;
  }
  return false;
}

Expression make_expression(std::vector<TokenId> tokens, LibraryPtr library) {
  if (!is_complete(tokens, *library))
    throw std::invalid_argument("incomplete prefix sequence");
  Expression e;
  e.library = std::move(library);
  int n_class = 0, n_spe = 0;
  for (TokenId id : tokens) {
    const Token& t = (*e.library)[id];
    if (t.kind == TokenKind::ClassConst) n_class = std::max(n_class, t.const_index + 1);
    if (t.kind == TokenKind::SpeConst) n_spe = std::max(n_spe, t.const_index + 1);
  }
  e.tokens = std::move(tokens);
  e.n_class_consts = n_class;
  e.n_spe_consts = n_spe;
  return e;
}

int complexity(const Expression& expr) {
  return static_cast<int>(expr.tokens.size());
}

// ---------------------------------------------------------------------------
// Protected evaluation
// ---------------------------------------------------------------------------

namespace {

using Arr = Eigen::ArrayXd;

bool all_finite(const Arr& a) { return a.isFinite().all(); }

}  // namespace

EvalResult evaluate(const Expression& expr, const Realization& realization,
                    std::span<const double> class_vals,
                    std::span<const double> spe_vals) {
  if (static_cast<int>(class_vals.size()) < expr.n_class_consts ||
      static_cast<int>(spe_vals.size()) < expr.n_spe_consts)
    throw std::invalid_argument("constant vector shorter than expression slots");

  const TokenLibrary& lib = *expr.library;
  const Eigen::Index n = realization.n_samples();
  std::vector<Arr> stack;
  stack.reserve(8);
  bool valid = true;

  // Right-to-left scan: the first value popped for an operator is its
  // leftmost child.
  for (auto it = expr.tokens.rbegin(); it != expr.tokens.rend(); ++it) {
    const Token& t = lib[*it];
    switch (t.kind) {
      case TokenKind::Variable:
        if (t.var_index >= realization.n_vars())
          throw std::invalid_argument("expression references variable " +
                                      std::to_string(t.var_index) +
                                      " beyond dataset width");
        stack.emplace_back(realization.X.col(t.var_index).array());
        continue;
      case TokenKind::FixedConst:
        stack.emplace_back(Arr::Constant(n, t.value));
        continue;
      case TokenKind::ClassConst:
        stack.emplace_back(Arr::Constant(n, class_vals[static_cast<size_t>(t.const_index)]));
        continue;
      case TokenKind::SpeConst:
        stack.emplace_back(Arr::Constant(n, spe_vals[static_cast<size_t>(t.const_index)]));
        continue;
      case TokenKind::Operator:
        break;
    }
    if (static_cast<int>(stack.size()) < t.arity)
      throw std::invalid_argument("malformed prefix sequence");
    if (!valid) return EvalResult{Arr::Zero(n), false};
    Arr a = std::move(stack.back());
    stack.pop_back();
    switch (t.op) {
      case OpCode::Add: {
        a += stack.back();
        stack.pop_back();
        break;
      }
      case OpCode::Sub: {
        a -= stack.back();
        stack.pop_back();
        break;
      }
      case OpCode::Mul: {
        a *= stack.back();
        stack.pop_back();
        if (!all_finite(a)) valid = false;
        break;
      }
      case OpCode::Div: {
        const Arr& b = stack.back();
        if ((b.abs() < kDivEpsilon).any()) valid = false;
        a /= b;
        stack.pop_back();
        break;
      }
      case OpCode::Inv: {
        if ((a.abs() < kDivEpsilon).any()) valid = false;
        a = a.inverse();
        break;
      }
      case OpCode::Sqrt: {
        if ((a < 0.0).any()) valid = false;
        a = a.sqrt();
        break;
      }
      case OpCode::Sq: {
        a = a.square();
        if (!all_finite(a)) valid = false;
        break;
      }
      case OpCode::Neg:
        a = -a;
        break;
      case OpCode::Exp: {
        if ((a > kExpMax).any()) valid = false;
        a = a.exp();
        break;
      }
      case OpCode::Log: {
        if ((a <= 0.0).any()) valid = false;
        a = a.log();
        break;
      }
      case OpCode::Cos:
        if (!all_finite(a)) valid = false;
        a = a.cos();
        break;
      case OpCode::Sin:
        if (!all_finite(a)) valid = false;
        a = a.sin();
        break;
    }
    if (valid && !all_finite(a)) valid = false;
    stack.emplace_back(std::move(a));
  }
  if (!valid) return EvalResult{Arr::Zero(n), false};
  if (stack.size() != 1) throw std::invalid_argument("malformed prefix sequence");
  return EvalResult{std::move(stack.front()), valid};
}

std::vector<EvalResult> evaluate_multi(const Expression& expr,
                                       const MultiDataset& data,
                                       std::span<const double> class_vals,
                                       const Eigen::MatrixXd& spe_table) {
  if (spe_table.rows() != data.n_realizations() && expr.n_spe_consts > 0)
    throw std::invalid_argument("spe_table row count != realization count");
  std::vector<EvalResult> out;
  out.reserve(data.realizations.size());
  std::vector<double> spe(static_cast<size_t>(expr.n_spe_consts));
  for (Eigen::Index i = 0; i < data.n_realizations(); ++i) {
    for (int j = 0; j < expr.n_spe_consts; ++j)
      spe[static_cast<size_t>(j)] = spe_table(i, j);
    out.push_back(evaluate(expr, data.realizations[static_cast<size_t>(i)],
                           class_vals, spe));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Infix printing
// ---------------------------------------------------------------------------

namespace {

struct PrintNode {
  const Token* token;
  std::vector<int> children;
};

// precedence: additive 1, multiplicative 2, unary/postfix 3, atoms 4
int print_precedence(const Token& t) {
  if (t.kind != TokenKind::Operator) return 4;
  switch (t.op) {
    case OpCode::Add:
    case OpCode::Sub:
      return 1;
    case OpCode::Mul:
    case OpCode::Div:
    case OpCode::Inv:
      return 2;
    case OpCode::Neg:
      return 3;
    default:
      return 4;  // named calls and postfix square read as atoms
  }
}

void print_rec(const std::vector<PrintNode>& nodes, int idx, std::ostream& os,
               int parent_prec, bool right_operand) {
  const PrintNode& n = nodes[static_cast<size_t>(idx)];
  const Token& t = *n.token;
  const int prec = print_precedence(t);

  const auto child = [&](int k) { return n.children[static_cast<size_t>(k)]; };

  if (t.kind != TokenKind::Operator) {
    os << t.symbol;
    return;
  }

  bool paren = prec < parent_prec || (prec == parent_prec && right_operand);
  if (paren) os << "(";
  switch (t.op) {
    case OpCode::Add:
      print_rec(nodes, child(0), os, prec, false);
      os << " + ";
      print_rec(nodes, child(1), os, prec, false);
      break;
    case OpCode::Sub:
      print_rec(nodes, child(0), os, prec, false);
      os << " - ";
      print_rec(nodes, child(1), os, prec + 0, true);
      break;
    case OpCode::Mul:
      print_rec(nodes, child(0), os, prec, false);
      os << "*";
      print_rec(nodes, child(1), os, prec, false);
      break;
    case OpCode::Div:
      print_rec(nodes, child(0), os, prec, false);
      os << "/";
      print_rec(nodes, child(1), os, prec, true);
      break;
    case OpCode::Inv:
      os << "1/";
      print_rec(nodes, child(0), os, 3, true);
      break;
    case OpCode::Neg:
      os << "-";
      print_rec(nodes, child(0), os, prec, true);
      break;
    case OpCode::Sq:
      print_rec(nodes, child(0), os, 4, true);
      os << "^2";
      break;
    default:
      os << op_name(t.op) << "(";
      print_rec(nodes, child(0), os, 0, false);
      os << ")";
      break;
  }
  if (paren) os << ")";
}

}  // namespace

std::string to_infix(const Expression& expr) {
  const TokenLibrary& lib = *expr.library;
  std::vector<PrintNode> nodes(expr.tokens.size());
  std::vector<int> stack;
  for (int i = static_cast<int>(expr.tokens.size()) - 1; i >= 0; --i) {
    const Token& t = lib[expr.tokens[static_cast<size_t>(i)]];
    PrintNode n;
    n.token = &t;
    for (int a = 0; a < t.arity; ++a) {
      n.children.push_back(stack.back());
      stack.pop_back();
    }
    nodes[static_cast<size_t>(i)] = std::move(n);
    stack.push_back(i);
  }
  std::ostringstream os;
  const Token& root = *nodes[0].token;
  const bool additive_root = root.kind == TokenKind::Operator &&
                             (root.op == OpCode::Add || root.op == OpCode::Sub);
  print_rec(nodes, 0, os, additive_root ? 2 : 0, false);
  return os.str();
}

// ---------------------------------------------------------------------------
// Infix parsing (recursive descent)
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  const std::shared_ptr<TokenLibrary>& lib;

  explicit Parser(std::string_view t, const std::shared_ptr<TokenLibrary>& l)
      : text(t), lib(l) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

  TokenId require_op(OpCode op) {
    if (auto id = lib->find_operator(op)) return *id;
    fail("operator '" + std::string(op_name(op)) + "' not in library");
  }

  // expression := term (('+'|'-') term)*
  std::vector<TokenId> parse_expression() {
    std::vector<TokenId> left = parse_term();
    while (true) {
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        const char c = text[pos];
        ++pos;
        std::vector<TokenId> right = parse_term();
        std::vector<TokenId> combined;
        combined.push_back(require_op(c == '+' ? OpCode::Add : OpCode::Sub));
        combined.insert(combined.end(), left.begin(), left.end());
        combined.insert(combined.end(), right.begin(), right.end());
        left = std::move(combined);
      } else {
        return left;
      }
    }
  }

  // term := factor (('*'|'/') factor)*
  std::vector<TokenId> parse_term() {
    std::vector<TokenId> left = parse_factor();
    while (true) {
      const char c = peek();
      if (c == '*' || c == '/') {
        ++pos;
        std::vector<TokenId> right = parse_factor();
        // canonical form: a literal-1 numerator folds into the unary
        // reciprocal token when the grammar has one
        if (c == '/' && left.size() == 1) {
          const Token& lt = (*lib)[left[0]];
          if (lt.kind == TokenKind::FixedConst && lt.value == 1.0) {
            if (auto inv = lib->find_operator(OpCode::Inv)) {
              std::vector<TokenId> combined{*inv};
              combined.insert(combined.end(), right.begin(), right.end());
              left = std::move(combined);
              continue;
            }
          }
        }
        std::vector<TokenId> combined;
        combined.push_back(require_op(c == '*' ? OpCode::Mul : OpCode::Div));
        combined.insert(combined.end(), left.begin(), left.end());
        combined.insert(combined.end(), right.begin(), right.end());
        left = std::move(combined);
      } else {
        return left;
      }
    }
  }

  // factor := '-' factor | power
  std::vector<TokenId> parse_factor() {
    if (peek() == '-') {
      ++pos;
      std::vector<TokenId> inner = parse_factor();
      std::vector<TokenId> combined{require_op(OpCode::Neg)};
      combined.insert(combined.end(), inner.begin(), inner.end());
      return combined;
    }
    return parse_power();
  }

  // power := atom ('^' '2')*
  std::vector<TokenId> parse_power() {
    std::vector<TokenId> base = parse_atom();
    while (peek() == '^') {
      ++pos;
      skip_ws();
      if (pos >= text.size() || text[pos] != '2')
        fail("only the square power '^2' is in the grammar");
      ++pos;
      std::vector<TokenId> combined{require_op(OpCode::Sq)};
      combined.insert(combined.end(), base.begin(), base.end());
      base = std::move(combined);
    }
    return base;
  }

  std::vector<TokenId> parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      std::vector<TokenId> inner = parse_expression();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_symbol();
    fail(std::string("unexpected character '") + c + "'");
  }

  std::vector<TokenId> parse_number() {
    const std::size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
            text[pos] == 'e' || text[pos] == 'E' ||
            ((text[pos] == '+' || text[pos] == '-') && pos > start &&
             (text[pos - 1] == 'e' || text[pos - 1] == 'E'))))
      ++pos;
    const std::string s(text.substr(start, pos - start));
    double v = 0.0;
    try {
      v = std::stod(s);
    } catch (const std::exception&) {
      pos = start;
      fail("malformed number '" + s + "'");
    }
    if (v == 1.0) {
      if (auto one = lib->fixed_one()) return {*one};
    }
    return {lib->intern_literal(v)};
  }

  std::vector<TokenId> parse_symbol() {
    const std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    const std::string name(text.substr(start, pos - start));
    skip_ws();
    const bool call = pos < text.size() && text[pos] == '(';
    if (call) {
      OpCode op;
      if (name == "sqrt") op = OpCode::Sqrt;
      else if (name == "exp") op = OpCode::Exp;
      else if (name == "log" || name == "ln") op = OpCode::Log;
      else if (name == "cos") op = OpCode::Cos;
      else if (name == "sin") op = OpCode::Sin;
      else if (name == "sq") op = OpCode::Sq;
      else if (name == "neg") op = OpCode::Neg;
      else if (name == "inv") op = OpCode::Inv;
      else {
        pos = start;
        fail("unknown function '" + name + "'");
      }
      ++pos;  // '('
      std::vector<TokenId> inner = parse_expression();
      if (!eat(')')) fail("missing ')' after " + name);
      std::vector<TokenId> combined{require_op(op)};
      combined.insert(combined.end(), inner.begin(), inner.end());
      return combined;
    }
    if (auto id = lib->find(name)) {
      const Token& t = (*lib)[*id];
      if (t.kind == TokenKind::Operator) {
        pos = start;
        fail("operator '" + name + "' used as a value");
      }
      return {*id};
    }
    pos = start;
    fail("unknown symbol '" + name + "'");
  }
};

}  // namespace

Expression parse_infix(std::string_view text, const std::shared_ptr<TokenLibrary>& library) {
  Parser p(text, library);
  std::vector<TokenId> tokens = p.parse_expression();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return make_expression(std::move(tokens), library);
}

}  // namespace classr
