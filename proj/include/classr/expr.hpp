#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "classr/dataset.hpp"
#include "classr/ops.hpp"
#include "classr/units.hpp"

namespace classr {

enum class TokenKind : std::uint8_t {
  Operator,
  Variable,
  FixedConst,  // literal value, e.g. the grammar constant 1 or 9.81
  ClassConst,  // one value shared by all realizations
  SpeConst,    // one value per realization
};

struct Token {
  TokenId id = 0;
  std::string symbol;
  int arity = 0;
  TokenKind kind = TokenKind::FixedConst;
  OpCode op = OpCode::Add;     // operators only
  int var_index = -1;          // variables only
  int const_index = -1;        // class/spe constants only
  double value = 0.0;          // fixed constants only
  bool units_free = true;      // free units: absorbs any constraint
  UnitVector units;            // meaningful when !units_free
  bool sampleable = true;      // false for literals interned from targets

  bool is_leaf() const { return arity == 0; }
  bool is_adjustable() const {
    return kind == TokenKind::ClassConst || kind == TokenKind::SpeConst;
  }
};

class TokenLibrary {
 public:
  TokenId add_operator(OpCode op);
  TokenId add_variable(std::string symbol, std::optional<UnitVector> units = {});
  TokenId add_fixed_constant(std::string symbol, double value,
                             std::optional<UnitVector> units = UnitVector::dimensionless());
  TokenId add_class_constant(std::string symbol, std::optional<UnitVector> units = {});
  TokenId add_spe_constant(std::string symbol, std::optional<UnitVector> units = {});

  // Returns an existing or new non-sampleable literal token for `value`.
  TokenId intern_literal(double value);

  const Token& operator[](TokenId id) const { return tokens_[id]; }
  std::size_t size() const { return tokens_.size(); }
  std::optional<TokenId> find(std::string_view symbol) const;

  int n_variables() const { return n_variables_; }
  int n_class_constants() const { return n_class_; }
  int n_spe_constants() const { return n_spe_; }

  std::optional<TokenId> find_operator(OpCode op) const;
  std::optional<TokenId> fixed_one() const;  // the grammar constant {1}

  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

 private:
  TokenId add(Token t);
  std::vector<Token> tokens_;
  std::unordered_map<std::string, TokenId> by_symbol_;
  int n_variables_ = 0;
  int n_class_ = 0;
  int n_spe_ = 0;
};

using LibraryPtr = std::shared_ptr<const TokenLibrary>;

// Prefix-ordered token sequence with constant slots. Immutable after
// construction; cheap to copy and safe to share across threads.
struct Expression {
  std::vector<TokenId> tokens;
  int n_class_consts = 0;
  int n_spe_consts = 0;
  LibraryPtr library;
};

// True iff the dangling-slot count 1 + sum(arity - 1) reaches zero exactly at
// the last token and stays positive before it. Throws on unknown token ids.
bool is_complete(std::span<const TokenId> tokens, const TokenLibrary& library);

// Builds an Expression from a complete token sequence; constant counts are
// derived from the highest referenced index. Throws if incomplete.
Expression make_expression(std::vector<TokenId> tokens, LibraryPtr library);

// Token count of the canonical prefix encoding.
int complexity(const Expression& expr);

struct EvalResult {
  Eigen::ArrayXd values;
  bool valid = true;  // false when protected semantics fired anywhere
};

// Row-wise protected evaluation over one realization. Domain violations
// (log of x<=0, sqrt of x<0, |denominator| < 1e-12, exp overflow, non-finite
// results) flag the evaluation invalid instead of raising.
EvalResult evaluate(const Expression& expr, const Realization& realization,
                    std::span<const double> class_vals,
                    std::span<const double> spe_vals);

// Row i of spe_table holds the spe-constant values of realization i.
std::vector<EvalResult> evaluate_multi(const Expression& expr,
                                       const MultiDataset& data,
                                       std::span<const double> class_vals,
                                       const Eigen::MatrixXd& spe_table);

// Human-readable infix with minimal parentheses (additive roots keep an
// outer pair); inverse of parse_infix up to canonical associativity.
std::string to_infix(const Expression& expr);

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " at position " + std::to_string(position)),
        position(position) {}
  std::size_t position;
};

// Parses infix text over the library's symbols. Numeric literals are interned
// into `library` as non-sampleable fixed constants when not already present.
Expression parse_infix(std::string_view text, const std::shared_ptr<TokenLibrary>& library);

// Scalar protected-operation flags shared with the constant optimizer.
inline constexpr double kDivEpsilon = 1e-12;
inline constexpr double kExpMax = 709.0;  // exp(710) overflows double

}  // namespace classr
