#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "classr/ops.hpp"

namespace classr {

class TokenLibrary;

// Exact rational exponent. sqrt/square halve and double exponents, so
// floating point is never used for unit arithmetic.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  friend Rational operator+(Rational a, Rational b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(Rational a, Rational b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(Rational a) { return Rational(-a.num, a.den); }
  friend Rational operator*(Rational a, Rational b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }

  bool is_zero() const { return num == 0; }
  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }
};

// Exponent vector over the 7 SI base dimensions, in this order:
// length, mass, time, current, temperature, amount, luminosity.
class UnitVector {
 public:
  static constexpr int kDims = 7;

  UnitVector() = default;

  static UnitVector dimensionless() { return UnitVector{}; }

  static UnitVector si(Rational length, Rational mass = 0, Rational time = 0,
                       Rational current = 0, Rational temperature = 0,
                       Rational amount = 0, Rational luminosity = 0) {
    UnitVector u;
    u.e_ = {length, mass, time, current, temperature, amount, luminosity};
    return u;
  }

  const Rational& operator[](int i) const { return e_[static_cast<size_t>(i)]; }
  Rational& operator[](int i) { return e_[static_cast<size_t>(i)]; }

  bool is_dimensionless() const {
    for (const auto& r : e_)
      if (!r.is_zero()) return false;
    return true;
  }

  friend UnitVector operator+(const UnitVector& a, const UnitVector& b) {
    UnitVector r;
    for (int i = 0; i < kDims; ++i) r.e_[i] = a.e_[i] + b.e_[i];
    return r;
  }
  friend UnitVector operator-(const UnitVector& a, const UnitVector& b) {
    UnitVector r;
    for (int i = 0; i < kDims; ++i) r.e_[i] = a.e_[i] - b.e_[i];
    return r;
  }
  friend UnitVector operator-(const UnitVector& a) {
    UnitVector r;
    for (int i = 0; i < kDims; ++i) r.e_[i] = -a.e_[i];
    return r;
  }
  UnitVector scaled(Rational k) const {
    UnitVector r;
    for (int i = 0; i < kDims; ++i) r.e_[i] = e_[i] * k;
    return r;
  }
  friend bool operator==(const UnitVector& a, const UnitVector& b) {
    return a.e_ == b.e_;
  }

  std::string str() const;

  // Parses "[1,0,-2,0,0,0,0]"-style integer arrays or rational strings like
  // "1/2"; see dataset manifests and library JSON.
  static UnitVector from_exponents(std::span<const Rational> exps);

 private:
  std::array<Rational, kDims> e_{};
};

// Constraint on the units of a (sub)expression slot. Free means "not yet
// determined / absorbed by a free constant"; Contradiction is terminal.
struct UnitConstraint {
  enum class State : std::uint8_t { Exact, Free, Contradiction };

  State state = State::Free;
  UnitVector units;  // meaningful only when state == Exact

  static UnitConstraint exact(UnitVector u) {
    return UnitConstraint{State::Exact, std::move(u)};
  }
  static UnitConstraint free() { return UnitConstraint{State::Free, {}}; }
  static UnitConstraint contradiction() {
    return UnitConstraint{State::Contradiction, {}};
  }

  bool is_exact() const { return state == State::Exact; }
  bool is_free() const { return state == State::Free; }
  bool is_contradiction() const { return state == State::Contradiction; }

  friend bool operator==(const UnitConstraint& a, const UnitConstraint& b) {
    if (a.state != b.state) return false;
    if (a.state != State::Exact) return true;
    return a.units == b.units;
  }
};

// Bottom-up combination: units of an operator node given child units.
// +,- require equal Exact children; x adds exponents, / subtracts; Sq
// doubles, Sqrt halves, Inv negates; transcendental ops require the zero
// vector. A Free child defers resolution instead of failing.
UnitConstraint combine_units(OpCode op, std::span<const UnitConstraint> children);

// Constraint on the next token implied by target units and the tokens placed
// so far. `partial` may be empty (the root slot) but must not be complete.
UnitConstraint required_units(std::span<const TokenId> partial,
                              const TokenLibrary& library,
                              const UnitConstraint& target);

// One-token-lookahead feasibility mask over the whole library: token t is
// allowed unless placing it provably forces a units contradiction. With
// `enabled == false` only the trivially-true mask is returned.
std::vector<char> units_mask(std::span<const TokenId> partial,
                             const TokenLibrary& library,
                             const UnitConstraint& target,
                             bool enabled = true);

// Incremental prefix-sequence builder shared by the unit-constraint functions
// and the sequence sampler: tracks dangling slot count, per-token occurrence
// counts, parent/sibling of the next slot, and the unit requirement chain.
class GenState {
 public:
  GenState(const TokenLibrary& library, UnitConstraint target_units);

  void push(TokenId token);

  bool complete() const { return complete_; }
  int length() const { return static_cast<int>(tokens_.size()); }
  int dangling() const { return dangling_; }
  const std::vector<TokenId>& tokens() const { return tokens_; }
  int occurrences(TokenId t) const { return occurrence_[t]; }

  // parent operator of the next slot and root token of its completed left
  // sibling subtree; nullopt at the root / for first children.
  std::optional<TokenId> parent() const;
  std::optional<TokenId> sibling() const;

  // Unit requirement of the next slot.
  UnitConstraint next_requirement() const;

  // Units of the whole expression once complete.
  UnitConstraint root_units() const;

 private:
  struct Frame {
    TokenId op;
    UnitConstraint requirement;        // requirement on this operator node
    int filled = 0;                    // completed children so far
    std::vector<UnitConstraint> child_units;
    std::vector<TokenId> child_roots;
  };

  UnitConstraint child_requirement(const Frame& f) const;

  const TokenLibrary* library_;
  UnitConstraint target_;
  std::vector<TokenId> tokens_;
  std::vector<Frame> stack_;
  std::vector<int> occurrence_;
  UnitConstraint root_result_;
  int dangling_ = 1;
  bool complete_ = false;
};

}  // namespace classr
