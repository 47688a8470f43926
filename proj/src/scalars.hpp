#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "errors.hpp"

namespace iso {

using Integer = mpz_class;
using Rational = mpq_class;

// Interned formal symbols (times t_i, reading values a_j, ...).
using SymbolId = std::uint32_t;

SymbolId symbol(const std::string& name);
const std::string& symbol_name(SymbolId id);

// Sparse monomial: exponents sorted by symbol id, all exponents > 0.
struct Monomial {
  std::vector<std::pair<SymbolId, std::uint32_t>> exps;

  std::uint64_t degree() const;
  bool operator==(const Monomial& o) const { return exps == o.exps; }
  bool operator!=(const Monomial& o) const { return exps != o.exps; }
  // graded lex, smaller symbol id = more significant variable
  bool operator<(const Monomial& o) const;
  Monomial operator*(const Monomial& o) const;
};

// Integer-coefficient multivariate polynomial in canonical form:
// terms sorted in descending monomial order, no zero coefficients.
class Poly {
 public:
  struct Term {
    Monomial mono;
    Integer coef;
  };

  Poly() = default;
  Poly(long v);                 // NOLINT(google-explicit-constructor)
  explicit Poly(const Integer& v);
  static Poly var(SymbolId s);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  const Integer& constant_value() const;  // pre: is_constant
  std::uint64_t total_degree() const;

  const std::vector<Term>& terms() const { return terms_; }

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly operator-() const;
  Poly pow(std::uint32_t e) const;
  bool operator==(const Poly& o) const { return compare(o) == 0; }
  bool operator!=(const Poly& o) const { return compare(o) != 0; }
  bool operator<(const Poly& o) const { return compare(o) < 0; }
  int compare(const Poly& o) const;

  Poly derivative(SymbolId s) const;
  Rational eval(const std::map<SymbolId, Rational>& assignment) const;
  void collect_symbols(std::vector<SymbolId>& out) const;

  // leading (first) coefficient under the global monomial order
  const Integer& leading_coef() const;

  std::string str() const;

  // exact division; throws std::logic_error if not divisible
  static Poly divexact(const Poly& a, const Poly& b);
  static Poly gcd(const Poly& a, const Poly& b);

  // construction from pre-sorted data, used internally
  static Poly from_sorted_terms(std::vector<Term> terms);

 private:
  std::vector<Term> terms_;
};

// Rational function num/den over the integers in canonical reduced form:
// gcd(num, den) = 1 and den has positive leading coefficient.
class Scalar {
 public:
  Scalar() : num_(), den_(1) {}
  Scalar(long v) : num_(v), den_(1) {}  // NOLINT(google-explicit-constructor)
  Scalar(const Integer& v) : num_(v), den_(1) {}
  Scalar(const Rational& v);
  Scalar(Poly num, Poly den);  // reduces; throws DivisionByZero if den = 0
  static Scalar sym(SymbolId s) { return Scalar(Poly::var(s), Poly(1)); }
  static Scalar sym(const std::string& name) { return sym(symbol(name)); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const;
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend Scalar operator/(const Scalar& a, const Scalar& b);
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar& operator/=(const Scalar& o) { return *this = *this / o; }
  Scalar inverse() const;

  bool operator==(const Scalar& o) const;
  bool operator!=(const Scalar& o) const { return !(*this == o); }
  bool operator<(const Scalar& o) const;  // arbitrary total order for map keys

  std::string str() const;
  static Scalar parse(const std::string& text);

  std::vector<SymbolId> symbols() const;
  // substitute Scalars for some symbols; unmapped symbols stay formal
  Scalar subs(const std::map<SymbolId, Scalar>& repl) const;

 private:
  void reduce();
  Poly num_, den_;
};

enum class ArithOp { add, sub, mul, div };

Scalar scalar_arith(const Scalar& x, const Scalar& y, ArithOp op);
Rational scalar_eval(const Scalar& x, const std::map<SymbolId, Rational>& assignment);
Scalar scalar_partial(const Scalar& x, SymbolId t);

}  // namespace iso
