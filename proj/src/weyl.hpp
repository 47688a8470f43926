#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cycles.hpp"
#include "quiver.hpp"

namespace iso {

// one generator X^arrow_{row,col} of the Weyl algebra, carrying the part
// ranks of its endpoints so that plain lexicographic order on the struct is
// the normal-ordering total order (positive arrows sort before their
// antiparallel partners; on a star every Q sorts before every P)
struct Gen {
  std::uint32_t tail_rank = 0, head_rank = 0;
  NodeId tail = 0, head = 0;
  std::uint32_t row = 1, col = 1;

  friend bool operator==(const Gen& a, const Gen& b) = default;
  friend auto operator<=>(const Gen& a, const Gen& b) = default;

  Arrow arrow() const { return Arrow{tail, head}; }
  Coord coord() const { return Coord{Arrow{tail, head}, row, col}; }
  std::string str() const;
};

using Word = std::vector<Gen>;  // normal form: non-decreasing in Gen order

class WeylElement {
 public:
  WeylElement() = default;  // zero

  bool is_zero() const { return terms_.empty(); }
  const std::map<Word, Scalar>& terms() const { return terms_; }
  const SymplecticData* sym() const { return sym_; }

  // coefficient of the empty word
  Scalar constant_part() const;

  friend WeylElement operator+(const WeylElement& a, const WeylElement& b);
  friend WeylElement operator-(const WeylElement& a, const WeylElement& b);
  WeylElement operator-() const;
  WeylElement scaled(const Scalar& c) const;

  // syntactic equality of canonical forms
  friend bool operator==(const WeylElement& a, const WeylElement& b) {
    return a.terms_ == b.terms_;
  }

  // coefficient-wise partial derivative (times live in the coefficients)
  WeylElement derivative(SymbolId s) const;

  std::string str() const;

  // internal: w must already be normal-ordered
  void add_normal(Word w, Scalar c);
  void set_sym(const SymplecticData* s) { sym_ = s; }

 private:
  const SymplecticData* sym_ = nullptr;
  std::map<Word, Scalar> terms_;
};

// factory tying generators to a graph, a reading and a choice of constants
class WeylAlgebra {
 public:
  WeylAlgebra(const KPartiteGraph& g, const Reading& r, SymplecticData s);

  const KPartiteGraph& graph() const { return *g_; }
  const SymplecticData& sym() const { return s_; }

  Gen gen(Arrow a, std::uint32_t row = 1, std::uint32_t col = 1) const;
  Gen gen(const Coord& c) const { return gen(c.arrow, c.row, c.col); }

  WeylElement zero() const;
  WeylElement constant(const Scalar& c) const;
  WeylElement generator(Arrow a, std::uint32_t row = 1, std::uint32_t col = 1) const;

  // coeff * X^{factors[0]} * X^{factors[1]} * ... in the written order
  WeylElement product(const std::vector<Coord>& factors, const Scalar& coeff) const;

  // canonical linear section of the semiclassical limit: each commutative
  // monomial becomes its normal-ordered word
  WeylElement lift(const TracePolynomial& p) const;

 private:
  const KPartiteGraph* g_;
  SymplecticData s_;
  std::vector<std::uint32_t> part_rank_;  // by part id
};

WeylElement weyl_mul(const WeylElement& x, const WeylElement& y);
WeylElement weyl_commutator(const WeylElement& x, const WeylElement& y);

std::size_t filtration_order(const WeylElement& x);            // ZeroElement
TracePolynomial semiclassical_limit(const WeylElement& x);     // ZeroElement
std::map<std::size_t, WeylElement> rees_homogenize(const WeylElement& x);

}  // namespace iso
