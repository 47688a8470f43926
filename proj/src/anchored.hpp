#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cycles.hpp"
#include "weyl.hpp"

namespace iso {

// cycle with a marked starting arrow, stored anchor-first in application
// order; construction reduces the word to the least representative of its
// admissible-permutation class (block swaps A·B -> B·A allowed when no
// arrow of A has its antiparallel partner in B)
class AnchoredCycle {
 public:
  explicit AnchoredCycle(std::vector<Arrow> word);
  AnchoredCycle(const Cycle& c, std::size_t anchor);

  const std::vector<Arrow>& word() const { return w_; }
  std::size_t length() const { return w_.size(); }
  Cycle underlying() const { return Cycle(w_); }

  friend bool operator==(const AnchoredCycle& a, const AnchoredCycle& b) {
    return a.w_ == b.w_;
  }
  friend auto operator<=>(const AnchoredCycle& a, const AnchoredCycle& b) {
    return a.w_ <=> b.w_;
  }

  std::string str() const;

 private:
  void canonicalize();
  std::vector<Arrow> w_;
};

// finite combination  sum c·Tr(C) + sum c·Tr(C)Tr(D) + constant;
// product factor lists are kept in multiplication order
struct QuantumPotential {
  std::map<AnchoredCycle, Scalar> terms;
  std::map<std::vector<AnchoredCycle>, Scalar> products;
  Scalar constant = Scalar(0);

  bool is_zero() const { return terms.empty() && products.empty() && constant.is_zero(); }
  void add_term(const AnchoredCycle& c, const Scalar& w);
  void add_product(std::vector<AnchoredCycle> cs, const Scalar& w);

  friend QuantumPotential operator+(const QuantumPotential& a, const QuantumPotential& b);
  friend QuantumPotential operator-(const QuantumPotential& a, const QuantumPotential& b);
  QuantumPotential operator-() const;
  QuantumPotential scaled(const Scalar& c) const;
  friend bool operator==(const QuantumPotential& a, const QuantumPotential& b) = default;

  std::string str() const;
};

// anchor choices per cycle kind: 2-cycles average both anchorings, degenerate
// 4-cycles start at an arrow out of the centre, the rest are anchor-free
QuantumPotential quantise_cycle(const Cycle& c);           // NotAnIMDCycle
QuantumPotential quantise_imd(const Potential& w);         // NotAnIMDCycle

struct QuantumIMDPotential {
  QuantumPotential w4, w3, w2;
  QuantumPotential total() const;
};

QuantumIMDPotential quantise_imd(const IMDPotential& w);

WeylElement quantum_trace(const AnchoredCycle& c, const WeylAlgebra& alg);
WeylElement quantum_trace(const QuantumPotential& p, const WeylAlgebra& alg);

// forgets anchors; requires an empty products field
Potential semiclassical(const QuantumPotential& p);

// Tr(c) - Tr(c rotated to start at new_anchor), as a combination of traces
// of total word length l(c) - 2 plus dimension constants
QuantumPotential change_anchor(const AnchoredCycle& c, std::size_t new_anchor,
                               const KPartiteGraph& g, const SymplecticData& s);

// combinatorial commutator of quantum traces; supported inputs are quantised
// IMD cycles, everything else raises UnsupportedPair
QuantumPotential quantum_cycle_commutator(const AnchoredCycle& c1, const AnchoredCycle& c2,
                                          const SymplecticData& s);

}  // namespace iso
