#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "anchored.hpp"
#include "cycles.hpp"
#include "quiver.hpp"
#include "scalars.hpp"
#include "weyl.hpp"

namespace iso {

// elementary matrix generator e(factor, row, col) of a tuple of gl's;
// everything is 1-based to match the printed form
struct EGen {
  std::uint32_t factor = 1;
  std::uint32_t row = 1, col = 1;

  friend bool operator==(const EGen& a, const EGen& b) = default;
  friend auto operator<=>(const EGen& a, const EGen& b) = default;
  std::string str() const;
};

using EWord = std::vector<EGen>;  // normal form: non-decreasing in EGen order

// element of the enveloping algebra of a direct sum of gl factors, kept in
// PBW normal form w.r.t. the EGen order; generators of distinct factors
// commute, within a factor [e(jk), e(lm)] = δ_kl e(jm) − δ_mj e(lk)
class UEnvElement {
 public:
  UEnvElement() = default;  // zero

  static UEnvElement constant(const Scalar& c);
  static UEnvElement generator(EGen g);

  bool is_zero() const { return terms_.empty(); }
  const std::map<EWord, Scalar>& terms() const { return terms_; }
  Scalar constant_part() const;

  friend UEnvElement operator+(const UEnvElement& a, const UEnvElement& b);
  friend UEnvElement operator-(const UEnvElement& a, const UEnvElement& b);
  UEnvElement operator-() const;
  UEnvElement scaled(const Scalar& c) const;
  friend bool operator==(const UEnvElement& a, const UEnvElement& b) = default;

  // coefficient-wise partial derivative
  UEnvElement derivative(SymbolId s) const;

  std::string str() const;

  // internal: w must already be sorted
  void add_normal(EWord w, Scalar c);

 private:
  std::map<EWord, Scalar> terms_;
};

UEnvElement uenv_mul(const UEnvElement& x, const UEnvElement& y);
UEnvElement uenv_commutator(const UEnvElement& x, const UEnvElement& y);

std::size_t uenv_order(const UEnvElement& x);  // ZeroElement

// commutative polynomial in the same generators
using SMono = std::vector<std::pair<EGen, std::uint32_t>>;  // sorted by EGen

class SymElement {
 public:
  SymElement() = default;  // zero

  static SymElement constant(const Scalar& c);
  static SymElement generator(EGen g);

  bool is_zero() const { return terms_.empty(); }
  const std::map<SMono, Scalar>& terms() const { return terms_; }
  Scalar constant_part() const;

  friend SymElement operator+(const SymElement& a, const SymElement& b);
  friend SymElement operator-(const SymElement& a, const SymElement& b);
  friend SymElement operator*(const SymElement& a, const SymElement& b);
  SymElement operator-() const;
  SymElement scaled(const Scalar& c) const;
  friend bool operator==(const SymElement& a, const SymElement& b) = default;

  SymElement derivative(SymbolId s) const;

  std::string str() const;

  void add(SMono m, const Scalar& c);

 private:
  std::map<SMono, Scalar> terms_;
};

// symmetrisation: each degree-n monomial goes to the average of its n!
// operator orderings
UEnvElement pbw_quantise(const SymElement& x);

// top-order slice, as a commutative polynomial; ZeroElement on zero
SymElement semiclassical_limit(const UEnvElement& x);

// split by PBW word length
std::map<std::size_t, UEnvElement> uenv_grade(const UEnvElement& x);

// quadratic Casimir Σ_{j,k} e(jk) e(kj) of gl_d, on the given factor
UEnvElement casimir_omega(std::uint32_t d, std::uint32_t factor = 1);  // BadDimension

// the two-factor mixed term Σ_{j,k} e(i,j,k) e(n,k,j)
UEnvElement casimir_omega_pair(std::uint32_t i, std::uint32_t n, std::uint32_t d);

enum class NamedSystem { schlesinger, kz, dual_schlesinger, dmt, jmms, fmtv };

// one entry per equation; classical systems fill `classical`, quantum ones
// fill `quantum`; `times` lists the deformation-time symbols in the same
// order as the equations
struct NamedHamiltonians {
  std::vector<SymElement> classical;
  std::vector<UEnvElement> quantum;
  std::vector<Scalar> times;
};

// schlesinger/kz: m gl_d factors, times t_1..t_m.
// dual_schlesinger/dmt: one gl_d factor (m must be 1), times t_1..t_d.
// jmms/fmtv: m gl_d factors, equations for the m symbols tinf_1..tinf_m
// followed by the d symbols t0_1..t0_d.
NamedHamiltonians named_hamiltonians(NamedSystem sys, std::uint32_t m,
                                     std::uint32_t d);  // BadDimension

// which matrix algebra the generators of a moment-map pullback live in, on a
// two-part graph:
//   hub        factor i acts on the singleton ("hub") node's space and maps
//              through the i-th peripheral node:
//              e(i,j,k) -> Σ_m X[leg_i->hub](j,m) X[hub->leg_i](m,k)
//   per_leg    factor i acts on the i-th peripheral node's own space:
//              e(i,k,l) -> Σ_n X[hub->leg_i](k,n) X[leg_i->hub](n,l)
//   leg_labels factor i maps through the i-th node of the first part; the
//              matrix indices label the second part's nodes (all of dim 1):
//              e(i,j,k) -> Σ_a X[first_i->second_j](1,a) X[second_k->first_i](a,1)
enum class MomentSide { hub, per_leg, leg_labels };

// hub/per_leg need one singleton part (the first one if both are); all
// violations of the shape or index ranges raise DimensionMismatch
TracePolynomial classical_moment_pullback(const SymElement& x, const KPartiteGraph& g,
                                          MomentSide side = MomentSide::hub);

// same generator images with X replaced by the quantised coordinates; each
// normal-form word maps to the ordered product of its letters' images
WeylElement quantum_moment_pullback(const UEnvElement& x, const WeylAlgebra& alg,
                                    MomentSide side = MomentSide::hub);

struct HoweReport {
  std::size_t pairs_checked = 0;
  bool quantum_all_zero = true;
  bool classical_all_zero = true;
  std::vector<std::string> failures;
};

// commutators between every hub-side generator image and every per-leg-side
// generator image, plus the Poisson brackets of their classical shadows
HoweReport howe_commutation_check(const WeylAlgebra& alg);  // DimensionMismatch

struct ReductionOptions {
  std::size_t order_cap = 6;
  std::size_t max_rows = 20000;
};

struct QuantumCoset {
  WeylElement representative;
  bool in_ideal = false;  // representative reduced to zero
  std::size_t order_cap = 6;
};

// reduce x modulo the left ideal generated by the per-leg images of
// ideal_generators, after checking that x commutes with every per-leg
// generator image (NotInvariant otherwise); membership is decided by linear
// algebra over words of length up to order_cap (ResourceLimit when x itself
// is deeper than the cap)
QuantumCoset quantum_reduction_project(const WeylElement& x,
                                       const std::vector<UEnvElement>& ideal_generators,
                                       const WeylAlgebra& alg,
                                       const ReductionOptions& opt = {});

enum class CorrectionCase { dual_star, bipartite };

// the re-anchored connection: every cycle word is written starting from a
// node of the second part, instead of the symmetrised/centre anchoring the
// quantised potentials use.  dual_star: one hub (first part) and dim-1 legs,
// one equation per leg.  bipartite: all dims 1, equations for the first part
// then the second.
std::vector<std::pair<NodeId, WeylElement>> corrected_connection(
    CorrectionCase c, const GraphAndReading& gr, const WeylAlgebra& alg);

// corrected minus plain, same order as corrected_connection
std::vector<WeylElement> correction_difference(CorrectionCase c, const GraphAndReading& gr,
                                               const WeylAlgebra& alg);

// polynomial differential operator on the edge coordinates of a dims-1
// graph: a sum of (multiply by positions) ∘ (differentiate) monomials
class DiffOp {
 public:
  using QMono = std::vector<Arrow>;  // sorted, with multiplicity
  using Key = std::pair<QMono, QMono>;  // (multiplications, derivatives)

  DiffOp() = default;  // zero

  static DiffOp constant(const Scalar& c);

  bool is_zero() const { return terms_.empty(); }
  const std::map<Key, Scalar>& terms() const { return terms_; }

  friend DiffOp operator+(const DiffOp& a, const DiffOp& b);
  friend DiffOp operator-(const DiffOp& a, const DiffOp& b);
  DiffOp operator-() const;
  DiffOp scaled(const Scalar& c) const;
  friend bool operator==(const DiffOp& a, const DiffOp& b) = default;

  std::string str() const;

  void add(QMono q, QMono d, const Scalar& c);

 private:
  std::map<Key, Scalar> terms_;
};

// operator composition a ∘ b
DiffOp diffop_mul(const DiffOp& a, const DiffOp& b);

// one position arrow per edge, walking the nodes as a ring: edge {i, j} with
// i < j gets i->j, except {0, last} which gets last->0
std::vector<Arrow> cyclic_orientation(const KPartiteGraph& g);

// positions become multiplication operators, their reverses become
// -c(position) ∂; a generator on an edge with no chosen position, or a
// duplicated edge in `positions`, raises OrientationMismatch
DiffOp weyl_to_diffop(const WeylElement& x, const std::vector<Arrow>& positions,
                      const WeylAlgebra& alg);

// apply to a polynomial in the position coordinates X[pos](1,1)
TracePolynomial diffop_apply(const DiffOp& op, const TracePolynomial& f);

}  // namespace iso
