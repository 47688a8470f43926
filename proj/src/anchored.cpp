#include "anchored.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"

namespace iso {

namespace {

// split w = A·B at l; the swap to B·A is admissible when no arrow of A
// has its antiparallel partner in B (a symmetric condition)
bool swap_admissible(const std::vector<Arrow>& w, std::size_t l) {
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = l; j < w.size(); ++j)
      if (w[j] == w[i].reversed()) return false;
  return true;
}

}  // namespace

AnchoredCycle::AnchoredCycle(std::vector<Arrow> word) : w_(std::move(word)) {
  static_cast<void>(Cycle(w_));  // validates composability, rejects loops
  canonicalize();
}

AnchoredCycle::AnchoredCycle(const Cycle& c, std::size_t anchor) : w_(c.arrows()) {
  if (anchor >= w_.size()) throw std::out_of_range("anchor index out of range");
  std::rotate(w_.begin(), w_.begin() + static_cast<std::ptrdiff_t>(anchor), w_.end());
  canonicalize();
}

void AnchoredCycle::canonicalize() {
  // every admissible swap is a rotation, so the class has at most l(w) members
  std::set<std::vector<Arrow>> seen{w_};
  std::vector<std::vector<Arrow>> frontier{w_};
  while (!frontier.empty()) {
    std::vector<std::vector<Arrow>> next;
    for (const auto& w : frontier)
      for (std::size_t l = 1; l < w.size(); ++l) {
        if (!swap_admissible(w, l)) continue;
        std::vector<Arrow> r(w.begin() + static_cast<std::ptrdiff_t>(l), w.end());
        r.insert(r.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(l));
        if (seen.insert(r).second) next.push_back(std::move(r));
      }
    frontier = std::move(next);
  }
  w_ = *seen.begin();
}

std::string AnchoredCycle::str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t k = 0; k < w_.size(); ++k) {
    if (k) os << " ";
    os << w_[k].tail << ">" << w_[k].head;
  }
  os << "]";
  return os.str();
}

void QuantumPotential::add_term(const AnchoredCycle& c, const Scalar& w) {
  if (w.is_zero()) return;
  auto [it, inserted] = terms.emplace(c, w);
  if (!inserted) {
    it->second += w;
    if (it->second.is_zero()) terms.erase(it);
  }
}

void QuantumPotential::add_product(std::vector<AnchoredCycle> cs, const Scalar& w) {
  if (w.is_zero()) return;
  auto [it, inserted] = products.emplace(std::move(cs), w);
  if (!inserted) {
    it->second += w;
    if (it->second.is_zero()) products.erase(it);
  }
}

QuantumPotential operator+(const QuantumPotential& a, const QuantumPotential& b) {
  QuantumPotential out = a;
  for (const auto& [c, w] : b.terms) out.add_term(c, w);
  for (const auto& [cs, w] : b.products) out.add_product(cs, w);
  out.constant += b.constant;
  return out;
}

QuantumPotential operator-(const QuantumPotential& a, const QuantumPotential& b) {
  return a + (-b);
}

QuantumPotential QuantumPotential::operator-() const { return scaled(Scalar(-1)); }

QuantumPotential QuantumPotential::scaled(const Scalar& c) const {
  QuantumPotential out;
  if (c.is_zero()) return out;
  for (const auto& [cyc, w] : terms) out.terms.emplace(cyc, w * c);
  for (const auto& [cs, w] : products) out.products.emplace(cs, w * c);
  out.constant = constant * c;
  return out;
}

std::string QuantumPotential::str() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  auto sep = [&] {
    if (!first) os << " + ";
    first = false;
  };
  for (const auto& [c, w] : terms) {
    sep();
    os << "(" << w.str() << ")*Tr" << c.str();
  }
  for (const auto& [cs, w] : products) {
    sep();
    os << "(" << w.str() << ")*";
    for (const auto& c : cs) os << "Tr" << c.str();
  }
  if (!constant.is_zero()) {
    sep();
    os << constant.str();
  }
  return os.str();
}

QuantumPotential quantise_cycle(const Cycle& c) {
  const CycleClass cls = classify_cycle(c);
  QuantumPotential out;
  switch (cls.kind) {
    case CycleKind::two_cycle: {
      const Scalar half{Rational(1, 2)};
      out.add_term(AnchoredCycle(c, 0), half);
      out.add_term(AnchoredCycle(c, 1), half);
      break;
    }
    case CycleKind::three_cycle:
    case CycleKind::nondegenerate_four:
      // no antiparallel pairs, so every anchoring is admissibly equal
      out.add_term(AnchoredCycle(c, 0), Scalar(1));
      break;
    case CycleKind::degenerate_four: {
      const auto& w = c.arrows();
      std::size_t k = 0;
      while (w[k].tail != *cls.center) ++k;
      out.add_term(AnchoredCycle(c, k), Scalar(1));
      break;
    }
    default:
      throw NotAnIMDCycle("cycle of length " + std::to_string(c.length()) +
                          " has no quantisation rule");
  }
  return out;
}

QuantumPotential quantise_imd(const Potential& w) {
  QuantumPotential out;
  for (const auto& [c, s] : w) out = out + quantise_cycle(c).scaled(s);
  return out;
}

QuantumPotential QuantumIMDPotential::total() const { return w4 + w3 + w2; }

QuantumIMDPotential quantise_imd(const IMDPotential& w) {
  return {quantise_imd(w.w4), quantise_imd(w.w3), quantise_imd(w.w2)};
}

WeylElement quantum_trace(const AnchoredCycle& c, const WeylAlgebra& alg) {
  const KPartiteGraph& g = alg.graph();
  const std::vector<Arrow>& w = c.word();
  const std::size_t m = w.size();
  std::vector<std::uint32_t> top(m);
  for (std::size_t k = 0; k < m; ++k) top[k] = g.dim(w[k].tail);
  std::vector<std::uint32_t> idx(m, 1);
  WeylElement out;
  for (;;) {
    // anchor applies first, hence is the rightmost factor
    std::vector<Coord> f;
    f.reserve(m);
    for (std::size_t k = m; k-- > 0;) f.push_back(Coord{w[k], idx[(k + 1) % m], idx[k]});
    out = out + alg.product(f, Scalar(1));
    std::size_t k = 0;
    while (k < m && idx[k] == top[k]) idx[k++] = 1;
    if (k == m) break;
    ++idx[k];
  }
  return out;
}

WeylElement quantum_trace(const QuantumPotential& p, const WeylAlgebra& alg) {
  WeylElement out = alg.constant(p.constant);
  for (const auto& [c, w] : p.terms) out = out + quantum_trace(c, alg).scaled(w);
  for (const auto& [cs, w] : p.products) {
    WeylElement prod = alg.constant(w);
    for (const auto& c : cs) prod = weyl_mul(prod, quantum_trace(c, alg));
    out = out + prod;
  }
  return out;
}

Potential semiclassical(const QuantumPotential& p) {
  if (!p.products.empty() || !p.constant.is_zero())
    throw Error("potential with products or a constant has no classical counterpart");
  Potential out;
  for (const auto& [c, w] : p.terms) add_term(out, c.underlying(), w);
  return out;
}

QuantumPotential change_anchor(const AnchoredCycle& c, std::size_t new_anchor,
                               const KPartiteGraph& g, const SymplecticData& s) {
  if (new_anchor >= c.length()) throw std::out_of_range("anchor index out of range");
  QuantumPotential out;
  std::vector<Arrow> w = c.word();
  // one rotation step at a time; each step contracts the old anchor against
  // its antiparallel occurrences, leaving the two arcs between them
  for (std::size_t step = 0; step < new_anchor; ++step) {
    const std::size_t n = w.size();
    for (std::size_t p = 1; p < n; ++p) {
      if (w[p] != w[0].reversed()) continue;
      const Scalar cc = s.constant(w[p]);
      std::vector<Arrow> arc1(w.begin() + static_cast<std::ptrdiff_t>(p) + 1, w.end());
      std::vector<Arrow> arc2(w.begin() + 1, w.begin() + static_cast<std::ptrdiff_t>(p));
      // an empty arc closes into the dimension of its junction node
      if (arc1.empty() && arc2.empty()) {
        out.constant += cc * Scalar(static_cast<long>(g.dim(w[0].tail))) *
                        Scalar(static_cast<long>(g.dim(w[0].head)));
      } else if (arc1.empty()) {
        out.add_term(AnchoredCycle(std::move(arc2)),
                     cc * Scalar(static_cast<long>(g.dim(w[0].tail))));
      } else if (arc2.empty()) {
        out.add_term(AnchoredCycle(std::move(arc1)),
                     cc * Scalar(static_cast<long>(g.dim(w[0].head))));
      } else {
        std::vector<AnchoredCycle> pair;
        pair.emplace_back(std::move(arc1));
        pair.emplace_back(std::move(arc2));
        out.add_product(std::move(pair), cc);
      }
    }
    std::rotate(w.begin(), w.begin() + 1, w.end());
  }
  return out;
}

namespace {

bool cycles_intersect(const Cycle& a, const Cycle& b) {
  for (const Arrow& x : a.arrows())
    for (const Arrow& y : b.arrows())
      if (x == y.reversed()) return true;
  return false;
}

// the two legs a degenerate 4-cycle hangs on its centre
std::array<NodeId, 2> centre_legs(const Cycle& u, NodeId ctr) {
  std::array<NodeId, 2> out{};
  std::size_t n = 0;
  for (const Arrow& a : u.arrows())
    if (a.tail == ctr && n < 2) out[n++] = a.head;
  return out;
}

// contraction expansion of [Tr(c1), Tr(c2)]; valid when c1 is a 2-cycle or
// free of antiparallel pairs
QuantumPotential glue_first(const AnchoredCycle& c1, const AnchoredCycle& c2,
                            const SymplecticData& s) {
  const std::vector<Arrow>& A = c1.word();
  const std::vector<Arrow>& B = c2.word();
  QuantumPotential out;
  for (std::size_t p = 0; p < A.size(); ++p)
    for (std::size_t q = 0; q < B.size(); ++q) {
      if (A[p] != B[q].reversed()) continue;
      std::vector<Arrow> w(B.begin(), B.begin() + static_cast<std::ptrdiff_t>(q));
      w.insert(w.end(), A.begin() + static_cast<std::ptrdiff_t>(p) + 1, A.end());
      w.insert(w.end(), A.begin(), A.begin() + static_cast<std::ptrdiff_t>(p));
      w.insert(w.end(), B.begin() + static_cast<std::ptrdiff_t>(q) + 1, B.end());
      out.add_term(AnchoredCycle(std::move(w)), s.constant(A[p]));
    }
  return out;
}

}  // namespace

QuantumPotential quantum_cycle_commutator(const AnchoredCycle& c1, const AnchoredCycle& c2,
                                          const SymplecticData& s) {
  const Cycle u1 = c1.underlying();
  const Cycle u2 = c2.underlying();
  const CycleClass k1 = classify_cycle(u1);
  const CycleClass k2 = classify_cycle(u2);
  if (k1.kind == CycleKind::other || k2.kind == CycleKind::other)
    throw UnsupportedPair("commutator expansion only covers cycles of length 2, 3, 4");
  QuantumPotential out;
  // anchorings of one cycle differ by central elements, so they commute
  if (u1 == u2) return out;
  if (!cycles_intersect(u1, u2)) return out;
  if (k1.kind == CycleKind::degenerate_four && k2.kind == CycleKind::degenerate_four) {
    if (*k1.center != *k2.center) return out;
    const NodeId ctr = *k1.center;
    const auto l1 = centre_legs(u1, ctr);
    const auto l2 = centre_legs(u2, ctr);
    const bool shared_first = l1[0] == l2[0] || l1[0] == l2[1];
    const NodeId common = shared_first ? l1[0] : l1[1];
    const NodeId other1 = shared_first ? l1[1] : l1[0];
    const NodeId other2 = l2[0] == common ? l2[1] : l2[0];
    const Arrow beta{ctr, common};
    const Arrow alpha{ctr, other1};
    const Arrow gamma{ctr, other2};
    const Scalar cb = s.constant(beta);
    out.add_term(AnchoredCycle({gamma, gamma.reversed(), beta, beta.reversed(), alpha,
                                alpha.reversed()}),
                 cb);
    out.add_term(AnchoredCycle({gamma, gamma.reversed(), alpha, alpha.reversed(), beta,
                                beta.reversed()}),
                 -cb);
    return out;
  }
  if (u1.length() == 2 || !u1.has_antiparallel_pair()) return glue_first(c1, c2, s);
  if (u2.length() == 2 || !u2.has_antiparallel_pair()) return -glue_first(c2, c1, s);
  throw UnsupportedPair("no expansion for this intersection pattern");
}

}  // namespace iso
