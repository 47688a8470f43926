#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quiver.hpp"

namespace iso {

// oriented cycle up to rotation; stored as the lexicographically minimal
// rotation of its arrow word in application order (arrows()[0] acts first)
class Cycle {
 public:
  explicit Cycle(std::vector<Arrow> arrows);

  const std::vector<Arrow>& arrows() const { return w_; }
  std::size_t length() const { return w_.size(); }
  bool has_antiparallel_pair() const;
  std::vector<NodeId> nodes() const;  // tail of each arrow in storage order

  friend bool operator==(const Cycle& a, const Cycle& b) { return a.w_ == b.w_; }
  friend auto operator<=>(const Cycle& a, const Cycle& b) { return a.w_ <=> b.w_; }

  std::string str() const;

 private:
  std::vector<Arrow> w_;
};

enum class CycleKind : std::uint8_t {
  two_cycle = 0,
  three_cycle = 1,
  degenerate_four = 2,
  nondegenerate_four = 3,
  other = 4,
};

struct CycleClass {
  CycleKind kind;
  std::optional<NodeId> center;  // for degenerate_four
  std::size_t length;
};

CycleClass classify_cycle(const Cycle& c);

using Potential = std::map<Cycle, Scalar>;

void add_term(Potential& p, const Cycle& c, const Scalar& w);
Potential potential_sum(const Potential& a, const Potential& b);
Potential potential_scale(const Potential& p, const Scalar& w);
std::string potential_str(const Potential& p);

struct IMDPotential {
  Potential w4, w3, w2;
  Potential total() const;
};

// the three graded pieces (W_i(4), W_i(3), W_i(2)) of node i's potential
IMDPotential imd_potential(const KPartiteGraph& g, const Reading& r, NodeId i);

Potential necklace_bracket(const Cycle& c1, const Cycle& c2, const SymplecticData& s);
Potential necklace_bracket(const Potential& p1, const Potential& p2,
                           const SymplecticData& s);

Potential potential_time_derivative(const Potential& w, SymbolId t);

// matrix-entry variable X^arrow_{row,col}, rows indexing the head space (1-based)
struct Coord {
  Arrow arrow;
  std::uint32_t row = 1, col = 1;

  friend bool operator==(const Coord& a, const Coord& b) = default;
  friend auto operator<=>(const Coord& a, const Coord& b) = default;
  std::string str() const;
};

// commutative polynomial in the X^arrow_{row,col} with Scalar coefficients
class TracePolynomial {
 public:
  using Mono = std::vector<std::pair<Coord, std::uint32_t>>;  // sorted by Coord

  TracePolynomial() = default;
  static TracePolynomial constant(const Scalar& c);
  static TracePolynomial coordinate(const Coord& x);

  bool is_zero() const { return terms_.empty(); }
  const std::map<Mono, Scalar>& terms() const { return terms_; }

  friend TracePolynomial operator+(const TracePolynomial& a, const TracePolynomial& b);
  friend TracePolynomial operator-(const TracePolynomial& a, const TracePolynomial& b);
  friend TracePolynomial operator*(const TracePolynomial& a, const TracePolynomial& b);
  TracePolynomial operator-() const;
  TracePolynomial scaled(const Scalar& c) const;
  friend bool operator==(const TracePolynomial& a, const TracePolynomial& b) = default;

  TracePolynomial derivative(const Coord& x) const;
  std::set<Coord> support() const;
  void add(const Mono& m, const Scalar& c);
  std::string str() const;

 private:
  std::map<Mono, Scalar> terms_;
};

TracePolynomial trace(const Cycle& c, const KPartiteGraph& g);
TracePolynomial trace(const Potential& p, const KPartiteGraph& g);

TracePolynomial poisson_bracket_oracle(const TracePolynomial& f, const TracePolynomial& g,
                                       const SymplecticData& s);

// ---- intersection census ---------------------------------------------------

struct IntersectionKey {
  CycleKind k1, k2;            // sorted, k1 <= k2
  std::uint32_t shared_edges;  // distinct edges carrying an antiparallel shared pair
  bool centers_equal;          // degenerate/degenerate pairs only, else false

  friend bool operator==(const IntersectionKey& a, const IntersectionKey& b) = default;
  friend auto operator<=>(const IntersectionKey& a, const IntersectionKey& b) = default;
  std::string str() const;
};

// classification of the pair, or nullopt when the cycles share no
// antiparallel arrow pair
std::optional<IntersectionKey> intersection_key(const Cycle& c1, const Cycle& c2);

struct CensusClassInfo {
  IntersectionKey key;
  std::size_t pair_count = 0;
  bool bracket_nonzero = false;
  bool result_antiparallel_free = false;  // nonzero and every result cycle pair-free
};

struct CensusReport {
  std::vector<CensusClassInfo> classes;
  std::size_t class_count = 0;
  std::size_t nonzero_count = 0;
  std::size_t antiparallel_free_count = 0;
};

std::vector<Cycle> imd_cycles(const KPartiteGraph& g, const Reading& r);
CensusReport intersection_census(const KPartiteGraph& g, const Reading& r,
                                 const SymplecticData& s);

}  // namespace iso
