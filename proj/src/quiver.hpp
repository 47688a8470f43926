#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "scalars.hpp"

namespace iso {

using NodeId = std::uint32_t;
using PartId = std::uint32_t;

struct Arrow {
  NodeId tail = 0, head = 0;

  friend bool operator==(const Arrow& a, const Arrow& b) = default;
  friend auto operator<=>(const Arrow& a, const Arrow& b) = default;
  Arrow reversed() const { return Arrow{head, tail}; }
};

// per-part reading value: a finite Scalar or the infinity tag
struct ReadingValue {
  bool is_inf = false;
  Scalar value;

  static ReadingValue inf() { return ReadingValue{true, Scalar(0)}; }
  static ReadingValue at(Scalar v) { return ReadingValue{false, std::move(v)}; }
};

struct Reading {
  std::vector<ReadingValue> values;  // indexed by part
  std::optional<PartId> inf_part;
  // ∞ part ranks first, remaining parts keep their listed order
  std::vector<std::uint32_t> part_ranks;

  bool generic() const { return !inf_part.has_value(); }
  std::uint32_t rank(PartId p) const { return part_ranks.at(p); }
};

class KPartiteGraph {
 public:
  KPartiteGraph(std::vector<PartId> node_parts, std::vector<std::uint32_t> dims,
                std::vector<Scalar> times, std::uint32_t num_parts);

  std::uint32_t num_parts() const { return static_cast<std::uint32_t>(parts_.size()); }
  std::uint32_t num_nodes() const { return static_cast<std::uint32_t>(node_parts_.size()); }
  PartId part(NodeId i) const { return node_parts_.at(i); }
  std::uint32_t dim(NodeId i) const { return dims_.at(i); }
  const Scalar& time(NodeId i) const { return times_.at(i); }
  bool time_frozen(NodeId i) const { return times_.at(i).is_constant(); }
  const std::vector<NodeId>& nodes_in_part(PartId p) const { return parts_.at(p); }
  bool adjacent(NodeId i, NodeId j) const {
    return node_parts_.at(i) != node_parts_.at(j);
  }
  // both orientations of every edge, deterministic order
  std::vector<Arrow> all_arrows() const;

  void set_time(NodeId i, Scalar t) { times_.at(i) = std::move(t); }

 private:
  std::vector<PartId> node_parts_;
  std::vector<std::uint32_t> dims_;
  std::vector<Scalar> times_;
  std::vector<std::vector<NodeId>> parts_;
};

struct GraphAndReading {
  KPartiteGraph graph;
  Reading reading;
};

// reading entries: a Scalar per part, or std::nullopt for ∞ (at most one)
GraphAndReading build_graph(const std::vector<std::uint32_t>& part_sizes,
                            const std::vector<std::uint32_t>& dims,
                            const std::vector<std::optional<Scalar>>& reading,
                            const std::string& time_prefix = "t");

Scalar phi_weight(const KPartiteGraph& g, const Reading& r, NodeId i, NodeId j);

// unit: every pair constant is 1 (simplified Darboux coordinates).
// phi_inverse: the pair constant is the reading weight of the positive
// arrow, phi_{part(tail) part(head)}.  This is the choice under which the
// Hamiltonians commute for generic readings; the two agree on a star,
// where every weight out of the infinity part is 1.
enum class Convention { unit, phi_inverse };

// chosen positive arrow and bracket constant per adjacent node pair
class SymplecticData {
 public:
  void add(Arrow positive, Scalar c);
  const Arrow& positive(NodeId i, NodeId j) const;
  bool is_positive(const Arrow& a) const;
  // signed constant for {X^a, X^{a*}}: +c if a is the positive arrow, else -c
  Scalar constant(const Arrow& a) const;

 private:
  std::map<std::pair<NodeId, NodeId>, std::pair<Arrow, Scalar>> pairs_;
};

SymplecticData default_symplectic(const KPartiteGraph& g, const Reading& r,
                                  Convention convention);

}  // namespace iso
