#include "quiver.hpp"

#include <algorithm>

#include "errors.hpp"

namespace iso {

KPartiteGraph::KPartiteGraph(std::vector<PartId> node_parts,
                             std::vector<std::uint32_t> dims, std::vector<Scalar> times,
                             std::uint32_t num_parts)
    : node_parts_(std::move(node_parts)), dims_(std::move(dims)), times_(std::move(times)) {
  parts_.resize(num_parts);
  for (NodeId i = 0; i < node_parts_.size(); ++i) parts_[node_parts_[i]].push_back(i);
}

std::vector<Arrow> KPartiteGraph::all_arrows() const {
  std::vector<Arrow> out;
  for (NodeId i = 0; i < num_nodes(); ++i)
    for (NodeId j = 0; j < num_nodes(); ++j)
      if (i != j && adjacent(i, j)) out.push_back(Arrow{i, j});
  return out;
}

GraphAndReading build_graph(const std::vector<std::uint32_t>& part_sizes,
                            const std::vector<std::uint32_t>& dims,
                            const std::vector<std::optional<Scalar>>& reading,
                            const std::string& time_prefix) {
  if (part_sizes.empty()) throw EmptyPart("graph needs at least one part");
  if (reading.size() != part_sizes.size())
    throw InvalidReading("reading must assign one value per part");
  std::uint32_t n = 0;
  for (std::uint32_t s : part_sizes) {
    if (s == 0) throw EmptyPart("every part must be nonempty");
    n += s;
  }
  if (dims.size() != n) throw DimensionMismatch("need one dimension per node");
  for (std::uint32_t d : dims)
    if (d == 0) throw DimensionMismatch("dimensions must be positive");

  Reading r;
  for (PartId p = 0; p < reading.size(); ++p) {
    if (!reading[p].has_value()) {
      if (r.inf_part.has_value())
        throw InvalidReading("at most one part may be read as infinity");
      r.inf_part = p;
      r.values.push_back(ReadingValue::inf());
    } else {
      r.values.push_back(ReadingValue::at(*reading[p]));
    }
  }
  for (PartId p = 0; p < r.values.size(); ++p)
    for (PartId q = p + 1; q < r.values.size(); ++q) {
      if (r.values[p].is_inf || r.values[q].is_inf) continue;
      if (r.values[p].value == r.values[q].value)
        throw InvalidReading("reading values must be pairwise distinct");
    }
  r.part_ranks.resize(reading.size());
  {
    std::uint32_t next = 0;
    if (r.inf_part.has_value()) r.part_ranks[*r.inf_part] = next++;
    for (PartId p = 0; p < reading.size(); ++p)
      if (!r.inf_part || p != *r.inf_part) r.part_ranks[p] = next++;
  }

  std::vector<PartId> node_parts;
  node_parts.reserve(n);
  for (PartId p = 0; p < part_sizes.size(); ++p)
    for (std::uint32_t k = 0; k < part_sizes[p]; ++k) node_parts.push_back(p);

  // a degenerate reading on a bipartite graph freezes singleton-part times to 0
  // (the star normalizations T^0 = 0 and T^inf = 0); all other times are symbols
  bool freeze_singletons = !r.generic() && part_sizes.size() == 2;
  std::vector<Scalar> times;
  times.reserve(n);
  for (NodeId i = 0; i < n; ++i) {
    if (freeze_singletons && part_sizes[node_parts[i]] == 1)
      times.push_back(Scalar(0));
    else
      times.push_back(Scalar::sym(time_prefix + "_" + std::to_string(i + 1)));
  }

  return GraphAndReading{
      KPartiteGraph(std::move(node_parts), std::vector<std::uint32_t>(dims), std::move(times),
                    static_cast<std::uint32_t>(part_sizes.size())),
      std::move(r)};
}

Scalar phi_weight(const KPartiteGraph& g, const Reading& r, NodeId i, NodeId j) {
  PartId p = g.part(i), q = g.part(j);
  if (p == q) throw NotAdjacent("nodes in the same part are not adjacent");
  const ReadingValue& ap = r.values.at(p);
  const ReadingValue& aq = r.values.at(q);
  if (ap.is_inf) return Scalar(1);
  if (aq.is_inf) return Scalar(-1);
  return (ap.value - aq.value).inverse();
}

void SymplecticData::add(Arrow positive, Scalar c) {
  auto key = std::minmax(positive.tail, positive.head);
  pairs_[{key.first, key.second}] = {positive, std::move(c)};
}

const Arrow& SymplecticData::positive(NodeId i, NodeId j) const {
  auto key = std::minmax(i, j);
  auto it = pairs_.find({key.first, key.second});
  if (it == pairs_.end()) throw NotAdjacent("no symplectic pair for these nodes");
  return it->second.first;
}

bool SymplecticData::is_positive(const Arrow& a) const {
  return positive(a.tail, a.head) == a;
}

Scalar SymplecticData::constant(const Arrow& a) const {
  auto key = std::minmax(a.tail, a.head);
  auto it = pairs_.find({key.first, key.second});
  if (it == pairs_.end()) throw NotAdjacent("no symplectic pair for these nodes");
  return it->second.first == a ? it->second.second : -it->second.second;
}

SymplecticData default_symplectic(const KPartiteGraph& g, const Reading& r,
                                  Convention convention) {
  SymplecticData s;
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    for (NodeId j = i + 1; j < g.num_nodes(); ++j) {
      if (!g.adjacent(i, j)) continue;
      // positive arrow points from the lower-ranked part to the higher-ranked
      bool i_first = r.rank(g.part(i)) < r.rank(g.part(j));
      Arrow pos = i_first ? Arrow{i, j} : Arrow{j, i};
      Scalar c(1);
      if (convention == Convention::phi_inverse)
        c = phi_weight(g, r, pos.tail, pos.head);
      s.add(pos, std::move(c));
    }
  return s;
}

}  // namespace iso
