#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "anchored.hpp"

namespace iso {

struct FlatnessOptions {
  // budget on the term-pair count of one symbolic commutator expansion
  std::size_t max_terms = 400000;
  // when over budget: sample times and readings at distinct random rationals
  // (deterministic in the seed) instead of expanding symbolically
  bool allow_fallback = true;
  std::uint64_t seed = 1;
};

struct PairCheck {
  NodeId i = 0, j = 0;
  bool curl_ok = false;
  bool commute_ok = false;
  bool exact = true;  // false when the commutator was settled by sampling
  std::string curl_residue = "0";
  std::string commutator_residue = "0";
  // classical intersection classes met by the two potentials, with pair counts
  std::map<IntersectionKey, std::size_t> intersections;

  bool ok() const { return curl_ok && commute_ok; }
};

struct FlatnessReport {
  std::vector<PairCheck> pairs;  // sorted by (i, j), i < j
  bool flat = true;
  bool all_exact = true;

  std::string str() const;
};

// curl and Poisson brackets of the node potentials, all exact
FlatnessReport check_classical_flatness(const KPartiteGraph& g, const Reading& r,
                                        const SymplecticData& s);

// curl by coefficient differentiation and Weyl commutators of the quantised
// node Hamiltonians
FlatnessReport check_quantum_flatness(const KPartiteGraph& g, const Reading& r,
                                      const SymplecticData& s,
                                      const FlatnessOptions& opt = {});

// same battery with the listed nodes' Hamiltonians replaced by the supplied
// operators; an empty list reproduces check_quantum_flatness
FlatnessReport check_connection(const KPartiteGraph& g, const Reading& r,
                                const SymplecticData& s,
                                const std::vector<std::pair<NodeId, WeylElement>>& overrides,
                                const FlatnessOptions& opt = {});

// classical counterpart, for feeding modified potentials through the checker
FlatnessReport check_connection(const KPartiteGraph& g, const Reading& r,
                                const SymplecticData& s,
                                const std::vector<std::pair<NodeId, Potential>>& overrides);

}  // namespace iso
