#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "flatness.hpp"

using namespace iso;

namespace {

std::optional<Scalar> inf() { return std::nullopt; }
std::optional<Scalar> at(const std::string& text) { return Scalar::parse(text); }

}  // namespace

TEST_CASE("classical flatness on a three-legged star") {
  auto [g, r] = build_graph({1, 3}, {2, 1, 1, 1}, {inf(), at("0")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);
  FlatnessReport rep = check_classical_flatness(g, r, s);
  CHECK(rep.flat);
  CHECK(rep.all_exact);
  // the centre time is frozen, so only the three legs carry flows
  REQUIRE(rep.pairs.size() == 3);
  for (const PairCheck& pc : rep.pairs) {
    CHECK(pc.curl_ok);
    CHECK(pc.commute_ok);
    CHECK(pc.curl_residue == "0");
    CHECK(pc.commutator_residue == "0");
  }

  // two leg Hamiltonians meet through three same-centre degenerate pairs
  const PairCheck& p12 = rep.pairs[0];
  REQUIRE(p12.i == 1);
  REQUIRE(p12.j == 2);
  IntersectionKey key{CycleKind::degenerate_four, CycleKind::degenerate_four, 1, true};
  CHECK(p12.intersections.at(key) == 3);

  CHECK(rep.str().find("summary: flat") != std::string::npos);
}

TEST_CASE("classical flatness on a generic triangle") {
  auto [g, r] = build_graph({1, 1, 1}, {1, 1, 1}, {at("a_1"), at("a_2"), at("a_3")});
  SymplecticData s = default_symplectic(g, r, Convention::phi_inverse);
  FlatnessReport rep = check_classical_flatness(g, r, s);
  CHECK(rep.flat);
  CHECK(rep.pairs.size() == 3);
  for (const PairCheck& pc : rep.pairs) CHECK(pc.intersections.size() > 0);
}

TEST_CASE("corrupting one 4-cycle weight surfaces a residue") {
  auto [g, r] = build_graph({1, 3}, {2, 1, 1, 1}, {inf(), at("0")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);
  Potential w1 = imd_potential(g, r, 1).total();
  auto it = std::find_if(w1.begin(), w1.end(),
                         [](const auto& kv) { return kv.first.length() == 4; });
  REQUIRE(it != w1.end());
  it->second = it->second * Scalar(2);

  FlatnessReport rep = check_connection(g, r, s, {{NodeId{1}, w1}});
  CHECK_FALSE(rep.flat);
  bool saw_commutator_residue = false;
  for (const PairCheck& pc : rep.pairs)
    if (!pc.commute_ok) {
      saw_commutator_residue = true;
      CHECK(pc.commutator_residue != "0");
      CHECK(pc.i == 1);  // only pairs through the corrupted node can break
    }
  CHECK(saw_commutator_residue);
  CHECK(rep.str().find("NOT flat") != std::string::npos);
  CHECK(rep.str().find("residue") != std::string::npos);
}

TEST_CASE("quantum flatness on a two-legged star") {
  auto [g, r] = build_graph({1, 2}, {2, 1, 1}, {inf(), at("0")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);
  FlatnessReport rep = check_quantum_flatness(g, r, s);
  CHECK(rep.flat);
  CHECK(rep.all_exact);
  REQUIRE(rep.pairs.size() == 1);  // the single active pair of leg times
  CHECK(rep.pairs[0].i == 1);
  CHECK(rep.pairs[0].j == 2);
  CHECK(rep.pairs[0].curl_ok);
  CHECK(rep.pairs[0].commute_ok);
  CHECK(rep.pairs[0].exact);
}

TEST_CASE("quantum flatness on generic bipartite 2x2, all dims 1") {
  auto [g, r] = build_graph({2, 2}, {1, 1, 1, 1}, {at("a_1"), at("a_2")});
  SymplecticData s = default_symplectic(g, r, Convention::phi_inverse);
  FlatnessReport rep = check_quantum_flatness(g, r, s);
  CHECK(rep.flat);
  CHECK(rep.all_exact);
  REQUIRE(rep.pairs.size() == 6);
  for (const PairCheck& pc : rep.pairs) {
    CHECK(pc.curl_ok);
    CHECK(pc.commute_ok);
  }
}

TEST_CASE("moving a degenerate anchor off centre breaks bipartite flatness") {
  auto [g, r] = build_graph({2, 2}, {1, 1, 1, 1}, {at("a_1"), at("a_2")});
  SymplecticData s = default_symplectic(g, r, Convention::phi_inverse);
  WeylAlgebra alg(g, r, s);

  IMDPotential w0 = imd_potential(g, r, 0);
  QuantumPotential bad;
  bool moved = false;
  for (const auto& [c, wt] : w0.w4) {
    CycleClass cls = classify_cycle(c);
    if (!moved && cls.kind == CycleKind::degenerate_four) {
      const std::vector<Arrow>& arr = c.arrows();
      std::size_t k = 0;
      while (arr[k].tail != *cls.center) ++k;
      bad.add_term(AnchoredCycle(c, (k + 1) % 4), wt);  // anchored into the centre
      moved = true;
    } else {
      bad = bad + quantise_cycle(c).scaled(wt);
    }
  }
  REQUIRE(moved);
  QuantumIMDPotential q0 = quantise_imd(w0);
  WeylElement good = quantum_trace(q0.total(), alg);
  q0.w4 = bad;
  WeylElement h0 = quantum_trace(q0.total(), alg);
  REQUIRE(h0 != good);

  FlatnessReport rep = check_connection(g, r, s, {{NodeId{0}, h0}});
  CHECK_FALSE(rep.flat);
  bool broke = false;
  for (const PairCheck& pc : rep.pairs)
    if (pc.i == 0 && !pc.commute_ok) broke = true;
  CHECK(broke);
}

TEST_CASE("connection override battery") {
  auto [g, r] = build_graph({1, 2}, {2, 1, 1}, {inf(), at("0")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);
  WeylAlgebra alg(g, r, s);

  SUBCASE("zero Hamiltonians are trivially flat") {
    std::vector<std::pair<NodeId, WeylElement>> zeros;
    for (NodeId i = 0; i < 3; ++i) zeros.emplace_back(i, alg.zero());
    FlatnessReport rep = check_connection(g, r, s, zeros);
    CHECK(rep.flat);
    CHECK(rep.pairs.size() == 3);
    for (const PairCheck& pc : rep.pairs) CHECK(pc.intersections.empty());
  }

  SUBCASE("overriding with the stock Hamiltonian changes nothing") {
    WeylElement h1 = quantum_trace(quantise_imd(imd_potential(g, r, 1)).total(), alg);
    FlatnessReport rep = check_connection(g, r, s, {{NodeId{1}, h1}});
    CHECK(rep.flat);
  }

  SUBCASE("unknown node is rejected") {
    CHECK_THROWS_AS(check_connection(g, r, s, {{NodeId{7}, alg.zero()}}), Error);
  }
}

TEST_CASE("term budget and the sampling fallback") {
  auto [g, r] = build_graph({1, 2}, {2, 1, 1}, {inf(), at("0")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);

  FlatnessOptions tight;
  tight.max_terms = 1;
  tight.allow_fallback = false;
  CHECK_THROWS_AS(check_quantum_flatness(g, r, s, tight), ResourceLimit);

  tight.allow_fallback = true;
  tight.seed = 42;
  FlatnessReport rep = check_quantum_flatness(g, r, s, tight);
  CHECK(rep.flat);
  CHECK_FALSE(rep.all_exact);
  for (const PairCheck& pc : rep.pairs) {
    CHECK(pc.commute_ok);
    CHECK_FALSE(pc.exact);
  }

  // deterministic in the seed
  FlatnessReport again = check_quantum_flatness(g, r, s, tight);
  REQUIRE(again.pairs.size() == rep.pairs.size());
  for (std::size_t k = 0; k < rep.pairs.size(); ++k) {
    CHECK(again.pairs[k].commute_ok == rep.pairs[k].commute_ok);
    CHECK(again.pairs[k].commutator_residue == rep.pairs[k].commutator_residue);
  }

  tight.seed = 7;
  CHECK(check_quantum_flatness(g, r, s, tight).flat);
}

TEST_CASE("a single nonzero sample certifies failure") {
  auto [g, r] = build_graph({2, 2}, {1, 1, 1, 1}, {at("a_1"), at("a_2")});
  SymplecticData s = default_symplectic(g, r, Convention::phi_inverse);
  WeylAlgebra alg(g, r, s);

  IMDPotential w0 = imd_potential(g, r, 0);
  QuantumPotential bad;
  bool moved = false;
  for (const auto& [c, wt] : w0.w4) {
    CycleClass cls = classify_cycle(c);
    if (!moved && cls.kind == CycleKind::degenerate_four) {
      const std::vector<Arrow>& arr = c.arrows();
      std::size_t k = 0;
      while (arr[k].tail != *cls.center) ++k;
      bad.add_term(AnchoredCycle(c, (k + 1) % 4), wt);
      moved = true;
    } else {
      bad = bad + quantise_cycle(c).scaled(wt);
    }
  }
  REQUIRE(moved);
  QuantumIMDPotential q0 = quantise_imd(w0);
  q0.w4 = bad;
  WeylElement h0 = quantum_trace(q0.total(), alg);

  FlatnessOptions tight;
  tight.max_terms = 1;
  tight.seed = 3;
  FlatnessReport rep = check_connection(g, r, s, {{NodeId{0}, h0}}, tight);
  CHECK_FALSE(rep.flat);
  CHECK_FALSE(rep.all_exact);
}
