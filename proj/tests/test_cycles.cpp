#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "cycles.hpp"

using namespace iso;

namespace {

std::optional<Scalar> inf() { return std::nullopt; }
std::optional<Scalar> at(const std::string& text) { return Scalar::parse(text); }

Scalar S(const std::string& text) { return Scalar::parse(text); }

// all cycles of length <= max_len on g, up to rotation
std::vector<Cycle> enumerate_cycles(const KPartiteGraph& g, std::size_t max_len) {
  std::set<Cycle> out;
  std::vector<Arrow> walk;
  auto extend = [&](auto&& self, NodeId start, NodeId here) -> void {
    for (NodeId next = 0; next < g.num_nodes(); ++next) {
      if (!g.adjacent(here, next)) continue;
      walk.push_back(Arrow{here, next});
      if (next == start) out.insert(Cycle(walk));
      if (walk.size() < max_len) self(self, start, next);
      walk.pop_back();
    }
  };
  for (NodeId start = 0; start < g.num_nodes(); ++start) extend(extend, start, start);
  return std::vector<Cycle>(out.begin(), out.end());
}

}  // namespace

TEST_CASE("cycle canonicalization and rotation equality") {
  Cycle c1({Arrow{0, 1}, Arrow{1, 2}, Arrow{2, 0}});
  Cycle c2({Arrow{1, 2}, Arrow{2, 0}, Arrow{0, 1}});
  Cycle c3({Arrow{2, 0}, Arrow{0, 1}, Arrow{1, 2}});
  CHECK(c1 == c2);
  CHECK(c2 == c3);
  Cycle opposite({Arrow{0, 2}, Arrow{2, 1}, Arrow{1, 0}});
  CHECK(c1 != opposite);
  CHECK_THROWS_AS(Cycle({Arrow{0, 1}, Arrow{1, 2}}), Error);  // not closed
}

TEST_CASE("classification") {
  CHECK(classify_cycle(Cycle({Arrow{0, 1}, Arrow{1, 0}})).kind == CycleKind::two_cycle);
  CHECK(classify_cycle(Cycle({Arrow{0, 1}, Arrow{1, 2}, Arrow{2, 0}})).kind ==
        CycleKind::three_cycle);
  // beta* beta alpha* alpha with tail(alpha)=tail(beta)=0, head(alpha)=1, head(beta)=2
  Cycle deg({Arrow{0, 1}, Arrow{1, 0}, Arrow{0, 2}, Arrow{2, 0}});
  CycleClass dc = classify_cycle(deg);
  CHECK(dc.kind == CycleKind::degenerate_four);
  CHECK(dc.center == NodeId{0});
  CHECK(classify_cycle(Cycle({Arrow{0, 2}, Arrow{2, 1}, Arrow{1, 3}, Arrow{3, 0}})).kind ==
        CycleKind::nondegenerate_four);
  // 4-cycle touching only two nodes
  CHECK(classify_cycle(Cycle({Arrow{0, 1}, Arrow{1, 0}, Arrow{0, 1}, Arrow{1, 0}})).kind ==
        CycleKind::other);
  CHECK(deg.has_antiparallel_pair());
  CHECK_FALSE(Cycle({Arrow{0, 1}, Arrow{1, 2}, Arrow{2, 0}}).has_antiparallel_pair());
}

TEST_CASE("star potentials collapse to degenerate 4-cycles") {
  // centre node 0 (part read 0, time frozen), legs 1..3 read infinity
  auto [g, r] = build_graph({1, 3}, {2, 1, 1, 1}, {at("0"), inf()});
  IMDPotential w = imd_potential(g, r, 1);
  CHECK(w.w2.empty());  // weight is the frozen centre time
  CHECK(w.w3.empty());  // no 3-cycles in a bipartite graph
  CHECK(w.w4.size() == 2);
  Cycle c12({Arrow{1, 0}, Arrow{0, 2}, Arrow{2, 0}, Arrow{0, 1}});
  Cycle c13({Arrow{1, 0}, Arrow{0, 3}, Arrow{3, 0}, Arrow{0, 1}});
  CHECK(w.w4.at(c12) == S("1/(t_2 - t_3)"));
  CHECK(w.w4.at(c13) == S("1/(t_2 - t_4)"));
  // centre potential: only 2-cycles, weighted by the live leg times
  IMDPotential wc = imd_potential(g, r, 0);
  CHECK(wc.w4.empty());
  CHECK(wc.w3.empty());
  CHECK(wc.w2.size() == 3);
  CHECK(wc.w2.at(Cycle({Arrow{0, 1}, Arrow{1, 0}})) == S("t_2"));
}

TEST_CASE("bipartite degenerate potentials keep 2-cycle terms") {
  auto [g, r] = build_graph({2, 2}, {1, 1, 1, 1}, {inf(), at("0")});
  // nodes 0,1 read infinity; nodes 2,3 read 0; all times live
  IMDPotential w = imd_potential(g, r, 0);
  CHECK(w.w3.empty());
  CHECK(w.w2.size() == 2);
  CHECK(w.w2.at(Cycle({Arrow{0, 2}, Arrow{2, 0}})) == S("t_3"));
  CHECK(w.w2.at(Cycle({Arrow{0, 3}, Arrow{3, 0}})) == S("t_4"));
  // 4-cycle weights 1/(t_1 - t_2), including the degenerate j = l cases
  CHECK(w.w4.size() == 4);
  for (auto& [c, v] : w.w4) CHECK(v == S("1/(t_1 - t_2)"));
  // the sign convention for the other side: (-1)(-1) = +1
  IMDPotential w2 = imd_potential(g, r, 2);
  CHECK(w2.w4.size() == 4);
  for (auto& [c, v] : w2.w4) CHECK(v == S("1/(t_3 - t_4)"));
}

TEST_CASE("triangle potentials") {
  auto [g, r] = build_graph({1, 1, 1}, {1, 1, 1}, {at("a_1"), at("a_2"), at("a_3")});
  IMDPotential w = imd_potential(g, r, 0);
  CHECK(w.w4.empty());  // no second node in the part of node 0
  CHECK(w.w3.size() == 2);
  CHECK(w.w3.at(Cycle({Arrow{0, 1}, Arrow{1, 2}, Arrow{2, 0}})) == S("a_2 - a_3"));
  CHECK(w.w3.at(Cycle({Arrow{0, 2}, Arrow{2, 1}, Arrow{1, 0}})) == S("a_3 - a_2"));
  CHECK(w.w2.size() == 2);
  CHECK(w.w2.at(Cycle({Arrow{0, 1}, Arrow{1, 0}})) == S("t_1 - t_2"));
  CHECK(w.w2.at(Cycle({Arrow{0, 2}, Arrow{2, 0}})) == S("t_1 - t_3"));
}

TEST_CASE("unsupported degenerate readings") {
  auto [g, r] = build_graph({1, 1, 1}, {1, 1, 1}, {inf(), at("0"), at("1")});
  CHECK_THROWS_AS(imd_potential(g, r, 0), UnsupportedDegenerateReading);
}

TEST_CASE("trace expansion") {
  auto [g, r] = build_graph({1, 1}, {2, 2}, {at("a_1"), at("a_2")});
  Cycle two({Arrow{0, 1}, Arrow{1, 0}});
  TracePolynomial t = trace(two, g);
  CHECK(t.terms().size() == 4);
  // sum over k,l of X^{0>1}_{kl} X^{1>0}_{lk}
  TracePolynomial expected;
  for (std::uint32_t k = 1; k <= 2; ++k)
    for (std::uint32_t l = 1; l <= 2; ++l) {
      TracePolynomial m = TracePolynomial::coordinate(Coord{Arrow{0, 1}, k, l}) *
                          TracePolynomial::coordinate(Coord{Arrow{1, 0}, l, k});
      expected = expected + m;
    }
  CHECK(t == expected);

  auto [g1, r1] = build_graph({1, 1}, {1, 1}, {at("a_1"), at("a_2")});
  CHECK(trace(two, g1).terms().size() == 1);
  CHECK(trace(Potential{}, g1).is_zero());
}

TEST_CASE("poisson oracle basics") {
  auto [g, r] = build_graph({1, 1}, {1, 1}, {at("a_1"), at("a_2")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);
  TracePolynomial x = TracePolynomial::coordinate(Coord{Arrow{0, 1}, 1, 1});
  TracePolynomial y = TracePolynomial::coordinate(Coord{Arrow{1, 0}, 1, 1});
  CHECK(poisson_bracket_oracle(x, y, s) == TracePolynomial::constant(Scalar(1)));
  CHECK(poisson_bracket_oracle(y, x, s) == TracePolynomial::constant(Scalar(-1)));
  CHECK(poisson_bracket_oracle(x, x, s).is_zero());
}

TEST_CASE("necklace bracket basics") {
  auto [g, r] =
      build_graph({1, 1, 1, 1}, {1, 1, 1, 1}, {at("a_1"), at("a_2"), at("a_3"), at("a_4")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);

  Cycle c1({Arrow{0, 1}, Arrow{1, 0}});
  Cycle c2({Arrow{2, 3}, Arrow{3, 2}});
  CHECK(necklace_bracket(c1, c2, s).empty());  // disjoint

  Cycle tri({Arrow{0, 1}, Arrow{1, 2}, Arrow{2, 0}});
  CHECK(necklace_bracket(tri, tri, s).empty());  // antisymmetry

  // 2-cycle against a triangle through the same edge glues to the triangle
  Potential br = necklace_bracket(c1, tri, s);
  CHECK(br.size() == 1);
  CHECK(br.at(tri) == Scalar(-1));  // the 2-cycle contributes its 1->0 arrow, c = -1
}

TEST_CASE("degenerate 4-cycles sharing centre and a leg pair") {
  // centre 0; alpha: 0->1, beta: 0->2, gamma: 0->3
  auto [g, r] =
      build_graph({1, 1, 1, 1}, {2, 1, 1, 1}, {at("a_1"), at("a_2"), at("a_3"), at("a_4")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);
  Cycle c1({Arrow{0, 1}, Arrow{1, 0}, Arrow{0, 2}, Arrow{2, 0}});  // beta* beta alpha* alpha
  Cycle c2({Arrow{0, 3}, Arrow{3, 0}, Arrow{0, 2}, Arrow{2, 0}});  // beta* beta gamma* gamma
  Potential br = necklace_bracket(c1, c2, s);
  // value c.(alpha* alpha beta* beta gamma* gamma - beta* beta alpha* alpha gamma* gamma);
  // the two 6-cycles visit the petals in opposite cyclic orders, so they are
  // distinct classes and the bracket does not cancel
  Cycle v1({Arrow{0, 3}, Arrow{3, 0}, Arrow{0, 2}, Arrow{2, 0}, Arrow{0, 1}, Arrow{1, 0}});
  Cycle v2({Arrow{0, 3}, Arrow{3, 0}, Arrow{0, 1}, Arrow{1, 0}, Arrow{0, 2}, Arrow{2, 0}});
  CHECK(br.size() == 2);
  CHECK(br.at(v1) == Scalar(1));
  CHECK(br.at(v2) == Scalar(-1));
  // trace oracle agrees; with a 1-dimensional centre both traces coincide and
  // the bracket of the traces degenerates to zero
  auto [g1, r1] =
      build_graph({1, 1, 1, 1}, {1, 1, 1, 1}, {at("a_1"), at("a_2"), at("a_3"), at("a_4")});
  CHECK(poisson_bracket_oracle(trace(c1, g1), trace(c2, g1), s).is_zero());
  CHECK(trace(br, g1).is_zero());
  // with a 2-dimensional centre it does not vanish
  CHECK(!trace(br, g).is_zero());
  CHECK(poisson_bracket_oracle(trace(c1, g), trace(c2, g), s) == trace(br, g));
}

TEST_CASE("oracle equality on all cycle pairs of length up to 4") {
  auto [g, r] = build_graph({1, 1, 2}, {2, 1, 2, 2}, {at("a_1"), at("a_2"), at("a_3")});
  std::vector<Cycle> cycles = enumerate_cycles(g, 4);
  CHECK(cycles.size() > 20);
  for (Convention conv : {Convention::unit, Convention::phi_inverse}) {
    SymplecticData s = default_symplectic(g, r, conv);
    for (std::size_t i = 0; i < cycles.size(); ++i)
      for (std::size_t j = i; j < cycles.size(); ++j) {
        TracePolynomial lhs = trace(necklace_bracket(cycles[i], cycles[j], s), g);
        TracePolynomial rhs =
            poisson_bracket_oracle(trace(cycles[i], g), trace(cycles[j], g), s);
        REQUIRE(lhs == rhs);
      }
  }
}

TEST_CASE("necklace bracket antisymmetry and jacobi via the oracle") {
  auto [g, r] = build_graph({1, 1, 2}, {2, 1, 1, 2}, {at("a_1"), at("a_2"), at("a_3")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);
  std::vector<Cycle> cycles = enumerate_cycles(g, 3);
  for (std::size_t i = 0; i < cycles.size(); ++i)
    for (std::size_t j = i; j < cycles.size(); ++j) {
      Potential ab = necklace_bracket(cycles[i], cycles[j], s);
      Potential ba = necklace_bracket(cycles[j], cycles[i], s);
      CHECK(potential_sum(ab, ba).empty());
    }
  // jacobi on a few triples, checked after taking traces
  for (std::size_t i = 0; i < cycles.size(); i += 3)
    for (std::size_t j = i + 1; j < cycles.size(); j += 3)
      for (std::size_t k = j + 1; k < cycles.size(); k += 3) {
        Potential pj = potential_sum(
            potential_sum(
                necklace_bracket(necklace_bracket(cycles[i], cycles[j], s),
                                 Potential{{cycles[k], Scalar(1)}}, s),
                necklace_bracket(necklace_bracket(cycles[j], cycles[k], s),
                                 Potential{{cycles[i], Scalar(1)}}, s)),
            necklace_bracket(necklace_bracket(cycles[k], cycles[i], s),
                             Potential{{cycles[j], Scalar(1)}}, s));
        CHECK(trace(pj, g).is_zero());
      }
}

TEST_CASE("time derivatives") {
  auto [g, r] = build_graph({2, 1, 1}, {1, 1, 1, 1}, {at("a_1"), at("a_2"), at("a_3")});
  SymbolId t1 = symbol("t_1"), t2 = symbol("t_2"), t3 = symbol("t_3");

  IMDPotential w0 = imd_potential(g, r, 0);
  // cross-part: d/dt_3 of W_0(2) is minus the connecting 2-cycle
  Potential d2 = potential_time_derivative(w0.w2, t3);
  CHECK(d2.size() == 1);
  CHECK(d2.at(Cycle({Arrow{0, 2}, Arrow{2, 0}})) == Scalar(-1));
  // 3-cycles carry no time dependence
  CHECK(potential_time_derivative(w0.w3, t2).empty());
  CHECK(potential_time_derivative(w0.w3, t1).empty());
  // same-part: d/dt_2 of W_0(4) has weights over (t_1 - t_2)^2
  Potential d4 = potential_time_derivative(w0.w4, t2);
  CHECK(!d4.empty());
  for (auto& [c, v] : d4) {
    Scalar scaled = v * S("(t_1 - t_2)^2");
    CHECK(scalar_partial(scaled, t1).is_zero());  // time dependence exactly (t_1-t_2)^-2
  }

  // curl symmetry on all node pairs
  std::vector<SymbolId> times{t1, t2, t3, symbol("t_4")};
  std::vector<Potential> totals;
  for (NodeId i = 0; i < 4; ++i) totals.push_back(imd_potential(g, r, i).total());
  for (NodeId i = 0; i < 4; ++i)
    for (NodeId j = 0; j < 4; ++j) {
      if (i == j) continue;
      Potential a = potential_time_derivative(totals[i], times[j]);
      Potential b = potential_time_derivative(totals[j], times[i]);
      CHECK(potential_sum(a, potential_scale(b, Scalar(-1))).empty());
    }
}

TEST_CASE("classical flatness of potentials on a small generic graph") {
  // generic readings need the phi-weighted bracket constants; with unit
  // constants the triangle Hamiltonians already fail to commute
  auto [g, r] = build_graph({2, 1, 1}, {1, 2, 1, 1}, {at("a_1"), at("a_2"), at("a_3")});
  SymplecticData s = default_symplectic(g, r, Convention::phi_inverse);
  std::vector<TracePolynomial> hams;
  for (NodeId i = 0; i < 4; ++i) hams.push_back(trace(imd_potential(g, r, i).total(), g));
  for (std::size_t i = 0; i < hams.size(); ++i)
    for (std::size_t j = i + 1; j < hams.size(); ++j)
      CHECK(poisson_bracket_oracle(hams[i], hams[j], s).is_zero());

  auto [tg, tr] = build_graph({1, 1, 1}, {1, 1, 1}, {at("a_1"), at("a_2"), at("a_3")});
  SymplecticData ts = default_symplectic(tg, tr, Convention::phi_inverse);
  SymplecticData tu = default_symplectic(tg, tr, Convention::unit);
  std::vector<TracePolynomial> th, tb;
  for (NodeId i = 0; i < 3; ++i) th.push_back(trace(imd_potential(tg, tr, i).total(), tg));
  CHECK(poisson_bracket_oracle(th[0], th[1], ts).is_zero());
  CHECK(poisson_bracket_oracle(th[0], th[2], ts).is_zero());
  CHECK(poisson_bracket_oracle(th[1], th[2], ts).is_zero());
  CHECK_FALSE(poisson_bracket_oracle(th[0], th[1], tu).is_zero());
}

TEST_CASE("intersection census") {
  auto [g, r] = build_graph({3, 2, 1, 1}, {1, 1, 1, 1, 1, 1, 1},
                            {at("a_1"), at("a_2"), at("a_3"), at("a_4")});
  SymplecticData s = default_symplectic(g, r, Convention::unit);
  CensusReport rep = intersection_census(g, r, s);
  CHECK(rep.class_count == 15);
  CHECK(rep.nonzero_count == 13);
  CHECK(rep.antiparallel_free_count == 5);

  auto [g2, r2] = build_graph({2, 1, 1, 1}, {1, 1, 1, 1, 1},
                              {at("a_1"), at("a_2"), at("a_3"), at("a_4")});
  SymplecticData s2 = default_symplectic(g2, r2, Convention::unit);
  CensusReport rep2 = intersection_census(g2, r2, s2);
  CHECK(rep2.class_count == 11);
  CHECK(rep2.nonzero_count == 10);
  CHECK(rep2.antiparallel_free_count == 4);
}
