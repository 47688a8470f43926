#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "quiver.hpp"

using namespace iso;

namespace {

std::optional<Scalar> inf() { return std::nullopt; }
std::optional<Scalar> at(const std::string& text) { return Scalar::parse(text); }

}  // namespace

TEST_CASE("star construction") {
  // one singleton part read 0, three legs read infinity; centre dim 2
  auto [g, r] = build_graph({1, 3}, {2, 1, 1, 1}, {at("0"), inf()});
  CHECK(g.num_parts() == 2);
  CHECK(g.num_nodes() == 4);
  CHECK(g.part(0) == 0);
  CHECK(g.part(1) == 1);
  CHECK(g.dim(0) == 2);
  CHECK(g.dim(3) == 1);
  CHECK_FALSE(r.generic());
  CHECK(r.inf_part == PartId{1});
  // legs adjacent to the centre but not to each other
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(0, 3));
  CHECK_FALSE(g.adjacent(1, 2));
  // centre time frozen to 0, leg times live symbols
  CHECK(g.time_frozen(0));
  CHECK(g.time(0).is_zero());
  CHECK_FALSE(g.time_frozen(1));
  CHECK(g.time(1) == Scalar::sym("t_2"));
  // the infinity part ranks first
  CHECK(r.rank(1) == 0);
  CHECK(r.rank(0) == 1);
}

TEST_CASE("generic triangle construction") {
  auto [g, r] = build_graph({1, 1, 1}, {1, 1, 1}, {at("a_1"), at("a_2"), at("a_3")});
  CHECK(r.generic());
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(1, 2));
  CHECK(g.adjacent(0, 2));
  CHECK_FALSE(g.time_frozen(0));
  CHECK(g.time(2) == Scalar::sym("t_3"));
  CHECK(r.rank(0) == 0);
  CHECK(r.rank(2) == 2);
  CHECK(g.all_arrows().size() == 6);
}

TEST_CASE("invalid readings") {
  CHECK_THROWS_AS(build_graph({2, 2}, {1, 1, 1, 1}, {at("0"), at("0")}), InvalidReading);
  CHECK_THROWS_AS(build_graph({1, 1}, {1, 1}, {inf(), inf()}), InvalidReading);
  CHECK_THROWS_AS(build_graph({1, 0}, {1}, {at("0"), at("1")}), EmptyPart);
  CHECK_THROWS_AS(build_graph({1, 1}, {1, 1}, {at("a_1"), at("a_1")}), InvalidReading);
}

TEST_CASE("phi weights") {
  auto [g, r] = build_graph({1, 1, 1}, {1, 1, 1}, {at("a_1"), at("a_2"), at("a_3")});
  CHECK(phi_weight(g, r, 0, 1) == Scalar::parse("1/(a_1 - a_2)"));
  CHECK((phi_weight(g, r, 0, 1) + phi_weight(g, r, 1, 0)).is_zero());
  CHECK((phi_weight(g, r, 1, 2) + phi_weight(g, r, 2, 1)).is_zero());

  auto [sg, sr] = build_graph({1, 2}, {1, 1, 1}, {at("0"), inf()});
  CHECK(phi_weight(sg, sr, 1, 0) == Scalar(1));   // a at tail's part is infinity
  CHECK(phi_weight(sg, sr, 0, 1) == Scalar(-1));  // a at head's part is infinity
  CHECK((phi_weight(sg, sr, 0, 2) + phi_weight(sg, sr, 2, 0)).is_zero());
  CHECK_THROWS_AS(phi_weight(sg, sr, 1, 2), NotAdjacent);
}

TEST_CASE("symplectic conventions") {
  auto [g, r] = build_graph({1, 1, 1}, {1, 1, 1}, {at("a_1"), at("a_2"), at("a_3")});
  SymplecticData unit = default_symplectic(g, r, Convention::unit);
  for (NodeId i = 0; i < 3; ++i)
    for (NodeId j = i + 1; j < 3; ++j) {
      Arrow pos = unit.positive(i, j);
      CHECK(pos == Arrow{i, j});  // generic: listed part order
      CHECK(unit.constant(pos) == Scalar(1));
      CHECK(unit.constant(pos.reversed()) == Scalar(-1));
      CHECK(pos.reversed().reversed() == pos);
    }

  SymplecticData phi = default_symplectic(g, r, Convention::phi_inverse);
  CHECK(phi.constant(Arrow{0, 1}) == Scalar::parse("1/(a_1 - a_2)"));
  CHECK(phi.constant(Arrow{1, 2}) == Scalar::parse("1/(a_2 - a_3)"));
  CHECK(phi.constant(Arrow{1, 0}) == Scalar::parse("1/(a_2 - a_1)"));

  // star: positive arrows point out of the infinity part (legs -> centre)
  auto [sg, sr] = build_graph({1, 2}, {2, 1, 1}, {at("0"), inf()});
  SymplecticData ss = default_symplectic(sg, sr, Convention::unit);
  CHECK(ss.positive(0, 1) == Arrow{1, 0});
  CHECK(ss.is_positive(Arrow{2, 0}));
  CHECK_FALSE(ss.is_positive(Arrow{0, 2}));
  // phi_inverse coincides with unit on the star reading
  SymplecticData sp = default_symplectic(sg, sr, Convention::phi_inverse);
  CHECK(sp.constant(Arrow{1, 0}) == Scalar(1));
  CHECK(sp.constant(Arrow{0, 1}) == Scalar(-1));
}
