#include "doctest.h"

#include "hypwalk/group.hpp"

using namespace hypwalk;

namespace {

GroupSpec f2() { return GroupSpec::free_group(2); }

FiniteGroup z2() {
  FiniteGroup k;
  k.order = 2;
  k.table = {0, 1, 1, 0};
  return k;
}

// F2 x Z/2 with the measure-support generating set {(e,1),(a^{±1},1),(b^{±1},1)}.
GroupSpec f2z2_support_gens() {
  GroupSpec g = GroupSpec::direct_with_finite(GroupSpec::free_group(2), z2());
  std::vector<Element> s = {g.parse("e|1"), g.parse("a|1"), g.parse("A|1"), g.parse("b|1"),
                            g.parse("B|1")};
  g.set_generators(s);
  return g;
}

GroupSpec f2z2_standard_gens() {
  return GroupSpec::direct_with_finite(GroupSpec::free_group(2), z2());
}

}  // namespace

TEST_CASE("normal form: free reduction") {
  GroupSpec g = f2();
  CHECK(g.normal_form_of_tokens({"a", "b", "B"}) == g.parse("a"));
  // idempotence
  Element e = g.parse("abA");
  CHECK(g.parse(g.to_string(e)) == e);
  CHECK_THROWS_AS(g.normal_form_of_tokens({"a", "q"}), malformed_input_error);
}

TEST_CASE("normal form: cyclic order relation") {
  GroupSpec g = GroupSpec::free_product_cyclics({3, 2});
  CHECK(g.normal_form_of_tokens({"a", "a", "a"}).is_identity());
  CHECK(g.mul(g.parse("aa"), g.parse("a")).is_identity());
  CHECK(g.to_string(g.parse("aa")) == "A");  // shorter spelling of a^2 in Z/3
  CHECK(g.base_len(g.parse("aa")) == 1);
  CHECK(g.base_len(g.parse("ab")) == 2);
  // inverse round trip
  Element x = g.parse("abab");
  CHECK(g.mul(x, g.inv(x)).is_identity());
}

TEST_CASE("normal form: componentwise identity in the product") {
  GroupSpec g = f2z2_support_gens();
  Element p = g.mul(g.parse("a|1"), g.parse("A|1"));
  CHECK(p.is_identity());
}

TEST_CASE("dist: reduced word length on F2") {
  GroupSpec g = f2();
  CHECK(g.dist(g.identity(), g.parse("abA")) == 3);
  Element x = g.parse("ab");
  CHECK(g.dist(x, x) == 0);
}

TEST_CASE("dist: parity forces an extra step in F2 x Z/2 with support gens") {
  GroupSpec g = f2z2_support_gens();
  // closed form learned from BFS; cross-check against a real BFS ball
  CHECK(g.has_closed_length());
  CHECK(g.dist(g.identity(), g.parse("a|0")) == 2);
  CHECK(g.dist(g.identity(), g.parse("a|1")) == 1);
  CHECK(g.dist(g.identity(), g.parse("e|1")) == 1);
  Ball b = g.ball(5);
  for (int i = 0; i < b.size(); ++i)
    CHECK(g.word_length(b.elems[i]) == b.rad[i]);
}

TEST_CASE("dist: standard product metric") {
  GroupSpec g = f2z2_standard_gens();
  CHECK(g.dist(g.identity(), g.parse("a|0")) == 1);
  CHECK(g.dist(g.identity(), g.parse("a|1")) == 2);
  Ball b = g.ball(5);
  for (int i = 0; i < b.size(); ++i)
    CHECK(g.word_length(b.elems[i]) == b.rad[i]);
}

TEST_CASE("sphere sizes of free groups match 2k(2k-1)^{r-1}") {
  for (int k : {2, 3}) {
    GroupSpec g = GroupSpec::free_group(k);
    Ball b = g.ball(8);
    double expect = 2.0 * k;
    for (int r = 1; r <= 8; ++r) {
      CHECK(b.sphere_end(r) - b.sphere_begin(r) == static_cast<int>(expect));
      expect *= 2 * k - 1;
    }
  }
}

TEST_CASE("gromov products") {
  GroupSpec g = f2();
  Element e = g.identity();
  CHECK(g.gromov_product(g.parse("ab"), g.parse("aB"), e) == doctest::Approx(1.0));
  Element z = g.parse("bab");
  CHECK(g.gromov_product(g.parse("ab"), g.parse("ab"), z) ==
        doctest::Approx(static_cast<double>(g.dist(g.parse("ab"), z))));
  CHECK(g.gromov_product(g.parse("aaa"), g.parse("aab"), e) == doctest::Approx(2.0));
}

TEST_CASE("left invariance of the word metric") {
  GroupSpec g = f2z2_support_gens();
  Ball b = g.ball(3);
  uint64_t s = 12345;
  auto rnd = [&]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  };
  for (int t = 0; t < 200; ++t) {
    const Element& x = b.elems[rnd() % b.size()];
    const Element& y = b.elems[rnd() % b.size()];
    const Element& w = b.elems[rnd() % b.size()];
    CHECK(g.dist(g.mul(w, x), g.mul(w, y)) == g.dist(x, y));
  }
}

TEST_CASE("delta: trees are 0-hyperbolic") {
  GroupSpec g = f2();
  Delta d = g.estimate_delta(4);
  CHECK(d.value == doctest::Approx(0.0));
  CHECK(d.radius == 4);
}

TEST_CASE("delta: product group small and stable; quadruple condition holds") {
  GroupSpec g = f2z2_support_gens();
  Delta d3 = g.estimate_delta(3);
  Delta d4 = g.estimate_delta(4);
  CHECK(d4.value >= 0.0);
  CHECK(d4.value == doctest::Approx(d3.value));  // stable from R=3 to R=4
  CHECK(d4.value <= 2.0);
  // spot check eq:def_hyperb with delta = estimate on random quadruples, basepoint e
  Ball b = g.ball(4);
  uint64_t s = 99;
  auto rnd = [&]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  };
  for (int t = 0; t < 500; ++t) {
    Element x1 = b.elems[rnd() % b.size()], x2 = b.elems[rnd() % b.size()],
            x3 = b.elems[rnd() % b.size()];
    Element e = g.identity();
    double lhs = g.gromov_product(x1, x3, e);
    double rhs = std::min(g.gromov_product(x1, x2, e), g.gromov_product(x2, x3, e)) - d4.value;
    CHECK(lhs >= rhs - 1e-12);
  }
}

TEST_CASE("delta: Z/3 * Z/3 exhaustive scan") {
  GroupSpec g = GroupSpec::free_product_cyclics({3, 3});
  Delta d = g.estimate_delta(4);
  CHECK(d.value <= 0.5);  // tree-like Bass-Serre structure
}

TEST_CASE("delta rejects radii beyond the configured maximum") {
  GroupSpec g = f2();
  CHECK_THROWS_AS(g.estimate_delta(7), config_error);
}

TEST_CASE("Z/2 * Z/2 rejected as elementary") {
  CHECK_THROWS_AS(GroupSpec::free_product_cyclics({2, 2}), config_error);
}

TEST_CASE("ball respects the node budget") {
  GroupSpec g = f2();
  g.ball_node_budget = 100;
  CHECK_THROWS_AS(g.ball(6), budget_error);
}
