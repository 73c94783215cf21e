#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "tametower/base.hpp"
#include "tametower/catalog.hpp"
#include "tametower/pc.hpp"

using namespace tame;

namespace {

// verify collection against a brute-force table through the generator map
void cross_check(const PcGroup& G, const oracle::TableGroup& T, const std::vector<int>& img) {
  REQUIRE(T.is_associative());
  REQUIRE(uint64_t(T.n) == G.order());
  auto phi = [&](const Element& x) {
    int r = T.id;
    for (uint32_t i = 0; i < G.ngens(); ++i)
      for (uint32_t c = 0; c < x[i]; ++c) r = T.mul[r][img[i]];
    return r;
  };
  std::set<int> seen;
  for (uint64_t r = 0; r < G.order(); ++r) seen.insert(phi(G.unrank(r)));
  REQUIRE(seen.size() == G.order());  // bijective on normal forms
  for (uint64_t a = 0; a < G.order(); ++a)
    for (uint64_t b = 0; b < G.order(); ++b) {
      Element x = G.unrank(a), y = G.unrank(b);
      REQUIRE(phi(G.mul(x, y)) == T.mul[phi(x)][phi(y)]);
    }
}

Element random_element(const PcGroup& G, Rng& rng) {
  Element x(G.ngens(), 0);
  for (auto& v : x) v = uint8_t(rng.below(G.p()));
  return x;
}

std::vector<uint64_t> sorted_factors(const AbelianInvariants& ab) { return ab.factors; }

}  // namespace

TEST_CASE("modular group of order 16 matches its multiplication table") {
  PcGroup G = catalog::modular16();
  REQUIRE(G.check_consistency());
  cross_check(G, oracle::modular16(), {1, 2, 4, 8});
}

TEST_CASE("modular group of order 27 matches its multiplication table") {
  PcGroup G = catalog::modular27();
  REQUIRE(G.check_consistency());
  cross_check(G, oracle::modular27(), {1, 3, 9});
}

TEST_CASE("semidihedral 16 and quaternion tables") {
  PcGroup S = catalog::semidihedral16();
  REQUIRE(S.check_consistency());
  cross_check(S, oracle::semidihedral16(), {1, 2, 4, 8});
  REQUIRE(catalog::semidihedral(4).check_consistency());
  cross_check(catalog::semidihedral(4), oracle::semidihedral16(), {1, 2, 4, 8});

  PcGroup Q = catalog::quaternion8();
  REQUIRE(Q.check_consistency());
  cross_check(Q, oracle::quaternion8(), {2, 4, 1});

  PcGroup H = catalog::heisenberg27();
  REQUIRE(H.check_consistency());
  cross_check(H, oracle::heisenberg(3), {3, 9, 1});
}

TEST_CASE("collect basics") {
  PcGroup G = catalog::modular16();
  // empty word is the identity
  REQUIRE(G.is_identity(G.collect_word({})));
  // b * a = a^5 * b
  Element ba = G.collect_word({{0, 1}, {1, 1}});
  Element a5b = G.collect_word({{1, 5}, {0, 1}});
  REQUIRE(ba == a5b);
  // inverse law on random elements
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    Element g = random_element(G, rng);
    REQUIRE(G.is_identity(G.mul(g, G.inv(g))));
  }
}

TEST_CASE("consistency accepts good rules and rejects tampered ones") {
  REQUIRE(PcGroup::elementary(3, 2).check_consistency());
  REQUIRE(catalog::modular16().check_consistency());
  // a^b = a^3 instead of a^5: [a,b] = a^2
  PcGroup bad = catalog::modular16();
  bad.set_comm(1, 0, {0, 0, 1, 0});
  REQUIRE(!bad.check_consistency());
}

TEST_CASE("associativity on random triples") {
  Rng rng(11);
  for (const PcGroup& G : {catalog::modular16(), catalog::modular27(), catalog::semidihedral16(),
                           catalog::heisenberg27(), PcGroup::abelian(2, {2, 2})}) {
    for (int t = 0; t < 1000; ++t) {
      Element x = random_element(G, rng), y = random_element(G, rng), z = random_element(G, rng);
      REQUIRE(G.mul(G.mul(x, y), z) == G.mul(x, G.mul(y, z)));
    }
  }
}

TEST_CASE("element orders") {
  PcGroup G = catalog::modular16();
  REQUIRE(G.element_order(G.identity()) == 1);
  REQUIRE(G.element_order(G.gen(1)) == 8);  // a
  REQUIRE(G.element_order(G.gen(0)) == 2);  // b
  PcGroup E = PcGroup::elementary(3, 2);
  for (uint64_t r = 1; r < E.order(); ++r) REQUIRE(E.element_order(E.unrank(r)) == 3);
  REQUIRE(catalog::modular27().exponent() == 9);
}

TEST_CASE("conjugacy classes against orbit oracle") {
  auto multiset = [](const ClassData& cd) {
    std::vector<uint64_t> v;
    for (const auto& c : cd.classes) v.push_back(c.size);
    std::sort(v.begin(), v.end());
    return v;
  };

  PcGroup E = PcGroup::elementary(3, 2);
  ClassData ce = conjugacy_classes(E);
  REQUIRE(ce.classes.size() == 9);

  PcGroup M = catalog::modular16();
  ClassData cm = conjugacy_classes(M);
  REQUIRE(multiset(cm) == std::vector<uint64_t>({1, 1, 1, 1, 2, 2, 2, 2, 2, 2}));
  // same multiset from the brute-force table
  auto tcl = oracle::modular16().conjugacy_classes();
  REQUIRE(tcl.size() == cm.classes.size());

  PcGroup Q = catalog::quaternion8();
  REQUIRE(multiset(conjugacy_classes(Q)) == std::vector<uint64_t>({1, 1, 2, 2, 2}));

  // class sizes partition the group
  uint64_t sum = 0;
  for (const auto& c : cm.classes) {
    sum += c.size;
    REQUIRE(M.order() % c.size == 0);
  }
  REQUIRE(sum == M.order());
}

TEST_CASE("power_class and centralizer") {
  PcGroup G = catalog::modular27();
  ClassData cd = conjugacy_classes(G);
  uint32_t id_cls = cd.class_of[G.rank(G.identity())];
  REQUIRE(power_class(G, cd, id_cls, 4) == id_cls);
  // a^4 ~ a in the modular group (a^b = a^4)
  uint32_t a_cls = cd.class_of[G.rank(G.gen(1))];
  REQUIRE(power_class(G, cd, a_cls, 4) == a_cls);
  REQUIRE(centralizer_order(G, cd, G.identity()) == 27);
}

TEST_CASE("abelianization invariants and projection") {
  REQUIRE(sorted_factors(abelianization(catalog::modular27())) == std::vector<uint64_t>({3, 3}));
  REQUIRE(sorted_factors(abelianization(catalog::modular16())) == std::vector<uint64_t>({2, 4}));
  REQUIRE(sorted_factors(abelianization(PcGroup::elementary(2, 2))) == std::vector<uint64_t>({2, 2}));
  REQUIRE(sorted_factors(abelianization(catalog::heisenberg27())) == std::vector<uint64_t>({3, 3}));
  REQUIRE(sorted_factors(abelianization(catalog::quaternion8())) == std::vector<uint64_t>({2, 2}));

  // table-oracle cross-check
  REQUIRE(oracle::modular16().abelianization_invariants() == std::vector<int>({2, 4}));
  REQUIRE(oracle::modular27().abelianization_invariants() == std::vector<int>({3, 3}));

  // the projection is a homomorphism
  for (const PcGroup& G : {catalog::modular16(), catalog::modular27(), catalog::semidihedral16()}) {
    AbelianInvariants ab = abelianization(G);
    Rng rng(13);
    for (int t = 0; t < 500; ++t) {
      Element x = random_element(G, rng), y = random_element(G, rng);
      auto vx = ab_image(G, ab, x), vy = ab_image(G, ab, y);
      auto vxy = ab_image(G, ab, G.mul(x, y));
      for (size_t i = 0; i < vx.size(); ++i)
        REQUIRE(vxy[i] == (vx[i] + vy[i]) % ab.factors[i]);
    }
    // projection hits the whole group: |image| = |ab|
    std::set<std::vector<uint64_t>> im;
    for (uint64_t r = 0; r < G.order(); ++r) im.insert(ab_image(G, ab, G.unrank(r)));
    REQUIRE(im.size() == ab.order());
  }
}

TEST_CASE("lower p-central series lengths") {
  REQUIRE(p_class(PcGroup::elementary(2, 2)) == 1);
  REQUIRE(p_class(catalog::modular16()) == 3);
  REQUIRE(p_class(catalog::modular27()) == 2);
  REQUIRE(p_class(catalog::heisenberg27()) == 2);
  REQUIRE(p_class(PcGroup(2, 0)) == 0);  // trivial group
}

TEST_CASE("quotients") {
  PcGroup G = catalog::modular16();
  // quotient by a^4 (generator 3)
  Quotient q = quotient(G, {G.gen(3)});
  REQUIRE(q.Q.order() == 8);
  REQUIRE(q.Q.check_consistency());
  // the quotient <a,b | a^4, b^2, a^b = a> is abelian Z/4 x Z/2
  REQUIRE(sorted_factors(abelianization(q.Q)) == std::vector<uint64_t>({2, 4}));
  {
    auto T = oracle::modular16();
    auto N = T.closure({8});  // a^4
    REQUIRE(T.quotient(N).abelian_invariants() == std::vector<int>({2, 4}));
  }

  // quotient by nothing keeps the order
  Quotient q0 = quotient(G, {});
  REQUIRE(q0.Q.order() == 16);
  REQUIRE(sorted_factors(abelianization(q0.Q)) == sorted_factors(abelianization(G)));

  PcGroup E = PcGroup::elementary(3, 2);
  REQUIRE(quotient(E, {E.gen(0)}).Q.order() == 3);

  // canonical map preserves products
  Rng rng(17);
  for (int t = 0; t < 500; ++t) {
    Element x = random_element(G, rng), y = random_element(G, rng);
    REQUIRE(q.map.apply(G.mul(x, y)) == q.Q.mul(q.map.apply(x), q.map.apply(y)));
  }
}

TEST_CASE("maximal subgroup abelianizations") {
  auto ms = maximal_subgroup_abelianizations(PcGroup::elementary(2, 2));
  REQUIRE(ms.size() == 3);
  for (const auto& ab : ms) REQUIRE(ab.factors == std::vector<uint64_t>({2}));

  // modular 16: <a> = Z/8, <a^2,b> = Z/2 x Z/4, <ab> = Z/8
  auto mm = maximal_subgroup_abelianizations(catalog::modular16());
  REQUIRE(mm.size() == 3);
  std::vector<std::vector<uint64_t>> got;
  for (const auto& ab : mm) got.push_back(ab.factors);
  std::sort(got.begin(), got.end());
  REQUIRE(got == std::vector<std::vector<uint64_t>>({{2, 4}, {8}, {8}}));
}

TEST_CASE("minimal generators and evaluation program") {
  for (const PcGroup& G : {catalog::modular16(), catalog::modular27(), catalog::quaternion8(),
                           catalog::heisenberg27()}) {
    MinimalGens mg = minimal_generators(G);
    REQUIRE(mg.rank() == 2);
    // identity images reproduce the generators
    std::vector<Element> ids;
    for (uint32_t m : mg.gens) ids.push_back(G.gen(m));
    auto img = evaluate_images(G, mg, G, ids);
    for (uint32_t i = 0; i < G.ngens(); ++i) REQUIRE(img[i] == G.gen(i));
    REQUIRE(is_homomorphism(G, G, img));
  }
}

TEST_CASE("subgroup machinery") {
  PcGroup G = catalog::modular16();
  Subgroup S(G);
  S.generate({G.gen(2)}, false);  // <a^2>
  REQUIRE(S.dim() == 2);          // order 4
  REQUIRE(S.contains(G.gen(3)));
  REQUIRE(!S.contains(G.gen(0)));
  auto sp = subgroup_presentation(G, S);
  REQUIRE(sp.H.order() == 4);
  REQUIRE(sp.H.check_consistency());
  REQUIRE(sorted_factors(abelianization(sp.H)) == std::vector<uint64_t>({4}));
}

TEST_CASE("trivial group edge cases") {
  PcGroup T(2, 0);
  REQUIRE(T.order() == 1);
  REQUIRE(T.check_consistency());
  REQUIRE(T.is_identity(T.collect_word({})));
  REQUIRE(conjugacy_classes(T).classes.size() == 1);
  REQUIRE(abelianization(T).factors.empty());
  REQUIRE(quotient(T, {}).Q.order() == 1);
  REQUIRE(minimal_generators(T).rank() == 0);
}

TEST_CASE("rank and unrank round trip") {
  PcGroup G = catalog::modular27();
  for (uint64_t r = 0; r < G.order(); ++r) REQUIRE(G.rank(G.unrank(r)) == r);
}
