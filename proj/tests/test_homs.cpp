#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "tametower/catalog.hpp"
#include "tametower/homs.hpp"

using namespace tame;

namespace {

// modular-16 on the generating pair (ab, a); pow rule of the first generator
// is a genuine word, so the presentation differs in shape from the catalog one
PcGroup modular16_rebased() {
  PcGroup G(2, 4);  // gens: ab, a, a^2, a^4
  G.set_pow(0, {0, 0, 1, 1});  // (ab)^2 = a^6 = a^2 a^4
  G.set_pow(1, {0, 0, 1, 0});
  G.set_pow(2, {0, 0, 0, 1});
  G.set_comm(1, 0, {0, 0, 0, 1});  // [a, ab] = a^4
  G.defs[2] = GenDef{GenDef::Pow, 1, 0};
  G.defs[3] = GenDef{GenDef::Pow, 2, 0};
  G.weights = {1, 1, 2, 3};
  return G;
}

// free class-2 group of rank 2 at p = 3: gens x, y, [y,x], x^3, y^3
PcGroup free32_class2() {
  PcGroup G(3, 5);
  G.set_comm(1, 0, {0, 0, 1, 0, 0});
  G.set_pow(0, {0, 0, 0, 1, 0});
  G.set_pow(1, {0, 0, 0, 0, 1});
  G.defs[2] = GenDef{GenDef::Comm, 1, 0};
  G.defs[3] = GenDef{GenDef::Pow, 0, 0};
  G.defs[4] = GenDef{GenDef::Pow, 1, 0};
  G.weights = {1, 1, 2, 2, 2};
  return G;
}

int gl2_order(int p) {  // brute force over 2x2 matrices
  int count = 0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int c = 0; c < p; ++c)
        for (int d = 0; d < p; ++d)
          if (((a * d - b * c) % p + p) % p != 0) ++count;
  return count;
}

}  // namespace

TEST_CASE("rebased modular-16 presentation is valid") {
  PcGroup R = modular16_rebased();
  REQUIRE(R.check_consistency());
  auto T = oracle::modular16();
  // generators map to ab, a, a^2, a^4
  int ab = T.mul[2][1];
  std::vector<int> img{ab, 2, 4, 8};
  auto phi = [&](const Element& x) {
    int r = T.id;
    for (uint32_t i = 0; i < R.ngens(); ++i)
      for (uint32_t c = 0; c < x[i]; ++c) r = T.mul[r][img[i]];
    return r;
  };
  for (uint64_t a = 0; a < R.order(); ++a)
    for (uint64_t b = 0; b < R.order(); ++b)
      REQUIRE(phi(R.mul(R.unrank(a), R.unrank(b))) == T.mul[phi(R.unrank(a))][phi(R.unrank(b))]);
}

TEST_CASE("homomorphism counts on (Z/3)^2") {
  PcGroup E = PcGroup::elementary(3, 2);
  ClassData cd = conjugacy_classes(E);
  auto maps = homomorphisms(E, E, cd);
  REQUIRE(maps.size() == 81);
  int surj = 0;
  for (const auto& f : maps)
    if (f.surjective) ++surj;
  REQUIRE(surj == gl2_order(3));
  REQUIRE(surj == 48);
  for (const auto& f : maps) REQUIRE(is_homomorphism(E, E, f.images));
}

TEST_CASE("identity-class constraints force the trivial map") {
  PcGroup E = PcGroup::elementary(3, 2);
  ClassData cd = conjugacy_classes(E);
  uint32_t idc = cd.class_of[E.rank(E.identity())];
  HomOptions opt;
  opt.class_constraints = std::vector<uint32_t>{idc, idc};
  auto maps = homomorphisms(E, E, cd, opt);
  REQUIRE(maps.size() == 1);
  REQUIRE(!maps[0].surjective);
  for (const Element& im : maps[0].images) REQUIRE(E.is_identity(im));
}

TEST_CASE("epimorphisms from the free class-2 group onto modular-27") {
  PcGroup F = free32_class2();
  REQUIRE(F.check_consistency());
  REQUIRE(F.order() == 243);
  PcGroup M = catalog::modular27();
  ClassData cd = conjugacy_classes(M);
  HomOptions opt;
  opt.surjective_only = true;
  auto epis = homomorphisms(F, M, cd, opt);
  // 48 bases of the Frattini quotient, 9 lifts each
  REQUIRE(epis.size() == 432);
  REQUIRE(epis.size() % 54 == 0);  // fibers of size |Aut|
}

TEST_CASE("isomorphism testing") {
  PcGroup M = catalog::modular16();
  REQUIRE(is_isomorphic(M, M));
  REQUIRE(is_isomorphic(M, modular16_rebased()));
  REQUIRE(is_isomorphic(modular16_rebased(), M));
  // the two nonabelian groups of order 27 differ by exponent
  REQUIRE(!is_isomorphic(catalog::modular27(), catalog::heisenberg27()));
  REQUIRE(!is_isomorphic(M, catalog::semidihedral16()));
  auto w = find_isomorphism(M, M);
  REQUIRE(w.has_value());
  REQUIRE(is_homomorphism(M, M, w->images));
}

TEST_CASE("automorphism groups") {
  AutGroup a27 = automorphism_group(catalog::modular27());
  REQUIRE(a27.order == 54);  // (p-1) p^3
  AutGroup v4 = automorphism_group(PcGroup::elementary(2, 2));
  REQUIRE(v4.order == 6);

  PcGroup S = catalog::semidihedral16();
  AutGroup as = automorphism_group(S);
  ClassData cd = conjugacy_classes(S);
  HomOptions opt;
  opt.surjective_only = true;
  REQUIRE(as.order == homomorphisms(S, S, cd, opt).size());

  // generators verify as relation-preserving bijections
  for (const auto& g : as.generators) {
    REQUIRE(is_homomorphism(S, S, g.images));
    GroupMap gi = invert_automorphism(S, g);
    GroupMap comp = compose(S, g, gi);
    for (uint32_t i = 0; i < S.ngens(); ++i) REQUIRE(comp.images[i] == S.gen(i));
  }
}

TEST_CASE("automorphism order via exhaustive tuple search agrees on small groups") {
  for (const PcGroup& G :
       {catalog::quaternion8(), catalog::heisenberg27(), PcGroup::abelian(2, {2, 2})}) {
    AutGroup A = automorphism_group(G);
    ClassData cd = conjugacy_classes(G);
    HomOptions opt;
    opt.surjective_only = true;
    REQUIRE(A.order == homomorphisms(G, G, cd, opt).size());
  }
  REQUIRE(automorphism_group(PcGroup::abelian(2, {2, 2})).order == 96);  // Z/4 x Z/4
}

TEST_CASE("fingerprints are stable under rebasing") {
  REQUIRE(fingerprint(catalog::modular16()) == fingerprint(modular16_rebased()));
  REQUIRE(fingerprint(catalog::modular27()) != fingerprint(catalog::heisenberg27()));
}

TEST_CASE("canonical keys bucket by isomorphism type") {
  REQUIRE(canonical_key(catalog::modular16()) == canonical_key(modular16_rebased()));
  REQUIRE(canonical_key(catalog::modular27()) != canonical_key(catalog::heisenberg27()));
  REQUIRE(canonical_key(catalog::modular16()) != canonical_key(catalog::semidihedral16()));
  REQUIRE(canonical_key(PcGroup::elementary(2, 2)) != canonical_key(PcGroup::abelian(2, {2})));
}
