#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "tametower/catalog.hpp"
#include "tametower/mass.hpp"

using namespace tame;

namespace {

// brute stability oracle: the element set of the class is fixed under x -> x^z
bool class_stable_brute(const PcGroup& G, const ClassData& cd, uint32_t cls, uint64_t z) {
  auto els = class_elements(G, cd, cls);
  std::set<uint64_t> ranks;
  for (const auto& e : els) ranks.insert(G.rank(e));
  for (const auto& e : els)
    if (!ranks.count(G.rank(G.power(e, z)))) return false;
  return true;
}

}  // namespace

TEST_CASE("types of prime tuples") {
  TypeZ a = type_of_primes(3, {13, 7});
  REQUIRE(a.w_orders() == std::vector<uint64_t>({3, 3}));
  TypeZ b = type_of_primes(2, {5, 5});
  REQUIRE(b.w_orders() == std::vector<uint64_t>({4, 4}));
  REQUIRE(b.entries[0].residue % 8 == 5);
  TypeZ c = type_of_primes(2, {3, 5});
  REQUIRE(c.w_orders() == std::vector<uint64_t>({2, 4}));
  REQUIRE_THROWS_AS(type_of_primes(3, {5, 7}), PreconditionError);  // 5 != 1 mod 3
  REQUIRE_THROWS_AS(type_of_primes(2, {2, 5}), PreconditionError);
}

TEST_CASE("type mini-language") {
  TypeZ a = parse_type("3:1+3Z,1+3Z");
  REQUIRE(a.p == 3);
  REQUIRE(a.entries.size() == 2);
  REQUIRE(a.entries[0].residue == 4);
  REQUIRE(a.w_orders() == std::vector<uint64_t>({3, 3}));

  TypeZ b = parse_type("2:5mod8,5mod8");
  REQUIRE(b.w_orders() == std::vector<uint64_t>({4, 4}));
  TypeZ c = parse_type("2:3mod8,5mod8");
  REQUIRE(c.w_orders() == std::vector<uint64_t>({2, 4}));
  REQUIRE(parse_type("3:1+9Z").entries[0].residue == 10);
  REQUIRE(parse_type("2:7mod16").entries[0].w_val == 1);

  // residues that do not pin the closure are rejected
  REQUIRE_THROWS_AS(parse_type("2:1mod4"), ParseError);
  REQUIRE_THROWS_AS(parse_type("2:3mod4"), ParseError);
  REQUIRE_THROWS_AS(parse_type("2:7mod8"), ParseError);
  REQUIRE_THROWS_AS(parse_type("2:1mod8"), ParseError);
}

TEST_CASE("stable classes") {
  PcGroup M = catalog::modular27();
  ClassData cd = conjugacy_classes(M);
  // z = 1 fixes everything
  REQUIRE(stable_classes(M, cd, 1).size() == cd.classes.size());
  // z = 4: every class of the modular group is fixed (cubes are central)
  auto s4 = stable_classes(M, cd, 4);
  REQUIRE(s4.size() == cd.classes.size());
  for (uint32_t c = 0; c < cd.classes.size(); ++c)
    REQUIRE(class_stable_brute(M, cd, c, 4));

  PcGroup S = catalog::semidihedral16();
  ClassData cs = conjugacy_classes(S);
  auto s5 = stable_classes(S, cs, 5);
  for (uint32_t c = 0; c < cs.classes.size(); ++c) {
    bool in = std::find(s5.begin(), s5.end(), c) != s5.end();
    REQUIRE(in == class_stable_brute(S, cs, c, 5));
  }

  PcGroup M16 = catalog::modular16();
  ClassData cm = conjugacy_classes(M16);
  auto s3 = stable_classes(M16, cm, 3);
  for (uint32_t c = 0; c < cm.classes.size(); ++c) {
    bool in = std::find(s3.begin(), s3.end(), c) != s3.end();
    REQUIRE(in == class_stable_brute(M16, cm, c, 3));
  }
  REQUIRE(s3.size() == 4);  // 1, a^4 and the two classes of involution type
  REQUIRE(stable_classes(M16, cm, 5).size() == cm.classes.size());
}

TEST_CASE("counting: modular group of order 27") {
  PcGroup M = catalog::modular27();
  TypeZ Z = parse_type("3:1+3Z,1+3Z");
  REQUIRE(count_A_Z(M, Z) == 48);  // p(p+1)(p-1)^2
  MassResult r = mass(M, Z);
  REQUIRE(r.a_count == 48);
  REQUIRE(r.aut_order == 54);  // (p-1)p^3
  REQUIRE(r.mass == Rational(8, 9));
}

TEST_CASE("counting: the exponent-3 sibling carries the remaining class-2 mass") {
  PcGroup H = catalog::heisenberg27();
  TypeZ Z = parse_type("3:1+3Z,1+3Z");
  // 48 basis pairs, one class per nonzero abelianization value
  REQUIRE(count_A_Z(H, Z) == 48);
  MassResult r = mass(H, Z);
  REQUIRE(r.aut_order == 432);
  REQUIRE(r.mass == Rational(1, 9));
  // together with the modular group this exhausts the class-2 mass
  REQUIRE(Rational(8, 9) + r.mass == Rational(1));
}

TEST_CASE("counting: modular 16 under (3mod8, 5mod8)") {
  PcGroup M = catalog::modular16();
  TypeZ Z = parse_type("2:3mod8,5mod8");
  MassResult r = mass(M, Z);
  REQUIRE(r.a_count == 8);
  REQUIRE(r.aut_order == 16);
  REQUIRE(r.mass == Rational(1, 2));
  // rebased presentation gives identical counts
  REQUIRE(count_A_Z(fixtures::modular16_rebased(), Z) == 8);
}

TEST_CASE("counting: semidihedral groups have mass 1 under their matching type") {
  MassResult s16 = mass(catalog::semidihedral16(), parse_type("2:3mod8,3mod8"));
  REQUIRE(s16.a_count == 16);
  REQUIRE(s16.aut_order == 16);
  REQUIRE(s16.mass == Rational(1));
  MassResult s32 = mass(catalog::semidihedral(5), parse_type("2:7mod16,7mod16"));
  REQUIRE(s32.a_count == 64);
  REQUIRE(s32.aut_order == 64);
  REQUIRE(s32.mass == Rational(1));

  // a mixed type splits its mass between consecutive semidihedral groups
  MassResult a = mass(catalog::semidihedral16(), parse_type("2:3mod8,7mod16"));
  MassResult b = mass(catalog::semidihedral(5), parse_type("2:3mod8,7mod16"));
  REQUIRE(a.mass == Rational(1, 2));
  REQUIRE(b.mass == Rational(1, 2));
  REQUIRE(a.mass + b.mass == Rational(1));
}

TEST_CASE("counting: quaternion group never carries local data") {
  // both involutions of Q8 project to 0, but the required projection is not 0
  TypeZ Z = parse_type("2:3mod8,3mod8");
  REQUIRE(count_A_Z(catalog::quaternion8(), Z) == 0);
  REQUIRE(mass(catalog::quaternion8(), Z).mass == Rational(0));
}

TEST_CASE("counting: abelian anchors") {
  MassResult z44 = mass(PcGroup::abelian(2, {2, 2}), parse_type("2:5mod8,5mod8"));
  REQUIRE(z44.a_count == 96);
  REQUIRE(z44.aut_order == 96);
  REQUIRE(z44.mass == Rational(1));

  MassResult z24 = mass(PcGroup::abelian(2, {1, 2}), parse_type("2:3mod8,5mod8"));
  REQUIRE(z24.mass == Rational(1));

  MassResult e9 = mass(PcGroup::elementary(3, 2), parse_type("3:1+3Z,1+3Z"));
  REQUIRE(e9.mass == Rational(1));
}

TEST_CASE("counting: mismatches give zero") {
  // wrong prime
  REQUIRE(count_A_Z(catalog::modular27(), parse_type("2:5mod8,5mod8")) == 0);
  // wrong abelianization shape
  REQUIRE(count_A_Z(catalog::modular16(), parse_type("2:5mod8,5mod8")) == 0);
  REQUIRE(count_A_Z(PcGroup::abelian(2, {2, 2}), parse_type("2:3mod8,5mod8")) == 0);
}

TEST_CASE("trivial group with the empty type") {
  TypeZ Z;
  Z.p = 2;
  PcGroup T(2, 0);
  ClassData cd = conjugacy_classes(T);
  MassCount c = count_local_data(T, cd, Z);
  REQUIRE(c.count == 1);
  REQUIRE(mass(T, Z).mass == Rational(1));
}

TEST_CASE("validate_local_data") {
  PcGroup M = catalog::modular27();
  ClassData cd = conjugacy_classes(M);
  TypeZ Z = parse_type("3:1+3Z,1+3Z");
  MassCount c = count_local_data(M, cd, Z);
  REQUIRE(c.witness.has_value());
  REQUIRE(validate_local_data(M, cd, Z, *c.witness));

  // identity-classes tuple fails the generation condition
  uint32_t idc = cd.class_of[M.rank(M.identity())];
  REQUIRE(!validate_local_data(M, cd, Z, LocalData{{idc, idc}, M.identity()}));

  // p = 2 witness: flipping the involution to the identity breaks the sum rule
  PcGroup S = catalog::semidihedral16();
  ClassData cs = conjugacy_classes(S);
  TypeZ Z2 = parse_type("2:3mod8,3mod8");
  MassCount c2 = count_local_data(S, cs, Z2);
  REQUIRE(c2.witness.has_value());
  REQUIRE(validate_local_data(S, cs, Z2, *c2.witness));
  LocalData flipped = *c2.witness;
  flipped.involution = S.identity();
  REQUIRE(!validate_local_data(S, cs, Z2, flipped));
}

TEST_CASE("validate count cross-check: count equals the number of valid tuples") {
  PcGroup M = catalog::modular16();
  ClassData cd = conjugacy_classes(M);
  TypeZ Z = parse_type("2:3mod8,5mod8");
  uint64_t direct = 0;
  std::vector<Element> invols;
  for (uint64_t r = 0; r < M.order(); ++r) {
    Element x = M.unrank(r);
    if (M.is_identity(M.mul(x, x))) invols.push_back(x);
  }
  for (uint32_t c1 = 0; c1 < cd.classes.size(); ++c1)
    for (uint32_t c2 = 0; c2 < cd.classes.size(); ++c2)
      for (const Element& i : invols)
        if (validate_local_data(M, cd, Z, LocalData{{c1, c2}, i})) ++direct;
  REQUIRE(direct == count_local_data(M, cd, Z).count);
}

TEST_CASE("Aut-invariance of local data") {
  PcGroup M = catalog::modular27();
  ClassData cd = conjugacy_classes(M);
  TypeZ Z = parse_type("3:1+3Z,1+3Z");
  MassCount c = count_local_data(M, cd, Z);
  AutGroup A = automorphism_group(M);
  for (const GroupMap& f : A.generators) {
    LocalData moved;
    for (uint32_t cls : c.witness->classes) {
      Element im = apply_map(M, f, cd.classes[cls].rep);
      moved.classes.push_back(cd.class_of[M.rank(im)]);
    }
    moved.involution = apply_map(M, f, c.witness->involution);
    REQUIRE(validate_local_data(M, cd, Z, moved));
  }
}

TEST_CASE("precision robustness: deeper residues do not change the count") {
  PcGroup M = catalog::modular27();
  TypeZ Z = parse_type("3:1+3Z,1+3Z");
  uint64_t base = count_A_Z(M, Z);
  for (uint64_t k : {1ull, 2ull, 5ull}) {
    TypeZ deeper = Z;
    for (auto& e : deeper.entries) e.residue += k * ipow(3, 6);  // beyond the exponent
    REQUIRE(count_A_Z(M, deeper) == base);
  }
}
