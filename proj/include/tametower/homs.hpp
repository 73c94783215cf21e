#pragma once

// Homomorphism enumeration, isomorphism testing and automorphism groups via
// exhaustive image search over minimal generators with invariant pruning.

#include <optional>

#include "tametower/pc.hpp"

namespace tame {

struct GroupMap {
  std::vector<Element> images;  // image of every domain pc-generator
  bool surjective = false;
};

// elements of a conjugacy class, ascending rank
std::vector<Element> class_elements(const PcGroup& G, const ClassData& cd, uint32_t cls);

struct HomOptions {
  // per minimal generator of the domain: restrict its image to this class
  std::optional<std::vector<uint32_t>> class_constraints;
  bool surjective_only = false;
  uint64_t budget = 200'000'000;  // candidate tuples examined
};

std::vector<GroupMap> homomorphisms(const PcGroup& dom, const PcGroup& cod,
                                    const ClassData& cod_classes, const HomOptions& opt = {});

// image of an arbitrary element under a map given by generator images
Element apply_map(const PcGroup& cod, const GroupMap& f, const Element& x);

GroupMap compose(const PcGroup& cod, const GroupMap& f, const GroupMap& g);  // f after g
GroupMap invert_automorphism(const PcGroup& G, const GroupMap& f);
GroupMap identity_map(const PcGroup& G);

// cheap isomorphism-invariant fingerprint: order, abelianization, exponent,
// multiset of (element order, class size) pairs over classes
std::vector<uint64_t> fingerprint(const PcGroup& G);

std::optional<GroupMap> find_isomorphism(const PcGroup& G, const PcGroup& H, uint64_t budget = 200'000'000);
bool is_isomorphic(const PcGroup& G, const PcGroup& H, uint64_t budget = 200'000'000);

struct AutGroup {
  uint64_t order = 1;
  std::vector<GroupMap> generators;
};

// exhaustive-with-pruning; throws CapacityError beyond the budget
AutGroup automorphism_group(const PcGroup& G, uint64_t budget = 200'000'000);

// canonical isomorphism-class key for small groups: the least rule table over
// all ordered minimal generating tuples (capacity-limited)
std::string canonical_key(const PcGroup& G, uint64_t budget = 4'000'000);

}  // namespace tame
