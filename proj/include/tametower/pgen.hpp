#pragma once

// p-covering groups, multiplicator/nuclear ranks, immediate descendants with
// automorphism transport, the mass-decorated descendant tree, and p-quotients
// of finite presentations.

#include <memory>
#include <optional>

#include "tametower/homs.hpp"
#include "tametower/mass.hpp"
#include "tametower/pc.hpp"

namespace tame {

using FpVec = std::vector<uint8_t>;  // vector over F_p

struct Cover {
  PcGroup star;        // standalone presentation of G*
  uint32_t base_n = 0; // generators 0..base_n-1 present G
  uint32_t mdim = 0;   // multiplicator generators base_n..base_n+mdim-1
  std::vector<FpVec> nucleus;  // echelon basis of N inside F_p^mdim
  uint32_t p_class_base = 0;   // p-class of G
  MinimalGens star_mg;         // evaluation program of the cover

  uint32_t nuclear_rank() const { return uint32_t(nucleus.size()); }
};

Cover p_cover(const PcGroup& G);

struct Ranks {
  uint32_t h1 = 0, h2 = 0, nuclear = 0;
  bool balanced() const { return h1 == h2; }
};
Ranks ranks(const PcGroup& G);

// the automorphism of the cover induced by an automorphism of G (images of
// every cover generator)
std::vector<Element> lift_to_cover(const PcGroup& G, const Cover& cov, const GroupMap& f);

// induced action on the multiplicator; rows are images of the basis
std::vector<FpVec> multiplicator_action(const PcGroup& G, const Cover& cov, const GroupMap& f);

// quotient of the cover by an allowable subgroup (echelon basis inside F_p^mdim)
PcGroup cover_quotient(const PcGroup& G, const Cover& cov, const std::vector<FpVec>& U);

struct AutData {
  uint64_t order = 1;
  std::vector<GroupMap> gens;
};

struct Descendant {
  PcGroup group;
  AutData aut;
  uint32_t step = 0;  // order grows by p^step
};

// one representative per Aut(G)-orbit of allowable subgroups; budget counts
// subspaces touched and throws BudgetError when exhausted
std::vector<Descendant> immediate_descendants(const PcGroup& G, const Cover& cov,
                                              const AutData& aut, uint64_t* budget);

// same, but only order jumps p^step with step <= max_step
std::vector<Descendant> immediate_descendants_bounded(const PcGroup& G, const Cover& cov,
                                                      const AutData& aut, uint64_t* budget,
                                                      uint32_t max_step);

bool exists_epimorphism(const PcGroup& dom, const PcGroup& cod, uint64_t budget = 50'000'000);

// --- descendant tree -------------------------------------------------------

struct TreeNode {
  uint32_t id = 0;
  int32_t parent = -1;
  PcGroup group;
  uint32_t p_class = 0;
  uint32_t order_exp = 0;
  Ranks rk;
  uint64_t a_count = 0;
  uint64_t aut_order = 1;
  Rational mass;
  bool viable = false;
  bool terminal = false;
  bool expanded = false;           // descendants were enumerated
  bool children_complete = false;  // no child was cut off by the order bound
  std::vector<uint32_t> children;
  std::string note;                // budget / capacity diagnostics
};

struct TreeOptions {
  uint32_t max_order_exp = 8;
  uint64_t subspace_budget = 2'000'000;
  bool compute_mass = true;
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<std::pair<uint32_t, uint32_t>> anomalies;  // (quotient, cover-er) ids

  const TreeNode& root() const { return nodes.front(); }
};

// grows the pruned tree from the elementary abelian root of rank g
Tree explore_tree(const TypeZ& Z, TreeOptions opt = {});

struct ConservationReport {
  struct Line {
    uint32_t node;
    Rational parent_mass;
    Rational child_sum;
    bool holds;
    bool checked;
  };
  std::vector<Line> lines;
  bool all_hold = true;
};
ConservationReport check_mass_conservation(const Tree& t);

// --- p-quotients of finite presentations -----------------------------------

struct FpPresentation {
  uint32_t ngens = 0;
  std::vector<std::string> names;
  std::vector<Word> relators;  // letters index generators
};

struct PQuotientResult {
  PcGroup Q;
  std::vector<Element> images;  // image of each fp generator
  uint32_t reached_class = 0;
  bool stabilized = false;  // maximal p-quotient attained before the bound
};

PQuotientResult p_quotient(const FpPresentation& fp, uint32_t p, uint32_t class_bound,
                           uint32_t max_order_exp = 40);

// order exponents of the class-k quotients, k = 1..max_class
std::vector<uint32_t> pq_tower(const FpPresentation& fp, uint32_t p, uint32_t max_class,
                               uint32_t max_order_exp = 40);

bool is_viable(const PcGroup& G, const TypeZ& Z);

}  // namespace tame
