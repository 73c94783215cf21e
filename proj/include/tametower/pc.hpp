#pragma once

// Power-commutator presentations of finite p-groups with all relative orders
// equal to p, plus the collection machinery everything else is built on.
//
// Conventions:
//   - generators are 0-indexed; group order is p^n for n generators
//   - every rule's right-hand side is a normal word in strictly higher
//     generators: pow(i) is the normal form of g_i^p, comm(i,j) (i > j) the
//     normal form of [g_i, g_j] = g_i^-1 g_j^-1 g_i g_j
//   - an Element is the exponent vector of a collected normal word
//     g_0^{a_0} ... g_{n-1}^{a_{n-1}}, entries in [0, p)

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tametower/base.hpp"

namespace tame {

using Element = std::vector<uint8_t>;
using TailVec = std::vector<uint8_t>;  // central tail coordinates mod p

struct Letter {
  uint16_t gen;
  int32_t exp;
};
using Word = std::vector<Letter>;

struct GenDef {
  enum Kind : uint8_t { None, Pow, Comm } kind = None;
  uint16_t a = 0, b = 0;  // Pow: g_a^p defines it; Comm: [g_a, g_b] (a > b)
};

class PcGroup {
public:
  PcGroup() : p_(2), n_(0) {}
  PcGroup(uint32_t p, uint32_t n);

  static PcGroup elementary(uint32_t p, uint32_t rank);
  // abelian p-group with the given invariant factor exponents (e.g. {2,2} for
  // Z/p^2 x Z/p^2), generators refined to relative order p
  static PcGroup abelian(uint32_t p, const std::vector<uint32_t>& exps);

  uint32_t p() const { return p_; }
  uint32_t ngens() const { return n_; }
  uint64_t order() const { return ipow(p_, n_); }
  bool is_trivial() const { return n_ == 0; }

  const Element& pow_rhs(uint32_t i) const { return pow_[i]; }
  const Element& comm_rhs(uint32_t i, uint32_t j) const { return comm_[cidx(i, j)]; }
  bool comm_trivial(uint32_t i, uint32_t j) const { return is_identity(comm_[cidx(i, j)]); }

  void set_pow(uint32_t i, const Element& rhs);
  void set_comm(uint32_t i, uint32_t j, const Element& rhs);

  std::vector<uint32_t> weights;  // p-central weight per generator (optional)
  std::vector<GenDef> defs;       // definitions for non-minimal generators

  // --- element arithmetic -------------------------------------------------
  Element identity() const { return Element(n_, 0); }
  bool is_identity(const Element& x) const;
  Element gen(uint32_t i) const;
  Element gen_pow(uint32_t i, uint32_t e) const;  // single-generator word, e in [0,p)

  Element mul(const Element& a, const Element& b) const;
  Element inv(const Element& a) const;
  Element power(const Element& a, uint64_t e) const;
  Element power_signed(const Element& a, long long e) const;
  Element conj(const Element& x, const Element& g) const;  // g^-1 x g
  Element commutator(const Element& x, const Element& y) const;
  Element collect_word(const Word& w) const;

  uint64_t element_order(const Element& x) const;
  uint64_t exponent() const;

  // rank/unrank against lexicographic order on exponent vectors
  uint64_t rank(const Element& x) const;
  Element unrank(uint64_t r) const;

  // --- presentation-level queries ------------------------------------------
  bool check_consistency() const;

  // verifies shape invariants (RHS above the rule, exponent ranges); throws
  void validate_shape() const;

  std::string describe() const;

private:
  friend class CoverBuilder;

  size_t cidx(uint32_t i, uint32_t j) const { return size_t(i) * (i - 1) / 2 + j; }

  // multiply collected a by g_i on the right; tails accumulated when tl != nullptr
  void mul_gen(Element& a, uint32_t g, TailVec* tl) const;
  void mul_into(Element& a, const Element& b, TailVec* tl) const;

  uint32_t p_, n_;
  std::vector<Element> pow_;   // n entries
  std::vector<Element> comm_;  // n(n-1)/2 entries, index cidx(i,j), i > j

  // optional central tails (cover construction); parallel to pow_/comm_
  std::vector<TailVec> pow_tail_;
  std::vector<TailVec> comm_tail_;
  uint32_t tail_dim_ = 0;

public:
  // --- cover-extension support (used by pgen) -------------------------------
  void enable_tails(uint32_t dim);
  void set_pow_tail(uint32_t i, const TailVec& t);
  void set_comm_tail(uint32_t i, uint32_t j, const TailVec& t);
  uint32_t tail_dim() const { return tail_dim_; }
  const TailVec& pow_tail(uint32_t i) const { return pow_tail_[i]; }
  const TailVec& comm_tail(uint32_t i, uint32_t j) const { return comm_tail_[cidx(i, j)]; }

  struct TailedElement {
    Element g;
    TailVec t;
  };
  TailedElement t_identity() const;
  TailedElement t_gen(uint32_t i) const;
  TailedElement t_mul(const TailedElement& a, const TailedElement& b) const;
  TailedElement t_inv(const TailedElement& a) const;
  TailedElement t_power(const TailedElement& a, uint64_t e) const;

  // consistency battery in tailed mode: collects the tail defect of every
  // overlap test; group parts must agree (the base group is consistent)
  std::vector<TailVec> consistency_defects() const;
};

// ---------------------------------------------------------------------------
// Subgroups via induced polycyclic sequences (sifting closure).
// ---------------------------------------------------------------------------

class Subgroup {
public:
  explicit Subgroup(const PcGroup& G) : G_(&G), slot_(G.ngens()) {}

  // inserts the subgroup (or normal-closure) generated by xs
  void generate(const std::vector<Element>& xs, bool normal_closure);

  bool contains(const Element& x) const;
  Element sift(const Element& x) const;  // canonical coset representative
  uint32_t dim() const;                  // order = p^dim
  std::vector<Element> basis() const;    // induced sequence, leading index ascending
  std::vector<uint32_t> leading() const;

  // coefficients of x against the induced sequence (x must be a member)
  std::vector<uint32_t> express(const Element& x) const;

  bool operator==(const Subgroup& o) const;

private:
  void insert(Element x, std::vector<Element>& queue);
  void normalize();

  const PcGroup* G_;
  std::vector<std::optional<Element>> slot_;
  bool normal_mode_ = false;
};

// ---------------------------------------------------------------------------
// Conjugacy classes (orbit algorithm; |G| <= 2^20).
// ---------------------------------------------------------------------------

struct ConjClass {
  Element rep;    // lexicographically least member
  uint64_t size;
};

struct ClassData {
  std::vector<ConjClass> classes;
  std::vector<uint32_t> class_of;  // indexed by element rank

  uint32_t index_of(const PcGroup& G, const Element& x) const {
    return class_of[G.rank(x)];
  }
};

ClassData conjugacy_classes(const PcGroup& G);

// class of x^k, computed on the representative
uint32_t power_class(const PcGroup& G, const ClassData& cd, uint32_t cls, uint64_t k);
uint64_t centralizer_order(const PcGroup& G, const ClassData& cd, const Element& x);

// ---------------------------------------------------------------------------
// Abelianization.
// ---------------------------------------------------------------------------

struct AbelianInvariants {
  std::vector<uint64_t> factors;           // invariant factors p^e1 | p^e2 | ...
  std::vector<std::vector<uint64_t>> proj; // per generator, image coordinates

  uint64_t order() const {
    uint64_t o = 1;
    for (uint64_t f : factors) o *= f;
    return o;
  }
  bool operator==(const AbelianInvariants& o) const { return factors == o.factors; }
};

AbelianInvariants abelianization(const PcGroup& G);

// image of an element in abelianization coordinates
std::vector<uint64_t> ab_image(const PcGroup& G, const AbelianInvariants& ab, const Element& x);

// ---------------------------------------------------------------------------
// Quotients and series.
// ---------------------------------------------------------------------------

struct QuotientMap {
  std::vector<uint32_t> surviving;  // generator indices of G kept in Q
  const PcGroup* G = nullptr;
  Subgroup kernel;
  QuotientMap(const PcGroup& G_, Subgroup k) : G(&G_), kernel(std::move(k)) {}
  Element apply(const Element& x) const;  // image in Q coordinates
};

struct Quotient {
  PcGroup Q;
  QuotientMap map;
};

Quotient quotient(const PcGroup& G, const std::vector<Element>& normal_gens);

// lower p-central series P_1 = G >= P_2 >= ...; result.back() is trivial
std::vector<Subgroup> lower_p_central_series(const PcGroup& G);
uint32_t p_class(const PcGroup& G);

// subgroup as a standalone group (induced presentation) with inclusion data
struct SubgroupPresentation {
  PcGroup H;
  std::vector<Element> gens_in_G;  // image of H's generator i in G
};
SubgroupPresentation subgroup_presentation(const PcGroup& G, const Subgroup& S);

// Frattini data: minimal generators plus an evaluation program that rebuilds
// every pc-generator's image from images of the minimal ones
struct MinimalGens {
  std::vector<uint32_t> gens;  // indices of minimal pc-generators

  struct Step {
    enum Kind : uint8_t { Given, PowOf, CommOf, WordOf } kind = Given;
    uint32_t a = 0, b = 0;  // PowOf: img[k] = img[a]^p ; CommOf: [img[a], img[b]]
    Word w;                 // WordOf: word over minimal generator indices
  };
  std::vector<Step> steps;  // one per pc-generator

  uint32_t rank() const { return uint32_t(gens.size()); }
};
MinimalGens minimal_generators(const PcGroup& G);

// images of all domain generators induced by images of the minimal ones
std::vector<Element> evaluate_images(const PcGroup& dom, const MinimalGens& mg,
                                     const PcGroup& cod, const std::vector<Element>& minimal_imgs);

// image of a normal word under per-generator images
Element evaluate_vector(const PcGroup& cod, const std::vector<Element>& imgs, const Element& v);

// checks that the generator images define a homomorphism (all rules preserved)
bool is_homomorphism(const PcGroup& dom, const PcGroup& cod, const std::vector<Element>& imgs);

// abelianizations of the index-p subgroups, one per hyperplane of G/Phi
std::vector<AbelianInvariants> maximal_subgroup_abelianizations(const PcGroup& G);

}  // namespace tame
