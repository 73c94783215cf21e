#pragma once

// Monte-Carlo model of the random quotient attached to a braid-type coset:
// finite-class truncations of the punctured free group, rejection sampling of
// automorphisms sending each marked generator to a conjugate of a power of
// another, fixed-point quotients, and an exhaustive orbit oracle at desk
// scale.

#include "tametower/mass.hpp"
#include "tametower/pc.hpp"
#include "tametower/pgen.hpp"

namespace tame {

struct PuncturedFree {
  uint32_t N = 0;
  uint32_t p = 3;
  uint32_t cls = 1;
  PcGroup Q;                    // class-cls truncation of <x_1..x_N | x_1...x_N>
  std::vector<Element> marked;  // images of the punctures
};

PuncturedFree build_punctured_free(uint32_t N, uint32_t p, uint32_t cls);

// permutation in cycle notation, e.g. "(1 2)(3 4)"; fixed points may be omitted
struct Perm {
  std::vector<uint32_t> img;  // 0-based
  uint32_t n() const { return uint32_t(img.size()); }
  std::vector<std::vector<uint32_t>> cycles() const;  // reps minimal, sorted
};
Perm parse_perm(const std::string& s, uint32_t n);

struct BraidSample {
  std::vector<Element> conjugators;
  std::vector<Element> alpha;  // images of the marked generators
  uint64_t tries = 0;          // draws until acceptance
};

// rejection-samples conjugator tuples until the product relation holds
BraidSample sample_alpha(const PuncturedFree& Qf, uint64_t q, const Perm& sigma, Rng& rng,
                         uint64_t rejection_cap = 1'000'000);

PcGroup fixed_quotient(const PuncturedFree& Qf, const BraidSample& s);

// the type induced by (q, sigma): one entry q^{k_j} per cycle
TypeZ induced_type(uint32_t p, uint64_t q, const Perm& sigma);

struct BraidBucket {
  std::string key;          // canonical key of the isomorphism class
  PcGroup representative;
  uint64_t count = 0;
  Rational predicted;       // heuristic mass under the induced type
  double frequency = 0;
  double three_sigma = 0;
  std::vector<uint64_t> ab;
};

struct BraidReport {
  uint32_t p = 3, N = 0, cls = 1;
  uint64_t q = 0;
  std::string sigma;
  uint64_t seed = 0;
  uint64_t samples = 0;
  uint64_t total_tries = 0;  // rejection statistics
  std::vector<BraidBucket> buckets;
  std::vector<uint64_t> expected_ab;  // truncated W(q, sigma)
  bool all_ab_match = true;
  std::vector<std::string> caveats;
};

BraidReport run_distribution(const PuncturedFree& Qf, uint64_t q, const Perm& sigma,
                             uint64_t samples, uint64_t seed, uint32_t threads = 1);

// --- exhaustive oracle -------------------------------------------------------

struct BurnsideOracle {
  uint64_t epi_count = 0;        // size of the constrained epimorphism set
  uint64_t accepted_count = 0;   // accepted maps in the (q, sigma) model
  uint64_t pure_count = 0;       // accepted maps in the (1, id) model
  Rational average_fixed;        // mean fixed epimorphisms over accepted maps
  uint64_t orbit_count = 0;      // orbits of the pure model on the epi set
  uint64_t twisted_orbit_count = 0;  // orbits fixed by one (q, sigma) element
  bool burnside_identity = false;    // average == twisted orbit count
};

// target: a group together with one conjugacy class index per cycle of sigma
BurnsideOracle tiny_burnside_oracle(const PuncturedFree& Qf, uint64_t q, const Perm& sigma,
                                    const PcGroup& target, const std::vector<uint32_t>& cls,
                                    uint64_t budget = 50'000'000);

}  // namespace tame
