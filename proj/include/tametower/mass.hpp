#pragma once

// Ramification types, the local-data counting function and the heuristic mass
// A(G)/|Aut G|.
//
// A type entry is the closure of l^Z inside Z_p^* for a prime l; it is stored
// as an exact integer residue whose own closure is that subgroup, so powering
// an element by the residue realizes the stability condition at every
// precision at once.

#include <optional>
#include <string>

#include "tametower/base.hpp"
#include "tametower/homs.hpp"
#include "tametower/pc.hpp"

namespace tame {

struct TypeEntry {
  uint64_t residue;   // generator of the procyclic subgroup
  uint64_t modulus;   // congruence that determined it (0 = exact prime)
  uint32_t w_val;     // v_p(residue - 1); |W_i| = p^w_val
};

struct TypeZ {
  uint32_t p = 2;
  std::vector<TypeEntry> entries;

  uint32_t g() const { return uint32_t(entries.size()); }
  std::vector<uint64_t> w_orders() const {
    std::vector<uint64_t> w;
    for (const auto& e : entries) w.push_back(ipow(p, e.w_val));
    return w;
  }
  uint64_t w_group_order() const {
    uint64_t o = 1;
    for (uint64_t x : w_orders()) o *= x;
    return o;
  }
  std::string str() const;
};

// "3:1+3Z,1+3Z" / "2:5mod8,5mod8" / "2:3mod8,5mod8"; rejects residues that do
// not pin the closure (e.g. 1mod4, 3mod4, 7mod8)
TypeZ parse_type(const std::string& spec);

// type of an ordered tuple of actual primes
TypeZ type_of_primes(uint32_t p, const std::vector<uint64_t>& primes);

struct LocalData {
  std::vector<uint32_t> classes;  // class indices, one per type entry
  Element involution;             // identity for odd p
};

// classes fixed by powering with the subgroup generator
std::vector<uint32_t> stable_classes(const PcGroup& G, const ClassData& cd, uint64_t residue);

struct MassCount {
  uint64_t count = 0;                 // A_Z
  std::optional<LocalData> witness;   // first tuple found, if any
};

MassCount count_local_data(const PcGroup& G, const ClassData& cd, const TypeZ& Z);
uint64_t count_A_Z(const PcGroup& G, const TypeZ& Z);

bool validate_local_data(const PcGroup& G, const ClassData& cd, const TypeZ& Z,
                         const LocalData& data);

struct MassResult {
  uint64_t a_count = 0;
  uint64_t aut_order = 1;
  Rational mass;
};

// aut order searched when not supplied
MassResult mass(const PcGroup& G, const TypeZ& Z,
                std::optional<uint64_t> aut_order = std::nullopt);

}  // namespace tame
