#pragma once

// Handy pc presentations of the small groups that recur in the test suites
// and as tree anchors.

#include "tametower/pc.hpp"

namespace tame::catalog {

// <a,b | a^8, b^2, a^b = a^5>, generators (b, a, a^2, a^4)
inline PcGroup modular16() {
  PcGroup G(2, 4);
  G.set_pow(1, {0, 0, 1, 0});
  G.set_pow(2, {0, 0, 0, 1});
  G.set_comm(1, 0, {0, 0, 0, 1});
  G.weights = {1, 1, 2, 3};
  G.defs[2] = GenDef{GenDef::Pow, 1, 0};
  G.defs[3] = GenDef{GenDef::Pow, 2, 0};
  return G;
}

// <a,b | a^9, b^3, a^b = a^4>, generators (b, a, a^3)
inline PcGroup modular27() {
  PcGroup G(3, 3);
  G.set_pow(1, {0, 0, 1});
  G.set_comm(1, 0, {0, 0, 1});
  G.weights = {1, 1, 2};
  G.defs[2] = GenDef{GenDef::Pow, 1, 0};
  return G;
}

// <a,b | a^8, b^2, a^b = a^3>, generators (b, a, a^2, a^4)
inline PcGroup semidihedral16() {
  PcGroup G(2, 4);
  G.set_pow(1, {0, 0, 1, 0});
  G.set_pow(2, {0, 0, 0, 1});
  G.set_comm(1, 0, {0, 0, 1, 0});
  G.set_comm(2, 0, {0, 0, 0, 1});
  G.weights = {1, 1, 2, 3};
  G.defs[2] = GenDef{GenDef::Pow, 1, 0};
  G.defs[3] = GenDef{GenDef::Pow, 2, 0};
  return G;
}

// generators (i, j, -1)
inline PcGroup quaternion8() {
  PcGroup G(2, 3);
  G.set_pow(0, {0, 0, 1});
  G.set_pow(1, {0, 0, 1});
  G.set_comm(1, 0, {0, 0, 1});
  G.weights = {1, 1, 2};
  G.defs[2] = GenDef{GenDef::Pow, 0, 0};
  return G;
}

// extraspecial 3^3 of exponent 3, generators (b, a, [a, b])
inline PcGroup heisenberg27() {
  PcGroup G(3, 3);
  G.set_comm(1, 0, {0, 0, 1});
  G.weights = {1, 1, 2};
  G.defs[2] = GenDef{GenDef::Comm, 1, 0};
  return G;
}

// larger semidihedral <a,b | a^{2^{k-1}}, b^2, a^b = a^{2^{k-2}-1}>, k >= 4
inline PcGroup semidihedral(uint32_t k) {
  if (k < 4) throw PreconditionError("semidihedral needs order >= 16");
  uint32_t m = k - 1;  // a has order 2^m
  PcGroup G(2, m + 1);  // gens b, a, a^2, a^4, ..., a^{2^{m-1}}
  for (uint32_t t = 1; t < m; ++t) {
    Element rhs(m + 1, 0);
    rhs[t + 1] = 1;
    G.set_pow(t, rhs);
    G.defs[t + 1] = GenDef{GenDef::Pow, uint16_t(t), 0};
    G.weights.assign(m + 1, 1);
  }
  // a^b = a^{2^{m-1}-1}: [a,b] = a^{-1} a^b = a^{2^{m-1}-2}
  uint64_t e = (1ULL << (m - 1)) - 2;  // exponent of a in [a,b]
  Element c(m + 1, 0);
  for (uint32_t t = 1; t <= m; ++t) {
    c[t] = uint8_t((e >> (t - 1)) & 1);  // a^{2^{t-1}} is generator t
  }
  G.set_comm(1, 0, c);
  for (uint32_t t = 2; t <= m; ++t) {
    // [a^{2^{t-1}}, b]: conjugate is a^{(2^{m-1}-1) 2^{t-1}}
    uint64_t conj = ((1ULL << (m - 1)) - 1) << (t - 1);
    uint64_t diff = (conj - (1ULL << (t - 1))) & ((1ULL << m) - 1);
    Element cc(m + 1, 0);
    for (uint32_t u = 1; u <= m; ++u) cc[u] = uint8_t((diff >> (u - 1)) & 1);
    G.set_comm(t, 0, cc);
  }
  for (uint32_t i = 1; i <= m; ++i) G.weights[i] = i;
  G.weights[0] = 1;
  return G;
}

}  // namespace tame::catalog
