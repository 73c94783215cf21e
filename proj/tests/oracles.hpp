#pragma once

// Independent brute-force group oracles for the test suites: explicit
// multiplication tables built from closed-form normal forms, with orbit
// and closure computations done naively.  Nothing here touches collection.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

namespace oracle {

struct TableGroup {
  int n = 0;
  std::vector<std::vector<int>> mul;
  int id = 0;

  int inverse(int a) const {
    for (int b = 0; b < n; ++b)
      if (mul[a][b] == id) return b;
    throw std::logic_error("no inverse");
  }
  int power(int a, long long e) const {
    if (e < 0) return inverse(power(a, -e));
    int r = id;
    while (e--) r = mul[r][a];
    return r;
  }
  int order(int a) const {
    int r = a, o = 1;
    while (r != id) { r = mul[r][a]; ++o; }
    return o;
  }
  int conj(int x, int g) const { return mul[mul[inverse(g)][x]][g]; }
  int comm(int x, int y) const { return mul[inverse(mul[y][x])][mul[x][y]]; }

  bool is_associative() const {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (mul[mul[a][b]][c] != mul[a][mul[b][c]]) return false;
    return true;
  }

  std::vector<std::vector<int>> conjugacy_classes() const {
    std::vector<int> cls(n, -1);
    std::vector<std::vector<int>> out;
    for (int x = 0; x < n; ++x) {
      if (cls[x] >= 0) continue;
      std::vector<int> orbit{x};
      cls[x] = int(out.size());
      for (size_t t = 0; t < orbit.size(); ++t)
        for (int g = 0; g < n; ++g) {
          int y = conj(orbit[t], g);
          if (cls[y] < 0) { cls[y] = int(out.size()); orbit.push_back(y); }
        }
      std::sort(orbit.begin(), orbit.end());
      out.push_back(orbit);
    }
    return out;
  }

  std::vector<int> closure(std::vector<int> gens) const {
    std::set<int> seen{id};
    std::vector<int> queue{id};
    for (int g : gens)
      if (seen.insert(g).second) queue.push_back(g);
    for (size_t t = 0; t < queue.size(); ++t)
      for (int g : gens) {
        int y = mul[queue[t]][g];
        if (seen.insert(y).second) queue.push_back(y);
        y = mul[g][queue[t]];
        if (seen.insert(y).second) queue.push_back(y);
      }
    return std::vector<int>(seen.begin(), seen.end());
  }

  std::vector<int> commutator_subgroup() const {
    std::vector<int> gens;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) gens.push_back(comm(a, b));
    return closure(gens);
  }

  // quotient by the (normal) subgroup given as a sorted element list
  TableGroup quotient(const std::vector<int>& N) const {
    std::vector<int> cosetOf(n, -1);
    std::vector<int> reps;
    for (int x = 0; x < n; ++x) {
      if (cosetOf[x] >= 0) continue;
      int c = int(reps.size());
      for (int h : N) cosetOf[mul[x][h]] = c;
      if (cosetOf[x] != c) throw std::logic_error("not a subgroup list");
      reps.push_back(x);
    }
    TableGroup Q;
    Q.n = int(reps.size());
    Q.mul.assign(Q.n, std::vector<int>(Q.n, 0));
    for (int a = 0; a < Q.n; ++a)
      for (int b = 0; b < Q.n; ++b) Q.mul[a][b] = cosetOf[mul[reps[a]][reps[b]]];
    Q.id = cosetOf[id];
    return Q;
  }

  // invariant factors of an abelian table group (ascending divisibility)
  std::vector<int> abelian_invariants() const {
    TableGroup A = *this;
    std::vector<int> inv;
    while (A.n > 1) {
      int best = A.id, besto = 1;
      for (int x = 0; x < A.n; ++x)
        if (A.order(x) > besto) { besto = A.order(x); best = x; }
      inv.push_back(besto);
      std::vector<int> sub;
      int r = A.id;
      do { sub.push_back(r); r = A.mul[r][best]; } while (r != A.id);
      std::sort(sub.begin(), sub.end());
      A = A.quotient(sub);
    }
    std::sort(inv.begin(), inv.end());
    return inv;
  }

  std::vector<int> abelianization_invariants() const {
    return quotient(commutator_subgroup()).abelian_invariants();
  }
};

// <a, b | a^m, b^k, a^b = a^r>, elements a^i b^j encoded as i*k + j
inline TableGroup metacyclic(int m, int k, int r) {
  long long rp = 1;
  for (int t = 0; t < k; ++t) rp = (rp * r) % m;
  if (rp % m != 1) throw std::logic_error("metacyclic: r^k != 1 mod m");
  int rinv = 0;
  for (int t = 1; t < m; ++t)
    if ((t * r) % m == 1) rinv = t;
  TableGroup G;
  G.n = m * k;
  G.mul.assign(G.n, std::vector<int>(G.n, 0));
  auto enc = [&](int i, int j) { return i * k + j; };
  for (int i1 = 0; i1 < m; ++i1)
    for (int j1 = 0; j1 < k; ++j1)
      for (int i2 = 0; i2 < m; ++i2)
        for (int j2 = 0; j2 < k; ++j2) {
          // b a = a^{r^-1} b, so b^{j} a^{i} = a^{i * rinv^j} b^{j}
          long long shift = i2;
          for (int t = 0; t < j1; ++t) shift = (shift * rinv) % m;
          G.mul[enc(i1, j1)][enc(i2, j2)] = enc(int((i1 + shift) % m), (j1 + j2) % k);
        }
  G.id = enc(0, 0);
  return G;
}

inline TableGroup modular16() { return metacyclic(8, 2, 5); }
inline TableGroup modular27() { return metacyclic(9, 3, 4); }
inline TableGroup semidihedral16() { return metacyclic(8, 2, 3); }

inline TableGroup quaternion8() {
  // 0..7 = 1, -1, i, -i, j, -j, k, -k
  auto neg = [](int x) { return x ^ 1; };
  TableGroup G;
  G.n = 8;
  G.id = 0;
  G.mul.assign(8, std::vector<int>(8, -1));
  auto set = [&](int a, int b, int c) { G.mul[a][b] = c; };
  int I = 2, J = 4, K = 6;
  for (int x = 0; x < 8; ++x) { set(0, x, x); set(x, 0, x); }
  for (int x = 2; x < 8; ++x) { set(1, x, neg(x)); set(x, 1, neg(x)); }
  set(1, 1, 0);
  set(I, I, 1); set(J, J, 1); set(K, K, 1);
  set(I, J, K); set(J, K, I); set(K, I, J);
  set(J, I, neg(K)); set(K, J, neg(I)); set(I, K, neg(J));
  for (int a = 2; a < 8; ++a)
    for (int b = 2; b < 8; ++b) {
      int ua = a & ~1, ub = b & ~1;
      int base = G.mul[ua][ub];
      int sign = ((a & 1) ^ (b & 1));
      G.mul[a][b] = sign ? neg(base) : base;
    }
  return G;
}

// upper unitriangular 3x3 over F_p: extraspecial of order p^3, exponent p (p odd)
inline TableGroup heisenberg(int p) {
  TableGroup G;
  G.n = p * p * p;
  auto enc = [&](int a, int b, int c) { return (a * p + b) * p + c; };
  G.mul.assign(G.n, std::vector<int>(G.n, 0));
  for (int a1 = 0; a1 < p; ++a1)
    for (int b1 = 0; b1 < p; ++b1)
      for (int c1 = 0; c1 < p; ++c1)
        for (int a2 = 0; a2 < p; ++a2)
          for (int b2 = 0; b2 < p; ++b2)
            for (int c2 = 0; c2 < p; ++c2)
              G.mul[enc(a1, b1, c1)][enc(a2, b2, c2)] =
                  enc((a1 + a2) % p, (b1 + b2) % p, (c1 + c2 + a1 * b2) % p);
  G.id = 0;
  return G;
}

inline TableGroup cyclic(int m) { return metacyclic(m, 1, 1); }

inline TableGroup direct_product(const TableGroup& A, const TableGroup& B) {
  TableGroup G;
  G.n = A.n * B.n;
  G.mul.assign(G.n, std::vector<int>(G.n, 0));
  for (int a1 = 0; a1 < A.n; ++a1)
    for (int b1 = 0; b1 < B.n; ++b1)
      for (int a2 = 0; a2 < A.n; ++a2)
        for (int b2 = 0; b2 < B.n; ++b2)
          G.mul[a1 * B.n + b1][a2 * B.n + b2] = A.mul[a1][a2] * B.n + B.mul[b1][b2];
  G.id = A.id * B.n + B.id;
  return G;
}

}  // namespace oracle
