#include "tametower/mass.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tame {

std::string TypeZ::str() const {
  std::ostringstream os;
  os << p << ":";
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) os << ",";
    const auto& e = entries[i];
    if (e.modulus == 0)
      os << "l=" << e.residue;
    else if (p != 2)
      os << "1+" << (e.residue - 1) << "Z";
    else
      os << (e.residue % e.modulus) << "mod" << e.modulus;
  }
  return os.str();
}

namespace {

TypeEntry entry_for_odd(uint32_t p, uint32_t k) {
  // 1 + p^k Z_p, generated by 1 + p^k
  TypeEntry e;
  e.residue = 1 + ipow(p, k);
  e.modulus = ipow(p, k + 1);
  e.w_val = k;
  return e;
}

TypeEntry entry_for_two(uint64_t a, uint64_t m) {
  if (a % 2 == 0 || a >= m) throw ParseError("type residue must be odd and below the modulus");
  // the closure of l^Z is the same for every prime l = a (mod m) iff
  // v_2(a^2 - 1) <= v_2(m); otherwise deeper bits of l matter
  uint32_t vm = val_p(m, 2);
  if (ipow(2, vm) != m) throw ParseError("type modulus must be a power of 2");
  uint64_t a2 = a * a - 1;
  if (a == 1 || val_p(a2, 2) > vm) {
    std::ostringstream os;
    os << a << "mod" << m << " is ambiguous: primes in this class have different types; "
       << "refine the modulus (e.g. " << a << "mod" << 2 * m << " or " << (a + m) << "mod" << 2 * m
       << ")";
    throw ParseError(os.str());
  }
  TypeEntry e;
  e.residue = a;
  e.modulus = m;
  e.w_val = val_p(a - 1, 2);
  return e;
}

}  // namespace

TypeZ parse_type(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw ParseError("type needs the form p:entry,entry,...");
  TypeZ Z;
  Z.p = uint32_t(std::stoul(spec.substr(0, colon)));
  if (!is_prime_u64(Z.p)) throw ParseError("type base is not prime");
  std::string rest = spec.substr(colon + 1);
  size_t pos = 0;
  while (pos <= rest.size()) {
    size_t comma = rest.find(',', pos);
    std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.empty()) throw ParseError("empty type entry");
    auto modpos = tok.find("mod");
    if (tok.size() > 2 && tok[0] == '1' && tok[1] == '+') {
      // 1+p^kZ written as 1+3Z, 1+9Z, ...
      if (tok.back() != 'Z') throw ParseError("expected 1+p^kZ entry: " + tok);
      uint64_t q = std::stoull(tok.substr(2, tok.size() - 3));
      if (Z.p == 2) throw ParseError("1+2^kZ entries are written as residues mod 2^{k+1}");
      uint32_t k = val_p(q, Z.p);
      if (q != ipow(Z.p, k) || k == 0) throw ParseError("entry must be 1+p^kZ: " + tok);
      Z.entries.push_back(entry_for_odd(Z.p, k));
    } else if (modpos != std::string::npos) {
      uint64_t a = std::stoull(tok.substr(0, modpos));
      uint64_t m = std::stoull(tok.substr(modpos + 3));
      if (Z.p != 2) throw ParseError("residue-mod entries are for p = 2");
      Z.entries.push_back(entry_for_two(a, m));
    } else {
      throw ParseError("unrecognized type entry: " + tok);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (Z.entries.empty()) throw ParseError("type has no entries");
  return Z;
}

TypeZ type_of_primes(uint32_t p, const std::vector<uint64_t>& primes) {
  TypeZ Z;
  Z.p = p;
  for (uint64_t l : primes) {
    if (l == p || !is_prime_u64(l)) throw PreconditionError("type entries must be primes distinct from p");
    if (p != 2) {
      if (l % p != 1) throw PreconditionError("prime fails l = 1 (mod p)");
    } else {
      if (l % 2 == 0) throw PreconditionError("prime must be odd");
    }
    TypeEntry e;
    e.residue = l;
    e.modulus = 0;
    e.w_val = val_p(l - 1, p);
    Z.entries.push_back(e);
  }
  return Z;
}

std::vector<uint32_t> stable_classes(const PcGroup& G, const ClassData& cd, uint64_t residue) {
  std::vector<uint32_t> out;
  for (uint32_t c = 0; c < cd.classes.size(); ++c)
    if (power_class(G, cd, c, residue) == c) out.push_back(c);
  return out;
}

namespace {

uint64_t ab_element_order(const AbelianInvariants& ab, const std::vector<uint64_t>& v) {
  uint64_t o = 1;
  for (size_t t = 0; t < v.size(); ++t) {
    uint64_t d = ab.factors[t];
    uint64_t ord = d / std::gcd(d, v[t]);
    o = std::lcm(o, ord);
  }
  return o;
}

bool generates_ab(const AbelianInvariants& ab, const std::vector<std::vector<uint64_t>>& vs,
                  uint32_t p) {
  // Nakayama: images generate iff they span ab/p.ab
  size_t k = ab.factors.size();
  std::vector<std::vector<uint32_t>> rows;
  for (const auto& v : vs) {
    std::vector<uint32_t> r(k);
    for (size_t t = 0; t < k; ++t) r[t] = uint32_t(v[t] % p);
    rows.push_back(r);
  }
  uint32_t rank = 0;
  for (size_t col = 0; col < k && rank < rows.size(); ++col) {
    size_t piv = rows.size();
    for (size_t r = rank; r < rows.size(); ++r)
      if (rows[r][col]) { piv = r; break; }
    if (piv == rows.size()) continue;
    std::swap(rows[rank], rows[piv]);
    uint32_t inv = 1;
    while ((inv * rows[rank][col]) % p != 1) ++inv;
    for (size_t c = 0; c < k; ++c) rows[rank][c] = (rows[rank][c] * inv) % p;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || !rows[r][col]) continue;
      uint32_t f = rows[r][col];
      for (size_t c = 0; c < k; ++c) rows[r][c] = (rows[r][c] + (p - f) * rows[rank][c]) % p;
    }
    ++rank;
  }
  return rank == k;
}

}  // namespace

MassCount count_local_data(const PcGroup& G, const ClassData& cd, const TypeZ& Z) {
  MassCount out;
  if (G.p() != Z.p && !G.is_trivial()) return out;  // wrong prime
  const uint32_t g = Z.g();
  AbelianInvariants ab = abelianization(G);

  if (g == 0) {
    // empty tuple, trivial involution; the map condition needs |ab| = 1
    if (ab.factors.empty()) {
      out.count = 1;
      out.witness = LocalData{{}, G.identity()};
    }
    return out;
  }
  std::vector<uint64_t> w = Z.w_orders();
  uint64_t worder = 1;
  for (uint64_t x : w) worder *= x;
  if (worder != ab.order()) return out;  // isomorphism condition unsatisfiable

  std::vector<std::vector<uint32_t>> stab(g);
  for (uint32_t i = 0; i < g; ++i) stab[i] = stable_classes(G, cd, Z.entries[i].residue);

  std::vector<std::vector<uint64_t>> pi(cd.classes.size());
  for (uint32_t c = 0; c < cd.classes.size(); ++c) pi[c] = ab_image(G, ab, cd.classes[c].rep);

  // involution counts per abelianization value (p = 2 only)
  std::map<std::vector<uint64_t>, std::pair<uint64_t, Element>> invol;
  if (Z.p == 2) {
    for (uint64_t r = 0; r < G.order(); ++r) {
      Element x = G.unrank(r);
      if (!G.is_identity(G.mul(x, x))) continue;
      auto key = ab_image(G, ab, x);
      auto it = invol.find(key);
      if (it == invol.end())
        invol[key] = {1, x};
      else
        it->second.first++;
    }
  }

  std::vector<uint32_t> tuple(g, 0);
  std::vector<std::vector<uint64_t>> vs(g);
  auto rec = [&](auto&& self, uint32_t pos) -> void {
    if (pos == g) {
      for (uint32_t i = 0; i < g; ++i)
        if (ab_element_order(ab, vs[i]) > w[i]) return;  // map not well-defined
      if (!generates_ab(ab, vs, Z.p)) return;
      // well-defined + surjective + equal orders = isomorphism
      if (Z.p != 2) {
        out.count += 1;
        if (!out.witness) out.witness = LocalData{tuple, G.identity()};
        return;
      }
      // involution condition: sum of the order-2 elements of <pi(c_i)>
      std::vector<uint64_t> t(ab.factors.size(), 0);
      for (uint32_t i = 0; i < g; ++i) {
        uint64_t half = w[i] / 2;
        for (size_t k = 0; k < t.size(); ++k)
          t[k] = (t[k] + half * vs[i][k]) % ab.factors[k];
      }
      auto it = invol.find(t);
      if (it == invol.end()) return;
      out.count += it->second.first;
      if (!out.witness) out.witness = LocalData{tuple, it->second.second};
      return;
    }
    for (uint32_t c : stab[pos]) {
      tuple[pos] = c;
      vs[pos] = pi[c];
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
  return out;
}

uint64_t count_A_Z(const PcGroup& G, const TypeZ& Z) {
  ClassData cd = conjugacy_classes(G);
  return count_local_data(G, cd, Z).count;
}

bool validate_local_data(const PcGroup& G, const ClassData& cd, const TypeZ& Z,
                         const LocalData& data) {
  const uint32_t g = Z.g();
  if (data.classes.size() != g) return false;
  AbelianInvariants ab = abelianization(G);
  std::vector<uint64_t> w = Z.w_orders();
  uint64_t worder = 1;
  for (uint64_t x : w) worder *= x;

  for (uint32_t i = 0; i < g; ++i)
    if (power_class(G, cd, data.classes[i], Z.entries[i].residue) != data.classes[i]) return false;
  std::vector<std::vector<uint64_t>> vs;
  for (uint32_t i = 0; i < g; ++i) vs.push_back(ab_image(G, ab, cd.classes[data.classes[i]].rep));
  if (g > 0 && !generates_ab(ab, vs, Z.p)) return false;
  if (g == 0 && !ab.factors.empty()) return false;
  if (worder != ab.order()) return false;
  for (uint32_t i = 0; i < g; ++i)
    if (ab_element_order(ab, vs[i]) > w[i]) return false;
  if (Z.p == 2) {
    if (!G.is_identity(G.mul(data.involution, data.involution))) return false;
    std::vector<uint64_t> t(ab.factors.size(), 0);
    for (uint32_t i = 0; i < g; ++i) {
      uint64_t half = w[i] / 2;
      for (size_t k = 0; k < t.size(); ++k) t[k] = (t[k] + half * vs[i][k]) % ab.factors[k];
    }
    if (ab_image(G, ab, data.involution) != t) return false;
  } else {
    if (!G.is_identity(data.involution)) return false;
  }
  return true;
}

MassResult mass(const PcGroup& G, const TypeZ& Z, std::optional<uint64_t> aut_order) {
  MassResult r;
  r.a_count = count_A_Z(G, Z);
  r.aut_order = G.is_trivial() ? 1 : (aut_order ? *aut_order : automorphism_group(G).order);
  r.mass = Rational(int64_t(r.a_count), int64_t(r.aut_order));
  return r;
}

}  // namespace tame
