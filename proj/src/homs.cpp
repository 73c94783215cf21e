// Image-search based homomorphism machinery.

#include "tametower/homs.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

namespace tame {

std::vector<Element> class_elements(const PcGroup& G, const ClassData& cd, uint32_t cls) {
  std::vector<Element> out;
  const ConjClass& c = cd.classes[cls];
  out.reserve(c.size);
  std::set<uint64_t> seen{G.rank(c.rep)};
  std::vector<Element> queue{c.rep};
  while (!queue.empty()) {
    Element x = queue.back();
    queue.pop_back();
    out.push_back(x);
    for (uint32_t i = 0; i < G.ngens(); ++i) {
      Element y = G.conj(x, G.gen(i));
      if (seen.insert(G.rank(y)).second) queue.push_back(y);
    }
  }
  std::sort(out.begin(), out.end(), [&](const Element& a, const Element& b) {
    return G.rank(a) < G.rank(b);
  });
  return out;
}

// Frattini-quotient coordinates: abelianization mod p
namespace {

struct FrattiniProj {
  const PcGroup* G;
  AbelianInvariants ab;
  uint32_t dim() const { return uint32_t(ab.factors.size()); }
  std::vector<uint8_t> coords(const Element& x) const {
    auto v = ab_image(*G, ab, x);
    std::vector<uint8_t> c(v.size());
    for (size_t i = 0; i < v.size(); ++i) c[i] = uint8_t(v[i] % G->p());
    return c;
  }
};

FrattiniProj frattini_proj(const PcGroup& G) { return FrattiniProj{&G, abelianization(G)}; }

bool spans_frattini(const FrattiniProj& fp, const std::vector<Element>& xs, uint32_t p) {
  uint32_t d = fp.dim();
  std::vector<std::vector<uint8_t>> rows;
  for (const Element& x : xs) rows.push_back(fp.coords(x));
  uint32_t rank = 0;
  for (uint32_t col = 0; col < d && rank < rows.size(); ++col) {
    size_t piv = rows.size();
    for (size_t r = rank; r < rows.size(); ++r)
      if (rows[r][col]) { piv = r; break; }
    if (piv == rows.size()) continue;
    std::swap(rows[rank], rows[piv]);
    uint32_t inv = 1;
    while ((inv * rows[rank][col]) % p != 1) ++inv;
    for (uint32_t c2 = 0; c2 < d; ++c2) rows[rank][c2] = uint8_t((rows[rank][c2] * inv) % p);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || !rows[r][col]) continue;
      uint32_t f = rows[r][col];
      for (uint32_t c2 = 0; c2 < d; ++c2)
        rows[r][c2] = uint8_t((rows[r][c2] + (p - f) * rows[rank][c2]) % p);
    }
    ++rank;
  }
  return rank == d;
}

std::string map_key(const GroupMap& f) {
  std::string s;
  for (const Element& e : f.images) s.append(e.begin(), e.end());
  return s;
}

}  // namespace

Element apply_map(const PcGroup& cod, const GroupMap& f, const Element& x) {
  return evaluate_vector(cod, f.images, x);
}

GroupMap compose(const PcGroup& cod, const GroupMap& f, const GroupMap& g) {
  GroupMap r;
  r.images.reserve(g.images.size());
  for (const Element& gi : g.images) r.images.push_back(apply_map(cod, f, gi));
  r.surjective = f.surjective && g.surjective;
  return r;
}

GroupMap identity_map(const PcGroup& G) {
  GroupMap r;
  for (uint32_t i = 0; i < G.ngens(); ++i) r.images.push_back(G.gen(i));
  r.surjective = true;
  return r;
}

GroupMap invert_automorphism(const PcGroup& G, const GroupMap& f) {
  const uint32_t n = G.ngens();
  struct Prov {
    Element el;
    Word w;
  };
  auto winv = [](const Word& w) {
    Word r;
    for (size_t i = w.size(); i-- > 0;) r.push_back({w[i].gen, -w[i].exp});
    return r;
  };
  auto wcat = [](Word a, const Word& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  std::vector<std::optional<Prov>> slot(n);
  std::vector<Prov> queue;
  for (uint32_t i = 0; i < n; ++i) queue.push_back({f.images[i], {{uint16_t(i), 1}}});
  auto leading = [&](const Element& x) {
    for (uint32_t i = 0; i < n; ++i)
      if (x[i]) return i;
    return n;
  };
  while (!queue.empty()) {
    Prov cur = queue.back();
    queue.pop_back();
    for (;;) {
      uint32_t i = leading(cur.el);
      if (i == n) break;
      if (!slot[i]) {
        uint32_t c = cur.el[i], cinv = 1;
        while ((cinv * c) % G.p() != 1) ++cinv;
        Prov s{G.power(cur.el, cinv), {}};
        for (uint32_t t = 0; t < cinv; ++t) s.w = wcat(s.w, cur.w);
        slot[i] = s;
        Prov pw{G.power(s.el, G.p()), {}};
        for (uint32_t t = 0; t < G.p(); ++t) pw.w = wcat(pw.w, s.w);
        queue.push_back(pw);
        for (uint32_t k = 0; k < n; ++k)
          if (k != i && slot[k]) {
            const Prov& o = *slot[k];
            queue.push_back({G.commutator(o.el, s.el), wcat(wcat(winv(o.w), winv(s.w)), wcat(o.w, s.w))});
            queue.push_back({G.commutator(s.el, o.el), wcat(wcat(winv(s.w), winv(o.w)), wcat(s.w, o.w))});
          }
        break;
      }
      uint32_t c = cur.el[i];
      cur.el = G.mul(G.inv(G.power(slot[i]->el, c)), cur.el);
      Word pref;
      for (uint32_t t = 0; t < c; ++t) pref = wcat(pref, slot[i]->w);
      cur.w = wcat(winv(pref), cur.w);
    }
  }
  GroupMap out;
  out.surjective = true;
  for (uint32_t k = 0; k < n; ++k) {
    Element y = G.gen(k);
    Word w;
    for (uint32_t i = 0; i < n; ++i) {
      if (!slot[i] || !y[i]) continue;
      uint32_t c = y[i];
      for (uint32_t t = 0; t < c; ++t) w = wcat(w, slot[i]->w);
      y = G.mul(G.inv(G.power(slot[i]->el, c)), y);
    }
    if (!G.is_identity(y)) throw PreconditionError("invert_automorphism: map is not bijective");
    // letters index f.images; substituting the plain generators yields the preimage
    Element pre = G.identity();
    for (const Letter& l : w) {
      Element g = G.power(G.gen(l.gen), uint64_t(l.exp < 0 ? -l.exp : l.exp));
      if (l.exp < 0) g = G.inv(g);
      pre = G.mul(pre, g);
    }
    out.images.push_back(pre);
  }
  return out;
}

// ---------------------------------------------------------------------------
// homomorphism enumeration
// ---------------------------------------------------------------------------

std::vector<GroupMap> homomorphisms(const PcGroup& dom, const PcGroup& cod,
                                    const ClassData& cod_classes, const HomOptions& opt) {
  MinimalGens mg = minimal_generators(dom);
  const uint32_t d = mg.rank();
  FrattiniProj fp = frattini_proj(cod);

  std::vector<std::vector<Element>> cands(d);
  if (opt.class_constraints) {
    if (opt.class_constraints->size() != d)
      throw PreconditionError("class constraint count must match minimal generator count");
    for (uint32_t t = 0; t < d; ++t) {
      uint32_t cls = (*opt.class_constraints)[t];
      if (cls >= cod_classes.classes.size())
        throw PreconditionError("constraint class is not a class of the codomain");
      cands[t] = class_elements(cod, cod_classes, cls);
    }
  } else {
    std::vector<Element> all;
    for (uint64_t r = 0; r < cod.order(); ++r) all.push_back(cod.unrank(r));
    for (uint32_t t = 0; t < d; ++t) cands[t] = all;
  }

  uint64_t total = 1;
  for (const auto& c : cands) {
    if (__builtin_mul_overflow(total, uint64_t(c.size()), &total) || total > opt.budget)
      throw CapacityError("homomorphism search exceeds budget");
  }

  std::vector<GroupMap> out;
  std::vector<Element> tuple(d, cod.identity());
  for (uint64_t step = 0; step < total; ++step) {
    uint64_t v = step;
    for (uint32_t t = 0; t < d; ++t) {
      tuple[t] = cands[t][v % cands[t].size()];
      v /= cands[t].size();
    }
    std::vector<Element> imgs = evaluate_images(dom, mg, cod, tuple);
    if (!is_homomorphism(dom, cod, imgs)) continue;
    GroupMap f;
    f.images = std::move(imgs);
    f.surjective = spans_frattini(fp, tuple, cod.p());
    if (opt.surjective_only && !f.surjective) continue;
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// fingerprints, isomorphism, automorphism group
// ---------------------------------------------------------------------------

std::vector<uint64_t> fingerprint(const PcGroup& G) {
  std::vector<uint64_t> fp{G.p(), G.order()};
  AbelianInvariants ab = abelianization(G);
  fp.push_back(ab.factors.size());
  for (uint64_t f : ab.factors) fp.push_back(f);
  ClassData cd = conjugacy_classes(G);
  std::vector<std::pair<uint64_t, uint64_t>> profile;
  for (const auto& c : cd.classes) profile.push_back({G.element_order(c.rep), c.size});
  std::sort(profile.begin(), profile.end());
  fp.push_back(profile.size());
  uint64_t expo = 1;
  for (auto& pr : profile) {
    fp.push_back(pr.first);
    fp.push_back(pr.second);
    expo = std::max(expo, pr.first);
  }
  fp.push_back(expo);
  return fp;
}

namespace {

// per-element invariant used to prune image candidates
struct ElementProfiles {
  std::vector<uint64_t> key;  // by rank
  static ElementProfiles build(const PcGroup& G, const ClassData& cd) {
    ElementProfiles ep;
    ep.key.assign(G.order(), 0);
    std::vector<Subgroup> series = lower_p_central_series(G);
    for (uint64_t r = 0; r < G.order(); ++r) {
      Element x = G.unrank(r);
      uint64_t ord = G.element_order(x);
      uint64_t csz = cd.classes[cd.class_of[r]].size;
      uint64_t depth = 0;
      for (const Subgroup& s : series)
        if (s.contains(x)) ++depth;
      ep.key[r] = (ord << 40) ^ (csz << 20) ^ depth;
    }
    return ep;
  }
};

struct IsoSearch {
  const PcGroup *G, *H;
  MinimalGens mg;
  FrattiniProj fpH;
  std::vector<std::vector<Element>> cands;
  uint64_t total = 1;

  static std::optional<IsoSearch> prepare(const PcGroup& G, const PcGroup& H, uint64_t budget) {
    if (fingerprint(G) != fingerprint(H)) return std::nullopt;
    IsoSearch s{&G, &H, minimal_generators(G), frattini_proj(H), {}, 1};
    ClassData cdG = conjugacy_classes(G), cdH = conjugacy_classes(H);
    ElementProfiles epG = ElementProfiles::build(G, cdG), epH = ElementProfiles::build(H, cdH);
    for (uint32_t m : s.mg.gens) {
      uint64_t want = epG.key[G.rank(G.gen(m))];
      std::vector<Element> c;
      for (uint64_t r = 0; r < H.order(); ++r)
        if (epH.key[r] == want) c.push_back(H.unrank(r));
      s.cands.push_back(std::move(c));
    }
    for (const auto& c : s.cands) {
      if (c.empty()) return std::nullopt;
      if (__builtin_mul_overflow(s.total, uint64_t(c.size()), &s.total) || s.total > budget)
        throw CapacityError("isomorphism search exceeds budget");
    }
    return s;
  }
};

}  // namespace

std::optional<GroupMap> find_isomorphism(const PcGroup& G, const PcGroup& H, uint64_t budget) {
  if (G.p() != H.p() || G.ngens() != H.ngens()) return std::nullopt;
  if (G.ngens() == 0) return identity_map(G);
  auto s = IsoSearch::prepare(G, H, budget);
  if (!s) return std::nullopt;
  const uint32_t d = s->mg.rank();
  std::vector<Element> tuple(d, H.identity());
  for (uint64_t step = 0; step < s->total; ++step) {
    uint64_t v = step;
    for (uint32_t t = 0; t < d; ++t) {
      tuple[t] = s->cands[t][v % s->cands[t].size()];
      v /= s->cands[t].size();
    }
    if (!spans_frattini(s->fpH, tuple, H.p())) continue;
    std::vector<Element> imgs = evaluate_images(G, s->mg, H, tuple);
    if (!is_homomorphism(G, H, imgs)) continue;
    GroupMap f;
    f.images = std::move(imgs);
    f.surjective = true;  // generates, and |G| = |H|
    return f;
  }
  return std::nullopt;
}

bool is_isomorphic(const PcGroup& G, const PcGroup& H, uint64_t budget) {
  return find_isomorphism(G, H, budget).has_value();
}

AutGroup automorphism_group(const PcGroup& G, uint64_t budget) {
  AutGroup A;
  if (G.ngens() == 0) return A;
  auto s = IsoSearch::prepare(G, G, budget);
  if (!s) throw std::logic_error("group does not match its own fingerprint");
  const uint32_t d = s->mg.rank();

  std::vector<GroupMap> all;
  std::vector<Element> tuple(d, G.identity());
  for (uint64_t step = 0; step < s->total; ++step) {
    uint64_t v = step;
    for (uint32_t t = 0; t < d; ++t) {
      tuple[t] = s->cands[t][v % s->cands[t].size()];
      v /= s->cands[t].size();
    }
    if (!spans_frattini(s->fpH, tuple, G.p())) continue;
    std::vector<Element> imgs = evaluate_images(G, s->mg, G, tuple);
    if (!is_homomorphism(G, G, imgs)) continue;
    GroupMap f;
    f.images = std::move(imgs);
    f.surjective = true;
    all.push_back(std::move(f));
  }
  A.order = all.size();

  // greedy generating set: grow the closure until it covers everything
  std::set<std::string> closure{map_key(identity_map(G))};
  for (const GroupMap& f : all) {
    if (closure.size() == A.order) break;
    if (closure.count(map_key(f))) continue;
    A.generators.push_back(f);
    std::vector<GroupMap> frontier{identity_map(G)};
    closure = {map_key(identity_map(G))};
    while (!frontier.empty()) {
      GroupMap cur = frontier.back();
      frontier.pop_back();
      for (const GroupMap& g : A.generators) {
        GroupMap nxt = compose(G, g, cur);
        if (closure.insert(map_key(nxt)).second) frontier.push_back(nxt);
      }
    }
  }
  if (closure.size() != A.order) throw std::logic_error("automorphism closure mismatch");
  return A;
}

// ---------------------------------------------------------------------------
// canonical key
// ---------------------------------------------------------------------------

std::string canonical_key(const PcGroup& G, uint64_t budget) {
  const uint32_t p = G.p();
  if (G.ngens() == 0) return "1";
  if (G.order() > 3125) throw CapacityError("canonical_key: group too large");
  MinimalGens mg = minimal_generators(G);
  const uint32_t d = mg.rank();
  FrattiniProj fp = frattini_proj(G);

  std::vector<Element> all;
  for (uint64_t r = 0; r < G.order(); ++r) all.push_back(G.unrank(r));

  uint64_t tuples = 1;
  for (uint32_t t = 0; t < d; ++t)
    if (__builtin_mul_overflow(tuples, G.order(), &tuples) || tuples > budget)
      throw CapacityError("canonical_key: tuple space too large");

  std::string best;
  std::vector<Element> tuple(d);
  for (uint64_t step = 0; step < tuples; ++step) {
    uint64_t v = step;
    for (uint32_t t = 0; t < d; ++t) {
      tuple[t] = all[v % G.order()];
      v /= G.order();
    }
    if (!spans_frattini(fp, tuple, p)) continue;

    // weight-layered basis built from abstract operations only, so the result
    // depends on the tuple and the isomorphism type, not on coordinates;
    // a weight-w candidate is kept iff it is new modulo lambda_{w+1}
    std::vector<Subgroup> series = lower_p_central_series(G);
    std::vector<Element> basis = tuple;
    size_t lo = 0, hi = basis.size();
    for (uint32_t w = 2; w < series.size(); ++w) {
      std::vector<Element> fresh;
      auto qualifies = [&](const Element& c) {
        std::vector<Element> span = fresh;
        for (const Element& b : series[w].basis()) span.push_back(b);
        Subgroup sp(G);
        sp.generate(span, false);
        return !sp.contains(c);
      };
      for (size_t i = lo; i < hi; ++i) {
        Element pw = G.power(basis[i], p);
        if (qualifies(pw)) fresh.push_back(pw);
        for (uint32_t j = 0; j < d; ++j) {
          Element c = G.commutator(basis[i], tuple[j]);
          if (qualifies(c)) fresh.push_back(c);
        }
      }
      lo = basis.size();
      for (Element& f : fresh) basis.push_back(std::move(f));
      hi = basis.size();
    }
    if (basis.size() != G.ngens()) continue;

    // suffix chain H_k = <basis[k..]>; peel coefficients from the left
    const size_t n = basis.size();
    std::vector<Subgroup> suffix;
    bool chain_ok = true;
    for (size_t k = 0; k <= n; ++k) {
      Subgroup sp(G);
      sp.generate(std::vector<Element>(basis.begin() + k, basis.end()), false);
      if (sp.dim() != n - k) chain_ok = false;
      suffix.push_back(std::move(sp));
    }
    if (!chain_ok) continue;
    auto express = [&](Element x) {
      std::string cs;
      for (size_t k = 0; k < n; ++k) {
        uint32_t c = 0;
        for (; c < p; ++c)
          if (suffix[k + 1].contains(G.mul(G.inv(G.power(basis[k], c)), x))) break;
        if (c == p) throw std::logic_error("canonical_key: peel failed");
        cs.push_back(char('0' + c));
        x = G.mul(G.inv(G.power(basis[k], c)), x);
      }
      return cs;
    };

    std::ostringstream os;
    for (size_t i = 0; i < n; ++i) {
      os << express(G.power(basis[i], p));
      for (size_t j = 0; j < i; ++j) os << express(G.commutator(basis[i], basis[j]));
    }
    std::string key = os.str();
    if (best.empty() || key < best) best = key;
  }
  if (best.empty()) throw std::logic_error("canonical_key: no generating tuple found");
  return best;
}

}  // namespace tame
