// p-covering groups and the descendant machinery.
//
// The cover of G is built by tailing every non-defining relation with a fresh
// central letter of order p, then quotienting the tail space by the defects of
// the full consistency battery.  Descendants are quotients of the cover by
// allowable subgroups of the multiplicator, enumerated up to the induced
// action of Aut(G); automorphism groups are transported down the tree
// (stabilizer lifts plus central maps), so no descendant ever needs a fresh
// automorphism search.

#include "tametower/pgen.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace tame {

namespace {

// --- small F_p row-echelon helper -------------------------------------------

struct FpMat {
  uint32_t p = 2, width = 0;
  std::vector<FpVec> rows;       // fully reduced echelon
  std::vector<uint32_t> pivots;  // pivot column per row, ascending

  FpMat(uint32_t p_, uint32_t w) : p(p_), width(w) {}

  FpVec reduce(FpVec v) const {
    for (size_t r = 0; r < rows.size(); ++r) {
      uint32_t c = v[pivots[r]];
      if (!c) continue;
      for (uint32_t j = 0; j < width; ++j)
        v[j] = uint8_t((v[j] + (p - c) * rows[r][j]) % p);
    }
    return v;
  }

  bool add_row(FpVec v) {
    v = reduce(std::move(v));
    uint32_t piv = width;
    for (uint32_t j = 0; j < width; ++j)
      if (v[j]) { piv = j; break; }
    if (piv == width) return false;
    uint32_t inv = 1;
    while ((inv * v[piv]) % p != 1) ++inv;
    for (uint32_t j = 0; j < width; ++j) v[j] = uint8_t((v[j] * inv) % p);
    for (size_t r = 0; r < rows.size(); ++r) {
      uint32_t c = rows[r][piv];
      if (!c) continue;
      for (uint32_t j = 0; j < width; ++j)
        rows[r][j] = uint8_t((rows[r][j] + (p - c) * v[j]) % p);
    }
    size_t pos = 0;
    while (pos < pivots.size() && pivots[pos] < piv) ++pos;
    rows.insert(rows.begin() + pos, std::move(v));
    pivots.insert(pivots.begin() + pos, piv);
    return true;
  }

  uint32_t rank() const { return uint32_t(rows.size()); }
};

std::string mat_key(const std::vector<FpVec>& rows) {
  std::string s;
  for (const auto& r : rows) {
    s.append(r.begin(), r.end());
    s.push_back('|');
  }
  return s;
}

std::vector<FpVec> echelonize(uint32_t p, uint32_t width, const std::vector<FpVec>& gens) {
  FpMat m(p, width);
  for (const auto& g : gens) m.add_row(g);
  return m.rows;
}

uint32_t span_rank(uint32_t p, uint32_t width, const std::vector<FpVec>& a,
                   const std::vector<FpVec>& b) {
  FpMat m(p, width);
  for (const auto& r : a) m.add_row(r);
  for (const auto& r : b) m.add_row(r);
  return m.rank();
}

// --- relation bookkeeping ----------------------------------------------------

struct RelationId {
  bool is_pow = true;
  uint32_t i = 0, j = 0;  // pow i, or comm (i, j) with i > j
};

struct CoverLayout {
  std::vector<RelationId> tail_rel;             // tail index -> relation
  std::vector<int32_t> pow_tail;                // generator -> tail index or -1
  std::vector<std::vector<int32_t>> comm_tail;  // [i][j], i > j
  std::vector<GenDef> derived_defs;
};

CoverLayout plan_cover(const PcGroup& G, const MinimalGens& mg) {
  const uint32_t n = G.ngens();
  CoverLayout L;
  L.pow_tail.assign(n, 0);
  L.comm_tail.assign(n, std::vector<int32_t>());
  for (uint32_t i = 0; i < n; ++i) L.comm_tail[i].assign(i, 0);
  L.derived_defs.assign(n, GenDef{});

  std::vector<std::vector<bool>> comm_def(n);
  for (uint32_t i = 0; i < n; ++i) comm_def[i].assign(i, false);
  std::vector<bool> pow_def(n, false);

  for (uint32_t k = 0; k < n; ++k) {
    const auto& st = mg.steps[k];
    switch (st.kind) {
      case MinimalGens::Step::Given:
        break;
      case MinimalGens::Step::PowOf:
        if (pow_def[st.a]) throw CapacityError("cover: relation defines two generators");
        pow_def[st.a] = true;
        L.derived_defs[k] = GenDef{GenDef::Pow, uint16_t(st.a), 0};
        break;
      case MinimalGens::Step::CommOf:
        if (comm_def[st.a][st.b]) throw CapacityError("cover: relation defines two generators");
        comm_def[st.a][st.b] = true;
        L.derived_defs[k] = GenDef{GenDef::Comm, uint16_t(st.a), uint16_t(st.b)};
        break;
      case MinimalGens::Step::WordOf:
        throw CapacityError("cover: presentation lacks definition structure");
    }
  }

  int32_t idx = 0;
  for (uint32_t i = 0; i < n; ++i) L.pow_tail[i] = pow_def[i] ? -1 : idx++;
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < i; ++j) L.comm_tail[i][j] = comm_def[i][j] ? -1 : idx++;
  L.tail_rel.assign(size_t(idx), RelationId{});
  for (uint32_t i = 0; i < n; ++i)
    if (L.pow_tail[i] >= 0) L.tail_rel[L.pow_tail[i]] = {true, i, 0};
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < i; ++j)
      if (L.comm_tail[i][j] >= 0) L.tail_rel[L.comm_tail[i][j]] = {false, i, j};
  return L;
}

Element extend_element(const Element& x, uint32_t width) {
  Element e = x;
  e.resize(width, 0);
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// the p-cover
// ---------------------------------------------------------------------------

Cover p_cover(const PcGroup& G) {
  const uint32_t n = G.ngens(), p = G.p();
  MinimalGens mg = minimal_generators(G);
  CoverLayout L = plan_cover(G, mg);
  const uint32_t m0 = uint32_t(L.tail_rel.size());

  PcGroup E = G;
  E.enable_tails(m0);
  for (uint32_t i = 0; i < n; ++i)
    if (L.pow_tail[i] >= 0) {
      TailVec t(m0, 0);
      t[L.pow_tail[i]] = 1;
      E.set_pow_tail(i, t);
    }
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < i; ++j)
      if (L.comm_tail[i][j] >= 0) {
        TailVec t(m0, 0);
        t[L.comm_tail[i][j]] = 1;
        E.set_comm_tail(i, j, t);
      }

  FpMat S(p, m0);
  for (TailVec& dft : E.consistency_defects()) S.add_row(dft);

  std::vector<bool> is_pivot(m0, false);
  for (uint32_t piv : S.pivots) is_pivot[piv] = true;
  std::vector<uint32_t> survivors;
  for (uint32_t t = 0; t < m0; ++t)
    if (!is_pivot[t]) survivors.push_back(t);
  const uint32_t s = uint32_t(survivors.size());
  std::vector<int32_t> surv_pos(m0, -1);
  for (uint32_t t = 0; t < s; ++t) surv_pos[survivors[t]] = int32_t(t);

  uint32_t cls = p_class(G);

  Cover cov;
  cov.base_n = n;
  cov.mdim = s;
  cov.p_class_base = cls;
  cov.star = PcGroup(p, n + s);

  auto tail_image = [&](int32_t tail_idx) {
    FpVec e(m0, 0);
    if (tail_idx >= 0) e[tail_idx] = 1;
    FpVec r = S.reduce(e);
    FpVec out(s, 0);
    for (uint32_t t = 0; t < m0; ++t)
      if (r[t]) out[surv_pos[t]] = r[t];
    return out;
  };

  for (uint32_t i = 0; i < n; ++i) {
    Element rhs = extend_element(G.pow_rhs(i), n + s);
    FpVec t = tail_image(L.pow_tail[i]);
    for (uint32_t k = 0; k < s; ++k) rhs[n + k] = t[k];
    cov.star.set_pow(i, rhs);
    for (uint32_t j = 0; j < i; ++j) {
      Element crhs = extend_element(G.comm_rhs(i, j), n + s);
      FpVec ct = tail_image(L.comm_tail[i][j]);
      for (uint32_t k = 0; k < s; ++k) crhs[n + k] = ct[k];
      cov.star.set_comm(i, j, crhs);
    }
  }

  cov.star.weights = G.weights;
  cov.star.weights.resize(n + s, cls + 1);
  cov.star.defs = L.derived_defs;
  cov.star.defs.resize(n + s, GenDef{});
  for (uint32_t t = 0; t < s; ++t) {
    const RelationId& R = L.tail_rel[survivors[t]];
    cov.star.defs[n + t] = R.is_pow
                               ? GenDef{GenDef::Pow, uint16_t(R.i), 0}
                               : GenDef{GenDef::Comm, uint16_t(R.i), uint16_t(R.j)};
  }

  if (s > 0) {
    std::vector<Subgroup> series = lower_p_central_series(cov.star);
    std::vector<FpVec> nuc;
    if (series.size() > cls) {
      // series[cls] = lambda_{cls+1}(star), the nucleus
      for (const Element& b : series[cls].basis()) {
        for (uint32_t i = 0; i < n; ++i)
          if (b[i]) throw std::logic_error("nucleus escapes the multiplicator");
        FpVec v(s, 0);
        for (uint32_t k = 0; k < s; ++k) v[k] = b[n + k];
        nuc.push_back(std::move(v));
      }
    }
    cov.nucleus = echelonize(p, s, nuc);
  }
  cov.star_mg = minimal_generators(cov.star);
  if (cov.star_mg.gens != mg.gens)
    throw std::logic_error("cover changed the minimal generating set");
  return cov;
}

Ranks ranks(const PcGroup& G) {
  Ranks r;
  r.h1 = minimal_generators(G).rank();
  Cover cov = p_cover(G);
  r.h2 = cov.mdim;
  r.nuclear = cov.nuclear_rank();
  return r;
}

// ---------------------------------------------------------------------------
// multiplicator action and cover quotients
// ---------------------------------------------------------------------------

std::vector<Element> lift_to_cover(const PcGroup& G, const Cover& cov, const GroupMap& f) {
  const uint32_t n = cov.base_n, s = cov.mdim;
  std::vector<Element> minimal_imgs;
  for (uint32_t m : cov.star_mg.gens)
    minimal_imgs.push_back(extend_element(f.images[m], n + s));
  return evaluate_images(cov.star, cov.star_mg, cov.star, minimal_imgs);
}

std::vector<FpVec> multiplicator_action(const PcGroup& G, const Cover& cov, const GroupMap& f) {
  const uint32_t n = cov.base_n, s = cov.mdim;
  std::vector<Element> imgs = lift_to_cover(G, cov, f);
  std::vector<FpVec> rows;
  for (uint32_t t = 0; t < s; ++t) {
    const Element& r = imgs[n + t];
    for (uint32_t i = 0; i < n; ++i)
      if (r[i]) throw std::logic_error("multiplicator action left the central layer");
    FpVec row(s, 0);
    for (uint32_t k = 0; k < s; ++k) row[k] = r[n + k];
    rows.push_back(std::move(row));
  }
  return rows;
}

PcGroup cover_quotient(const PcGroup& G, const Cover& cov, const std::vector<FpVec>& U) {
  const uint32_t n = cov.base_n, s = cov.mdim, p = G.p();
  FpMat um(p, s);
  for (const auto& r : U) um.add_row(r);
  std::vector<bool> is_pivot(s, false);
  for (uint32_t piv : um.pivots) is_pivot[piv] = true;
  std::vector<uint32_t> survivors;
  for (uint32_t t = 0; t < s; ++t)
    if (!is_pivot[t]) survivors.push_back(t);
  const uint32_t s2 = uint32_t(survivors.size());
  std::vector<int32_t> pos(s, -1);
  for (uint32_t t = 0; t < s2; ++t) pos[survivors[t]] = int32_t(t);

  auto project = [&](const Element& star_el) {
    FpVec m(s, 0);
    for (uint32_t k = 0; k < s; ++k) m[k] = star_el[n + k];
    m = um.reduce(m);
    Element out(n + s2, 0);
    for (uint32_t i = 0; i < n; ++i) out[i] = star_el[i];
    for (uint32_t k = 0; k < s; ++k)
      if (m[k]) out[n + pos[k]] = m[k];
    return out;
  };

  PcGroup D(p, n + s2);
  for (uint32_t i = 0; i < n; ++i) {
    D.set_pow(i, project(cov.star.pow_rhs(i)));
    for (uint32_t j = 0; j < i; ++j) D.set_comm(i, j, project(cov.star.comm_rhs(i, j)));
  }
  D.weights = cov.star.weights;
  D.weights.resize(n + s2);
  for (uint32_t t = 0; t < s2; ++t) D.weights[n + t] = cov.p_class_base + 1;
  D.defs.assign(n + s2, GenDef{});
  for (uint32_t i = 0; i < n; ++i) D.defs[i] = cov.star.defs[i];
  for (uint32_t t = 0; t < s2; ++t) D.defs[n + t] = cov.star.defs[n + survivors[t]];
  return D;
}

// ---------------------------------------------------------------------------
// descendants
// ---------------------------------------------------------------------------

namespace {

void enumerate_subspaces(uint32_t p, uint32_t s, uint32_t k,
                         const std::function<bool(const std::vector<FpVec>&)>& visit) {
  if (k == 0) {
    visit({});
    return;
  }
  std::vector<uint32_t> cols(k);
  std::function<bool(uint32_t, uint32_t)> rec_cols = [&](uint32_t idx, uint32_t start) -> bool {
    if (idx == k) {
      std::vector<std::pair<uint32_t, uint32_t>> freepos;
      std::vector<bool> ispiv(s, false);
      for (uint32_t c : cols) ispiv[c] = true;
      for (uint32_t i = 0; i < k; ++i)
        for (uint32_t j = cols[i] + 1; j < s; ++j)
          if (!ispiv[j]) freepos.push_back({i, j});
      uint64_t total = 1;
      for (size_t t = 0; t < freepos.size(); ++t) total *= p;
      for (uint64_t code = 0; code < total; ++code) {
        std::vector<FpVec> rows(k, FpVec(s, 0));
        for (uint32_t i = 0; i < k; ++i) rows[i][cols[i]] = 1;
        uint64_t c = code;
        for (const auto& [i, j] : freepos) {
          rows[i][j] = uint8_t(c % p);
          c /= p;
        }
        if (!visit(rows)) return false;
      }
      return true;
    }
    for (uint32_t c = start; c + (k - idx) <= s; ++c) {
      cols[idx] = c;
      if (!rec_cols(idx + 1, c + 1)) return false;
    }
    return true;
  };
  rec_cols(0, 0);
}

std::vector<FpVec> act_subspace(uint32_t p, uint32_t s, const std::vector<FpVec>& rows,
                                const std::vector<FpVec>& A) {
  std::vector<FpVec> out;
  for (const auto& r : rows) {
    FpVec v(s, 0);
    for (uint32_t t = 0; t < s; ++t) {
      if (!r[t]) continue;
      for (uint32_t j = 0; j < s; ++j) v[j] = uint8_t((v[j] + r[t] * A[t][j]) % p);
    }
    out.push_back(std::move(v));
  }
  return echelonize(p, s, out);
}

}  // namespace

std::vector<Descendant> immediate_descendants(const PcGroup& G, const Cover& cov,
                                              const AutData& aut, uint64_t* budget) {
  return immediate_descendants_bounded(G, cov, aut, budget, cov.nuclear_rank());
}

std::vector<Descendant> immediate_descendants_bounded(const PcGroup& G, const Cover& cov,
                                                      const AutData& aut, uint64_t* budget,
                                                      uint32_t max_step) {
  const uint32_t p = G.p(), s = cov.mdim;
  const uint32_t nuc = cov.nuclear_rank();
  std::vector<Descendant> out;
  if (nuc == 0 || max_step == 0) return out;
  const uint32_t d = minimal_generators(G).rank();

  std::vector<std::vector<FpVec>> gen_mats;
  for (const GroupMap& f : aut.gens) gen_mats.push_back(multiplicator_action(G, cov, f));

  std::set<std::string> visited;

  for (uint32_t step = 1; step <= std::min(nuc, max_step); ++step) {
    const uint32_t k = s - step;
    bool ok = true;
    enumerate_subspaces(p, s, k, [&](const std::vector<FpVec>& rows) {
      if (*budget == 0) {
        ok = false;
        return false;
      }
      --*budget;
      if (span_rank(p, s, rows, cov.nucleus) != s) return true;  // not allowable
      std::string key = mat_key(rows);
      if (visited.count(key)) return true;

      struct Member {
        std::vector<FpVec> rows;
        GroupMap t;
      };
      std::vector<Member> orbit{{rows, identity_map(G)}};
      std::map<std::string, size_t> index{{key, 0}};
      visited.insert(key);
      for (size_t h = 0; h < orbit.size(); ++h) {
        for (size_t a = 0; a < aut.gens.size(); ++a) {
          auto img = act_subspace(p, s, orbit[h].rows, gen_mats[a]);
          std::string ik = mat_key(img);
          if (index.count(ik)) continue;
          index[ik] = orbit.size();
          visited.insert(ik);
          GroupMap tv = compose(G, aut.gens[a], orbit[h].t);
          // keep the invariant: act(matrix(t_v), rep) = member
          auto tm = multiplicator_action(G, cov, tv);
          if (act_subspace(p, s, rows, tm) != img)
            throw std::logic_error("transversal invariant broken");
          orbit.push_back({img, std::move(tv)});
        }
      }

      std::vector<GroupMap> stab;
      std::set<std::string> stab_keys;
      auto add_stab = [&](GroupMap f) {
        bool idm = true;
        for (uint32_t i = 0; i < G.ngens() && idm; ++i)
          if (f.images[i] != G.gen(i)) idm = false;
        if (idm) return;
        std::string sk;
        for (const Element& e : f.images) sk.append(e.begin(), e.end());
        if (stab_keys.insert(sk).second) stab.push_back(std::move(f));
      };
      for (size_t h = 0; h < orbit.size(); ++h)
        for (size_t a = 0; a < aut.gens.size(); ++a) {
          auto img = act_subspace(p, s, orbit[h].rows, gen_mats[a]);
          size_t v = index.at(mat_key(img));
          GroupMap cand = compose(G, invert_automorphism(G, orbit[v].t),
                                  compose(G, aut.gens[a], orbit[h].t));
          auto cm = multiplicator_action(G, cov, cand);
          if (act_subspace(p, s, rows, cm) != rows)
            throw std::logic_error("Schreier element does not stabilize");
          add_stab(std::move(cand));
        }

      Descendant dd;
      dd.group = cover_quotient(G, cov, rows);
      dd.step = step;
      if (!dd.group.check_consistency())
        throw std::logic_error("descendant presentation inconsistent");
      dd.aut.order = aut.order / orbit.size();
      for (uint32_t t = 0; t < d * step; ++t) dd.aut.order *= p;

      const uint32_t n = cov.base_n;
      FpMat um(p, s);
      for (const auto& r : rows) um.add_row(r);
      std::vector<bool> ispiv(s, false);
      for (uint32_t piv : um.pivots) ispiv[piv] = true;
      std::vector<int32_t> pos(s, -1);
      uint32_t s2 = 0;
      for (uint32_t t = 0; t < s; ++t)
        if (!ispiv[t]) pos[t] = int32_t(s2++);
      auto push_down = [&](const Element& star_el) {
        FpVec m(s, 0);
        for (uint32_t t = 0; t < s; ++t) m[t] = star_el[n + t];
        m = um.reduce(m);
        Element e(n + s2, 0);
        for (uint32_t i = 0; i < n; ++i) e[i] = star_el[i];
        for (uint32_t t = 0; t < s; ++t)
          if (m[t]) e[n + pos[t]] = m[t];
        return e;
      };
      for (const GroupMap& f : stab) {
        std::vector<Element> star_imgs = lift_to_cover(G, cov, f);
        GroupMap lift;
        for (uint32_t i = 0; i < n; ++i) lift.images.push_back(push_down(star_imgs[i]));
        for (uint32_t t = 0; t < s; ++t)
          if (!ispiv[t]) lift.images.push_back(push_down(star_imgs[n + t]));
        lift.surjective = true;
        if (!is_homomorphism(dd.group, dd.group, lift.images))
          throw std::logic_error("lifted stabilizer element is not an automorphism");
        dd.aut.gens.push_back(std::move(lift));
      }

      MinimalGens dmg = minimal_generators(dd.group);
      for (uint32_t mi : dmg.gens) {
        for (uint32_t t = 0; t < s2; ++t) {
          std::vector<Element> imgs;
          for (uint32_t g2 : dmg.gens) {
            Element e = dd.group.gen(g2);
            if (g2 == mi) e = dd.group.mul(e, dd.group.gen(n + t));
            imgs.push_back(e);
          }
          GroupMap chi;
          chi.images = evaluate_images(dd.group, dmg, dd.group, imgs);
          chi.surjective = true;
          if (!is_homomorphism(dd.group, dd.group, chi.images))
            throw std::logic_error("central map is not an automorphism");
          dd.aut.gens.push_back(std::move(chi));
        }
      }
      out.push_back(std::move(dd));
      return true;
    });
    if (!ok) throw BudgetError("descendant enumeration: subspace budget exhausted");
  }
  return out;
}

bool exists_epimorphism(const PcGroup& dom, const PcGroup& cod, uint64_t budget) {
  if (cod.is_trivial()) return true;
  MinimalGens mg = minimal_generators(dom);
  const uint32_t d = mg.rank();
  AbelianInvariants abc = abelianization(cod);
  uint64_t total = 1;
  for (uint32_t t = 0; t < d; ++t)
    if (__builtin_mul_overflow(total, cod.order(), &total) || total > budget)
      throw CapacityError("epimorphism search exceeds budget");
  std::vector<Element> tuple(d);
  for (uint64_t step = 0; step < total; ++step) {
    uint64_t v = step;
    for (uint32_t t = 0; t < d; ++t) {
      tuple[t] = cod.unrank(v % cod.order());
      v /= cod.order();
    }
    std::vector<std::vector<uint64_t>> vs;
    for (const Element& x : tuple) vs.push_back(ab_image(cod, abc, x));
    size_t kk = abc.factors.size();
    FpMat fm(cod.p(), uint32_t(kk));
    for (auto& vv : vs) {
      FpVec row(kk);
      for (size_t t = 0; t < kk; ++t) row[t] = uint8_t(vv[t] % cod.p());
      fm.add_row(row);
    }
    if (fm.rank() != kk) continue;
    std::vector<Element> imgs = evaluate_images(dom, mg, cod, tuple);
    if (is_homomorphism(dom, cod, imgs)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// the pruned descendant tree
// ---------------------------------------------------------------------------

bool is_viable(const PcGroup& G, const TypeZ& Z) {
  AbelianInvariants ab = abelianization(G);
  std::vector<uint64_t> w = Z.w_orders();
  std::sort(w.begin(), w.end());
  if (ab.factors != w) return false;
  Ranks r = ranks(G);
  if (r.h2 > r.nuclear + Z.g()) return false;
  return count_A_Z(G, Z) > 0;
}

Tree explore_tree(const TypeZ& Z, TreeOptions opt) {
  const uint32_t p = Z.p, g = Z.g();
  Tree T;
  std::vector<uint64_t> w_sorted = Z.w_orders();
  std::sort(w_sorted.begin(), w_sorted.end());

  std::map<uint32_t, AutData> aut_of;
  std::map<uint32_t, Cover> cover_of;

  auto make_node = [&](PcGroup grp, int32_t parent, uint32_t cls, AutData aut) {
    TreeNode nd;
    nd.id = uint32_t(T.nodes.size());
    nd.parent = parent;
    nd.p_class = cls;
    nd.order_exp = grp.ngens();
    Cover cov = p_cover(grp);
    nd.rk.h1 = minimal_generators(grp).rank();
    nd.rk.h2 = cov.mdim;
    nd.rk.nuclear = cov.nuclear_rank();
    nd.terminal = nd.rk.nuclear == 0;
    if (opt.compute_mass) {
      ClassData cd = conjugacy_classes(grp);
      nd.a_count = count_local_data(grp, cd, Z).count;
      nd.aut_order = aut.order;
      nd.mass = Rational(int64_t(nd.a_count), int64_t(nd.aut_order));
    }
    AbelianInvariants ab = abelianization(grp);
    nd.viable = (ab.factors == w_sorted) && (nd.rk.h2 <= nd.rk.nuclear + g) &&
                (!opt.compute_mass || nd.a_count > 0);
    nd.group = std::move(grp);
    uint32_t id = nd.id;
    T.nodes.push_back(std::move(nd));
    aut_of[id] = std::move(aut);
    cover_of[id] = std::move(cov);
    return id;
  };

  PcGroup root = PcGroup::elementary(p, g);
  AutData root_aut;
  {
    AutGroup A = automorphism_group(root);
    root_aut.order = A.order;
    root_aut.gens = A.generators;
  }
  make_node(std::move(root), -1, 1, std::move(root_aut));

  std::vector<uint32_t> level{0};
  while (!level.empty()) {
    std::vector<uint32_t> next;
    for (uint32_t id : level) {
      bool expandable = (T.nodes[id].p_class == 1) || (T.nodes[id].viable && !T.nodes[id].terminal);
      if (!expandable || T.nodes[id].terminal) {
        aut_of.erase(id);
        cover_of.erase(id);
        continue;
      }
      uint32_t room = opt.max_order_exp > T.nodes[id].order_exp
                          ? opt.max_order_exp - T.nodes[id].order_exp
                          : 0;
      if (room == 0) {
        T.nodes[id].note = "frontier: order bound reached before expansion";
        aut_of.erase(id);
        cover_of.erase(id);
        continue;
      }
      const Cover& cov = cover_of[id];
      uint32_t full_nuc = cov.nuclear_rank();
      std::vector<Descendant> kids;
      try {
        uint64_t budget = opt.subspace_budget;
        kids = immediate_descendants_bounded(T.nodes[id].group, cov, aut_of[id], &budget,
                                             std::min(full_nuc, room));
        T.nodes[id].expanded = true;
        T.nodes[id].children_complete = (full_nuc <= room);
      } catch (const BudgetError& e) {
        T.nodes[id].note = e.what();
        aut_of.erase(id);
        cover_of.erase(id);
        continue;
      }
      for (Descendant& dd : kids) {
        uint32_t cls = T.nodes[id].p_class + 1;
        uint32_t cid = make_node(std::move(dd.group), int32_t(id), cls, std::move(dd.aut));
        if (!T.nodes[cid].viable) {
          aut_of.erase(cid);
          cover_of.erase(cid);
          T.nodes.pop_back();
          continue;
        }
        T.nodes[id].children.push_back(cid);
        next.push_back(cid);
      }
      aut_of.erase(id);
      cover_of.erase(id);
    }
    for (size_t a = 0; a < next.size(); ++a)
      for (size_t b = 0; b < next.size(); ++b) {
        if (a == b) continue;
        const TreeNode& A = T.nodes[next[a]];
        const TreeNode& B = T.nodes[next[b]];
        if (A.order_exp >= B.order_exp) continue;
        if (A.group.order() > 4096 || B.group.order() > 4096) continue;
        if (exists_epimorphism(B.group, A.group)) T.anomalies.push_back({next[a], next[b]});
      }
    level = std::move(next);
  }
  return T;
}

ConservationReport check_mass_conservation(const Tree& t) {
  ConservationReport rep;
  std::set<uint32_t> tainted;
  for (auto& [a, b] : t.anomalies) {
    tainted.insert(a);
    tainted.insert(b);
  }
  for (const TreeNode& nd : t.nodes) {
    if (nd.terminal || !nd.viable) continue;
    ConservationReport::Line line;
    line.node = nd.id;
    line.parent_mass = nd.mass;
    line.checked = nd.expanded && nd.children_complete && !tainted.count(nd.id);
    Rational sum;
    for (uint32_t c : nd.children) {
      sum += t.nodes[c].mass;
      if (tainted.count(c)) line.checked = false;
    }
    line.child_sum = sum;
    line.holds = !line.checked || (sum == nd.mass);
    if (!line.holds) rep.all_hold = false;
    rep.lines.push_back(line);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// p-quotients of finite presentations
// ---------------------------------------------------------------------------

PQuotientResult p_quotient(const FpPresentation& fp, uint32_t p, uint32_t class_bound,
                           uint32_t max_order_exp) {
  if (class_bound < 1) throw PreconditionError("class bound must be at least 1");
  const uint32_t N = fp.ngens;

  FpMat rel(p, N);
  for (const Word& r : fp.relators) {
    FpVec row(N, 0);
    for (const Letter& l : r) {
      int32_t e = ((l.exp % int32_t(p)) + int32_t(p)) % int32_t(p);
      row[l.gen] = uint8_t((row[l.gen] + e) % p);
    }
    rel.add_row(row);
  }
  std::vector<bool> ispiv(N, false);
  for (uint32_t piv : rel.pivots) ispiv[piv] = true;
  std::vector<int32_t> pos(N, -1);
  uint32_t d = 0;
  for (uint32_t j = 0; j < N; ++j)
    if (!ispiv[j]) pos[j] = int32_t(d++);

  PQuotientResult res;
  res.Q = PcGroup::elementary(p, d);
  res.reached_class = 1;
  // generators on free columns define the pc generators; the rest are carried
  // as words and get a correction letter at every covering step
  std::vector<bool> is_def_gen(N, false);
  for (uint32_t i = 0; i < N; ++i) {
    FpVec e(N, 0);
    e[i] = 1;
    e = rel.reduce(e);
    Element img(d, 0);
    for (uint32_t j = 0; j < N; ++j)
      if (e[j]) img[pos[j]] = e[j];
    if (!ispiv[i]) is_def_gen[i] = true;
    res.images.push_back(img);
  }
  std::vector<uint32_t> redundant;
  for (uint32_t i = 0; i < N; ++i)
    if (!is_def_gen[i]) redundant.push_back(i);
  const uint32_t R = uint32_t(redundant.size());

  while (res.reached_class < class_bound) {
    const PcGroup& Q = res.Q;
    const uint32_t n = Q.ngens();
    MinimalGens mgq = minimal_generators(Q);
    CoverLayout L = plan_cover(Q, mgq);
    const uint32_t m0 = uint32_t(L.tail_rel.size());
    const uint32_t width = R + m0;  // correction letters first, then tails

    PcGroup E = Q;
    E.enable_tails(width);
    for (uint32_t i = 0; i < n; ++i)
      if (L.pow_tail[i] >= 0) {
        TailVec t(width, 0);
        t[R + L.pow_tail[i]] = 1;
        E.set_pow_tail(i, t);
      }
    for (uint32_t i = 0; i < n; ++i)
      for (uint32_t j = 0; j < i; ++j)
        if (L.comm_tail[i][j] >= 0) {
          TailVec t(width, 0);
          t[R + L.comm_tail[i][j]] = 1;
          E.set_comm_tail(i, j, t);
        }

    FpMat S(p, width);
    for (TailVec& dft : E.consistency_defects()) S.add_row(dft);

    // impose the relators, evaluated with corrected images
    std::vector<PcGroup::TailedElement> timgs;
    for (uint32_t i = 0; i < N; ++i) {
      PcGroup::TailedElement te{res.images[i], TailVec(width, 0)};
      timgs.push_back(std::move(te));
    }
    for (uint32_t t = 0; t < R; ++t) timgs[redundant[t]].t[t] = 1;
    for (const Word& r : fp.relators) {
      PcGroup::TailedElement v = E.t_identity();
      for (const Letter& l : r) {
        PcGroup::TailedElement g = E.t_power(timgs[l.gen], uint64_t(l.exp < 0 ? -l.exp : l.exp));
        if (l.exp < 0) g = E.t_inv(g);
        v = E.t_mul(v, g);
      }
      if (!E.is_identity(v.g)) throw std::logic_error("relator does not vanish in the quotient");
      S.add_row(v.t);
    }

    std::vector<bool> piv(width, false);
    for (uint32_t pv : S.pivots) piv[pv] = true;
    for (uint32_t t = 0; t < R; ++t)
      if (!piv[t]) throw std::logic_error("correction letter survived the elimination");

    std::vector<uint32_t> survivors;  // surviving tail coordinates
    for (uint32_t t = R; t < width; ++t)
      if (!piv[t]) survivors.push_back(t);
    const uint32_t s2 = uint32_t(survivors.size());
    if (s2 == 0) {
      res.stabilized = true;
      return res;
    }
    if (n + s2 > max_order_exp) throw BudgetError("p-quotient exceeds the order budget");
    std::vector<int32_t> spos(width, -1);
    for (uint32_t t = 0; t < s2; ++t) spos[survivors[t]] = int32_t(t);

    auto tail_image = [&](int32_t tail_idx) {
      FpVec e(width, 0);
      if (tail_idx >= 0) e[R + tail_idx] = 1;
      FpVec r = S.reduce(e);
      FpVec out(s2, 0);
      for (uint32_t t = 0; t < width; ++t)
        if (r[t]) {
          if (spos[t] < 0) throw std::logic_error("reduced tail hit a pivot coordinate");
          out[spos[t]] = r[t];
        }
      return out;
    };

    PcGroup D(p, n + s2);
    for (uint32_t i = 0; i < n; ++i) {
      Element rhs = extend_element(Q.pow_rhs(i), n + s2);
      FpVec t = tail_image(L.pow_tail[i]);
      for (uint32_t k = 0; k < s2; ++k) rhs[n + k] = t[k];
      D.set_pow(i, rhs);
      for (uint32_t j = 0; j < i; ++j) {
        Element crhs = extend_element(Q.comm_rhs(i, j), n + s2);
        FpVec ct = tail_image(L.comm_tail[i][j]);
        for (uint32_t k = 0; k < s2; ++k) crhs[n + k] = ct[k];
        D.set_comm(i, j, crhs);
      }
    }
    D.weights = Q.weights;
    D.weights.resize(n + s2, res.reached_class + 1);
    D.defs = L.derived_defs;
    D.defs.resize(n + s2, GenDef{});
    for (uint32_t t = 0; t < s2; ++t) {
      const RelationId& Rl = L.tail_rel[survivors[t] - R];
      D.defs[n + t] = Rl.is_pow ? GenDef{GenDef::Pow, uint16_t(Rl.i), 0}
                                : GenDef{GenDef::Comm, uint16_t(Rl.i), uint16_t(Rl.j)};
    }
    if (n + s2 <= 24 && !D.check_consistency())
      throw std::logic_error("p-quotient step produced an inconsistent presentation");

    std::vector<Element> new_imgs;
    for (uint32_t i = 0; i < N; ++i) {
      Element e = extend_element(res.images[i], n + s2);
      if (!is_def_gen[i]) {
        uint32_t bi = 0;
        while (redundant[bi] != i) ++bi;
        FpVec eb(width, 0);
        eb[bi] = 1;
        FpVec rb = S.reduce(eb);
        for (uint32_t t = 0; t < width; ++t)
          if (rb[t]) e[n + spos[t]] = rb[t];
      }
      new_imgs.push_back(e);
    }
    res.Q = std::move(D);
    res.images = std::move(new_imgs);
    res.reached_class += 1;
  }
  return res;
}

std::vector<uint32_t> pq_tower(const FpPresentation& fp, uint32_t p, uint32_t max_class,
                               uint32_t max_order_exp) {
  std::vector<uint32_t> out;
  for (uint32_t c = 1; c <= max_class; ++c) {
    PQuotientResult r = p_quotient(fp, p, c, max_order_exp);
    out.push_back(r.Q.ngens());
    if (r.stabilized) break;
  }
  return out;
}

}  // namespace tame
