#include "tametower/braid.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "tametower/homs.hpp"

namespace tame {

PuncturedFree build_punctured_free(uint32_t N, uint32_t p, uint32_t cls) {
  if (p == 2) throw PreconditionError("braid sampling needs an odd prime: no power residue generates the 2-adic units");
  if (!is_prime_u64(p)) throw PreconditionError("p must be prime");
  if (N < 2) throw PreconditionError("need at least two punctures");
  if (cls < 1) throw PreconditionError("class must be positive");
  FpPresentation fp;
  fp.ngens = N;
  Word rel;
  for (uint32_t i = 0; i < N; ++i) {
    fp.names.push_back("x" + std::to_string(i + 1));
    rel.push_back({uint16_t(i), 1});
  }
  fp.relators.push_back(rel);
  PQuotientResult r = p_quotient(fp, p, cls);
  PuncturedFree out;
  out.N = N;
  out.p = p;
  out.cls = cls;
  out.Q = std::move(r.Q);
  out.marked = std::move(r.images);
  // the product of the marked generators dies in the quotient
  Element prod = out.Q.identity();
  for (const Element& m : out.marked) prod = out.Q.mul(prod, m);
  if (!out.Q.is_identity(prod)) throw std::logic_error("marked product is not trivial");
  return out;
}

std::vector<std::vector<uint32_t>> Perm::cycles() const {
  std::vector<std::vector<uint32_t>> out;
  std::vector<bool> seen(img.size(), false);
  for (uint32_t i = 0; i < img.size(); ++i) {
    if (seen[i]) continue;
    std::vector<uint32_t> c;
    uint32_t j = i;
    while (!seen[j]) {
      seen[j] = true;
      c.push_back(j);
      j = img[j];
    }
    out.push_back(std::move(c));
  }
  return out;
}

Perm parse_perm(const std::string& s, uint32_t n) {
  Perm P;
  P.img.resize(n);
  for (uint32_t i = 0; i < n; ++i) P.img[i] = i;
  size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == ',')) ++pos;
    if (pos >= s.size()) break;
    if (s[pos] != '(') throw ParseError("permutation: expected '('");
    ++pos;
    std::vector<uint32_t> cyc;
    while (pos < s.size() && s[pos] != ')') {
      while (pos < s.size() && (s[pos] == ' ' || s[pos] == ',')) ++pos;
      if (pos < s.size() && s[pos] == ')') break;
      size_t end = pos;
      while (end < s.size() && isdigit(s[end])) ++end;
      if (end == pos) throw ParseError("permutation: expected an index");
      uint32_t v = uint32_t(std::stoul(s.substr(pos, end - pos)));
      if (v < 1 || v > n) throw ParseError("permutation index out of range");
      cyc.push_back(v - 1);
      pos = end;
    }
    if (pos >= s.size()) throw ParseError("permutation: missing ')'");
    ++pos;
    for (size_t t = 0; t < cyc.size(); ++t) P.img[cyc[t]] = cyc[(t + 1) % cyc.size()];
  }
  // must be a bijection
  std::set<uint32_t> chk(P.img.begin(), P.img.end());
  if (chk.size() != n) throw ParseError("not a permutation");
  return P;
}

BraidSample sample_alpha(const PuncturedFree& Qf, uint64_t q, const Perm& sigma, Rng& rng,
                         uint64_t rejection_cap) {
  if (sigma.n() != Qf.N) throw PreconditionError("permutation size mismatch");
  if (q % Qf.p == 0) throw PreconditionError("q must be a p-adic unit");
  const PcGroup& Q = Qf.Q;
  std::vector<Element> powers(Qf.N);
  for (uint32_t i = 0; i < Qf.N; ++i) powers[i] = Q.power(Qf.marked[sigma.img[i]], q);

  BraidSample s;
  s.conjugators.resize(Qf.N);
  s.alpha.resize(Qf.N);
  for (uint64_t tries = 1; tries <= rejection_cap; ++tries) {
    Element prod = Q.identity();
    for (uint32_t i = 0; i < Qf.N; ++i) {
      Element w(Q.ngens(), 0);
      for (auto& v : w) v = uint8_t(rng.below(Q.p()));
      s.conjugators[i] = w;
      s.alpha[i] = Q.mul(Q.mul(w, powers[i]), Q.inv(w));
      prod = Q.mul(prod, s.alpha[i]);
    }
    if (Q.is_identity(prod)) {
      s.tries = tries;
      return s;
    }
  }
  throw BudgetError("braid sampling: rejection cap exceeded (acceptance appears too rare)");
}

PcGroup fixed_quotient(const PuncturedFree& Qf, const BraidSample& s) {
  std::vector<Element> rels;
  for (uint32_t i = 0; i < Qf.N; ++i)
    rels.push_back(Qf.Q.mul(s.alpha[i], Qf.Q.inv(Qf.marked[i])));
  return quotient(Qf.Q, rels).Q;
}

TypeZ induced_type(uint32_t p, uint64_t q, const Perm& sigma) {
  TypeZ Z;
  Z.p = p;
  for (const auto& cyc : sigma.cycles()) {
    uint64_t e = 1;
    for (size_t t = 0; t < cyc.size(); ++t) e *= q;
    TypeEntry te;
    te.residue = e;
    te.modulus = 0;
    te.w_val = val_p(e - 1, p);
    if (te.w_val == 0) throw PreconditionError("q^k = 1 (mod p): cycle carries no ramification");
    Z.entries.push_back(te);
  }
  return Z;
}

// ---------------------------------------------------------------------------
// distribution runs
// ---------------------------------------------------------------------------

BraidReport run_distribution(const PuncturedFree& Qf, uint64_t q, const Perm& sigma,
                             uint64_t samples, uint64_t seed, uint32_t threads) {
  BraidReport rep;
  rep.p = Qf.p;
  rep.N = Qf.N;
  rep.cls = Qf.cls;
  rep.q = q;
  rep.seed = seed;
  rep.samples = samples;
  {
    std::ostringstream os;
    bool first = true;
    for (const auto& c : sigma.cycles()) {
      os << "(";
      for (size_t t = 0; t < c.size(); ++t) os << (t ? " " : "") << c[t] + 1;
      os << ")";
      (void)first;
    }
    rep.sigma = os.str();
  }
  rep.caveats = {
      "conjugator-tuple rejection model: finite-level proxy for Haar sampling on the braid coset",
      "acceptance reweighting by centralizer sizes is not corrected; probed by the exhaustive oracle",
      "liftability of finite-level automorphisms to the full coset is not checked"};

  // expected abelianization: W(q, sigma) truncated at the working class
  TypeZ Z = induced_type(Qf.p, q, sigma);
  for (const auto& e : Z.entries) rep.expected_ab.push_back(ipow(Qf.p, std::min(e.w_val, Qf.cls)));
  std::sort(rep.expected_ab.begin(), rep.expected_ab.end());

  std::vector<PcGroup> quotients(samples);
  std::vector<uint64_t> tries(samples, 0);
  auto worker = [&](uint64_t lo, uint64_t hi) {
    for (uint64_t ix = lo; ix < hi; ++ix) {
      Rng rng(seed, ix);
      BraidSample s = sample_alpha(Qf, q, sigma, rng);
      // acceptance guarantees a homomorphism; surjectivity mod Frattini makes
      // it an automorphism of the truncation
      quotients[ix] = fixed_quotient(Qf, s);
      tries[ix] = s.tries;
    }
  };
  if (threads <= 1 || samples < 2 * threads) {
    worker(0, samples);
  } else {
    std::vector<std::thread> pool;
    uint64_t chunk = (samples + threads - 1) / threads;
    for (uint32_t t = 0; t < threads; ++t) {
      uint64_t lo = t * chunk, hi = std::min(samples, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  for (uint64_t t : tries) rep.total_tries += t;

  // bucket by isomorphism class, deterministically: fingerprint first, then
  // an exact isomorphism test against the bucket representatives
  struct Bucket {
    PcGroup rep;
    uint64_t count = 0;
  };
  std::map<std::vector<uint64_t>, std::vector<Bucket>> buckets;
  for (uint64_t ix = 0; ix < samples; ++ix) {
    const PcGroup& g = quotients[ix];
    AbelianInvariants ab = abelianization(g);
    if (ab.factors != rep.expected_ab) rep.all_ab_match = false;
    auto fpr = fingerprint(g);
    auto& vec = buckets[fpr];
    bool placed = false;
    for (auto& b : vec)
      if (is_isomorphic(b.rep, g)) {
        b.count++;
        placed = true;
        break;
      }
    if (!placed) vec.push_back(Bucket{g, 1});
  }

  for (auto& [fpr, vec] : buckets) {
    // same-fingerprint classes are distinguished by the canonical key
    std::sort(vec.begin(), vec.end(), [&](const Bucket& a, const Bucket& b) {
      return canonical_key(a.rep) < canonical_key(b.rep);
    });
    for (auto& b : vec) {
      BraidBucket bb;
      bb.key = canonical_key(b.rep);
      bb.representative = b.rep;
      bb.count = b.count;
      bb.ab = abelianization(b.rep).factors;
      MassResult m = mass(b.rep, Z);
      bb.predicted = m.mass;
      bb.frequency = double(b.count) / double(samples);
      double ph = bb.frequency;
      bb.three_sigma = 3.0 * std::sqrt(std::max(ph * (1 - ph), 1e-12) / double(samples));
      rep.buckets.push_back(std::move(bb));
    }
  }
  std::sort(rep.buckets.begin(), rep.buckets.end(),
            [](const BraidBucket& a, const BraidBucket& b) { return a.count > b.count; });
  return rep;
}

// ---------------------------------------------------------------------------
// exhaustive oracle
// ---------------------------------------------------------------------------

namespace {

// accepted value-tuples for the conjugator model: one class element per
// puncture, product trivial; each corresponds to equally many conjugator
// tuples, so uniform weight is exact
std::vector<GroupMap> accepted_maps(const PuncturedFree& Qf, uint64_t q, const Perm& sigma,
                                    uint64_t budget) {
  const PcGroup& Q = Qf.Q;
  ClassData cd = conjugacy_classes(Q);
  std::vector<std::vector<Element>> cands;
  for (uint32_t i = 0; i < Qf.N; ++i) {
    Element pw = Q.power(Qf.marked[sigma.img[i]], q);
    cands.push_back(class_elements(Q, cd, cd.class_of[Q.rank(pw)]));
  }
  uint64_t total = 1;
  for (auto& c : cands)
    if (__builtin_mul_overflow(total, uint64_t(c.size()), &total) || total > budget)
      throw CapacityError("oracle: conjugacy-class tuple space exceeds budget");

  MinimalGens mg = minimal_generators(Q);
  // minimal pc generators are marked images of specific punctures
  std::vector<int32_t> pc_from_puncture(Q.ngens(), -1);
  for (uint32_t m : mg.gens) {
    int32_t found = -1;
    for (uint32_t i = 0; i < Qf.N; ++i)
      if (Qf.marked[i] == Q.gen(m)) { found = int32_t(i); break; }
    if (found < 0) throw std::logic_error("oracle: a minimal generator is not a marked image");
    pc_from_puncture[m] = found;
  }

  std::vector<GroupMap> out;
  std::vector<Element> tuple(Qf.N);
  for (uint64_t step = 0; step < total; ++step) {
    uint64_t v = step;
    for (uint32_t i = 0; i < Qf.N; ++i) {
      tuple[i] = cands[i][v % cands[i].size()];
      v /= cands[i].size();
    }
    Element prod = Q.identity();
    for (uint32_t i = 0; i < Qf.N; ++i) prod = Q.mul(prod, tuple[i]);
    if (!Q.is_identity(prod)) continue;
    std::vector<Element> min_imgs;
    for (uint32_t m : mg.gens) min_imgs.push_back(tuple[pc_from_puncture[m]]);
    GroupMap f;
    f.images = evaluate_images(Q, mg, Q, min_imgs);
    f.surjective = true;
    // the induced endomorphism must act as the tuple on every puncture
    for (uint32_t i = 0; i < Qf.N; ++i)
      if (apply_map(Q, f, Qf.marked[i]) != tuple[i])
        throw std::logic_error("oracle: tuple does not define an endomorphism");
    if (!is_homomorphism(Q, Q, f.images))
      throw std::logic_error("oracle: accepted map fails relations");
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

BurnsideOracle tiny_burnside_oracle(const PuncturedFree& Qf, uint64_t q, const Perm& sigma,
                                    const PcGroup& target, const std::vector<uint32_t>& cls,
                                    uint64_t budget) {
  BurnsideOracle out;
  const PcGroup& Q = Qf.Q;
  ClassData tcd = conjugacy_classes(target);
  auto cycles = sigma.cycles();
  if (cls.size() != cycles.size())
    throw PreconditionError("oracle: one class per cycle of sigma required");

  // class constraint per puncture: position m on cycle j carries c_j^(q^m)
  std::vector<uint32_t> want(Qf.N, 0);
  for (size_t j = 0; j < cycles.size(); ++j) {
    uint64_t qm = 1;
    for (size_t m = 0; m < cycles[j].size(); ++m) {
      want[cycles[j][m]] = power_class(target, tcd, cls[j], qm);
      qm *= q;
    }
  }

  // constrained epimorphism set
  ClassData qcd = conjugacy_classes(target);
  HomOptions opt;
  opt.surjective_only = true;
  opt.budget = budget;
  std::vector<GroupMap> epis;
  for (GroupMap& f : homomorphisms(Q, target, qcd, opt)) {
    bool okc = true;
    for (uint32_t i = 0; i < Qf.N && okc; ++i) {
      Element im = apply_map(target, f, Qf.marked[i]);
      if (tcd.class_of[target.rank(im)] != want[i]) okc = false;
    }
    if (okc) epis.push_back(std::move(f));
  }
  out.epi_count = epis.size();
  if (epis.empty()) return out;

  auto key_of = [&](const GroupMap& f) {
    std::string s;
    for (const Element& e : f.images) s.append(e.begin(), e.end());
    return s;
  };
  std::map<std::string, size_t> epi_index;
  for (size_t t = 0; t < epis.size(); ++t) epi_index[key_of(epis[t])] = t;

  // an accepted alpha permutes the epi set by precomposition
  auto perm_of = [&](const GroupMap& alpha) {
    std::vector<size_t> perm(epis.size());
    for (size_t t = 0; t < epis.size(); ++t) {
      GroupMap comp = compose(target, epis[t], alpha);  // phi o alpha
      auto it = epi_index.find(key_of(comp));
      if (it == epi_index.end())
        throw std::logic_error("oracle: precomposition left the constrained set");
      perm[t] = it->second;
    }
    return perm;
  };

  std::vector<GroupMap> twisted = accepted_maps(Qf, q, sigma, budget);
  out.accepted_count = twisted.size();
  uint64_t fixed_total = 0;
  for (const GroupMap& a : twisted) {
    auto perm = perm_of(a);
    for (size_t t = 0; t < perm.size(); ++t)
      if (perm[t] == t) ++fixed_total;
  }
  out.average_fixed = Rational(int64_t(fixed_total), int64_t(twisted.size()));

  Perm idperm;
  idperm.img.resize(Qf.N);
  for (uint32_t i = 0; i < Qf.N; ++i) idperm.img[i] = i;
  std::vector<GroupMap> pure = accepted_maps(Qf, 1, idperm, budget);
  out.pure_count = pure.size();

  // orbits of the pure model on the epi set
  std::vector<std::vector<size_t>> pure_perms;
  for (const GroupMap& a : pure) pure_perms.push_back(perm_of(a));
  std::vector<int32_t> orbit(epis.size(), -1);
  uint32_t norb = 0;
  for (size_t t = 0; t < epis.size(); ++t) {
    if (orbit[t] >= 0) continue;
    std::vector<size_t> stack{t};
    orbit[t] = int32_t(norb);
    while (!stack.empty()) {
      size_t cur = stack.back();
      stack.pop_back();
      for (auto& pp : pure_perms) {
        if (orbit[pp[cur]] < 0) {
          orbit[pp[cur]] = int32_t(norb);
          stack.push_back(pp[cur]);
        }
      }
    }
    ++norb;
  }
  out.orbit_count = norb;

  // Burnside check: the average over the twisted coset equals the number of
  // pure orbits fixed by any single twisted element
  if (!twisted.empty()) {
    auto tp = perm_of(twisted.front());
    std::set<int32_t> fixed_orbits;
    std::vector<bool> moved(norb, false);
    for (size_t t = 0; t < epis.size(); ++t)
      if (orbit[tp[t]] != orbit[t]) moved[orbit[t]] = true;
    uint64_t cnt = 0;
    for (uint32_t o = 0; o < norb; ++o)
      if (!moved[o]) ++cnt;
    out.twisted_orbit_count = cnt;
    out.burnside_identity = (out.average_fixed == Rational(int64_t(cnt)));
  }
  return out;
}

}  // namespace tame
