// Collection, consistency, subgroups, conjugacy classes, abelianization and
// quotients for refined power-commutator presentations.

#include "tametower/pc.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <sstream>

namespace tame {

namespace {
constexpr uint64_t kCollectCap = 1'000'000'000ULL;
constexpr uint64_t kClassCap = 1ULL << 20;
}  // namespace

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

PcGroup::PcGroup(uint32_t p, uint32_t n) : p_(p), n_(n) {
  if (p < 2) throw PreconditionError("p must be a prime >= 2");
  if (n > 250) throw CapacityError("too many pc generators");
  pow_.assign(n, Element(n, 0));
  comm_.assign(size_t(n) * (n > 0 ? n - 1 : 0) / 2, Element(n, 0));
  weights.assign(n, 1);
  defs.assign(n, GenDef{});
}

PcGroup PcGroup::elementary(uint32_t p, uint32_t rank) { return PcGroup(p, rank); }

PcGroup PcGroup::abelian(uint32_t p, const std::vector<uint32_t>& exps) {
  uint32_t n = 0, maxw = 0;
  for (uint32_t e : exps) { n += e; maxw = std::max(maxw, e); }
  PcGroup G(p, n);
  // layer by weight: all weight-1 generators first, then weight 2, ...
  std::vector<std::vector<uint32_t>> chain(exps.size());
  uint32_t idx = 0;
  for (uint32_t w = 1; w <= maxw; ++w)
    for (size_t t = 0; t < exps.size(); ++t)
      if (exps[t] >= w) {
        chain[t].push_back(idx);
        G.weights[idx] = w;
        ++idx;
      }
  for (auto& c : chain)
    for (size_t k = 0; k + 1 < c.size(); ++k) {
      Element rhs(n, 0);
      rhs[c[k + 1]] = 1;
      G.set_pow(c[k], rhs);
      G.defs[c[k + 1]] = GenDef{GenDef::Pow, uint16_t(c[k]), 0};
    }
  return G;
}

void PcGroup::set_pow(uint32_t i, const Element& rhs) {
  pow_[i] = rhs;
  pow_[i].resize(n_, 0);
}

void PcGroup::set_comm(uint32_t i, uint32_t j, const Element& rhs) {
  if (i <= j) throw PreconditionError("comm rule needs i > j");
  comm_[cidx(i, j)] = rhs;
  comm_[cidx(i, j)].resize(n_, 0);
}

void PcGroup::validate_shape() const {
  for (uint32_t i = 0; i < n_; ++i) {
    for (uint32_t k = 0; k < n_; ++k) {
      if (pow_[i][k] >= p_) throw PreconditionError("pow rule exponent out of range");
      if (k <= i && pow_[i][k] != 0) throw PreconditionError("pow rule not above its generator");
    }
    for (uint32_t j = 0; j < i; ++j)
      for (uint32_t k = 0; k < n_; ++k) {
        if (comm_[cidx(i, j)][k] >= p_) throw PreconditionError("comm rule exponent out of range");
        if (k <= i && comm_[cidx(i, j)][k] != 0) throw PreconditionError("comm rule not above its generator");
      }
  }
}

// ---------------------------------------------------------------------------
// collection
// ---------------------------------------------------------------------------

bool PcGroup::is_identity(const Element& x) const {
  for (uint8_t v : x)
    if (v) return false;
  return true;
}

Element PcGroup::gen(uint32_t i) const {
  Element x(n_, 0);
  x[i] = 1;
  return x;
}

Element PcGroup::gen_pow(uint32_t i, uint32_t e) const {
  Element x(n_, 0);
  x[i] = uint8_t(e % p_);
  return x;
}

namespace {
inline void add_tail(TailVec& dst, const TailVec& src, uint32_t p) {
  for (size_t i = 0; i < dst.size(); ++i) {
    uint32_t v = uint32_t(dst[i]) + src[i];
    dst[i] = uint8_t(v >= p ? v - p : v);
  }
}
}  // namespace

void PcGroup::enable_tails(uint32_t dim) {
  tail_dim_ = dim;
  pow_tail_.assign(n_, TailVec(dim, 0));
  comm_tail_.assign(comm_.size(), TailVec(dim, 0));
}

void PcGroup::set_pow_tail(uint32_t i, const TailVec& t) { pow_tail_[i] = t; }
void PcGroup::set_comm_tail(uint32_t i, uint32_t j, const TailVec& t) { comm_tail_[cidx(i, j)] = t; }

void PcGroup::mul_gen(Element& a, uint32_t g, TailVec* tl) const {
  thread_local std::vector<uint16_t> stack;
  thread_local std::vector<uint16_t> tmp;
  stack.clear();
  stack.push_back(uint16_t(g));
  uint64_t steps = 0;
  const bool tails = tl != nullptr && tail_dim_ > 0;

  while (!stack.empty()) {
    if (++steps > kCollectCap) throw BudgetError("collection exceeded iteration cap");
    uint32_t j = stack.back();
    stack.pop_back();

    uint32_t hi = n_;
    for (uint32_t k = n_; k-- > j + 1;)
      if (a[k]) { hi = k; break; }

    if (hi == n_) {
      // nothing above j: plain increment, wrap via the power rule
      if (++a[j] == p_) {
        a[j] = 0;
        const Element& w = pow_[j];
        for (uint32_t t = n_; t-- > 0;)
          for (uint32_t c = 0; c < w[t]; ++c) stack.push_back(uint16_t(t));
        if (tails) add_tail(*tl, pow_tail_[j], p_);
      }
      continue;
    }

    // move g_j left past the tail of a: conjugate each tail letter by g_j
    tmp.clear();
    std::array<uint8_t, 256> saved{};
    for (uint32_t k = j + 1; k < n_; ++k) { saved[k] = a[k]; a[k] = 0; }
    if (++a[j] == p_) {
      a[j] = 0;
      const Element& w = pow_[j];
      for (uint32_t t = 0; t < n_; ++t)
        for (uint32_t c = 0; c < w[t]; ++c) tmp.push_back(uint16_t(t));
      if (tails) add_tail(*tl, pow_tail_[j], p_);
    }
    for (uint32_t k = j + 1; k < n_; ++k) {
      uint8_t cnt = saved[k];
      if (!cnt) continue;
      const Element& cw = comm_[cidx(k, j)];
      const bool triv = is_identity(cw);
      for (uint32_t c = 0; c < cnt; ++c) {
        tmp.push_back(uint16_t(k));
        if (!triv)
          for (uint32_t t = 0; t < n_; ++t)
            for (uint32_t cc = 0; cc < cw[t]; ++cc) tmp.push_back(uint16_t(t));
        if (tails) add_tail(*tl, comm_tail_[cidx(k, j)], p_);
      }
    }
    for (size_t t = tmp.size(); t-- > 0;) stack.push_back(tmp[t]);
  }
}

void PcGroup::mul_into(Element& a, const Element& b, TailVec* tl) const {
  for (uint32_t i = 0; i < n_; ++i)
    for (uint32_t c = 0; c < b[i]; ++c) mul_gen(a, i, tl);
}

Element PcGroup::mul(const Element& a, const Element& b) const {
  Element r = a;
  mul_into(r, b, nullptr);
  return r;
}

Element PcGroup::inv(const Element& a) const {
  Element w = a, v(n_, 0);
  for (uint32_t i = 0; i < n_; ++i) {
    if (!w[i]) continue;
    uint8_t k = uint8_t(p_ - w[i]);
    v[i] = k;
    mul_into(w, gen_pow(i, k), nullptr);
  }
  return v;
}

Element PcGroup::power(const Element& a, uint64_t e) const {
  Element r(n_, 0), b = a;
  while (e) {
    if (e & 1) r = mul(r, b);
    e >>= 1;
    if (e) b = mul(b, b);
  }
  return r;
}

Element PcGroup::power_signed(const Element& a, long long e) const {
  if (e >= 0) return power(a, uint64_t(e));
  return inv(power(a, uint64_t(-e)));
}

Element PcGroup::conj(const Element& x, const Element& g) const {
  return mul(mul(inv(g), x), g);
}

Element PcGroup::commutator(const Element& x, const Element& y) const {
  return mul(inv(mul(y, x)), mul(x, y));
}

Element PcGroup::collect_word(const Word& w) const {
  Element r(n_, 0);
  for (const Letter& l : w) {
    if (l.gen >= n_) throw PreconditionError("word letter indexes an invalid generator");
    Element g = power(gen(l.gen), uint64_t(l.exp < 0 ? -l.exp : l.exp));
    if (l.exp < 0) g = inv(g);
    mul_into(r, g, nullptr);
  }
  return r;
}

uint64_t PcGroup::element_order(const Element& x) const {
  Element y = x;
  uint64_t o = 1;
  while (!is_identity(y)) {
    y = power(y, p_);
    o *= p_;
  }
  return o;
}

uint64_t PcGroup::rank(const Element& x) const {
  uint64_t r = 0;
  for (uint32_t i = 0; i < n_; ++i) r = r * p_ + x[i];
  return r;
}

Element PcGroup::unrank(uint64_t r) const {
  Element x(n_, 0);
  for (uint32_t i = n_; i-- > 0;) {
    x[i] = uint8_t(r % p_);
    r /= p_;
  }
  return x;
}

// ---------------------------------------------------------------------------
// tailed arithmetic (central extension scratch mode)
// ---------------------------------------------------------------------------

PcGroup::TailedElement PcGroup::t_identity() const {
  return {Element(n_, 0), TailVec(tail_dim_, 0)};
}

PcGroup::TailedElement PcGroup::t_gen(uint32_t i) const {
  TailedElement e = t_identity();
  e.g[i] = 1;
  return e;
}

PcGroup::TailedElement PcGroup::t_mul(const TailedElement& a, const TailedElement& b) const {
  TailedElement r = a;
  add_tail(r.t, b.t, p_);
  for (uint32_t i = 0; i < n_; ++i)
    for (uint32_t c = 0; c < b.g[i]; ++c) mul_gen(r.g, i, &r.t);
  return r;
}

PcGroup::TailedElement PcGroup::t_inv(const TailedElement& a) const {
  TailedElement w = a, v = t_identity();
  for (uint32_t i = 0; i < n_; ++i) {
    if (!w.g[i]) continue;
    uint8_t k = uint8_t(p_ - w.g[i]);
    TailedElement gk = t_identity();
    gk.g[i] = k;
    v = t_mul(v, gk);
    w = t_mul(w, gk);
  }
  // w = (1, r); cancel the residual central part
  for (size_t i = 0; i < v.t.size(); ++i) {
    uint32_t d = (uint32_t(v.t[i]) + p_ - w.t[i]) % p_;
    v.t[i] = uint8_t(d);
  }
  return v;
}

PcGroup::TailedElement PcGroup::t_power(const TailedElement& a, uint64_t e) const {
  TailedElement r = t_identity(), b = a;
  while (e) {
    if (e & 1) r = t_mul(r, b);
    e >>= 1;
    if (e) b = t_mul(b, b);
  }
  return r;
}

// ---------------------------------------------------------------------------
// consistency
// ---------------------------------------------------------------------------

bool PcGroup::check_consistency() const {
  for (uint32_t k = 0; k < n_; ++k)
    for (uint32_t j = 0; j < k; ++j)
      for (uint32_t i = 0; i < j; ++i) {
        Element l = mul(mul(gen(k), gen(j)), gen(i));
        Element r = mul(gen(k), mul(gen(j), gen(i)));
        if (l != r) return false;
      }
  for (uint32_t j = 0; j < n_; ++j)
    for (uint32_t i = 0; i < j; ++i) {
      Element l = mul(power(gen(j), p_), gen(i));
      Element r = mul(power(gen(j), p_ - 1), mul(gen(j), gen(i)));
      if (l != r) return false;
      l = mul(gen(j), power(gen(i), p_));
      r = mul(mul(gen(j), gen(i)), power(gen(i), p_ - 1));
      if (l != r) return false;
    }
  for (uint32_t i = 0; i < n_; ++i) {
    Element l = mul(power(gen(i), p_), gen(i));
    Element r = mul(gen(i), power(gen(i), p_));
    if (l != r) return false;
  }
  return true;
}

std::vector<TailVec> PcGroup::consistency_defects() const {
  std::vector<TailVec> out;
  auto push_defect = [&](const TailedElement& l, const TailedElement& r) {
    if (l.g != r.g) throw std::logic_error("base group inconsistent under tails");
    TailVec d(tail_dim_, 0);
    for (size_t i = 0; i < d.size(); ++i) d[i] = uint8_t((uint32_t(l.t[i]) + p_ - r.t[i]) % p_);
    if (!std::all_of(d.begin(), d.end(), [](uint8_t v) { return v == 0; })) out.push_back(d);
  };
  for (uint32_t k = 0; k < n_; ++k)
    for (uint32_t j = 0; j < k; ++j)
      for (uint32_t i = 0; i < j; ++i)
        push_defect(t_mul(t_mul(t_gen(k), t_gen(j)), t_gen(i)),
                    t_mul(t_gen(k), t_mul(t_gen(j), t_gen(i))));
  for (uint32_t j = 0; j < n_; ++j)
    for (uint32_t i = 0; i < j; ++i) {
      push_defect(t_mul(t_power(t_gen(j), p_), t_gen(i)),
                  t_mul(t_power(t_gen(j), p_ - 1), t_mul(t_gen(j), t_gen(i))));
      push_defect(t_mul(t_gen(j), t_power(t_gen(i), p_)),
                  t_mul(t_mul(t_gen(j), t_gen(i)), t_power(t_gen(i), p_ - 1)));
    }
  for (uint32_t i = 0; i < n_; ++i)
    push_defect(t_mul(t_power(t_gen(i), p_), t_gen(i)), t_mul(t_gen(i), t_power(t_gen(i), p_)));
  return out;
}

std::string PcGroup::describe() const {
  std::ostringstream os;
  os << "p=" << p_ << " order p^" << n_;
  return os.str();
}

// ---------------------------------------------------------------------------
// subgroups
// ---------------------------------------------------------------------------

static uint32_t leading_index(const Element& x) {
  for (uint32_t i = 0; i < x.size(); ++i)
    if (x[i]) return i;
  return uint32_t(x.size());
}

void Subgroup::insert(Element x, std::vector<Element>& queue) {
  const uint32_t p = G_->p();
  for (;;) {
    uint32_t i = leading_index(x);
    if (i == G_->ngens()) return;
    if (!slot_[i]) {
      // normalize leading coefficient to 1
      uint32_t c = x[i];
      uint32_t cinv = 1;
      while ((cinv * c) % p != 1) ++cinv;
      x = G_->power(x, cinv);
      slot_[i] = x;
      queue.push_back(G_->power(x, p));
      for (uint32_t k = 0; k < G_->ngens(); ++k)
        if (k != i && slot_[k]) {
          queue.push_back(G_->commutator(*slot_[k], x));
          queue.push_back(G_->commutator(x, *slot_[k]));
        }
      if (normal_mode_)
        for (uint32_t k = 0; k < G_->ngens(); ++k)
          queue.push_back(G_->commutator(x, G_->gen(k)));
      return;
    }
    uint32_t c = x[i];  // slot leading coefficient is 1
    x = G_->mul(G_->inv(G_->power(*slot_[i], c)), x);
  }
}

void Subgroup::generate(const std::vector<Element>& xs, bool normal_closure) {
  normal_mode_ = normal_closure;
  std::vector<Element> queue = xs;
  while (!queue.empty()) {
    Element x = queue.back();
    queue.pop_back();
    insert(std::move(x), queue);
  }
  normalize();
}

void Subgroup::normalize() {
  // echelonize: clear later leading coordinates inside each slot
  std::vector<uint32_t> leads = leading();
  for (uint32_t li : leads) {
    Element& s = *slot_[li];
    for (uint32_t lt : leads) {
      if (lt <= li) continue;
      uint32_t c = s[lt];
      if (c) s = G_->mul(s, G_->power(*slot_[lt], G_->p() - c));
    }
  }
}

Element Subgroup::sift(const Element& x) const {
  Element y = x;
  for (uint32_t i = 0; i < G_->ngens(); ++i) {
    if (!slot_[i] || !y[i]) continue;
    uint32_t c = y[i];
    y = G_->mul(G_->inv(G_->power(*slot_[i], c)), y);
  }
  return y;
}

bool Subgroup::contains(const Element& x) const { return G_->is_identity(sift(x)); }

uint32_t Subgroup::dim() const {
  uint32_t d = 0;
  for (const auto& s : slot_)
    if (s) ++d;
  return d;
}

std::vector<Element> Subgroup::basis() const {
  std::vector<Element> b;
  for (const auto& s : slot_)
    if (s) b.push_back(*s);
  return b;
}

std::vector<uint32_t> Subgroup::leading() const {
  std::vector<uint32_t> l;
  for (uint32_t i = 0; i < slot_.size(); ++i)
    if (slot_[i]) l.push_back(i);
  return l;
}

std::vector<uint32_t> Subgroup::express(const Element& x) const {
  std::vector<uint32_t> coeffs;
  Element y = x;
  for (uint32_t i = 0; i < G_->ngens(); ++i) {
    if (!slot_[i]) continue;
    uint32_t c = y[i];
    coeffs.push_back(c);
    if (c) y = G_->mul(G_->inv(G_->power(*slot_[i], c)), y);
  }
  if (!G_->is_identity(y)) throw PreconditionError("express: element not in subgroup");
  return coeffs;
}

bool Subgroup::operator==(const Subgroup& o) const {
  if (dim() != o.dim()) return false;
  for (const auto& s : slot_)
    if (s && !o.contains(*s)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// conjugacy classes
// ---------------------------------------------------------------------------

ClassData conjugacy_classes(const PcGroup& G) {
  if (G.order() > kClassCap) throw CapacityError("conjugacy classes: group too large");
  const uint64_t N = G.order();
  ClassData cd;
  cd.class_of.assign(N, UINT32_MAX);

  std::vector<Element> gens, ginvs;
  for (uint32_t i = 0; i < G.ngens(); ++i) {
    gens.push_back(G.gen(i));
    ginvs.push_back(G.inv(gens.back()));
  }

  std::vector<uint64_t> stack;
  for (uint64_t r = 0; r < N; ++r) {
    if (cd.class_of[r] != UINT32_MAX) continue;
    uint32_t cls = uint32_t(cd.classes.size());
    uint64_t size = 0;
    cd.class_of[r] = cls;
    stack.assign(1, r);
    while (!stack.empty()) {
      uint64_t cur = stack.back();
      stack.pop_back();
      ++size;
      Element x = G.unrank(cur);
      for (uint32_t i = 0; i < G.ngens(); ++i) {
        Element y = G.mul(G.mul(ginvs[i], x), gens[i]);
        uint64_t ry = G.rank(y);
        if (cd.class_of[ry] == UINT32_MAX) {
          cd.class_of[ry] = cls;
          stack.push_back(ry);
        }
      }
    }
    cd.classes.push_back(ConjClass{G.unrank(r), size});
  }
  return cd;
}

uint32_t power_class(const PcGroup& G, const ClassData& cd, uint32_t cls, uint64_t k) {
  Element y = G.power(cd.classes[cls].rep, k);
  return cd.class_of[G.rank(y)];
}

uint64_t centralizer_order(const PcGroup& G, const ClassData& cd, const Element& x) {
  return G.order() / cd.classes[cd.class_of[G.rank(x)]].size;
}

uint64_t PcGroup::exponent() const {
  if (n_ == 0) return 1;
  ClassData cd = conjugacy_classes(*this);
  uint64_t e = 1;
  for (const auto& c : cd.classes) e = std::max(e, element_order(c.rep));
  return e;
}

// ---------------------------------------------------------------------------
// abelianization: Smith form over the local ring Z/p^B
// ---------------------------------------------------------------------------

namespace {

struct LocalSnf {
  std::vector<uint64_t> diag;              // p-power diagonal entries
  std::vector<std::vector<uint64_t>> E;    // accumulated column transform, n x n
  uint64_t mod;
};

// Smith normal form of rows within Z/p^B; row ops are free, column ops are
// mirrored on E, so quotient coordinates of a row vector x are (x * E) mod diag.
LocalSnf snf_local(std::vector<std::vector<uint64_t>> M, uint32_t n, uint64_t p, uint32_t B) {
  LocalSnf S;
  uint64_t mod = 1;
  for (uint32_t i = 0; i < B; ++i) mod *= p;
  S.mod = mod;
  S.E.assign(n, std::vector<uint64_t>(n, 0));
  for (uint32_t i = 0; i < n; ++i) S.E[i][i] = 1;
  S.diag.assign(n, 0);

  auto valp = [&](uint64_t x) {
    if (x == 0) return B + 1;
    uint32_t v = 0;
    while (x % p == 0) { x /= p; ++v; }
    return v;
  };
  size_t rows = M.size();
  uint32_t rpos = 0, cpos = 0;

  auto col_swap = [&](uint32_t a, uint32_t b) {
    for (auto& row : M) std::swap(row[a], row[b]);
    for (auto& row : S.E) std::swap(row[a], row[b]);
  };
  auto col_sub = [&](uint32_t a, uint32_t b, uint64_t c) {  // col_a -= c * col_b
    c %= mod;
    for (auto& row : M) row[a] = (row[a] + (mod - mulmod(c, row[b], mod))) % mod;
    for (auto& row : S.E) row[a] = (row[a] + (mod - mulmod(c, row[b], mod))) % mod;
  };
  auto col_scale = [&](uint32_t a, uint64_t u) {  // u a unit mod p^B
    for (auto& row : M) row[a] = mulmod(row[a], u, mod);
    for (auto& row : S.E) row[a] = mulmod(row[a], u, mod);
  };

  while (rpos < rows && cpos < n) {
    // minimal-valuation pivot
    uint32_t bv = B + 2;
    size_t bi = rows;
    uint32_t bj = n;
    for (size_t i = rpos; i < rows; ++i)
      for (uint32_t j = cpos; j < n; ++j) {
        uint32_t v = valp(M[i][j]);
        if (v < bv) { bv = v; bi = i; bj = j; }
      }
    if (bv > B) break;  // remaining block is zero
    std::swap(M[bi], M[rpos]);
    if (bj != cpos) col_swap(bj, cpos);
    // scale pivot to exactly p^bv
    uint64_t piv = M[rpos][cpos];
    uint64_t unit = piv / ipow(p, bv);
    col_scale(cpos, powmod(unit, (mod / p) * (p - 1) - 1, mod));  // multiply col by unit^{-1}
    piv = M[rpos][cpos];
    // clear the pivot row (column ops) and pivot column (row ops);
    // every remaining entry has valuation >= bv so the division is exact
    for (uint32_t j = cpos + 1; j < n; ++j) {
      if (M[rpos][j] == 0) continue;
      uint64_t q = M[rpos][j] / piv;
      col_sub(j, cpos, q);
      if (M[rpos][j] != 0) throw std::logic_error("snf_local: column clear failed");
    }
    for (size_t i = rpos + 1; i < rows; ++i) {
      if (M[i][cpos] == 0) continue;
      uint64_t t = M[i][cpos] / ipow(p, bv);
      for (uint32_t j = cpos; j < n; ++j)
        M[i][j] = (M[i][j] + (mod - mulmod(t, M[rpos][j], mod))) % mod;
    }
    S.diag[cpos] = ipow(p, bv);
    ++rpos;
    ++cpos;
  }
  for (uint32_t j = cpos; j < n; ++j) S.diag[j] = 0;  // no relation hit: full Z/p^B piece
  return S;
}

}  // namespace

AbelianInvariants abelianization(const PcGroup& G) {
  const uint32_t n = G.ngens();
  AbelianInvariants ab;
  if (n == 0) return ab;
  const uint32_t B = n + 1;
  const uint64_t p = G.p();

  std::vector<std::vector<uint64_t>> M;
  uint64_t mod = ipow(p, B);
  for (uint32_t i = 0; i < n; ++i) {
    std::vector<uint64_t> row(n, 0);
    row[i] = p;
    const Element& w = G.pow_rhs(i);
    for (uint32_t k = 0; k < n; ++k) row[k] = (row[k] + mod - w[k]) % mod;
    M.push_back(std::move(row));
  }
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < i; ++j) {
      const Element& w = G.comm_rhs(i, j);
      if (G.is_identity(w)) continue;
      std::vector<uint64_t> row(n, 0);
      for (uint32_t k = 0; k < n; ++k) row[k] = (mod - w[k]) % mod;
      M.push_back(std::move(row));
    }

  LocalSnf S = snf_local(std::move(M), n, p, B);
  // every diagonal entry must be a positive p-power: finite p-group
  std::vector<uint32_t> keep;
  for (uint32_t i = 0; i < n; ++i) {
    if (S.diag[i] == 0) throw std::logic_error("abelianization: unbounded invariant (inconsistent pcp?)");
    if (S.diag[i] > 1) keep.push_back(i);
  }
  // ascending divisibility chain
  std::sort(keep.begin(), keep.end(), [&](uint32_t a, uint32_t b) { return S.diag[a] < S.diag[b]; });
  for (uint32_t i : keep) ab.factors.push_back(S.diag[i]);
  ab.proj.assign(n, std::vector<uint64_t>(keep.size(), 0));
  for (uint32_t g = 0; g < n; ++g)
    for (size_t t = 0; t < keep.size(); ++t)
      ab.proj[g][t] = S.E[g][keep[t]] % S.diag[keep[t]];
  return ab;
}

std::vector<uint64_t> ab_image(const PcGroup& G, const AbelianInvariants& ab, const Element& x) {
  std::vector<uint64_t> v(ab.factors.size(), 0);
  for (uint32_t i = 0; i < G.ngens(); ++i) {
    if (!x[i]) continue;
    for (size_t t = 0; t < v.size(); ++t)
      v[t] = (v[t] + uint64_t(x[i]) * ab.proj[i][t]) % ab.factors[t];
  }
  return v;
}

// ---------------------------------------------------------------------------
// quotients
// ---------------------------------------------------------------------------

Element QuotientMap::apply(const Element& x) const {
  Element s = kernel.sift(x);
  Element out(surviving.size(), 0);
  for (size_t t = 0; t < surviving.size(); ++t) out[t] = s[surviving[t]];
  return out;
}

Quotient quotient(const PcGroup& G, const std::vector<Element>& normal_gens) {
  Subgroup K(G);
  K.generate(normal_gens, /*normal_closure=*/true);
  std::vector<uint32_t> leads = K.leading();
  std::vector<bool> islead(G.ngens(), false);
  for (uint32_t l : leads) islead[l] = true;

  QuotientMap qm(G, K);
  for (uint32_t i = 0; i < G.ngens(); ++i)
    if (!islead[i]) qm.surviving.push_back(i);

  const uint32_t m = uint32_t(qm.surviving.size());
  PcGroup Q(G.p(), m);
  for (uint32_t t = 0; t < m; ++t) {
    uint32_t i = qm.surviving[t];
    Q.set_pow(t, qm.apply(G.power(G.gen(i), G.p())));
    Q.weights[t] = i < G.weights.size() ? G.weights[i] : 1;
    for (uint32_t u = 0; u < t; ++u) {
      uint32_t j = qm.surviving[u];
      Q.set_comm(t, u, qm.apply(G.commutator(G.gen(i), G.gen(j))));
    }
  }
  return Quotient{std::move(Q), std::move(qm)};
}

// ---------------------------------------------------------------------------
// lower p-central series
// ---------------------------------------------------------------------------

std::vector<Subgroup> lower_p_central_series(const PcGroup& G) {
  std::vector<Subgroup> series;
  Subgroup whole(G);
  std::vector<Element> all;
  for (uint32_t i = 0; i < G.ngens(); ++i) all.push_back(G.gen(i));
  whole.generate(all, true);
  series.push_back(whole);

  while (series.back().dim() > 0) {
    const Subgroup& cur = series.back();
    std::vector<Element> gens;
    for (const Element& x : cur.basis()) {
      gens.push_back(G.power(x, G.p()));
      for (uint32_t i = 0; i < G.ngens(); ++i) gens.push_back(G.commutator(x, G.gen(i)));
    }
    Subgroup nxt(G);
    nxt.generate(gens, true);
    if (nxt.dim() == series.back().dim())
      throw std::logic_error("p-central series did not descend");
    series.push_back(std::move(nxt));
  }
  return series;
}

uint32_t p_class(const PcGroup& G) {
  return uint32_t(lower_p_central_series(G).size()) - 1;
}

// ---------------------------------------------------------------------------
// subgroup presentations
// ---------------------------------------------------------------------------

SubgroupPresentation subgroup_presentation(const PcGroup& G, const Subgroup& S) {
  std::vector<Element> basis = S.basis();
  const uint32_t m = uint32_t(basis.size());
  SubgroupPresentation sp{PcGroup(G.p(), m), basis};
  for (uint32_t i = 0; i < m; ++i) {
    auto cf = S.express(G.power(basis[i], G.p()));
    Element rhs(m, 0);
    for (uint32_t t = 0; t < m; ++t) rhs[t] = uint8_t(cf[t]);
    for (uint32_t t = 0; t <= i; ++t)
      if (rhs[t]) throw std::logic_error("subgroup presentation: power rule not above generator");
    sp.H.set_pow(i, rhs);
    for (uint32_t j = 0; j < i; ++j) {
      auto cc = S.express(G.commutator(basis[i], basis[j]));
      Element crhs(m, 0);
      for (uint32_t t = 0; t < m; ++t) crhs[t] = uint8_t(cc[t]);
      for (uint32_t t = 0; t <= i; ++t)
        if (crhs[t]) throw std::logic_error("subgroup presentation: comm rule not above generator");
      sp.H.set_comm(i, j, crhs);
    }
  }
  return sp;
}

// ---------------------------------------------------------------------------
// minimal generators and evaluation programs
// ---------------------------------------------------------------------------

MinimalGens minimal_generators(const PcGroup& G) {
  const uint32_t n = G.ngens();
  MinimalGens mg;
  mg.steps.assign(n, MinimalGens::Step{});
  if (n == 0) return mg;

  std::vector<Element> fgens;
  for (uint32_t i = 0; i < n; ++i) {
    fgens.push_back(G.pow_rhs(i));
    for (uint32_t j = 0; j < i; ++j) fgens.push_back(G.comm_rhs(i, j));
  }
  Subgroup frat(G);
  frat.generate(fgens, true);
  std::vector<bool> isfrat(n, false);
  for (uint32_t l : frat.leading()) isfrat[l] = true;

  std::vector<bool> known(n, false);
  for (uint32_t i = 0; i < n; ++i)
    if (!isfrat[i]) {
      mg.gens.push_back(i);
      mg.steps[i].kind = MinimalGens::Step::Given;
      known[i] = true;
    }

  // a relation with right-hand side w * g_k (k the highest letter, exponent 1,
  // all lower letters already known) defines g_k
  auto definable = [&](const Element& w) -> int {
    int hi = -1;
    for (uint32_t k = 0; k < n; ++k)
      if (w[k]) hi = int(k);
    if (hi < 0 || w[hi] != 1) return -1;
    for (uint32_t k = 0; k < uint32_t(hi); ++k)
      if (w[k] && !known[k]) return -1;
    return hi;
  };

  // declared definitions first, then rule-scan, then sift provenance
  bool progress = true;
  while (progress) {
    progress = false;
    for (uint32_t k = 0; k < n; ++k) {
      if (known[k] || G.defs[k].kind == GenDef::None) continue;
      const GenDef& d = G.defs[k];
      if (d.kind == GenDef::Pow && known[d.a] && definable(G.pow_rhs(d.a)) == int(k)) {
        mg.steps[k] = {MinimalGens::Step::PowOf, d.a, 0, {}};
        known[k] = true;
        progress = true;
      } else if (d.kind == GenDef::Comm && known[d.a] && known[d.b] &&
                 definable(G.comm_rhs(d.a, d.b)) == int(k)) {
        mg.steps[k] = {MinimalGens::Step::CommOf, d.a, d.b, {}};
        known[k] = true;
        progress = true;
      }
    }
    for (uint32_t a = 0; a < n; ++a) {
      if (!known[a]) continue;
      int k = definable(G.pow_rhs(a));
      if (k >= 0 && !known[k]) {
        mg.steps[k] = {MinimalGens::Step::PowOf, a, 0, {}};
        known[k] = true;
        progress = true;
      }
      for (uint32_t b = 0; b < a; ++b) {
        if (!known[b]) continue;
        int kc = definable(G.comm_rhs(a, b));
        if (kc >= 0 && !known[kc]) {
          mg.steps[kc] = {MinimalGens::Step::CommOf, a, b, {}};
          known[kc] = true;
          progress = true;
        }
      }
    }
  }

  if (std::all_of(known.begin(), known.end(), [](bool b) { return b; })) return mg;

  // provenance fallback: sift closure of the minimal generators with words
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
  for (uint32_t m_ : mg.gens) queue.push_back({G.gen(m_), {{uint16_t(m_), 1}}});
  while (!queue.empty()) {
    Prov cur = queue.back();
    queue.pop_back();
    for (;;) {
      uint32_t i = leading_index(cur.el);
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
  for (uint32_t k = 0; k < n; ++k) {
    if (known[k]) continue;
    // express g_k against the provenance slots
    Element y = G.gen(k);
    Word w;
    for (uint32_t i = 0; i < n; ++i) {
      if (!slot[i] || !y[i]) continue;
      uint32_t c = y[i];
      for (uint32_t t = 0; t < c; ++t) w = wcat(w, slot[i]->w);
      y = G.mul(G.inv(G.power(slot[i]->el, c)), y);
    }
    if (!G.is_identity(y)) throw std::logic_error("minimal generators do not generate");
    mg.steps[k] = {MinimalGens::Step::WordOf, 0, 0, w};
    known[k] = true;
  }
  return mg;
}

std::vector<Element> evaluate_images(const PcGroup& dom, const MinimalGens& mg,
                                     const PcGroup& cod, const std::vector<Element>& minimal_imgs) {
  const uint32_t n = dom.ngens();
  std::vector<Element> img(n, cod.identity());
  for (size_t t = 0; t < mg.gens.size(); ++t) img[mg.gens[t]] = minimal_imgs[t];

  // the relation rhs reads w * g_k; its image determines img[k] as
  // eval(w)^{-1} * (image of the left-hand side)
  auto eval_prefix = [&](const Element& rhs, uint32_t k) {
    Element r = cod.identity();
    for (uint32_t t = 0; t < k; ++t)
      if (rhs[t]) r = cod.mul(r, cod.power(img[t], rhs[t]));
    return r;
  };

  for (uint32_t k = 0; k < n; ++k) {
    const auto& st = mg.steps[k];
    switch (st.kind) {
      case MinimalGens::Step::Given:
        break;
      case MinimalGens::Step::PowOf:
        img[k] = cod.mul(cod.inv(eval_prefix(dom.pow_rhs(st.a), k)),
                         cod.power(img[st.a], dom.p()));
        break;
      case MinimalGens::Step::CommOf:
        img[k] = cod.mul(cod.inv(eval_prefix(dom.comm_rhs(st.a, st.b), k)),
                         cod.commutator(img[st.a], img[st.b]));
        break;
      case MinimalGens::Step::WordOf: {
        Element r = cod.identity();
        for (const Letter& l : st.w) {
          Element g = cod.power(img[l.gen], uint64_t(l.exp < 0 ? -l.exp : l.exp));
          if (l.exp < 0) g = cod.inv(g);
          r = cod.mul(r, g);
        }
        img[k] = r;
        break;
      }
    }
  }
  return img;
}

Element evaluate_vector(const PcGroup& cod, const std::vector<Element>& imgs, const Element& v) {
  Element r = cod.identity();
  for (uint32_t i = 0; i < v.size(); ++i)
    if (v[i]) r = cod.mul(r, cod.power(imgs[i], v[i]));
  return r;
}

bool is_homomorphism(const PcGroup& dom, const PcGroup& cod, const std::vector<Element>& imgs) {
  const uint32_t n = dom.ngens();
  for (uint32_t i = 0; i < n; ++i) {
    if (cod.power(imgs[i], dom.p()) != evaluate_vector(cod, imgs, dom.pow_rhs(i))) return false;
    for (uint32_t j = 0; j < i; ++j)
      if (cod.commutator(imgs[i], imgs[j]) != evaluate_vector(cod, imgs, dom.comm_rhs(i, j)))
        return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// maximal subgroups
// ---------------------------------------------------------------------------

std::vector<AbelianInvariants> maximal_subgroup_abelianizations(const PcGroup& G) {
  MinimalGens mg = minimal_generators(G);
  const uint32_t d = mg.rank();
  const uint32_t p = G.p();
  std::vector<AbelianInvariants> out;
  if (d == 0) return out;

  // Frattini subgroup basis
  std::vector<Element> fgens;
  for (uint32_t i = 0; i < G.ngens(); ++i) {
    fgens.push_back(G.pow_rhs(i));
    for (uint32_t j = 0; j < i; ++j) fgens.push_back(G.comm_rhs(i, j));
  }
  Subgroup frat(G);
  frat.generate(fgens, true);
  std::vector<Element> fbasis = frat.basis();

  // hyperplanes of F_p^d: kernels of normalized functionals
  std::vector<std::vector<uint32_t>> functionals;
  std::vector<uint32_t> f(d, 0);
  uint64_t total = ipow(p, d);
  for (uint64_t code = 1; code < total; ++code) {
    uint64_t c = code;
    for (uint32_t i = 0; i < d; ++i) { f[i] = uint32_t(c % p); c /= p; }
    uint32_t first = d;
    for (uint32_t i = 0; i < d; ++i)
      if (f[i]) { first = i; break; }
    if (f[first] != 1) continue;  // normalize: first nonzero coefficient is 1
    functionals.push_back(f);
  }

  for (const auto& fn : functionals) {
    // kernel basis of the functional
    std::vector<Element> gens = fbasis;
    uint32_t piv = 0;
    while (fn[piv] == 0) ++piv;
    for (uint32_t i = 0; i < d; ++i) {
      if (i == piv) continue;
      // e_i - fn[i] * e_piv lies in the kernel
      Element x = G.gen(mg.gens[i]);
      if (fn[i]) x = G.mul(x, G.power(G.gen(mg.gens[piv]), p - fn[i]));
      gens.push_back(x);
    }
    Subgroup H(G);
    H.generate(gens, false);
    out.push_back(abelianization(subgroup_presentation(G, H).H));
  }
  std::sort(out.begin(), out.end(), [](const AbelianInvariants& a, const AbelianInvariants& b) {
    return a.factors < b.factors;
  });
  return out;
}

}  // namespace tame
