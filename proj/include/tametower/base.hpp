#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tame {

// ---------------------------------------------------------------------------
// Error taxonomy.  CLI maps these onto exit codes.
// ---------------------------------------------------------------------------

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Exact rationals over int64.  Masses are small fractions; overflow is a bug,
// not an expected condition, so it throws.
// ---------------------------------------------------------------------------

class Rational {
public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}
  Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  bool is_zero() const { return num_ == 0; }

  Rational operator+(const Rational& o) const {
    return Rational(checked_add(checked_mul(num_, o.den_), checked_mul(o.num_, den_)),
                    checked_mul(den_, o.den_));
  }
  Rational operator-(const Rational& o) const {
    return Rational(checked_add(checked_mul(num_, o.den_), -checked_mul(o.num_, den_)),
                    checked_mul(den_, o.den_));
  }
  Rational operator*(const Rational& o) const {
    return Rational(checked_mul(num_, o.num_), checked_mul(den_, o.den_));
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  double approx() const { return double(num_) / double(den_); }

private:
  static long long checked_mul(long long a, long long b) {
    long long r;
    if (__builtin_mul_overflow(a, b, &r)) throw CapacityError("rational overflow");
    return r;
  }
  static long long checked_add(long long a, long long b) {
    long long r;
    if (__builtin_add_overflow(a, b, &r)) throw CapacityError("rational overflow");
    return r;
  }
  void normalize() {
    if (den_ == 0) throw PreconditionError("rational with zero denominator");
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
    if (num_ == 0) den_ = 1;
  }
  long long num_, den_;
};

// ---------------------------------------------------------------------------
// Counter-based deterministic RNG.  Each (seed, stream) pair yields an
// independent reproducible sequence, so parallel runs match serial ones.
// ---------------------------------------------------------------------------

class Rng {
public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : state_(mix(seed ^ mix(stream + 0x517cc1b727220a95ULL))) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // uniform in [0, n)
  uint64_t below(uint64_t n) {
    if (n == 0) throw PreconditionError("Rng::below(0)");
    uint64_t threshold = (~uint64_t(0) - n + 1) % n;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  uint64_t state_;
};

// ---------------------------------------------------------------------------
// Modular arithmetic on uint64 (moduli < 2^63).
// ---------------------------------------------------------------------------

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return uint64_t((__uint128_t)a * b % m);
}

inline uint64_t powmod(uint64_t a, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

// deterministic Miller-Rabin, valid for all 64-bit n
inline bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) { d >>= 1; ++s; }
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) { composite = false; break; }
    }
    if (composite) return false;
  }
  return true;
}

// primes in [lo, hi] by simple sieve; fine for bounds up to ~10^8
std::vector<uint64_t> primes_in(uint64_t lo, uint64_t hi);

inline uint32_t val_p(uint64_t n, uint64_t p) {
  uint32_t v = 0;
  while (n != 0 && n % p == 0) { n /= p; ++v; }
  return v;
}

inline uint64_t ipow(uint64_t b, uint32_t e) {
  uint64_t r = 1;
  while (e--) {
    if (__builtin_mul_overflow(r, b, &r)) throw CapacityError("ipow overflow");
  }
  return r;
}

}  // namespace tame
