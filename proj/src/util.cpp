#include "tametower/base.hpp"

namespace tame {

std::vector<uint64_t> primes_in(uint64_t lo, uint64_t hi) {
  std::vector<uint64_t> out;
  if (hi < 2 || hi < lo) return out;
  if (lo < 2) lo = 2;
  std::vector<bool> composite(hi - lo + 1, false);
  for (uint64_t p = 2; p * p <= hi; ++p) {
    if (p > 2 && p % 2 == 0) continue;
    if (!is_prime_u64(p)) continue;
    uint64_t start = std::max(p * p, ((lo + p - 1) / p) * p);
    for (uint64_t m = start; m <= hi; m += p) composite[m - lo] = true;
  }
  for (uint64_t v = lo; v <= hi; ++v)
    if (!composite[v - lo]) out.push_back(v);
  return out;
}

}  // namespace tame
