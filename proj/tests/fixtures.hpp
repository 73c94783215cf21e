#pragma once

// Shared presentation fixtures for the test suites.

#include "tametower/pc.hpp"

namespace fixtures {

// modular-16 on the generating pair (ab, a): same group, different shape
inline tame::PcGroup modular16_rebased() {
  tame::PcGroup G(2, 4);
  G.set_pow(0, {0, 0, 1, 1});
  G.set_pow(1, {0, 0, 1, 0});
  G.set_pow(2, {0, 0, 0, 1});
  G.set_comm(1, 0, {0, 0, 0, 1});
  G.defs[2] = tame::GenDef{tame::GenDef::Pow, 1, 0};
  G.defs[3] = tame::GenDef{tame::GenDef::Pow, 2, 0};
  G.weights = {1, 1, 2, 3};
  return G;
}

// free class-2 group of rank 2 at p = 3: gens x, y, [y,x], x^3, y^3
inline tame::PcGroup free32_class2() {
  tame::PcGroup G(3, 5);
  G.set_comm(1, 0, {0, 0, 1, 0, 0});
  G.set_pow(0, {0, 0, 0, 1, 0});
  G.set_pow(1, {0, 0, 0, 0, 1});
  G.defs[2] = tame::GenDef{tame::GenDef::Comm, 1, 0};
  G.defs[3] = tame::GenDef{tame::GenDef::Pow, 0, 0};
  G.defs[4] = tame::GenDef{tame::GenDef::Pow, 1, 0};
  G.weights = {1, 1, 2, 2, 2};
  return G;
}

}  // namespace fixtures
