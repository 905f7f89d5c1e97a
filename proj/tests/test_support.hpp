// Shared fixture builders for the test suites.
#pragma once

#include <string>
#include <vector>

#include "dyadic/measure.hpp"

namespace dyadic::testing {

inline DyadicRational dr(long long mantissa, std::int64_t exponent = 0) {
  return DyadicRational(BigInt(mantissa), exponent);
}

inline DyadicCube cube1d(std::int64_t scale, const DyadicRational& corner) {
  DyadicCube q;
  q.scale = scale;
  q.lower_corner = {corner};
  return q;
}

inline DyadicCube cube2d(std::int64_t scale, const DyadicRational& cx, const DyadicRational& cy) {
  DyadicCube q;
  q.scale = scale;
  q.lower_corner = {cx, cy};
  return q;
}

// --- grids -----------------------------------------------------------------

inline GridSpec shifted_grid_1d() {
  // s0 = 1/4, bits 1,0,1 then all-zero: two ray tops split at 21/4
  return GridSpec({GridAxis(dr(1, -2), {1, 0, 1}, BitTail::zero())});
}

inline GridSpec allone_grid_1d() {
  // all-one tail: boundary at -1
  return GridSpec({GridAxis(DyadicRational(), {}, BitTail::one())});
}

inline GridSpec periodic_grid_1d() {
  return GridSpec({GridAxis(DyadicRational(), {}, BitTail::periodic({0, 1}))});
}

// --- measures ---------------------------------------------------------------

inline Measure lebesgue_1d() {
  return Measure::cell_density({{cube1d(0, dr(0)), 1.0}}, cube1d(0, dr(0)));
}

inline Measure two_atoms_1d() {
  return Measure::atomic({{{dr(1, -2)}, 1.0}, {{dr(3, -2)}, 0.5}}, cube1d(0, dr(0)));
}

inline Measure seven_atoms_1d() {
  std::vector<Atom> atoms;
  const double masses[7] = {1.0, 0.5, 2.0, 0.25, 1.5, 0.75, 3.0};
  for (int i = 0; i < 7; ++i)
    atoms.push_back({{dr(2 * i + 1, -4)}, masses[i]});  // odd multiples of 1/16
  return Measure::atomic(std::move(atoms), cube1d(0, dr(0)));
}

inline Measure mixed_cells_1d() {
  // densities on cells of assorted scales, together tiling [0, 1)
  return Measure::cell_density(
      {
          {cube1d(-1, dr(0)), 1.0},       // [0, 1/2)
          {cube1d(-2, dr(1, -1)), 3.0},   // [1/2, 3/4)
          {cube1d(-2, dr(3, -2)), 0.5},   // [3/4, 1)
      },
      cube1d(0, dr(0)));
}

inline Measure lebesgue_2d() {
  return Measure::cell_density({{cube2d(0, dr(0), dr(0)), 1.0}}, cube2d(0, dr(0), dr(0)));
}

inline Measure four_atoms_2d() {
  return Measure::atomic(
      {
          {{dr(1, -2), dr(1, -2)}, 1.0},
          {{dr(3, -2), dr(1, -2)}, 0.5},
          {{dr(1, -2), dr(3, -2)}, 2.0},
          {{dr(5, -3), dr(5, -3)}, 0.25},
      },
      cube2d(0, dr(0), dr(0)));
}

}  // namespace dyadic::testing
