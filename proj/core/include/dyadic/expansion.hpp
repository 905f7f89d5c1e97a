#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic/alpert.hpp"

namespace dyadic {

// Window precondition failure; carries the offending scale for reporting.
class WindowError : public std::invalid_argument {
 public:
  WindowError(const std::string& msg, std::int64_t scale)
      : std::invalid_argument(msg + " (scale " + std::to_string(scale) + ")"),
        scale_(scale) {}
  std::int64_t scale() const { return scale_; }

 private:
  std::int64_t scale_;
};

// Output of expand: per-top E-projections plus per-cube Alpert coefficient
// vectors over the scale window.
struct CoefficientTree {
  struct TopPart {
    TopSignature signature;
    SuperCube top;
    PiecewisePolyFn fn;
  };
  struct CubePart {
    DyadicCube cube;
    std::vector<double> coeffs;  // f_hat(Q)
  };

  std::vector<TopPart> top_parts;    // positive-mass tops, signature order
  std::vector<CubePart> cube_parts;  // coarse-to-fine, lex corners within a scale
  std::int64_t m_min = 0;
  std::int64_t m_max = 0;
};

struct ExpandOptions {
  std::int64_t m_min = 0;  // fine end: separates atoms / resolves cells
  std::int64_t m_max = 0;  // coarse end: one positive-mass cube per top
  int threads = 1;         // per-cube parallelism; results match the serial order
};

// All scale-m grid cubes carrying positive mu-mass, in deterministic cube
// order. Throws WindowError when a cell would enumerate absurdly many cubes.
std::vector<DyadicCube> positive_mass_cubes_at(const GridSpec& grid, const Measure& mu,
                                               std::int64_t m);

// Truncated expansion f = sum_tops E_top f + sum_{m_min < scale <= m_max} Delta_Q f.
// Throws WindowError when the window fails the completeness preconditions.
CoefficientTree expand(const PiecewisePolyFn& f, const GridSpec& grid, const Measure& mu,
                       const MomentSystem& sys, const ExpandOptions& opt);

// Deterministic re-summation of the tree (top parts first, then cubes in
// stored order); bases are rebuilt from (grid, mu, sys).
PiecewisePolyFn reconstruct(const CoefficientTree& tree, const GridSpec& grid,
                            const Measure& mu, const MomentSystem& sys);

// Max over probes and mu-nodes x in Q of
// |sum_{Q strict-subset I subset-eq P} (Delta_I f)(x) - ((E_Q f)(x) - (E_P f)(x))|.
double check_telescoping(const GridSpec& grid, const Measure& mu, const MomentSystem& sys,
                         const DyadicCube& P, const DyadicCube& Q,
                         const std::vector<PiecewisePolyFn>& probes);

// | ||f||^2 - (sum ||top parts||^2 + sum |f_hat(Q)|^2) | / ||f||^2 (0 when f = 0).
double parseval_gap(const PiecewisePolyFn& f, const CoefficientTree& tree, const Measure& mu);

}  // namespace dyadic
