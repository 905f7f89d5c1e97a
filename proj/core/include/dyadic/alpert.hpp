#pragma once

#include <utility>
#include <vector>

#include "dyadic/piecewise_poly.hpp"

namespace dyadic {

// Rank cut for Gram/moment spectra: relative to the largest eigenvalue, with
// an absolute floor for fully degenerate fixtures.
inline constexpr double kRankTolRelative = 1e-9;
inline constexpr double kRankTolAbsolute = 1e-13;

// Orthonormal basis of L^2_{Q;kappa}(mu): child-wise system-span functions on Q
// with vanishing mu-moments against every system function on Q.
struct AlpertBasis {
  DyadicCube cube;
  std::vector<PiecewisePolyFn> functions;

  int dim() const { return static_cast<int>(functions.size()); }
};

// Constructs the basis: raw generators 1_{child} phi_i over positive-mass
// children, null space of the moment-constraint matrix, Gram eigenvalue
// orthonormalization, then a canonical Gram-Schmidt pass over the child-moment
// functionals u -> int_{child} u phi_i dmu (child-major order) so the output
// is a function of the subspace alone, not of the generator frame.
AlpertBasis build_alpert_basis(const GridSpec& grid, const DyadicCube& Q, const Measure& mu,
                               const MomentSystem& sys);

// f_hat(Q)_a = <f, h_a>_mu and the projection Delta_Q f = sum_a f_hat_a h_a.
std::pair<std::vector<double>, PiecewisePolyFn> project_delta(const PiecewisePolyFn& f,
                                                              const AlpertBasis& basis,
                                                              const Measure& mu);

// Orthogonal projection onto the rank-revealed span of {1_region phi_i}.
PiecewisePolyFn project_E(const PiecewisePolyFn& f, const DyadicCube& region,
                          const Measure& mu, const MomentSystem& sys);

// Top version: projects onto Span{1_top phi_i}; the result is carried on the
// smallest grid cube inside the top that covers the top's share of the
// support box.
PiecewisePolyFn project_E_top(const PiecewisePolyFn& f, const SuperCube& top,
                              const GridSpec& grid, const Measure& mu,
                              const MomentSystem& sys);

// dim Span{1_region phi_i} in L^2(mu): the Gram rank at the region under the
// standard cuts. Frame choice cannot change it.
int e_span_dimension(const SuperCube& region, const Measure& mu, const MomentSystem& sys);

// max_{a,i} |int h_a phi_i dmu| over the basis cube.
double check_moment_vanishing(const AlpertBasis& basis, const Measure& mu,
                              const MomentSystem& sys);

struct EBoundReport {
  double r1 = 0;        // sup_I |E_I f| / E_I|f|  (recorded, not asserted)
  double r2 = 0;        // E_I|f| / sqrt(E_I |f|^2) <= 1 by Cauchy-Schwarz
  double sup_E = 0;     // sup over mu-nodes in I of |E_I f|
  double mean_abs = 0;  // E_I^mu |f|
  double mean_sq = 0;   // E_I^mu |f|^2
  double cube_mass = 0;
};

// Throws std::domain_error when |I|_mu = 0 or f vanishes mu-a.e. on I.
EBoundReport e_bound_report(const PiecewisePolyFn& f, const DyadicCube& I, const Measure& mu,
                            const MomentSystem& sys);

// With bounded support every monomial is square-integrable on the top, so this
// is all |beta| < kappa, or empty when the top carries no mass. Kept as the
// seam where an unbounded-support generalization would filter.
std::vector<MultiIndex> admissible_top_exponents(const Measure& mu, const SuperCube& top,
                                                 int kappa);

struct FiniteTypeEstimate {
  double infimum = 0;
  DyadicCube argmin_cube;
  Point argmin_point;
};

// Desk-scale lower-bound probe of sum_{|alpha|<kappa} |d^alpha phi(a)| l(Q)^|alpha|
// over the given cubes and a fixed 3^n-point lattice in each; derivatives from
// the callback when present, else central differences with step 2^-20 l(Q).
FiniteTypeEstimate finite_type_estimate(const SystemFn& phi, int kappa,
                                        const std::vector<DyadicCube>& cubes);

}  // namespace dyadic
