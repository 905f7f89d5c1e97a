#pragma once

#include <vector>

#include "dyadic/measure.hpp"
#include "dyadic/moment_system.hpp"

namespace dyadic {

// One polynomial piece: coefficients over the system functions in the frame
// of `cell` (monomial systems use centered/rescaled coordinates of the cell;
// custom systems use the global callbacks).
struct PolyPiece {
  DyadicCube cell;
  std::vector<double> coeffs;
};

// Sum of polynomial pieces: value at x is the sum over all pieces whose cell
// contains x. Constructed functions (bases, projections) have pairwise
// disjoint cells, for which this is the usual piecewise reading; sums of such
// functions keep their pieces side by side instead of re-tiling.
class PiecewisePolyFn {
 public:
  PiecewisePolyFn() = default;  // the zero function

  PiecewisePolyFn(MomentSystem sys, int space_dim, std::vector<PolyPiece> pieces);

  static PiecewisePolyFn zero() { return {}; }
  static PiecewisePolyFn constant(const MomentSystem& sys, const DyadicCube& cell,
                                  double value);

  double operator()(const Point& x) const;

  bool is_zero() const { return pieces_.empty(); }
  int space_dim() const { return space_dim_; }
  const std::vector<PolyPiece>& pieces() const { return pieces_; }
  const MomentSystem& system() const;

  // Piece boundaries, for slicing quadrature slabs.
  AxisCuts cuts() const;

  void scale(double a);
  void add_scaled(double a, const PiecewisePolyFn& f);
  void add_piece(double a, const DyadicCube& cell, const std::vector<double>& coeffs);

 private:
  bool compatible_with(const MomentSystem& sys) const;

  MomentSystem sys_ = MomentSystem::monomials(1);
  bool has_system_ = false;
  int space_dim_ = 0;
  std::vector<PolyPiece> pieces_;
  // cached per-piece frames (center, side) as doubles
  std::vector<std::pair<Point, double>> frames_;
  std::vector<MultiIndex> exps_;  // monomial systems
};

PiecewisePolyFn linear_combination(double a, const PiecewisePolyFn& f, double b,
                                   const PiecewisePolyFn& g);

// <f, g>_mu over the support of mu; exact per atom, slab-sliced quadrature per
// density cell.
double inner_product(const PiecewisePolyFn& f, const PiecewisePolyFn& g, const Measure& mu);

double l2_norm_sq(const PiecewisePolyFn& f, const Measure& mu);

}  // namespace dyadic
