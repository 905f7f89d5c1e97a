#pragma once

#include <functional>
#include <string>

#include "dyadic/expansion.hpp"

namespace dyadic {

// Kernel K(x, y); evaluation on the diagonal returns diagonal_rule (these
// harnesses check algebraic identities on disjoint atomic supports, they are
// not singular-integral quadrature).
struct KernelSpec {
  enum class Kind { Hilbert, RieszComponent, Custom };

  Kind kind = Kind::Hilbert;
  int component = 0;  // Riesz axis j (0-based)
  std::function<double(const Point&, const Point&)> callback;
  std::string id;  // label for custom kernels
  double diagonal_rule = 0;

  static KernelSpec hilbert();
  static KernelSpec riesz(int component);
  static KernelSpec custom(std::function<double(const Point&, const Point&)> k,
                           std::string id);

  double operator()(const Point& x, const Point& y) const;
};

// Split scale N (E-layer cubes of side 2^N) and fine cutoff m_min.
struct TruncationWindow {
  std::int64_t N = 0;
  std::int64_t m_min = 0;
};

// Order-1 discretization: each density cell becomes an atom of the cell's
// mass at the cell center. Atomic measures pass through unchanged.
Measure discretize_to_atoms(const Measure& mu);

// T(f sigma)(x) = sum_y K(x, y) f(y) sigma({y}); sigma must be atomic.
double apply_T(const PiecewisePolyFn& f, const Measure& sigma, const KernelSpec& kernel,
               const Point& x);

// <T(f sigma), g>_omega by direct double summation over atoms (density inputs
// are discretized first).
double form_direct(const PiecewisePolyFn& f, const PiecewisePolyFn& g, const Measure& sigma,
                   const Measure& omega, const KernelSpec& kernel);

// Field naming: first letter is the f-side layer, second the g-side layer
// (d = wavelet Delta-layer, e = scale-2^N E-layer, t = tops E-layer).
struct FourTermResult {
  double dd = 0, ee = 0, de = 0, ed = 0;
  double total = 0;
};

FourTermResult form_four_term(const GridSpec& grid, const MomentSystem& sys,
                              const PiecewisePolyFn& f, const PiecewisePolyFn& g,
                              const Measure& sigma, const Measure& omega,
                              const KernelSpec& kernel, const TruncationWindow& window);

struct TopsFormResult {
  double dd = 0, td = 0, dt = 0, tt = 0;
  double total = 0;
  int e_summands_f = 0;  // tops carrying sigma-mass; always <= 2^n
  int e_summands_g = 0;  // tops carrying omega-mass; always <= 2^n
};

TopsFormResult form_tops(const GridSpec& grid, const MomentSystem& sys,
                         const PiecewisePolyFn& f, const PiecewisePolyFn& g,
                         const Measure& sigma, const Measure& omega,
                         const KernelSpec& kernel, const TruncationWindow& window);

}  // namespace dyadic
