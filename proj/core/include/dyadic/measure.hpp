#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dyadic/grid.hpp"
#include "dyadic/multi_index.hpp"

namespace dyadic {

// Point mass at exact dyadic coordinates.
struct Atom {
  std::vector<DyadicRational> point;
  double mass = 0;

  Point point_double() const;
};

// Constant density on one dyadic cube.
struct Cell {
  DyadicCube cube;
  double density = 0;
};

// Positive measure with bounded support: finitely many atoms, or a constant
// density on each cube of a disjoint cube family. Geometry is exact; masses
// and densities are doubles. Immutable after construction.
class Measure {
 public:
  enum class Kind { Atomic, CellDensity };

  static Measure atomic(std::vector<Atom> atoms, DyadicCube support_box);
  static Measure cell_density(std::vector<Cell> cells, DyadicCube support_box);

  Kind kind() const { return kind_; }
  int dimension() const { return support_box_.dimension(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const DyadicCube& support_box() const { return support_box_; }
  double total_mass() const { return total_mass_; }

 private:
  Measure() = default;

  Kind kind_ = Kind::Atomic;
  std::vector<Atom> atoms_;
  std::vector<Cell> cells_;
  DyadicCube support_box_;
  double total_mass_ = 0;
};

// --- exact set functions ---------------------------------------------------

// |Q|_mu: atom masses summed with exact membership tests; cell intersections
// integrated in closed form.
double mass(const Measure& mu, const SuperCube& Q);
double mass(const Measure& mu, const DyadicCube& Q);

// int_Q ((x - center)/scale_len)^beta dmu. Atoms by direct evaluation, cells
// by per-axis antiderivatives of the shifted monomial.
double moment(const Measure& mu, const SuperCube& Q, const MultiIndex& beta,
              const Point& center, double scale_len);

struct MomentVector {
  std::vector<MultiIndex> index;  // graded lex, |beta| < kappa
  std::vector<double> values;     // values[i] = moment at index[i]
};

// All moments |beta| < kappa at once; values[0] (beta = 0) equals |Q|_mu.
MomentVector moments(const Measure& mu, const SuperCube& Q, int kappa,
                     const Point& center, double scale_len);

// --- quadrature nodes --------------------------------------------------------

// Per-axis breakpoints used to slice density cells before quadrature, so that
// integrands smooth on each slab are integrated at full accuracy.
using AxisCuts = std::vector<std::vector<DyadicRational>>;

AxisCuts merge_cuts(AxisCuts a, const AxisCuts& b);
void add_box_cuts(AxisCuts& cuts, const DyadicBox& box);

// Splits box along the given interior breakpoints into sub-boxes (exact).
std::vector<DyadicBox> slice_box(const DyadicBox& box, const AxisCuts& cuts);

struct WeightedNode {
  Point x;
  double w = 0;
};

// Node list realizing int_region g dmu = sum w_i g(x_i): one node per atom
// (exact), or tensor Gauss-Legendre nodes on each sliced cell piece (exact for
// moderate-degree polynomials per slab, near machine precision for analytic
// integrands). Deterministic for fixed inputs.
std::vector<WeightedNode> integration_nodes(const Measure& mu, const SuperCube& region,
                                            const AxisCuts& cuts = {});

template <class F>
double integrate(const Measure& mu, const SuperCube& region, F&& g,
                 const AxisCuts& cuts = {}) {
  double s = 0;
  for (const auto& node : integration_nodes(mu, region, cuts)) s += node.w * g(node.x);
  return s;
}

// --- doubling diagnostics ----------------------------------------------------

// |2Q|_mu / |Q|_mu with 2Q the concentric double; nullopt flags |Q|_mu = 0.
std::optional<double> doubling_ratio(const Measure& mu, const DyadicCube& Q);

struct ReverseDoublingReport {
  struct Row {
    std::size_t base_index = 0;  // into base_points
    std::int64_t scale = 0;
    double mass = 0;
    double normalizer = 0;  // 1/sqrt(|I|_mu), the E_I^mu-normalizer
  };
  std::vector<Point> base_points;
  std::vector<Row> rows;
  bool normalizers_nonincreasing = true;  // along each tower, coarse-ward
};

// Tracks 1/sqrt(|I_m|_mu) along towers over sampled support points for
// m in [m_lo, m_hi].
ReverseDoublingReport reverse_doubling_report(const Measure& mu, const GridSpec& grid,
                                              std::int64_t m_lo, std::int64_t m_hi);

}  // namespace dyadic
