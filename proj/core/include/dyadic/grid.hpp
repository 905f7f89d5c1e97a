// Generalized dyadic grids in R^n: cube navigation, towers, and the
// tiling of R^n by the grid's tops (infinite supercubes).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyadic/dyadic_rational.hpp"

namespace dyadic {

using Point = std::vector<double>;

// Scales are capped so that finite enumeration stays in machine range.
inline constexpr std::int64_t kMinScale = -62;
inline constexpr std::int64_t kMaxScale = 62;

// Half-open interval [lo, hi) with exact endpoints.
struct DyadicInterval {
  DyadicRational lo, hi;
  bool contains(const DyadicRational& x) const { return lo <= x && x < hi; }
  DyadicRational length() const { return hi - lo; }
  bool operator==(const DyadicInterval&) const = default;
};

// Axis-aligned half-open box, one interval per axis.
using DyadicBox = std::vector<DyadicInterval>;

bool box_contains(const DyadicBox& box, const Point& x);
double box_volume(const DyadicBox& box);
// Intersection, empty optional when the boxes are disjoint.
std::optional<DyadicBox> box_intersection(const DyadicBox& a, const DyadicBox& b);

// Finite encoding of the infinite sequence of nesting bits of one axis:
// all-zero, all-one, or a repeating pattern.
struct BitTail {
  enum class Kind { AllZero, AllOne, Periodic };
  Kind kind = Kind::AllZero;
  std::vector<std::uint8_t> pattern;  // nonempty, not all-equal, minimal period

  static BitTail zero() { return BitTail{Kind::AllZero, {}}; }
  static BitTail one() { return BitTail{Kind::AllOne, {}}; }
  // Normalizes: all-equal patterns collapse to AllZero/AllOne and the
  // pattern is reduced to its minimal period.
  static BitTail periodic(std::vector<std::uint8_t> pattern);

  int bit(std::int64_t index) const;  // index >= 0, from the start of the tail
  bool eventually_constant() const { return kind != Kind::Periodic; }
  bool operator==(const BitTail&) const = default;
};

// One axis of a dyadic grid: the scale-2^0 tiling offset s0 in [0,1),
// explicit nesting bits b_0..b_{M-1}, and the tail for bits b_m, m >= M.
// The scale-m tiling of the axis is s_m + 2^m Z, where
// s_{m+1} = s_m + b_m 2^m for m >= 0 and s_m = s_0 mod 2^m for m < 0.
struct GridAxis {
  DyadicRational base_offset;
  std::vector<std::uint8_t> prefix_bits;
  BitTail tail;

  GridAxis(DyadicRational offset, std::vector<std::uint8_t> prefix, BitTail t);
  static GridAxis standard() { return GridAxis(DyadicRational(), {}, BitTail::zero()); }

  int bit(std::int64_t m) const;  // b_m for m >= 0
  // When the bit sequence is eventually constant the scale-m tilings
  // stabilize around the 2-adic evaluation s0 + sum b_j 2^j; that value is
  // the boundary shared by the axis' two ray factors.
  DyadicRational top_boundary() const;  // pre: tail eventually constant
  bool operator==(const GridAxis&) const = default;
};

struct GridSpec {
  std::vector<GridAxis> axes;

  explicit GridSpec(std::vector<GridAxis> a);
  static GridSpec standard(int dimension);
  int dimension() const { return static_cast<int>(axes.size()); }
  bool operator==(const GridSpec&) const = default;
};

// Half-open cube of side 2^scale with exact lower corner.
struct DyadicCube {
  std::int64_t scale = 0;
  std::vector<DyadicRational> lower_corner;

  int dimension() const { return static_cast<int>(lower_corner.size()); }
  DyadicRational side_length() const { return DyadicRational::pow2(scale); }
  DyadicBox box() const;
  Point center() const;
  bool contains(const Point& x) const { return box_contains(box(), x); }

  bool operator==(const DyadicCube&) const = default;
  // Lexicographic (scale, corners); gives the deterministic cube order.
  std::strong_ordering operator<=>(const DyadicCube& o) const;
  std::string to_string() const;
};

// Which infinities a top touches on each axis.
struct TopSignature {
  enum class AxisSign { MinusInf, PlusInf, Both };
  std::vector<AxisSign> entries;
  bool operator==(const TopSignature&) const = default;
  std::string to_string() const;
};

// Product of per-axis factors; a finite cube of the grid or a top.
struct SuperCube {
  struct AxisFactor {
    enum class Kind { Finite, LeftRay, RightRay, FullLine };
    Kind kind = Kind::FullLine;
    DyadicRational lo, hi;  // Finite: [lo,hi); LeftRay: (-inf,hi); RightRay: [lo,inf)

    static AxisFactor finite(DyadicRational lo, DyadicRational hi);
    static AxisFactor left_ray(DyadicRational a) { return {Kind::LeftRay, {}, std::move(a)}; }
    static AxisFactor right_ray(DyadicRational a) { return {Kind::RightRay, std::move(a), {}}; }
    static AxisFactor full_line() { return {Kind::FullLine, {}, {}}; }

    bool contains(const DyadicRational& x) const;
    bool operator==(const AxisFactor&) const = default;
  };

  std::vector<AxisFactor> factors;

  static SuperCube from_cube(const DyadicCube& q);
  static SuperCube from_box(const DyadicBox& box);
  int dimension() const { return static_cast<int>(factors.size()); }
  bool is_finite() const;
  bool contains(const Point& x) const;
  bool contains(const std::vector<DyadicRational>& x) const;
  // Intersection with a finite box, empty optional when disjoint.
  std::optional<DyadicBox> clip(const DyadicBox& box) const;
  bool operator==(const SuperCube&) const = default;
  std::string to_string() const;
};

// --- Operations ---------------------------------------------------------

// Offset s_m of the scale-m tiling on one axis.
DyadicRational axis_offset(const GridAxis& axis, std::int64_t m);

// The unique scale-m cube containing x (half-open convention).
DyadicCube cube_at(const GridSpec& grid, const Point& x, std::int64_t m);
DyadicCube cube_at(const GridSpec& grid, const std::vector<DyadicRational>& x, std::int64_t m);

// The 2^n cubes of scale m-1 tiling q. pre: q belongs to grid.
std::vector<DyadicCube> children(const GridSpec& grid, const DyadicCube& q);

// The unique scale-(m+1) cube containing q. pre: q belongs to grid.
DyadicCube parent(const GridSpec& grid, const DyadicCube& q);

bool cube_in_grid(const GridSpec& grid, const DyadicCube& q);

// Lazy view of the tower over x: cube(m) has side 2^m and contains x.
class Tower {
 public:
  Tower(const GridSpec& grid, Point x) : grid_(&grid), x_(std::move(x)) {}
  DyadicCube cube(std::int64_t m) const { return cube_at(*grid_, x_, m); }

 private:
  const GridSpec* grid_;
  Point x_;
};
inline Tower tower(const GridSpec& grid, Point x) { return Tower(grid, std::move(x)); }

// The tops of the grid: 1 <= count <= 2^n pairwise disjoint infinite
// supercubes tiling R^n. An axis whose bit tail is eventually constant
// contributes the two rays split at its 2-adic boundary; a periodic tail
// contributes the full line.
std::vector<SuperCube> tops(const GridSpec& grid);
std::vector<std::pair<TopSignature, SuperCube>> tops_with_signatures(const GridSpec& grid);

// The unique top containing x; equals the union of tower(grid, x).
SuperCube top_of_point(const GridSpec& grid, const Point& x);

// The translation a with grid == standard + a, if the grid is such a
// translate (iff every axis has two ray tops; verified by offset
// congruences at all scales in [kMinScale, kMaxScale]).
std::optional<std::vector<DyadicRational>> is_translate_of_standard(const GridSpec& grid);

enum class SupercubeRelation { Disjoint, Subset, Superset, Equal };

// Containment relation of two supercubes from one supergrid.
// Throws std::invalid_argument on a proper overlap (inputs from
// different grids).
SupercubeRelation supercube_relation(const SuperCube& a, const SuperCube& b);

// Deterministic membership check of the top tiling on sampled points.
struct TilingReport {
  std::int64_t top_count = 0;
  std::int64_t total_points = 0;
  std::vector<std::int64_t> hits_per_top;
  struct Violation {
    Point point;
    std::vector<int> containing_tops;  // indices; empty means "in no top"
  };
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Samples `count` points of a fixed low-discrepancy sequence (additive
// recurrence with inverse powers of the generalized golden ratio, offset
// 1/2) inside sample_box and verifies each lies in exactly one top.
TilingReport verify_top_tiling(const GridSpec& grid, const DyadicCube& sample_box,
                               std::int64_t count);

}  // namespace dyadic
