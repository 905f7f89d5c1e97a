#include <algorithm>

#include <doctest.h>

#include "dyadic/grid.hpp"
#include "test_support.hpp"

using namespace dyadic;
using namespace dyadic::testing;

namespace {

// Tower-union oracle: the top over x must contain every tower cube of x, and
// for points y inside the same top the tower eventually swallows y. This
// checks "top == union of the tower" without using top_of_point's internals.
void check_tower_union(const GridSpec& grid, const Point& x) {
  const SuperCube top = top_of_point(grid, x);
  for (std::int64_t m = -8; m <= 50; ++m) {
    const DyadicCube q = cube_at(grid, x, m);
    CHECK(supercube_relation(SuperCube::from_cube(q), top) == SupercubeRelation::Subset);
  }
  // a far point of the top is reached at large scales
  for (double step : {-40.0, 17.0, 300.0}) {
    Point y = x;
    for (auto& c : y) c += step;
    if (!top.contains(y)) continue;
    const DyadicCube big = cube_at(grid, x, 55);
    CHECK(big.contains(y));
  }
}

}  // namespace

TEST_CASE("axis offsets, frozen") {
  // s0 = 1/4 with bits 1,0,1 then zeros
  const GridAxis axis(dr(1, -2), {1, 0, 1}, BitTail::zero());
  CHECK(axis_offset(axis, 0) == dr(1, -2));
  CHECK(axis_offset(axis, 1) == dr(5, -2));   // 1/4 + 1
  CHECK(axis_offset(axis, 2) == dr(5, -2));   // bit 0
  CHECK(axis_offset(axis, 3) == dr(21, -2));  // + 4
  CHECK(axis_offset(axis, 10) == dr(21, -2));
  CHECK(axis_offset(axis, -1) == dr(1, -2));  // 1/4 mod 1/2
  CHECK(axis_offset(axis, -2) == dr(0));      // 1/4 mod 1/4
  CHECK(axis_offset(axis, -5) == dr(0));
  CHECK(axis.top_boundary() == dr(21, -2));

  // all-one tail from the start: boundary -1, offsets 2^m - 1
  const GridAxis ones(dr(0), {}, BitTail::one());
  CHECK(ones.top_boundary() == dr(-1));
  CHECK(axis_offset(ones, 0) == dr(0));
  CHECK(axis_offset(ones, 1) == dr(1));
  CHECK(axis_offset(ones, 3) == dr(7));
  CHECK(axis_offset(ones, -2) == dr(0));
}

TEST_CASE("grid axis validation") {
  CHECK_THROWS_AS(GridAxis(dr(1), {}, BitTail::zero()), std::invalid_argument);   // offset >= 1
  CHECK_THROWS_AS(GridAxis(dr(-1, -1), {}, BitTail::zero()), std::invalid_argument);
  CHECK_THROWS_AS(GridAxis(dr(0), {2}, BitTail::zero()), std::invalid_argument);  // non-bit
}

TEST_CASE("bit tail normalization") {
  CHECK(BitTail::periodic({1, 1}) == BitTail::one());
  CHECK(BitTail::periodic({0, 0, 0}) == BitTail::zero());
  CHECK(BitTail::periodic({0, 1, 0, 1}) == BitTail::periodic({0, 1}));
  const BitTail t = BitTail::periodic({0, 1});
  CHECK(t.bit(0) == 0);
  CHECK(t.bit(1) == 1);
  CHECK(t.bit(6) == 0);
  CHECK_THROWS_AS(BitTail::periodic({}), std::invalid_argument);
}

TEST_CASE("cube_at, children, parent on the standard grid") {
  const GridSpec grid = GridSpec::standard(1);
  const DyadicCube q = cube_at(grid, Point{0.3}, -2);
  CHECK(q.scale == -2);
  CHECK(q.lower_corner[0] == dr(1, -2));

  const DyadicCube unit = cube_at(grid, Point{0.3}, 0);
  const auto kids = children(grid, unit);
  REQUIRE(kids.size() == 2);
  CHECK(kids[0].lower_corner[0] == dr(0));
  CHECK(kids[1].lower_corner[0] == dr(1, -1));
  CHECK(parent(grid, kids[0]) == unit);
  CHECK(parent(grid, kids[1]) == unit);

  CHECK(cube_in_grid(grid, unit));
  CHECK_FALSE(cube_in_grid(grid, cube1d(-1, dr(1, -2))));  // [1/4, 3/4) is no grid cube

  // negative coordinates floor correctly
  const DyadicCube neg = cube_at(grid, Point{-0.1}, -3);
  CHECK(neg.lower_corner[0] == dr(-1, -3));
}

TEST_CASE("cube_at on a shifted grid, frozen") {
  const GridSpec grid = shifted_grid_1d();
  // scale-1 tiling is 5/4 + 2Z, so 0 lies in [-3/4, 5/4)
  const DyadicCube q = cube_at(grid, Point{0.0}, 1);
  CHECK(q.lower_corner[0] == dr(-3, -2));
  // its parent at scale 2 starts at 5/4 - 4... tiling 5/4 + 4Z contains
  // [-11/4, 5/4) and indeed [-3/4, 5/4) sits inside it
  const DyadicCube p = parent(grid, q);
  CHECK(p.lower_corner[0] == dr(-11, -2));
  for (const auto& kid : children(grid, p)) CHECK(parent(grid, kid) == p);
}

TEST_CASE("children partition the parent in 2-D") {
  const GridSpec grid = GridSpec::standard(2);
  const DyadicCube q = cube_at(grid, Point{0.2, 0.7}, 0);
  const auto kids = children(grid, q);
  REQUIRE(kids.size() == 4);
  CHECK(std::is_sorted(kids.begin(), kids.end()));
  double vol = 0;
  for (const auto& kid : kids) {
    vol += box_volume(kid.box());
    CHECK(parent(grid, kid) == q);
  }
  CHECK(vol == doctest::Approx(1.0));
}

TEST_CASE("tops of the standard grids are quadrants and octants") {
  for (int n : {1, 2, 3}) {
    const auto ts = tops(GridSpec::standard(n));
    CHECK(static_cast<int>(ts.size()) == (1 << n));
    for (const auto& top : ts)
      for (const auto& f : top.factors) {
        const bool ray_at_zero =
            (f.kind == SuperCube::AxisFactor::Kind::LeftRay && f.hi == dr(0)) ||
            (f.kind == SuperCube::AxisFactor::Kind::RightRay && f.lo == dr(0));
        CHECK(ray_at_zero);
      }
  }
}

TEST_CASE("top count and signatures per tail kind") {
  // periodic tail gives the full line: a single top
  const auto p = tops_with_signatures(periodic_grid_1d());
  REQUIRE(p.size() == 1);
  CHECK(p[0].first.entries[0] == TopSignature::AxisSign::Both);
  CHECK(p[0].second.factors[0].kind == SuperCube::AxisFactor::Kind::FullLine);

  // all-one tail splits at -1
  const auto o = tops_with_signatures(allone_grid_1d());
  REQUIRE(o.size() == 2);
  CHECK(o[0].second.factors[0].hi == dr(-1));
  CHECK(o[1].second.factors[0].lo == dr(-1));

  // mixed 2-D: eventually-constant x, periodic y -> 2 tops, half-planes
  const GridSpec mixed({GridAxis(dr(0), {}, BitTail::zero()),
                        GridAxis(dr(0), {}, BitTail::periodic({1, 0}))});
  CHECK(tops(mixed).size() == 2);
}

TEST_CASE("tower union oracle over assorted grids") {
  for (const GridSpec& grid :
       {GridSpec::standard(1), shifted_grid_1d(), allone_grid_1d(), periodic_grid_1d()})
    for (double x : {0.1, -0.9, 5.3, -1.0, 100.25}) check_tower_union(grid, Point{x});

  check_tower_union(GridSpec::standard(2), Point{0.3, -0.7});
  const GridSpec mixed({GridAxis(dr(1, -1), {}, BitTail::zero()),
                        GridAxis(dr(0), {}, BitTail::periodic({1, 0}))});
  check_tower_union(mixed, Point{-2.4, 3.9});
}

TEST_CASE("top_of_point agrees with membership") {
  for (const GridSpec& grid : {GridSpec::standard(1), shifted_grid_1d(), allone_grid_1d()}) {
    const auto all = tops(grid);
    for (double x : {-3.7, -1.0, 0.0, 0.4, 21.0 / 4.0, 9.9}) {
      const SuperCube top = top_of_point(grid, Point{x});
      int hits = 0;
      for (const auto& t : all)
        if (t.contains(Point{x})) {
          ++hits;
          CHECK(t == top);
        }
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("grid cubes never straddle a top boundary") {
  for (const GridSpec& grid : {shifted_grid_1d(), allone_grid_1d()}) {
    const DyadicRational a = grid.axes[0].top_boundary();
    for (double x : {-7.3, -1.2, 0.0, 1.1, 5.24, 5.26, 63.8})
      for (std::int64_t m = -6; m <= 12; ++m) {
        const DyadicCube q = cube_at(grid, Point{x}, m);
        const DyadicRational lo = q.lower_corner[0];
        const DyadicRational hi = lo + q.side_length();
        CHECK((hi <= a || a <= lo));
      }
  }
}

TEST_CASE("is_translate_of_standard") {
  const auto std1 = is_translate_of_standard(GridSpec::standard(1));
  REQUIRE(std1.has_value());
  CHECK((*std1)[0] == dr(0));

  const auto shifted = is_translate_of_standard(shifted_grid_1d());
  REQUIRE(shifted.has_value());
  CHECK((*shifted)[0] == dr(21, -2));

  const auto ones = is_translate_of_standard(allone_grid_1d());
  REQUIRE(ones.has_value());
  CHECK((*ones)[0] == dr(-1));

  CHECK_FALSE(is_translate_of_standard(periodic_grid_1d()).has_value());

  // translate property holds cube-by-cube at many scales (exact)
  const GridSpec grid = allone_grid_1d();
  const GridSpec std_grid = GridSpec::standard(1);
  const DyadicRational a = dr(-1);
  for (double x : {-5.6, -1.0, 0.2, 7.9})
    for (std::int64_t m = -8; m <= 8; ++m) {
      const DyadicCube q = cube_at(grid, Point{x}, m);
      const DyadicCube s = cube_at(std_grid, Point{x - a.to_double()}, m);
      CHECK(q.lower_corner[0] == s.lower_corner[0] + a);
    }
}

TEST_CASE("supercube_relation") {
  const SuperCube unit = SuperCube::from_cube(cube1d(0, dr(0)));
  const SuperCube left = SuperCube::from_cube(cube1d(-1, dr(0)));
  const SuperCube far = SuperCube::from_cube(cube1d(0, dr(4)));
  CHECK(supercube_relation(left, unit) == SupercubeRelation::Subset);
  CHECK(supercube_relation(unit, left) == SupercubeRelation::Superset);
  CHECK(supercube_relation(unit, unit) == SupercubeRelation::Equal);
  CHECK(supercube_relation(unit, far) == SupercubeRelation::Disjoint);

  const SuperCube ray = SuperCube{{SuperCube::AxisFactor::right_ray(dr(0))}};
  CHECK(supercube_relation(unit, ray) == SupercubeRelation::Subset);
  CHECK(supercube_relation(ray, unit) == SupercubeRelation::Superset);
  const SuperCube other_ray = SuperCube{{SuperCube::AxisFactor::left_ray(dr(0))}};
  CHECK(supercube_relation(ray, other_ray) == SupercubeRelation::Disjoint);

  // cubes from different grids can properly overlap: that is an error
  const SuperCube offset = SuperCube::from_box({{dr(1, -1), dr(3, -1)}});  // [1/2, 3/2)
  CHECK_THROWS_AS(supercube_relation(unit, offset), std::invalid_argument);
}

TEST_CASE("verify_top_tiling is deterministic and clean") {
  DyadicCube box;
  box.scale = 4;
  box.lower_corner = {dr(-8), dr(-8)};
  const GridSpec grid = GridSpec::standard(2);
  const TilingReport r1 = verify_top_tiling(grid, box, 2000);
  const TilingReport r2 = verify_top_tiling(grid, box, 2000);
  CHECK(r1.ok());
  CHECK(r1.total_points == 2000);
  CHECK(r1.hits_per_top == r2.hits_per_top);
  std::int64_t total = 0;
  for (auto h : r1.hits_per_top) total += h;
  CHECK(total == 2000);
}
