#include <cmath>

#include <doctest.h>

#include "dyadic/measure.hpp"
#include "test_support.hpp"

using namespace dyadic;
using namespace dyadic::testing;

namespace {

double binom(int n, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

TEST_CASE("atomic mass respects the half-open convention exactly") {
  const Measure mu = two_atoms_1d();  // masses 1 at 1/4, 1/2 at 3/4
  CHECK(mu.total_mass() == 1.5);
  CHECK(mass(mu, cube1d(-2, dr(1, -2))) == 1.0);   // [1/4, 1/2) grabs its corner
  CHECK(mass(mu, cube1d(-2, dr(0))) == 0.0);       // [0, 1/4) does not reach 1/4
  CHECK(mass(mu, cube1d(-1, dr(1, -1))) == 0.5);   // [1/2, 1)
  CHECK(mass(mu, cube1d(0, dr(0))) == 1.5);

  const SuperCube right = SuperCube{{SuperCube::AxisFactor::right_ray(dr(1, -2))}};
  CHECK(mass(mu, right) == 1.5);  // closed at the left endpoint
  const SuperCube left = SuperCube{{SuperCube::AxisFactor::left_ray(dr(1, -2))}};
  CHECK(mass(mu, left) == 0.0);
}

TEST_CASE("cell mass in closed form") {
  const Measure mu = mixed_cells_1d();  // 1 on [0,1/2), 3 on [1/2,3/4), 1/2 on [3/4,1)
  CHECK(mu.total_mass() == doctest::Approx(1.375).epsilon(1e-15));
  CHECK(mass(mu, cube1d(0, dr(0))) == doctest::Approx(1.375).epsilon(1e-15));
  // partial overlap: [1/4, 3/4) -> 1*(1/4) + 3*(1/4)
  CHECK(mass(mu, cube1d(-1, dr(1, -2))) == doctest::Approx(1.0).epsilon(1e-15));
  // fine cube inside one cell
  CHECK(mass(mu, cube1d(-4, dr(9, -4))) == doctest::Approx(3.0 / 16.0).epsilon(1e-15));
  // outside the support
  CHECK(mass(mu, cube1d(0, dr(4))) == 0.0);
}

TEST_CASE("measure additivity over children") {
  const GridSpec grid = GridSpec::standard(1);
  for (const Measure& mu : {mixed_cells_1d(), two_atoms_1d(), seven_atoms_1d()}) {
    for (const DyadicCube& q :
         {cube1d(0, dr(0)), cube1d(-1, dr(0)), cube1d(-2, dr(1, -1)), cube1d(1, dr(0))}) {
      double kid_sum = 0;
      for (const auto& kid : children(grid, q)) kid_sum += mass(mu, kid);
      CHECK(std::abs(mass(mu, q) - kid_sum) <= 1e-12);
    }
  }
}

TEST_CASE("moment oracles, frozen") {
  const SuperCube unit = SuperCube::from_cube(cube1d(0, dr(0)));

  const Measure leb = lebesgue_1d();
  CHECK(moment(leb, unit, {1}, {0.5}, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(moment(leb, unit, {2}, {0.5}, 1.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(moment(leb, unit, {2}, {0.5}, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(moment(leb, unit, {3}, {0.0}, 1.0) == doctest::Approx(0.25).epsilon(1e-14));

  const Measure atoms = two_atoms_1d();  // sum m_i (p_i - c)^k, exact arithmetic on doubles
  CHECK(moment(atoms, unit, {1}, {0.0}, 1.0) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(moment(atoms, unit, {2}, {0.0}, 1.0) == doctest::Approx(0.34375).epsilon(1e-15));

  // 2-D Lebesgue: int x*y over the unit square, centered at the origin frame
  const Measure leb2 = lebesgue_2d();
  const SuperCube sq = SuperCube::from_cube(cube2d(0, dr(0), dr(0)));
  CHECK(moment(leb2, sq, {1, 1}, {0.0, 0.0}, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("moments() agrees with moment() and leads with the mass") {
  const Measure mu = four_atoms_2d();
  const SuperCube sq = SuperCube::from_cube(cube2d(0, dr(0), dr(0)));
  const Point center{0.3, 0.6};
  const MomentVector mv = moments(mu, sq, 3, center, 0.5);
  CHECK(mv.index.size() == 6);  // 1-D count per axis summed over degrees < 3
  CHECK(mv.index[0] == MultiIndex({0, 0}));
  CHECK(mv.values[0] == mass(mu, sq));
  for (std::size_t i = 0; i < mv.index.size(); ++i) {
    CHECK(total_degree(mv.index[i]) < 3);
    CHECK(mv.values[i] == doctest::Approx(moment(mu, sq, mv.index[i], center, 0.5))
                              .epsilon(1e-15));
    if (i > 0) CHECK(total_degree(mv.index[i - 1]) <= total_degree(mv.index[i]));
  }
}

TEST_CASE("moments transform under recentring by the binomial rule") {
  // int (x-c)^k dmu = sum_j C(k,j) (c'-c)^{k-j} int (x-c')^j dmu
  const SuperCube unit = SuperCube::from_cube(cube1d(0, dr(0)));
  for (const Measure& mu : {two_atoms_1d(), mixed_cells_1d(), seven_atoms_1d()}) {
    const double c = 0.3, cp = 0.55;
    for (int k = 0; k < 4; ++k) {
      const double lhs = moment(mu, unit, {k}, {c}, 1.0);
      double rhs = 0;
      for (int j = 0; j <= k; ++j)
        rhs += binom(k, j) * std::pow(cp - c, k - j) * moment(mu, unit, {j}, {cp}, 1.0);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("integration nodes: atoms are exact point masses") {
  const Measure mu = seven_atoms_1d();
  const SuperCube half = SuperCube::from_cube(cube1d(-1, dr(0)));  // [0, 1/2)
  const auto nodes = integration_nodes(mu, half);
  CHECK(nodes.size() == 4);  // atoms at 1/16, 3/16, 5/16, 7/16
  double total = 0;
  for (const auto& nd : nodes) total += nd.w;
  CHECK(total == mass(mu, half));
}

TEST_CASE("integration nodes: Gauss-Legendre on density cells") {
  const Measure leb = lebesgue_1d();
  const SuperCube unit = SuperCube::from_cube(cube1d(0, dr(0)));

  CHECK(integrate(leb, unit, [](const Point&) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate(leb, unit, [](const Point& x) { return std::pow(x[0], 4); }) ==
        doctest::Approx(0.2).epsilon(1e-14));
  CHECK(integrate(leb, unit, [](const Point& x) { return std::exp(x[0]); }) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));

  // clipping to a subregion
  const SuperCube half = SuperCube::from_cube(cube1d(-1, dr(0)));
  CHECK(integrate(leb, half, [](const Point&) { return 1.0; }) ==
        doctest::Approx(0.5).epsilon(1e-15));

  // mixed-scale cells: int x dmu = 1*1/8 + 3*(5/32)... do it per cell
  const Measure mu = mixed_cells_1d();
  const double expected = 1.0 * (0.125) + 3.0 * (0.75 * 0.75 - 0.5 * 0.5) / 2 +
                          0.5 * (1.0 - 0.75 * 0.75) / 2;
  CHECK(integrate(mu, unit, [](const Point& x) { return x[0]; }) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("axis cuts restore accuracy across kinks") {
  const Measure leb = lebesgue_1d();
  const SuperCube unit = SuperCube::from_cube(cube1d(0, dr(0)));
  const auto kink = [](const Point& x) { return std::abs(x[0] - 0.375); };
  const double truth = 17.0 / 64.0;

  AxisCuts cuts{{dr(3, -3)}};
  CHECK(integrate(leb, unit, kink, cuts) == doctest::Approx(truth).epsilon(1e-15));
  // without the cut the kink spoils the quadrature visibly
  CHECK(std::abs(integrate(leb, unit, kink) - truth) > 1e-9);
}

TEST_CASE("slice_box and merge_cuts") {
  const DyadicBox box{{dr(0), dr(1)}};
  AxisCuts cuts{{dr(1, -2), dr(3, -2)}};
  const auto parts = slice_box(box, cuts);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0][0].hi == dr(1, -2));
  CHECK(parts[2][0].lo == dr(3, -2));

  const AxisCuts merged = merge_cuts(AxisCuts{{dr(1, -1)}}, AxisCuts{{dr(1, -2), dr(1, -1)}});
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].size() == 3);                 // concatenation; slicing dedupes
  CHECK(slice_box(box, merged).size() == 3);    // two distinct breakpoints

  // cuts outside the box are ignored by slicing
  const auto same = slice_box(box, AxisCuts{{dr(5)}});
  CHECK(same.size() == 1);
}

TEST_CASE("doubling ratio, frozen") {
  const Measure leb = lebesgue_1d();
  // 2Q of [0,1/4) is [-1/8, 3/8); only [0, 3/8) carries mass
  const auto r = doubling_ratio(leb, cube1d(-2, dr(0)));
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(1.5).epsilon(1e-15));

  // zero-mass base cube flags nullopt
  CHECK_FALSE(doubling_ratio(leb, cube1d(-2, dr(8))).has_value());

  // an interior cube of full Lebesgue doubles cleanly to 2
  const auto r2 = doubling_ratio(leb, cube1d(-3, dr(3, -3)));
  REQUIRE(r2.has_value());
  CHECK(*r2 == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("reverse doubling report tracks towers coherently") {
  const GridSpec grid = GridSpec::standard(1);
  for (const Measure& mu : {two_atoms_1d(), mixed_cells_1d()}) {
    const ReverseDoublingReport rep = reverse_doubling_report(mu, grid, -6, 4);
    CHECK_FALSE(rep.base_points.empty());
    CHECK_FALSE(rep.rows.empty());
    CHECK(rep.normalizers_nonincreasing);
    for (const auto& row : rep.rows) {
      REQUIRE(row.base_index < rep.base_points.size());
      const DyadicCube q = cube_at(grid, rep.base_points[row.base_index], row.scale);
      CHECK(row.mass == doctest::Approx(mass(mu, q)).epsilon(1e-12));
      if (row.mass > 0)
        CHECK(row.normalizer == doctest::Approx(1.0 / std::sqrt(row.mass)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(reverse_doubling_report(two_atoms_1d(), grid, 3, -3), std::invalid_argument);
}

TEST_CASE("measure construction validates its input") {
  const DyadicCube unit = cube1d(0, dr(0));
  CHECK_THROWS_AS(Measure::atomic({}, unit), std::invalid_argument);
  CHECK_THROWS_AS(Measure::atomic({{{dr(1, -2)}, -1.0}}, unit), std::invalid_argument);
  CHECK_THROWS_AS(Measure::atomic({{{dr(5)}, 1.0}}, unit), std::invalid_argument);  // outside
  CHECK_THROWS_AS(Measure::atomic({{{dr(1, -2)}, 1.0}, {{dr(1, -2)}, 2.0}}, unit),
                  std::invalid_argument);  // duplicate location
  CHECK_THROWS_AS(Measure::cell_density({}, unit), std::invalid_argument);
  CHECK_THROWS_AS(Measure::cell_density({{cube1d(-1, dr(0)), 1.0}, {cube1d(-2, dr(0)), 1.0}}, unit),
                  std::invalid_argument);  // overlap
  CHECK_THROWS_AS(Measure::cell_density({{cube1d(-1, dr(0)), 0.0}}, unit),
                  std::invalid_argument);  // zero total mass
}
