#include <cmath>
#include <vector>

#include <doctest.h>

#include "dyadic/bilinear.hpp"
#include "test_support.hpp"

using namespace dyadic;
using namespace dyadic::testing;

namespace {

// Brute-force reference: sum_x sum_y g(x) omega(x) K(x,y) f(y) sigma(y) with
// the double sum written out over the atom lists and nothing shared with the
// library path beyond kernel evaluation.
double oracle_form(const PiecewisePolyFn& f, const PiecewisePolyFn& g, const Measure& sigma,
                   const Measure& omega, const KernelSpec& kernel) {
  double total = 0;
  for (const Atom& ax : omega.atoms()) {
    const Point x = ax.point_double();
    for (const Atom& ay : sigma.atoms()) {
      const Point y = ay.point_double();
      total += g(x) * ax.mass * kernel(x, y) * f(y) * ay.mass;
    }
  }
  return total;
}

PiecewisePolyFn const_one(const DyadicCube& cell) {
  return PiecewisePolyFn::constant(MomentSystem::monomials(1), cell, 1.0);
}

}  // namespace

TEST_CASE("worked two-atom form, frozen") {
  // sigma = {1/4: 1, 3/4: 1/2}, omega = {3/4: 1}, f = g = 1, Hilbert kernel.
  // The only off-diagonal pair is (x, y) = (3/4, 1/4): K = 1/(1/2) = 2.
  const GridSpec grid = GridSpec::standard(1);
  const MomentSystem sys = MomentSystem::monomials(1);
  const Measure sigma = two_atoms_1d();
  const Measure omega = Measure::atomic({{{dr(3, -2)}, 1.0}}, cube1d(0, dr(0)));
  const PiecewisePolyFn one = const_one(cube1d(0, dr(0)));
  const KernelSpec K = KernelSpec::hilbert();

  const double direct = form_direct(one, one, sigma, omega, K);
  CHECK(direct == doctest::Approx(2.0).epsilon(1e-14));

  const TruncationWindow window{0, -5};
  const FourTermResult four = form_four_term(grid, sys, one, one, sigma, omega, K, window);
  CHECK(four.ee == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(four.dd) + std::abs(four.de) + std::abs(four.ed) <= 1e-12);
  CHECK(four.total == doctest::Approx(direct).epsilon(1e-12));

  const TopsFormResult tops_r = form_tops(grid, sys, one, one, sigma, omega, K, window);
  CHECK(tops_r.tt == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tops_r.total == doctest::Approx(direct).epsilon(1e-12));
  CHECK(tops_r.e_summands_f == 1);
  CHECK(tops_r.e_summands_g == 1);
}

TEST_CASE("form_direct equals the brute-force reference") {
  const Measure sigma = seven_atoms_1d();
  const Measure omega = Measure::atomic(
      {{{dr(1, -3)}, 0.7}, {{dr(5, -3)}, 1.2}, {{dr(7, -3)}, 0.1}}, cube1d(0, dr(0)));
  const MomentSystem sys = MomentSystem::monomials(2);
  PiecewisePolyFn f(sys, 1, {{cube1d(-1, dr(0)), {1.0, -0.4}}, {cube1d(-1, dr(1, -1)), {0.3, 0.8}}});
  PiecewisePolyFn g(sys, 1, {{cube1d(0, dr(0)), {0.6, 1.1}}});

  for (const KernelSpec& K :
       {KernelSpec::hilbert(),
        KernelSpec::custom([](const Point& x, const Point& y) {
          return std::exp(-(x[0] - y[0]) * (x[0] - y[0]));
        }, "gauss")}) {
    const double direct = form_direct(f, g, sigma, omega, K);
    const double expect = oracle_form(f, g, sigma, omega, K);
    CHECK(direct == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("Hilbert form is antisymmetric under swapping the roles") {
  const Measure sigma = two_atoms_1d();
  const Measure omega = Measure::atomic(
      {{{dr(1, -3)}, 0.9}, {{dr(7, -3)}, 0.4}}, cube1d(0, dr(0)));
  const MomentSystem sys = MomentSystem::monomials(2);
  PiecewisePolyFn f(sys, 1, {{cube1d(0, dr(0)), {0.5, 0.25}}});
  PiecewisePolyFn g(sys, 1, {{cube1d(0, dr(0)), {-0.3, 1.0}}});
  const KernelSpec K = KernelSpec::hilbert();

  const double fwd = form_direct(f, g, sigma, omega, K);
  const double swapped = form_direct(g, f, omega, sigma, K);
  CHECK(swapped == doctest::Approx(-fwd).epsilon(1e-12));
}

TEST_CASE("four-term and tops splits reproduce the direct form") {
  const GridSpec grid = GridSpec::standard(1);
  const Measure omega = Measure::atomic(
      {{{dr(3, -4)}, 0.8}, {{dr(9, -4)}, 1.5}, {{dr(13, -4)}, 0.2}}, cube1d(0, dr(0)));
  const KernelSpec gauss = KernelSpec::custom(
      [](const Point& x, const Point& y) {
        return std::exp(-(x[0] - y[0]) * (x[0] - y[0]));
      }, "gauss");

  for (const Measure& sigma : {two_atoms_1d(), seven_atoms_1d()})
    for (int kappa : {1, 2})
      for (const KernelSpec& K : {KernelSpec::hilbert(), gauss}) {
        const MomentSystem sys = MomentSystem::monomials(kappa);
        PiecewisePolyFn f(sys, 1, std::vector<PolyPiece>{
            {cube1d(-1, dr(0)), std::vector<double>(sys.dimension(1), 0.7)},
            {cube1d(-2, dr(3, -2)), std::vector<double>(sys.dimension(1), -0.9)}});
        PiecewisePolyFn g(sys, 1, std::vector<PolyPiece>{
            {cube1d(0, dr(0)), std::vector<double>(sys.dimension(1), 1.3)}});
        const double direct = form_direct(f, g, sigma, omega, K);
        const double denom = std::max(std::abs(direct), 1.0);

        const TruncationWindow window{0, -6};
        const FourTermResult four = form_four_term(grid, sys, f, g, sigma, omega, K, window);
        CHECK(std::abs(four.total - direct) / denom <= 1e-8);
        const TopsFormResult trr = form_tops(grid, sys, f, g, sigma, omega, K, window);
        CHECK(std::abs(trr.total - direct) / denom <= 1e-8);
        CHECK(trr.e_summands_f <= 2);
        CHECK(trr.e_summands_g <= 2);
      }
}

TEST_CASE("the four-term total does not drift with the split scale") {
  const GridSpec grid = GridSpec::standard(1);
  const MomentSystem sys = MomentSystem::monomials(2);
  const Measure sigma = seven_atoms_1d();
  const Measure omega = Measure::atomic(
      {{{dr(3, -4)}, 0.8}, {{dr(9, -4)}, 1.5}}, cube1d(0, dr(0)));
  PiecewisePolyFn f(sys, 1, {{cube1d(-1, dr(0)), {1.0, 0.2}}, {cube1d(-1, dr(1, -1)), {-0.5, 0.6}}});
  PiecewisePolyFn g(sys, 1, {{cube1d(0, dr(0)), {0.9, -1.4}}});
  const KernelSpec K = KernelSpec::hilbert();

  std::vector<double> totals;
  for (std::int64_t N : {0, 1, 2, 3})
    totals.push_back(form_four_term(grid, sys, f, g, sigma, omega, K, {N, -6}).total);
  for (std::size_t i = 1; i < totals.size(); ++i)
    CHECK(std::abs(totals[i] - totals[0]) <= 1e-10 * std::max(1.0, std::abs(totals[0])));
}

TEST_CASE("tops split counts one E-summand per mass-carrying top") {
  // atoms on both sides of the shifted grid's boundary 21/4
  const GridSpec grid = shifted_grid_1d();
  const MomentSystem sys = MomentSystem::monomials(1);
  const DyadicCube box = cube1d(3, dr(0));  // [0, 8) brackets the boundary 21/4
  const Measure sigma = Measure::atomic({{{dr(1)}, 1.0}, {{dr(6)}, 0.5}}, box);
  const Measure omega = Measure::atomic({{{dr(2)}, 1.0}}, box);
  const PiecewisePolyFn one = const_one(box);
  const KernelSpec K = KernelSpec::hilbert();

  const double direct = form_direct(one, one, sigma, omega, K);
  const TopsFormResult r = form_tops(grid, sys, one, one, sigma, omega, K, {3, -4});
  CHECK(r.e_summands_f == 2);  // sigma straddles the boundary
  CHECK(r.e_summands_g == 1);
  CHECK(std::abs(r.total - direct) <= 1e-8 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("diagonal rule is honored") {
  KernelSpec K = KernelSpec::custom(
      [](const Point& x, const Point& y) { return 1.0 / (x[0] - y[0]); }, "inv");
  K.diagonal_rule = 5.0;
  CHECK(K(Point{0.5}, Point{0.5}) == 5.0);

  const Measure shared = Measure::atomic({{{dr(1, -1)}, 1.0}}, cube1d(0, dr(0)));
  const PiecewisePolyFn one = const_one(cube1d(0, dr(0)));
  CHECK(form_direct(one, one, shared, shared, K) == doctest::Approx(5.0).epsilon(1e-14));

  // the built-in kernels null the diagonal, keeping antisymmetry intact
  CHECK(KernelSpec::hilbert()(Point{0.25}, Point{0.25}) == 0.0);
}

TEST_CASE("Riesz component kernels in 2-D") {
  const GridSpec grid = GridSpec::standard(2);
  const MomentSystem sys = MomentSystem::monomials(1);
  const Measure sigma = four_atoms_2d();
  const Measure omega = Measure::atomic(
      {{{dr(1, -3), dr(7, -3)}, 1.0}, {{dr(7, -3), dr(1, -3)}, 0.6}},
      cube2d(0, dr(0), dr(0)));
  const PiecewisePolyFn one = const_one(cube2d(0, dr(0), dr(0)));

  for (int j : {0, 1}) {
    const KernelSpec K = KernelSpec::riesz(j);
    const double direct = form_direct(one, one, sigma, omega, K);
    CHECK(direct == doctest::Approx(oracle_form(one, one, sigma, omega, K))
                        .epsilon(1e-12));
    const TopsFormResult r = form_tops(grid, sys, one, one, sigma, omega, K, {0, -5});
    CHECK(std::abs(r.total - direct) <= 1e-8 * std::max(1.0, std::abs(direct)));
    CHECK(r.e_summands_f <= 4);
    CHECK(r.e_summands_g <= 4);
  }
  CHECK_THROWS_AS(KernelSpec::riesz(-1), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::riesz(2)(Point{0.0, 0.0}, Point{1.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("density inputs are discretized like their atomic counterparts") {
  const Measure density = mixed_cells_1d();
  const Measure atoms = discretize_to_atoms(density);
  REQUIRE(atoms.kind() == Measure::Kind::Atomic);
  CHECK(atoms.atoms().size() == 3);
  CHECK(atoms.total_mass() == doctest::Approx(density.total_mass()).epsilon(1e-15));
  // cell centers carry the cell masses
  CHECK(atoms.atoms()[0].point[0] == dr(1, -2));

  const Measure omega = Measure::atomic({{{dr(1, -5)}, 1.0}}, cube1d(0, dr(0)));
  const MomentSystem sys = MomentSystem::monomials(1);
  const PiecewisePolyFn one = const_one(cube1d(0, dr(0)));
  const KernelSpec K = KernelSpec::hilbert();
  CHECK(form_direct(one, one, density, omega, K) ==
        doctest::Approx(form_direct(one, one, atoms, omega, K)).epsilon(1e-14));

  CHECK_THROWS_AS(apply_T(one, density, K, Point{0.1}), std::invalid_argument);
}
