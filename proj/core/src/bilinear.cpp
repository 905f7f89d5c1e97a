#include "dyadic/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dyadic {

KernelSpec KernelSpec::hilbert() {
  KernelSpec k;
  k.kind = Kind::Hilbert;
  return k;
}

KernelSpec KernelSpec::riesz(int component) {
  if (component < 0) throw std::invalid_argument("KernelSpec::riesz: bad component");
  KernelSpec k;
  k.kind = Kind::RieszComponent;
  k.component = component;
  return k;
}

KernelSpec KernelSpec::custom(std::function<double(const Point&, const Point&)> fn,
                              std::string id) {
  if (!fn) throw std::invalid_argument("KernelSpec::custom: missing callback");
  KernelSpec k;
  k.kind = Kind::Custom;
  k.callback = std::move(fn);
  k.id = std::move(id);
  return k;
}

double KernelSpec::operator()(const Point& x, const Point& y) const {
  if (x.size() != y.size()) throw std::invalid_argument("KernelSpec: dimension mismatch");
  if (x == y) return diagonal_rule;
  switch (kind) {
    case Kind::Hilbert:
      if (x.size() != 1) throw std::invalid_argument("KernelSpec: Hilbert kernel is 1-D");
      return 1.0 / (x[0] - y[0]);
    case Kind::RieszComponent: {
      if (component >= static_cast<int>(x.size()))
        throw std::invalid_argument("KernelSpec: Riesz component out of range");
      double r2 = 0;
      for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - y[k]) * (x[k] - y[k]);
      const double r = std::sqrt(r2);
      return (x[static_cast<std::size_t>(component)] - y[static_cast<std::size_t>(component)]) /
             std::pow(r, static_cast<double>(x.size()));
    }
    case Kind::Custom:
      return callback(x, y);
  }
  return 0;
}

Measure discretize_to_atoms(const Measure& mu) {
  if (mu.kind() == Measure::Kind::Atomic) return mu;
  std::vector<Atom> atoms;
  for (const auto& cell : mu.cells()) {
    const double m = cell.density * box_volume(cell.cube.box());
    if (m <= 0) continue;
    const DyadicRational half = DyadicRational::pow2(cell.cube.scale - 1);
    Atom atom;
    for (const auto& lo : cell.cube.lower_corner) atom.point.push_back(lo + half);
    atom.mass = m;
    atoms.push_back(std::move(atom));
  }
  return Measure::atomic(std::move(atoms), mu.support_box());
}

double apply_T(const PiecewisePolyFn& f, const Measure& sigma, const KernelSpec& kernel,
               const Point& x) {
  if (sigma.kind() != Measure::Kind::Atomic)
    throw std::invalid_argument("apply_T: sigma must be atomic (discretize density cells first)");
  double s = 0;
  for (const auto& atom : sigma.atoms()) {
    const Point y = atom.point_double();
    s += kernel(x, y) * f(y) * atom.mass;
  }
  return s;
}

namespace {

// sum_x v(x) omega_x sum_y K(x,y) u(y) sigma_y, in stored atom order
double pair_form(const KernelSpec& kernel, const Measure& sigma, const std::vector<double>& u,
                 const Measure& omega, const std::vector<double>& v) {
  double total = 0;
  for (std::size_t i = 0; i < omega.atoms().size(); ++i) {
    if (v[i] == 0) continue;
    const Point x = omega.atoms()[i].point_double();
    double inner = 0;
    for (std::size_t j = 0; j < sigma.atoms().size(); ++j) {
      if (u[j] == 0) continue;
      inner += kernel(x, sigma.atoms()[j].point_double()) * u[j] * sigma.atoms()[j].mass;
    }
    total += v[i] * omega.atoms()[i].mass * inner;
  }
  return total;
}

std::vector<double> values_at_atoms(const PiecewisePolyFn& f, const Measure& mu) {
  std::vector<double> out(mu.atoms().size(), 0.0);
  for (std::size_t i = 0; i < mu.atoms().size(); ++i) out[i] = f(mu.atoms()[i].point_double());
  return out;
}

std::vector<DyadicCube> atom_cubes_at(const GridSpec& grid, const Measure& mu, std::int64_t m) {
  std::vector<DyadicCube> out;
  for (const auto& atom : mu.atoms()) out.push_back(cube_at(grid, atom.point, m));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](const DyadicCube& a, const DyadicCube& b) { return (a <=> b) == 0; }),
            out.end());
  return out;
}

void validate_bilinear_window(const GridSpec& grid, const Measure& sigma, const Measure& omega,
                              const TruncationWindow& window, bool tops_mode) {
  if (window.m_min > window.N)
    throw WindowError("bilinear: window is empty (fine end above split scale)", window.m_min);

  // split cube must be at least as large as the joint support extent
  const DyadicBox bs = sigma.support_box().box();
  const DyadicBox bw = omega.support_box().box();
  const DyadicRational side = DyadicRational::pow2(window.N);
  for (std::size_t k = 0; k < bs.size(); ++k) {
    const DyadicRational lo = std::min(bs[k].lo, bw[k].lo);
    const DyadicRational hi = std::max(bs[k].hi, bw[k].hi);
    if (side < hi - lo)
      throw WindowError("bilinear: split scale smaller than the support diameter", window.N);
  }

  for (const Measure* mu : {&sigma, &omega}) {
    // fine end separates this measure's atoms
    std::vector<DyadicCube> fine;
    for (const auto& atom : mu->atoms()) fine.push_back(cube_at(grid, atom.point, window.m_min));
    std::sort(fine.begin(), fine.end());
    for (std::size_t i = 1; i < fine.size(); ++i)
      if ((fine[i - 1] <=> fine[i]) == 0)
        throw WindowError("bilinear: fine scale does not separate atoms", window.m_min);

    if (tops_mode) {
      // chains must close on a single split cube per top
      const auto tops_list = tops(grid);
      std::vector<int> per_top(tops_list.size(), 0);
      for (const auto& q : atom_cubes_at(grid, *mu, window.N))
        for (std::size_t t = 0; t < tops_list.size(); ++t)
          if (tops_list[t].contains(q.lower_corner)) {
            ++per_top[t];
            break;
          }
      for (int c : per_top)
        if (c > 1)
          throw WindowError("bilinear: split scale leaves more than one cube per top", window.N);
    }
  }
}

struct Layers {
  std::vector<double> e_vals;  // E-layer summed at the measure's atoms
  std::vector<double> d_vals;  // Delta-layer summed at the measure's atoms
  int e_summands = 0;
};

Layers compute_layers(const GridSpec& grid, const MomentSystem& sys, const PiecewisePolyFn& f,
                      const Measure& mu, const TruncationWindow& window, bool tops_mode) {
  Layers L;
  L.e_vals.assign(mu.atoms().size(), 0.0);
  L.d_vals.assign(mu.atoms().size(), 0.0);

  // Delta-layer over scales (m_min, N]
  for (std::int64_t m = window.N; m > window.m_min; --m) {
    for (const auto& q : atom_cubes_at(grid, mu, m)) {
      const AlpertBasis basis = build_alpert_basis(grid, q, mu, sys);
      if (basis.dim() == 0) continue;
      const PiecewisePolyFn delta = project_delta(f, basis, mu).second;
      const SuperCube qs = SuperCube::from_cube(q);
      for (std::size_t i = 0; i < mu.atoms().size(); ++i)
        if (qs.contains(mu.atoms()[i].point)) L.d_vals[i] += delta(mu.atoms()[i].point_double());
    }
  }

  // E-layer: scale-N cubes, or top projections
  if (!tops_mode) {
    for (const auto& q : atom_cubes_at(grid, mu, window.N)) {
      const PiecewisePolyFn ef = project_E(f, q, mu, sys);
      const SuperCube qs = SuperCube::from_cube(q);
      for (std::size_t i = 0; i < mu.atoms().size(); ++i)
        if (qs.contains(mu.atoms()[i].point)) L.e_vals[i] += ef(mu.atoms()[i].point_double());
      ++L.e_summands;
    }
  } else {
    for (const auto& top : tops(grid)) {
      if (mass(mu, top) == 0) continue;
      const PiecewisePolyFn ef = project_E_top(f, top, grid, mu, sys);
      for (std::size_t i = 0; i < mu.atoms().size(); ++i)
        if (top.contains(mu.atoms()[i].point)) L.e_vals[i] += ef(mu.atoms()[i].point_double());
      ++L.e_summands;
    }
  }
  return L;
}

}  // namespace

double form_direct(const PiecewisePolyFn& f, const PiecewisePolyFn& g, const Measure& sigma,
                   const Measure& omega, const KernelSpec& kernel) {
  const Measure s = discretize_to_atoms(sigma);
  const Measure w = discretize_to_atoms(omega);
  return pair_form(kernel, s, values_at_atoms(f, s), w, values_at_atoms(g, w));
}

FourTermResult form_four_term(const GridSpec& grid, const MomentSystem& sys,
                              const PiecewisePolyFn& f, const PiecewisePolyFn& g,
                              const Measure& sigma, const Measure& omega,
                              const KernelSpec& kernel, const TruncationWindow& window) {
  const Measure s = discretize_to_atoms(sigma);
  const Measure w = discretize_to_atoms(omega);
  validate_bilinear_window(grid, s, w, window, false);

  const Layers Lf = compute_layers(grid, sys, f, s, window, false);
  const Layers Lg = compute_layers(grid, sys, g, w, window, false);

  FourTermResult r;
  r.dd = pair_form(kernel, s, Lf.d_vals, w, Lg.d_vals);
  r.ee = pair_form(kernel, s, Lf.e_vals, w, Lg.e_vals);
  r.de = pair_form(kernel, s, Lf.d_vals, w, Lg.e_vals);
  r.ed = pair_form(kernel, s, Lf.e_vals, w, Lg.d_vals);
  r.total = r.dd + r.ee + r.de + r.ed;
  return r;
}

TopsFormResult form_tops(const GridSpec& grid, const MomentSystem& sys,
                         const PiecewisePolyFn& f, const PiecewisePolyFn& g,
                         const Measure& sigma, const Measure& omega, const KernelSpec& kernel,
                         const TruncationWindow& window) {
  const Measure s = discretize_to_atoms(sigma);
  const Measure w = discretize_to_atoms(omega);
  validate_bilinear_window(grid, s, w, window, true);

  const Layers Lf = compute_layers(grid, sys, f, s, window, true);
  const Layers Lg = compute_layers(grid, sys, g, w, window, true);

  const int limit = 1 << grid.dimension();
  if (Lf.e_summands > limit || Lg.e_summands > limit)
    throw std::logic_error("form_tops: more E-layer summands than tops");

  TopsFormResult r;
  r.dd = pair_form(kernel, s, Lf.d_vals, w, Lg.d_vals);
  r.td = pair_form(kernel, s, Lf.e_vals, w, Lg.d_vals);
  r.dt = pair_form(kernel, s, Lf.d_vals, w, Lg.e_vals);
  r.tt = pair_form(kernel, s, Lf.e_vals, w, Lg.e_vals);
  r.total = r.dd + r.td + r.dt + r.tt;
  r.e_summands_f = Lf.e_summands;
  r.e_summands_g = Lg.e_summands;
  return r;
}

}  // namespace dyadic
