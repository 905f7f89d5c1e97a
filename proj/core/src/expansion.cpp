#include "dyadic/expansion.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace dyadic {

namespace {

bool cube_eq(const DyadicCube& a, const DyadicCube& b) { return (a <=> b) == 0; }

// coarse-to-fine: scale descending, then lexicographic corners
bool coarse_first(const DyadicCube& a, const DyadicCube& b) {
  if (a.scale != b.scale) return a.scale > b.scale;
  for (std::size_t k = 0; k < a.lower_corner.size(); ++k) {
    if (a.lower_corner[k] < b.lower_corner[k]) return true;
    if (b.lower_corner[k] < a.lower_corner[k]) return false;
  }
  return false;
}

}  // namespace

std::vector<DyadicCube> positive_mass_cubes_at(const GridSpec& grid, const Measure& mu,
                                               std::int64_t m) {
  std::vector<DyadicCube> out;
  if (mu.kind() == Measure::Kind::Atomic) {
    for (const auto& atom : mu.atoms()) out.push_back(cube_at(grid, atom.point, m));
  } else {
    const int n = mu.dimension();
    for (const auto& cell : mu.cells()) {
      if (cell.density == 0) continue;
      const DyadicBox box = cell.cube.box();
      // per-axis index ranges of scale-m cubes meeting [lo, hi)
      std::vector<BigInt> i_lo(static_cast<std::size_t>(n)), count(static_cast<std::size_t>(n));
      BigInt total = 1;
      for (int k = 0; k < n; ++k) {
        const DyadicRational s = axis_offset(grid.axes[static_cast<std::size_t>(k)], m);
        i_lo[static_cast<std::size_t>(k)] = (box[static_cast<std::size_t>(k)].lo - s).floor_div_pow2(m);
        const DyadicRational t = box[static_cast<std::size_t>(k)].hi - s;
        BigInt i_hi = t.floor_div_pow2(m);
        if (t.mod_pow2(m).is_zero()) i_hi -= 1;
        count[static_cast<std::size_t>(k)] = i_hi - i_lo[static_cast<std::size_t>(k)] + 1;
        total *= count[static_cast<std::size_t>(k)];
      }
      if (total > 1000000)
        throw WindowError("expand: cube enumeration too large at scale", m);
      std::vector<BigInt> idx(static_cast<std::size_t>(n), 0);
      while (true) {
        DyadicCube q;
        q.scale = m;
        for (int k = 0; k < n; ++k) {
          const DyadicRational s = axis_offset(grid.axes[static_cast<std::size_t>(k)], m);
          q.lower_corner.push_back(
              s + DyadicRational(i_lo[static_cast<std::size_t>(k)] + idx[static_cast<std::size_t>(k)], m));
        }
        out.push_back(std::move(q));
        int k = n - 1;
        while (k >= 0) {
          if (++idx[static_cast<std::size_t>(k)] < count[static_cast<std::size_t>(k)]) break;
          idx[static_cast<std::size_t>(k)] = 0;
          --k;
        }
        if (k < 0) break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), cube_eq), out.end());
  return out;
}

namespace {

bool refines_cell(const GridSpec& grid, const DyadicCube& cell, std::int64_t m) {
  if (cell.scale < m) return false;
  for (int k = 0; k < cell.dimension(); ++k) {
    const DyadicRational s = axis_offset(grid.axes[static_cast<std::size_t>(k)], m);
    if (!(cell.lower_corner[static_cast<std::size_t>(k)] - s).mod_pow2(m).is_zero())
      return false;
  }
  return true;
}

void validate_window(const PiecewisePolyFn& f, const GridSpec& grid, const Measure& mu,
                     const ExpandOptions& opt,
                     const std::vector<std::pair<TopSignature, SuperCube>>& tops_sig) {
  if (opt.m_min > opt.m_max)
    throw WindowError("expand: window is empty (fine end above coarse end)", opt.m_min);

  // coarse end: at most one positive-mass cube per top at m_max
  const auto coarse = positive_mass_cubes_at(grid, mu, opt.m_max);
  std::vector<int> per_top(tops_sig.size(), 0);
  for (const auto& q : coarse) {
    for (std::size_t t = 0; t < tops_sig.size(); ++t) {
      if (tops_sig[t].second.contains(q.lower_corner)) {
        ++per_top[t];
        break;
      }
    }
  }
  for (int c : per_top)
    if (c > 1)
      throw WindowError("expand: coarse scale leaves more than one cube per top", opt.m_max);

  // fine end: separation / resolution
  if (mu.kind() == Measure::Kind::Atomic) {
    std::vector<DyadicCube> fine;
    for (const auto& atom : mu.atoms()) fine.push_back(cube_at(grid, atom.point, opt.m_min));
    std::sort(fine.begin(), fine.end());
    for (std::size_t i = 1; i < fine.size(); ++i)
      if (cube_eq(fine[i - 1], fine[i]))
        throw WindowError("expand: fine scale does not separate atoms", opt.m_min);
  } else {
    for (const auto& cell : mu.cells())
      if (cell.density > 0 && !refines_cell(grid, cell.cube, opt.m_min))
        throw WindowError("expand: fine scale does not resolve measure cells", opt.m_min);
    for (const auto& piece : f.pieces())
      if (!refines_cell(grid, piece.cell, opt.m_min))
        throw WindowError("expand: fine scale does not resolve function pieces", opt.m_min);
  }
}

}  // namespace

CoefficientTree expand(const PiecewisePolyFn& f, const GridSpec& grid, const Measure& mu,
                       const MomentSystem& sys, const ExpandOptions& opt) {
  const auto tops_sig = tops_with_signatures(grid);
  validate_window(f, grid, mu, opt, tops_sig);

  CoefficientTree tree;
  tree.m_min = opt.m_min;
  tree.m_max = opt.m_max;

  for (const auto& [sig, top] : tops_sig) {
    if (mass(mu, top) == 0) continue;
    tree.top_parts.push_back({sig, top, project_E_top(f, top, grid, mu, sys)});
  }

  // positive-mass cubes with m_min < scale <= m_max, walked down from the roots
  std::vector<DyadicCube> stack = positive_mass_cubes_at(grid, mu, opt.m_max);
  std::vector<DyadicCube> cubes;
  while (!stack.empty()) {
    DyadicCube q = std::move(stack.back());
    stack.pop_back();
    if (q.scale <= opt.m_min) continue;
    if (q.scale - 1 > opt.m_min)
      for (auto& c : children(grid, q))
        if (mass(mu, c) > 0) stack.push_back(std::move(c));
    cubes.push_back(std::move(q));
  }
  std::sort(cubes.begin(), cubes.end(), coarse_first);

  struct Slot {
    int dim = 0;
    std::vector<double> coeffs;
  };
  std::vector<Slot> slots(cubes.size());
  auto work = [&](std::size_t i) {
    const AlpertBasis basis = build_alpert_basis(grid, cubes[i], mu, sys);
    slots[i].dim = basis.dim();
    if (basis.dim() > 0) slots[i].coeffs = project_delta(f, basis, mu).first;
  };

  const int threads = std::max(1, opt.threads);
  if (threads == 1 || cubes.size() < 2) {
    for (std::size_t i = 0; i < cubes.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cubes.size(); i = next.fetch_add(1)) work(i);
      });
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < cubes.size(); ++i)
    if (slots[i].dim > 0) tree.cube_parts.push_back({cubes[i], std::move(slots[i].coeffs)});
  return tree;
}

PiecewisePolyFn reconstruct(const CoefficientTree& tree, const GridSpec& grid,
                            const Measure& mu, const MomentSystem& sys) {
  PiecewisePolyFn out;
  for (const auto& tp : tree.top_parts) out.add_scaled(1.0, tp.fn);
  for (const auto& cp : tree.cube_parts) {
    const AlpertBasis basis = build_alpert_basis(grid, cp.cube, mu, sys);
    if (static_cast<std::size_t>(basis.dim()) != cp.coeffs.size())
      throw std::invalid_argument("reconstruct: tree does not match the fixture");
    for (int a = 0; a < basis.dim(); ++a)
      out.add_scaled(cp.coeffs[static_cast<std::size_t>(a)],
                     basis.functions[static_cast<std::size_t>(a)]);
  }
  return out;
}

double check_telescoping(const GridSpec& grid, const Measure& mu, const MomentSystem& sys,
                         const DyadicCube& P, const DyadicCube& Q,
                         const std::vector<PiecewisePolyFn>& probes) {
  if (Q.scale >= P.scale)
    throw std::invalid_argument("check_telescoping: Q must be a strict descendant of P");
  std::vector<DyadicCube> chain;  // parent(Q), ..., P
  DyadicCube cur = Q;
  while (cur.scale < P.scale) {
    cur = parent(grid, cur);
    chain.push_back(cur);
  }
  if (!cube_eq(cur, P))
    throw std::invalid_argument("check_telescoping: Q is not a descendant of P");

  std::vector<AlpertBasis> bases;
  bases.reserve(chain.size());
  for (const auto& I : chain) bases.push_back(build_alpert_basis(grid, I, mu, sys));

  double worst = 0;
  for (const auto& f : probes) {
    const auto nodes = integration_nodes(mu, SuperCube::from_cube(Q), f.cuts());
    if (nodes.empty()) continue;

    PiecewisePolyFn lhs;
    for (const auto& basis : bases) lhs.add_scaled(1.0, project_delta(f, basis, mu).second);
    const PiecewisePolyFn eq = project_E(f, Q, mu, sys);
    const PiecewisePolyFn ep = project_E(f, P, mu, sys);

    for (const auto& node : nodes) {
      const double residual = lhs(node.x) - (eq(node.x) - ep(node.x));
      worst = std::max(worst, std::abs(residual));
    }
  }
  return worst;
}

double parseval_gap(const PiecewisePolyFn& f, const CoefficientTree& tree, const Measure& mu) {
  const double lhs = l2_norm_sq(f, mu);
  if (lhs == 0) return 0;
  double rhs = 0;
  for (const auto& tp : tree.top_parts) rhs += l2_norm_sq(tp.fn, mu);
  for (const auto& cp : tree.cube_parts)
    for (double c : cp.coeffs) rhs += c * c;
  return std::abs(lhs - rhs) / lhs;
}

}  // namespace dyadic
