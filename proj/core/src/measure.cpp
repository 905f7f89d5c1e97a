#include "dyadic/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace dyadic {

namespace {

// Full Gauss-Legendre rule mapped to [0,1], built from boost's half-rule
// tables (symmetric about 0). Sorted by abscissa for determinism.
template <unsigned N>
std::vector<std::pair<double, double>> full_gauss01() {
  using G = boost::math::quadrature::gauss<double, N>;
  std::vector<std::pair<double, double>> out;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      out.emplace_back(0.5, w[i] * 0.5);
    } else {
      out.emplace_back((1.0 - a[i]) * 0.5, w[i] * 0.5);
      out.emplace_back((1.0 + a[i]) * 0.5, w[i] * 0.5);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Per-axis order by dimension: generous in 1-D, lighter in 3-D where tensor
// counts grow. Exact through degree 2q-1 per slab.
const std::vector<std::pair<double, double>>& gauss01(int dimension) {
  static const auto g15 = full_gauss01<15>();
  static const auto g10 = full_gauss01<10>();
  static const auto g7 = full_gauss01<7>();
  if (dimension <= 1) return g15;
  if (dimension == 2) return g10;
  return g7;
}

bool box_inside(const DyadicBox& inner, const DyadicBox& outer) {
  for (std::size_t k = 0; k < inner.size(); ++k)
    if (inner[k].lo < outer[k].lo || outer[k].hi < inner[k].hi) return false;
  return true;
}

}  // namespace

Point Atom::point_double() const {
  Point x;
  x.reserve(point.size());
  for (const auto& c : point) x.push_back(c.to_double());
  return x;
}

Measure Measure::atomic(std::vector<Atom> atoms, DyadicCube support_box) {
  Measure mu;
  mu.kind_ = Kind::Atomic;
  mu.support_box_ = std::move(support_box);
  const SuperCube support = SuperCube::from_cube(mu.support_box_);
  if (atoms.empty()) throw std::invalid_argument("Measure::atomic: no atoms");
  for (const auto& atom : atoms) {
    if (static_cast<int>(atom.point.size()) != mu.support_box_.dimension())
      throw std::invalid_argument("Measure::atomic: atom dimension mismatch");
    if (!(atom.mass > 0) || !std::isfinite(atom.mass))
      throw std::invalid_argument("Measure::atomic: atom masses must be positive");
    if (!support.contains(atom.point))
      throw std::invalid_argument("Measure::atomic: atom outside support_box");
    mu.total_mass_ += atom.mass;
  }
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      if (atoms[i].point == atoms[j].point)
        throw std::invalid_argument("Measure::atomic: duplicate atom location");
  mu.atoms_ = std::move(atoms);
  return mu;
}

Measure Measure::cell_density(std::vector<Cell> cells, DyadicCube support_box) {
  Measure mu;
  mu.kind_ = Kind::CellDensity;
  mu.support_box_ = std::move(support_box);
  if (cells.empty()) throw std::invalid_argument("Measure::cell_density: no cells");
  const DyadicBox support = mu.support_box_.box();
  std::vector<DyadicBox> boxes;
  boxes.reserve(cells.size());
  for (const auto& cell : cells) {
    if (cell.cube.dimension() != mu.support_box_.dimension())
      throw std::invalid_argument("Measure::cell_density: cell dimension mismatch");
    if (cell.density < 0 || !std::isfinite(cell.density))
      throw std::invalid_argument("Measure::cell_density: densities must be nonnegative");
    DyadicBox box = cell.cube.box();
    if (!box_inside(box, support))
      throw std::invalid_argument("Measure::cell_density: cell outside support_box");
    mu.total_mass_ += cell.density * box_volume(box);
    boxes.push_back(std::move(box));
  }
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (box_intersection(boxes[i], boxes[j]))
        throw std::invalid_argument("Measure::cell_density: overlapping cells");
  if (!(mu.total_mass_ > 0))
    throw std::invalid_argument("Measure::cell_density: total mass must be positive");
  mu.cells_ = std::move(cells);
  return mu;
}

// --- exact set functions ----------------------------------------------------

double mass(const Measure& mu, const SuperCube& Q) {
  double s = 0;
  if (mu.kind() == Measure::Kind::Atomic) {
    for (const auto& atom : mu.atoms())
      if (Q.contains(atom.point)) s += atom.mass;
  } else {
    for (const auto& cell : mu.cells())
      if (auto part = Q.clip(cell.cube.box())) s += cell.density * box_volume(*part);
  }
  return s;
}

double mass(const Measure& mu, const DyadicCube& Q) {
  return mass(mu, SuperCube::from_cube(Q));
}

double moment(const Measure& mu, const SuperCube& Q, const MultiIndex& beta,
              const Point& center, double scale_len) {
  if (static_cast<int>(beta.size()) != mu.dimension() ||
      static_cast<int>(center.size()) != mu.dimension())
    throw std::invalid_argument("moment: dimension mismatch");
  if (!(scale_len > 0)) throw std::invalid_argument("moment: scale_len must be positive");

  double s = 0;
  if (mu.kind() == Measure::Kind::Atomic) {
    for (const auto& atom : mu.atoms()) {
      if (!Q.contains(atom.point)) continue;
      double term = atom.mass;
      for (std::size_t k = 0; k < beta.size(); ++k)
        term *= std::pow((atom.point[k].to_double() - center[k]) / scale_len, beta[k]);
      s += term;
    }
  } else {
    for (const auto& cell : mu.cells()) {
      auto part = Q.clip(cell.cube.box());
      if (!part) continue;
      // per-axis: int_a^b ((x-c)/s)^b dx = s*(u_hi^(b+1) - u_lo^(b+1))/(b+1)
      double term = cell.density;
      for (std::size_t k = 0; k < beta.size(); ++k) {
        const double u_lo = ((*part)[k].lo.to_double() - center[k]) / scale_len;
        const double u_hi = ((*part)[k].hi.to_double() - center[k]) / scale_len;
        const int b = beta[k];
        term *= scale_len * (std::pow(u_hi, b + 1) - std::pow(u_lo, b + 1)) / (b + 1);
      }
      s += term;
    }
  }
  return s;
}

MomentVector moments(const Measure& mu, const SuperCube& Q, int kappa,
                     const Point& center, double scale_len) {
  MomentVector mv;
  mv.index = multi_indices_below(mu.dimension(), kappa);
  mv.values.reserve(mv.index.size());
  for (const auto& beta : mv.index) mv.values.push_back(moment(mu, Q, beta, center, scale_len));
  return mv;
}

// --- quadrature nodes ---------------------------------------------------------

AxisCuts merge_cuts(AxisCuts a, const AxisCuts& b) {
  if (a.size() < b.size()) a.resize(b.size());
  for (std::size_t k = 0; k < b.size(); ++k)
    a[k].insert(a[k].end(), b[k].begin(), b[k].end());
  return a;
}

void add_box_cuts(AxisCuts& cuts, const DyadicBox& box) {
  if (cuts.size() < box.size()) cuts.resize(box.size());
  for (std::size_t k = 0; k < box.size(); ++k) {
    cuts[k].push_back(box[k].lo);
    cuts[k].push_back(box[k].hi);
  }
}

std::vector<DyadicBox> slice_box(const DyadicBox& box, const AxisCuts& cuts) {
  // per axis: sorted interior breakpoints -> sub-intervals
  std::vector<std::vector<DyadicInterval>> parts(box.size());
  for (std::size_t k = 0; k < box.size(); ++k) {
    std::vector<DyadicRational> pts;
    if (k < cuts.size())
      for (const auto& p : cuts[k])
        if (box[k].lo < p && p < box[k].hi) pts.push_back(p);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    DyadicRational lo = box[k].lo;
    for (const auto& p : pts) {
      parts[k].push_back({lo, p});
      lo = p;
    }
    parts[k].push_back({lo, box[k].hi});
  }
  std::vector<DyadicBox> out;
  std::vector<std::size_t> pick(box.size(), 0);
  while (true) {
    DyadicBox b(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) b[k] = parts[k][pick[k]];
    out.push_back(std::move(b));
    std::size_t k = box.size();
    while (k > 0) {
      --k;
      if (++pick[k] < parts[k].size()) break;
      pick[k] = 0;
      if (k == 0) return out;
    }
  }
}

std::vector<WeightedNode> integration_nodes(const Measure& mu, const SuperCube& region,
                                            const AxisCuts& cuts) {
  std::vector<WeightedNode> out;
  if (mu.kind() == Measure::Kind::Atomic) {
    for (const auto& atom : mu.atoms())
      if (region.contains(atom.point)) out.push_back({atom.point_double(), atom.mass});
    return out;
  }
  const auto& rule = gauss01(mu.dimension());
  const int n = mu.dimension();
  for (const auto& cell : mu.cells()) {
    if (cell.density == 0) continue;
    auto part = region.clip(cell.cube.box());
    if (!part) continue;
    for (const DyadicBox& slab : slice_box(*part, cuts)) {
      std::vector<double> lo(static_cast<std::size_t>(n)), len(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        lo[static_cast<std::size_t>(k)] = slab[static_cast<std::size_t>(k)].lo.to_double();
        len[static_cast<std::size_t>(k)] = slab[static_cast<std::size_t>(k)].length().to_double();
      }
      std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
      while (true) {
        WeightedNode node;
        node.x.resize(static_cast<std::size_t>(n));
        node.w = cell.density;
        for (int k = 0; k < n; ++k) {
          const auto& [t, w] = rule[pick[static_cast<std::size_t>(k)]];
          node.x[static_cast<std::size_t>(k)] =
              lo[static_cast<std::size_t>(k)] + t * len[static_cast<std::size_t>(k)];
          node.w *= w * len[static_cast<std::size_t>(k)];
        }
        out.push_back(std::move(node));
        int k = n - 1;
        while (k >= 0) {
          if (++pick[static_cast<std::size_t>(k)] < rule.size()) break;
          pick[static_cast<std::size_t>(k)] = 0;
          --k;
        }
        if (k < 0) break;
      }
    }
  }
  return out;
}

// --- doubling diagnostics -------------------------------------------------------

std::optional<double> doubling_ratio(const Measure& mu, const DyadicCube& Q) {
  const double base = mass(mu, Q);
  if (base == 0) return std::nullopt;
  const DyadicRational half = DyadicRational::pow2(Q.scale - 1);
  SuperCube doubled;
  for (const auto& c : Q.lower_corner)
    doubled.factors.push_back(
        SuperCube::AxisFactor::finite(c - half, c + half * DyadicRational(3)));
  return mass(mu, doubled) / base;
}

ReverseDoublingReport reverse_doubling_report(const Measure& mu, const GridSpec& grid,
                                              std::int64_t m_lo, std::int64_t m_hi) {
  if (m_lo > m_hi) throw std::invalid_argument("reverse_doubling_report: empty scale range");
  ReverseDoublingReport report;

  // deterministic base points: atoms, or centers of positive-density cells
  std::vector<std::vector<DyadicRational>> bases;
  if (mu.kind() == Measure::Kind::Atomic) {
    for (const auto& atom : mu.atoms()) {
      bases.push_back(atom.point);
      if (bases.size() == 8) break;
    }
  } else {
    for (const auto& cell : mu.cells()) {
      if (cell.density == 0) continue;
      const DyadicRational half = DyadicRational::pow2(cell.cube.scale - 1);
      std::vector<DyadicRational> c;
      for (const auto& lo : cell.cube.lower_corner) c.push_back(lo + half);
      bases.push_back(std::move(c));
      if (bases.size() == 8) break;
    }
  }

  for (std::size_t b = 0; b < bases.size(); ++b) {
    Point p;
    for (const auto& c : bases[b]) p.push_back(c.to_double());
    report.base_points.push_back(std::move(p));
    double prev = std::numeric_limits<double>::infinity();
    for (std::int64_t m = m_lo; m <= m_hi; ++m) {
      const DyadicCube I = cube_at(grid, bases[b], m);
      const double im = mass(mu, I);
      if (im == 0) continue;
      const double norm = 1.0 / std::sqrt(im);
      if (norm > prev + 1e-12) report.normalizers_nonincreasing = false;
      prev = norm;
      report.rows.push_back({b, m, im, norm});
    }
  }
  return report;
}

}  // namespace dyadic
