#include "dyadic/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dyadic {

namespace {

void check_scale(std::int64_t m) {
  if (m < kMinScale || m > kMaxScale)
    throw std::domain_error("scale " + std::to_string(m) + " outside [" +
                            std::to_string(kMinScale) + ", " + std::to_string(kMaxScale) + "]");
}

std::vector<DyadicRational> to_exact(const Point& x) {
  std::vector<DyadicRational> out;
  out.reserve(x.size());
  for (double c : x) out.push_back(DyadicRational::from_double(c));
  return out;
}

}  // namespace

// --- geometry helpers ----------------------------------------------------

bool box_contains(const DyadicBox& box, const Point& x) {
  if (box.size() != x.size()) return false;
  for (size_t k = 0; k < box.size(); ++k)
    if (!box[k].contains(DyadicRational::from_double(x[k]))) return false;
  return true;
}

double box_volume(const DyadicBox& box) {
  DyadicRational v(1);
  for (const auto& iv : box) v = v * iv.length();
  return v.to_double();
}

std::optional<DyadicBox> box_intersection(const DyadicBox& a, const DyadicBox& b) {
  if (a.size() != b.size()) throw std::invalid_argument("box_intersection: dimension mismatch");
  DyadicBox out(a.size());
  for (size_t k = 0; k < a.size(); ++k) {
    const DyadicRational lo = std::max(a[k].lo, b[k].lo);
    const DyadicRational hi = std::min(a[k].hi, b[k].hi);
    if (!(lo < hi)) return std::nullopt;
    out[k] = {lo, hi};
  }
  return out;
}

// --- BitTail / GridAxis / GridSpec ---------------------------------------

BitTail BitTail::periodic(std::vector<std::uint8_t> pattern) {
  if (pattern.empty()) throw std::invalid_argument("BitTail::periodic: empty pattern");
  for (auto b : pattern)
    if (b > 1) throw std::invalid_argument("BitTail::periodic: bits must be 0/1");
  const bool all_zero = std::all_of(pattern.begin(), pattern.end(), [](auto b) { return b == 0; });
  const bool all_one = std::all_of(pattern.begin(), pattern.end(), [](auto b) { return b == 1; });
  if (all_zero) return zero();
  if (all_one) return one();
  // reduce to the minimal period
  const size_t n = pattern.size();
  for (size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (size_t i = p; i < n && ok; ++i) ok = pattern[i] == pattern[i % p];
    if (ok) {
      pattern.resize(p);
      break;
    }
  }
  return BitTail{Kind::Periodic, std::move(pattern)};
}

int BitTail::bit(std::int64_t index) const {
  switch (kind) {
    case Kind::AllZero: return 0;
    case Kind::AllOne: return 1;
    case Kind::Periodic: return pattern[static_cast<size_t>(index % static_cast<std::int64_t>(pattern.size()))];
  }
  return 0;
}

GridAxis::GridAxis(DyadicRational offset, std::vector<std::uint8_t> prefix, BitTail t)
    : base_offset(std::move(offset)), prefix_bits(std::move(prefix)), tail(std::move(t)) {
  if (base_offset.is_negative() || !(base_offset < DyadicRational(1)))
    throw std::invalid_argument("GridAxis: base offset must lie in [0,1)");
  for (auto b : prefix_bits)
    if (b > 1) throw std::invalid_argument("GridAxis: prefix bits must be 0/1");
}

int GridAxis::bit(std::int64_t m) const {
  if (m < 0) throw std::invalid_argument("GridAxis::bit: negative index");
  if (m < static_cast<std::int64_t>(prefix_bits.size())) return prefix_bits[static_cast<size_t>(m)];
  return tail.bit(m - static_cast<std::int64_t>(prefix_bits.size()));
}

DyadicRational GridAxis::top_boundary() const {
  if (!tail.eventually_constant())
    throw std::logic_error("GridAxis::top_boundary: periodic tail has no ray boundary");
  const std::int64_t M = static_cast<std::int64_t>(prefix_bits.size());
  DyadicRational a = base_offset;
  for (std::int64_t j = 0; j < M; ++j)
    if (prefix_bits[static_cast<size_t>(j)]) a = a + DyadicRational::pow2(j);
  if (tail.kind == BitTail::Kind::AllOne) a = a - DyadicRational::pow2(M);
  return a;
}

GridSpec::GridSpec(std::vector<GridAxis> a) : axes(std::move(a)) {
  if (axes.empty()) throw std::invalid_argument("GridSpec: dimension must be positive");
}

GridSpec GridSpec::standard(int dimension) {
  std::vector<GridAxis> axes;
  for (int k = 0; k < dimension; ++k) axes.push_back(GridAxis::standard());
  return GridSpec(std::move(axes));
}

// --- DyadicCube / SuperCube ----------------------------------------------

DyadicBox DyadicCube::box() const {
  DyadicBox b(lower_corner.size());
  const DyadicRational side = side_length();
  for (size_t k = 0; k < lower_corner.size(); ++k)
    b[k] = {lower_corner[k], lower_corner[k] + side};
  return b;
}

Point DyadicCube::center() const {
  Point c(lower_corner.size());
  const DyadicRational half = DyadicRational::pow2(scale - 1);
  for (size_t k = 0; k < lower_corner.size(); ++k)
    c[k] = (lower_corner[k] + half).to_double();
  return c;
}

std::strong_ordering DyadicCube::operator<=>(const DyadicCube& o) const {
  if (auto c = scale <=> o.scale; c != 0) return c;
  for (size_t k = 0; k < lower_corner.size() && k < o.lower_corner.size(); ++k)
    if (auto c = lower_corner[k] <=> o.lower_corner[k]; c != 0) return c;
  return lower_corner.size() <=> o.lower_corner.size();
}

std::string DyadicCube::to_string() const {
  std::ostringstream os;
  os << "Q(scale=" << scale << ", corner=[";
  for (size_t k = 0; k < lower_corner.size(); ++k) {
    if (k) os << ", ";
    os << lower_corner[k].to_double();
  }
  os << "])";
  return os.str();
}

std::string TopSignature::to_string() const {
  std::string s;
  for (auto e : entries) {
    if (!s.empty()) s += ",";
    s += e == AxisSign::MinusInf ? "-inf" : (e == AxisSign::PlusInf ? "+inf" : "both");
  }
  return "(" + s + ")";
}

SuperCube::AxisFactor SuperCube::AxisFactor::finite(DyadicRational lo, DyadicRational hi) {
  if (!(lo < hi)) throw std::invalid_argument("AxisFactor::finite: requires lo < hi");
  return {Kind::Finite, std::move(lo), std::move(hi)};
}

bool SuperCube::AxisFactor::contains(const DyadicRational& x) const {
  switch (kind) {
    case Kind::Finite: return lo <= x && x < hi;
    case Kind::LeftRay: return x < hi;
    case Kind::RightRay: return lo <= x;
    case Kind::FullLine: return true;
  }
  return false;
}

SuperCube SuperCube::from_cube(const DyadicCube& q) {
  SuperCube s;
  const DyadicRational side = q.side_length();
  for (const auto& c : q.lower_corner) s.factors.push_back(AxisFactor::finite(c, c + side));
  return s;
}

SuperCube SuperCube::from_box(const DyadicBox& box) {
  SuperCube s;
  for (const auto& iv : box) s.factors.push_back(AxisFactor::finite(iv.lo, iv.hi));
  return s;
}

bool SuperCube::is_finite() const {
  return std::all_of(factors.begin(), factors.end(),
                     [](const AxisFactor& f) { return f.kind == AxisFactor::Kind::Finite; });
}

bool SuperCube::contains(const std::vector<DyadicRational>& x) const {
  if (x.size() != factors.size()) return false;
  for (size_t k = 0; k < factors.size(); ++k)
    if (!factors[k].contains(x[k])) return false;
  return true;
}

bool SuperCube::contains(const Point& x) const { return contains(to_exact(x)); }

std::optional<DyadicBox> SuperCube::clip(const DyadicBox& box) const {
  if (box.size() != factors.size()) throw std::invalid_argument("SuperCube::clip: dimension mismatch");
  DyadicBox out(box.size());
  for (size_t k = 0; k < factors.size(); ++k) {
    DyadicRational lo = box[k].lo;
    DyadicRational hi = box[k].hi;
    const auto& f = factors[k];
    if (f.kind == AxisFactor::Kind::Finite || f.kind == AxisFactor::Kind::RightRay)
      lo = std::max(lo, f.lo);
    if (f.kind == AxisFactor::Kind::Finite || f.kind == AxisFactor::Kind::LeftRay)
      hi = std::min(hi, f.hi);
    if (!(lo < hi)) return std::nullopt;
    out[k] = {lo, hi};
  }
  return out;
}

std::string SuperCube::to_string() const {
  std::ostringstream os;
  for (size_t k = 0; k < factors.size(); ++k) {
    if (k) os << " x ";
    const auto& f = factors[k];
    switch (f.kind) {
      case AxisFactor::Kind::Finite:
        os << "[" << f.lo.to_double() << ", " << f.hi.to_double() << ")";
        break;
      case AxisFactor::Kind::LeftRay: os << "(-inf, " << f.hi.to_double() << ")"; break;
      case AxisFactor::Kind::RightRay: os << "[" << f.lo.to_double() << ", inf)"; break;
      case AxisFactor::Kind::FullLine: os << "(-inf, inf)"; break;
    }
  }
  return os.str();
}

// --- grid operations ------------------------------------------------------

DyadicRational axis_offset(const GridAxis& axis, std::int64_t m) {
  check_scale(m);
  if (m < 0) return axis.base_offset.mod_pow2(m);
  DyadicRational s = axis.base_offset;
  for (std::int64_t j = 0; j < m; ++j)
    if (axis.bit(j)) s = s + DyadicRational::pow2(j);
  return s;
}

DyadicCube cube_at(const GridSpec& grid, const std::vector<DyadicRational>& x, std::int64_t m) {
  check_scale(m);
  if (static_cast<int>(x.size()) != grid.dimension())
    throw std::invalid_argument("cube_at: point dimension mismatch");
  DyadicCube q;
  q.scale = m;
  q.lower_corner.reserve(x.size());
  for (size_t k = 0; k < x.size(); ++k) {
    const DyadicRational s = axis_offset(grid.axes[k], m);
    const BigInt idx = (x[k] - s).floor_div_pow2(m);
    q.lower_corner.push_back(s + DyadicRational(idx, m));
  }
  return q;
}

DyadicCube cube_at(const GridSpec& grid, const Point& x, std::int64_t m) {
  return cube_at(grid, to_exact(x), m);
}

bool cube_in_grid(const GridSpec& grid, const DyadicCube& q) {
  if (q.dimension() != grid.dimension()) return false;
  if (q.scale < kMinScale || q.scale > kMaxScale) return false;
  for (int k = 0; k < q.dimension(); ++k) {
    const DyadicRational s = axis_offset(grid.axes[static_cast<size_t>(k)], q.scale);
    if (!(q.lower_corner[static_cast<size_t>(k)] - s).mod_pow2(q.scale).is_zero()) return false;
  }
  return true;
}

std::vector<DyadicCube> children(const GridSpec& grid, const DyadicCube& q) {
  if (!cube_in_grid(grid, q)) throw std::invalid_argument("children: cube not in grid");
  check_scale(q.scale - 1);
  const int n = q.dimension();
  const DyadicRational half = DyadicRational::pow2(q.scale - 1);
  std::vector<DyadicCube> out;
  out.reserve(static_cast<size_t>(1) << n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    DyadicCube c;
    c.scale = q.scale - 1;
    c.lower_corner = q.lower_corner;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) c.lower_corner[static_cast<size_t>(k)] = c.lower_corner[static_cast<size_t>(k)] + half;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

DyadicCube parent(const GridSpec& grid, const DyadicCube& q) {
  if (!cube_in_grid(grid, q)) throw std::invalid_argument("parent: cube not in grid");
  check_scale(q.scale + 1);
  DyadicCube p;
  p.scale = q.scale + 1;
  p.lower_corner.reserve(q.lower_corner.size());
  for (int k = 0; k < q.dimension(); ++k) {
    const DyadicRational s = axis_offset(grid.axes[static_cast<size_t>(k)], q.scale + 1);
    const BigInt idx = (q.lower_corner[static_cast<size_t>(k)] - s).floor_div_pow2(q.scale + 1);
    p.lower_corner.push_back(s + DyadicRational(idx, q.scale + 1));
  }
  return p;
}

std::vector<std::pair<TopSignature, SuperCube>> tops_with_signatures(const GridSpec& grid) {
  const int n = grid.dimension();
  // Per-axis factor alternatives with their signs.
  std::vector<std::vector<std::pair<TopSignature::AxisSign, SuperCube::AxisFactor>>> choices(
      static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const GridAxis& axis = grid.axes[static_cast<size_t>(k)];
    auto& c = choices[static_cast<size_t>(k)];
    if (axis.tail.eventually_constant()) {
      const DyadicRational a = axis.top_boundary();
      c.emplace_back(TopSignature::AxisSign::MinusInf, SuperCube::AxisFactor::left_ray(a));
      c.emplace_back(TopSignature::AxisSign::PlusInf, SuperCube::AxisFactor::right_ray(a));
    } else {
      c.emplace_back(TopSignature::AxisSign::Both, SuperCube::AxisFactor::full_line());
    }
  }
  std::vector<std::pair<TopSignature, SuperCube>> out;
  std::vector<size_t> pick(static_cast<size_t>(n), 0);
  while (true) {
    TopSignature sig;
    SuperCube sc;
    for (int k = 0; k < n; ++k) {
      const auto& [sign, factor] = choices[static_cast<size_t>(k)][pick[static_cast<size_t>(k)]];
      sig.entries.push_back(sign);
      sc.factors.push_back(factor);
    }
    out.emplace_back(std::move(sig), std::move(sc));
    int k = n - 1;
    while (k >= 0) {
      if (++pick[static_cast<size_t>(k)] < choices[static_cast<size_t>(k)].size()) break;
      pick[static_cast<size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

std::vector<SuperCube> tops(const GridSpec& grid) {
  std::vector<SuperCube> out;
  for (auto& [sig, sc] : tops_with_signatures(grid)) out.push_back(std::move(sc));
  return out;
}

SuperCube top_of_point(const GridSpec& grid, const Point& x) {
  const auto exact = to_exact(x);
  if (static_cast<int>(exact.size()) != grid.dimension())
    throw std::invalid_argument("top_of_point: point dimension mismatch");
  SuperCube sc;
  for (int k = 0; k < grid.dimension(); ++k) {
    const GridAxis& axis = grid.axes[static_cast<size_t>(k)];
    if (!axis.tail.eventually_constant()) {
      sc.factors.push_back(SuperCube::AxisFactor::full_line());
    } else {
      const DyadicRational a = axis.top_boundary();
      sc.factors.push_back(exact[static_cast<size_t>(k)] < a
                               ? SuperCube::AxisFactor::left_ray(a)
                               : SuperCube::AxisFactor::right_ray(a));
    }
  }
  return sc;
}

std::optional<std::vector<DyadicRational>> is_translate_of_standard(const GridSpec& grid) {
  std::vector<DyadicRational> shift;
  for (const GridAxis& axis : grid.axes) {
    if (!axis.tail.eventually_constant()) return std::nullopt;  // full-line top
    const DyadicRational a = axis.top_boundary();
    // Consistency: the scale-m tiling must equal a + 2^m Z at every scale.
    for (std::int64_t m = kMinScale; m <= kMaxScale; ++m)
      if (!(axis_offset(axis, m) - a).mod_pow2(m).is_zero()) return std::nullopt;
    shift.push_back(a);
  }
  return shift;
}

SupercubeRelation supercube_relation(const SuperCube& a, const SuperCube& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("supercube_relation: dimension mismatch");

  using K = SuperCube::AxisFactor::Kind;
  bool all_sub = true, all_sup = true;
  for (int k = 0; k < a.dimension(); ++k) {
    const auto& fa = a.factors[static_cast<size_t>(k)];
    const auto& fb = b.factors[static_cast<size_t>(k)];
    // Interval endpoints as (lo bounded?, lo, hi bounded?, hi).
    const bool a_lo = fa.kind == K::Finite || fa.kind == K::RightRay;
    const bool a_hi = fa.kind == K::Finite || fa.kind == K::LeftRay;
    const bool b_lo = fb.kind == K::Finite || fb.kind == K::RightRay;
    const bool b_hi = fb.kind == K::Finite || fb.kind == K::LeftRay;
    // Disjoint on this axis?
    const bool disjoint = (a_hi && b_lo && fa.hi <= fb.lo) || (b_hi && a_lo && fb.hi <= fa.lo);
    if (disjoint) return SupercubeRelation::Disjoint;
    const bool sub = (!b_lo || (a_lo && fb.lo <= fa.lo)) && (!b_hi || (a_hi && fa.hi <= fb.hi));
    const bool sup = (!a_lo || (b_lo && fa.lo <= fb.lo)) && (!a_hi || (b_hi && fb.hi <= fa.hi));
    all_sub = all_sub && sub;
    all_sup = all_sup && sup;
    if (!sub && !sup) {
      // Overlapping intervals with neither containing the other.
      throw std::invalid_argument("supercube_relation: proper overlap (inputs not from one supergrid)");
    }
  }
  if (all_sub && all_sup) return SupercubeRelation::Equal;
  if (all_sub) return SupercubeRelation::Subset;
  if (all_sup) return SupercubeRelation::Superset;
  throw std::invalid_argument("supercube_relation: proper overlap (inputs not from one supergrid)");
}

TilingReport verify_top_tiling(const GridSpec& grid, const DyadicCube& sample_box,
                               std::int64_t count) {
  if (count < 1) throw std::invalid_argument("verify_top_tiling: count must be >= 1");
  const int n = grid.dimension();
  if (sample_box.dimension() != n)
    throw std::invalid_argument("verify_top_tiling: box dimension mismatch");

  const auto all_tops = tops(grid);
  TilingReport report;
  report.top_count = static_cast<std::int64_t>(all_tops.size());
  report.total_points = count;
  report.hits_per_top.assign(all_tops.size(), 0);

  // Additive low-discrepancy recurrence: u_i = frac(1/2 + i * alpha), with
  // alpha_k = phi_n^-(k+1) and phi_n the root > 1 of x^(n+1) = x + 1.
  double phi = 1.5;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (n + 1));
  std::vector<double> alpha(static_cast<size_t>(n));
  double p = 1.0;
  for (int k = 0; k < n; ++k) {
    p /= phi;
    alpha[static_cast<size_t>(k)] = p;
  }

  const DyadicBox box = sample_box.box();
  Point x(static_cast<size_t>(n));
  std::vector<double> u(static_cast<size_t>(n), 0.5);
  for (std::int64_t i = 0; i < count; ++i) {
    for (int k = 0; k < n; ++k) {
      u[static_cast<size_t>(k)] = std::fmod(u[static_cast<size_t>(k)] + alpha[static_cast<size_t>(k)], 1.0);
      const double lo = box[static_cast<size_t>(k)].lo.to_double();
      const double hi = box[static_cast<size_t>(k)].hi.to_double();
      x[static_cast<size_t>(k)] = lo + u[static_cast<size_t>(k)] * (hi - lo);
    }
    std::vector<int> hits;
    for (size_t t = 0; t < all_tops.size(); ++t)
      if (all_tops[t].contains(x)) hits.push_back(static_cast<int>(t));
    if (hits.size() == 1) {
      ++report.hits_per_top[static_cast<size_t>(hits[0])];
    } else {
      report.violations.push_back({x, hits});
    }
  }
  return report;
}

}  // namespace dyadic
