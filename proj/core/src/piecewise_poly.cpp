#include "dyadic/piecewise_poly.hpp"

#include <cmath>
#include <stdexcept>

namespace dyadic {

namespace {

std::pair<Point, double> frame_of(const DyadicCube& cell) {
  return {cell.center(), cell.side_length().to_double()};
}

}  // namespace

PiecewisePolyFn::PiecewisePolyFn(MomentSystem sys, int space_dim, std::vector<PolyPiece> pieces)
    : sys_(std::move(sys)), has_system_(true), space_dim_(space_dim) {
  if (space_dim < 1) throw std::invalid_argument("PiecewisePolyFn: bad dimension");
  if (sys_.kind() == MomentSystem::Kind::Monomials)
    exps_ = multi_indices_below(space_dim, sys_.kappa());
  const std::size_t d = static_cast<std::size_t>(sys_.dimension(space_dim));
  for (auto& piece : pieces) {
    if (piece.cell.dimension() != space_dim)
      throw std::invalid_argument("PiecewisePolyFn: piece dimension mismatch");
    if (piece.coeffs.size() != d)
      throw std::invalid_argument("PiecewisePolyFn: coefficient count mismatch");
    frames_.push_back(frame_of(piece.cell));
    pieces_.push_back(std::move(piece));
  }
}

PiecewisePolyFn PiecewisePolyFn::constant(const MomentSystem& sys, const DyadicCube& cell,
                                          double value) {
  std::vector<double> coeffs(static_cast<std::size_t>(sys.dimension(cell.dimension())), 0.0);
  coeffs[0] = value;  // first system function is the constant 1
  return PiecewisePolyFn(sys, cell.dimension(), {{cell, std::move(coeffs)}});
}

const MomentSystem& PiecewisePolyFn::system() const {
  if (!has_system_) throw std::logic_error("PiecewisePolyFn: zero function has no system");
  return sys_;
}

double PiecewisePolyFn::operator()(const Point& x) const {
  if (pieces_.empty()) return 0;
  std::vector<DyadicRational> ex;
  ex.reserve(x.size());
  for (double c : x) ex.push_back(DyadicRational::from_double(c));

  const bool custom = sys_.kind() == MomentSystem::Kind::Custom;
  double value = 0;
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    const auto& piece = pieces_[p];
    bool inside = true;
    const DyadicRational side = piece.cell.side_length();
    for (std::size_t k = 0; k < ex.size() && inside; ++k) {
      const DyadicRational& lo = piece.cell.lower_corner[k];
      inside = lo <= ex[k] && ex[k] < lo + side;
    }
    if (!inside) continue;
    if (custom) {
      for (std::size_t i = 0; i < piece.coeffs.size(); ++i)
        if (piece.coeffs[i] != 0) value += piece.coeffs[i] * sys_.functions()[i].eval(x);
    } else {
      const auto& [center, len] = frames_[p];
      for (std::size_t i = 0; i < piece.coeffs.size(); ++i) {
        if (piece.coeffs[i] == 0) continue;
        double mono = 1;
        for (std::size_t k = 0; k < x.size(); ++k)
          mono *= std::pow((x[k] - center[k]) / len, exps_[i][k]);
        value += piece.coeffs[i] * mono;
      }
    }
  }
  return value;
}

AxisCuts PiecewisePolyFn::cuts() const {
  AxisCuts cuts;
  for (const auto& piece : pieces_) add_box_cuts(cuts, piece.cell.box());
  return cuts;
}

void PiecewisePolyFn::scale(double a) {
  for (auto& piece : pieces_)
    for (auto& c : piece.coeffs) c *= a;
}

bool PiecewisePolyFn::compatible_with(const MomentSystem& sys) const {
  if (sys_.kind() != sys.kind()) return false;
  if (sys_.kind() == MomentSystem::Kind::Monomials) return sys_.kappa() == sys.kappa();
  return sys_.functions().size() == sys.functions().size();
}

void PiecewisePolyFn::add_scaled(double a, const PiecewisePolyFn& f) {
  if (f.is_zero() || a == 0) return;
  if (!has_system_) {
    *this = f;
    scale(a);
    return;
  }
  if (f.space_dim_ != space_dim_ || !compatible_with(f.sys_))
    throw std::invalid_argument("PiecewisePolyFn: incompatible systems in sum");
  for (std::size_t p = 0; p < f.pieces_.size(); ++p) {
    PolyPiece piece = f.pieces_[p];
    for (auto& c : piece.coeffs) c *= a;
    frames_.push_back(f.frames_[p]);
    pieces_.push_back(std::move(piece));
  }
}

void PiecewisePolyFn::add_piece(double a, const DyadicCube& cell,
                                const std::vector<double>& coeffs) {
  if (!has_system_) throw std::logic_error("PiecewisePolyFn::add_piece: no system set");
  PolyPiece piece{cell, coeffs};
  for (auto& c : piece.coeffs) c *= a;
  frames_.push_back(frame_of(cell));
  pieces_.push_back(std::move(piece));
}

PiecewisePolyFn linear_combination(double a, const PiecewisePolyFn& f, double b,
                                   const PiecewisePolyFn& g) {
  PiecewisePolyFn out;
  out.add_scaled(a, f);
  out.add_scaled(b, g);
  return out;
}

double inner_product(const PiecewisePolyFn& f, const PiecewisePolyFn& g, const Measure& mu) {
  if (f.is_zero() || g.is_zero()) return 0;
  const AxisCuts cuts = merge_cuts(f.cuts(), g.cuts());
  const SuperCube all = SuperCube::from_cube(mu.support_box());
  double s = 0;
  for (const auto& node : integration_nodes(mu, all, cuts)) s += node.w * f(node.x) * g(node.x);
  return s;
}

double l2_norm_sq(const PiecewisePolyFn& f, const Measure& mu) {
  if (f.is_zero()) return 0;
  const SuperCube all = SuperCube::from_cube(mu.support_box());
  double s = 0;
  for (const auto& node : integration_nodes(mu, all, f.cuts())) {
    const double v = f(node.x);
    s += node.w * v * v;
  }
  return s;
}

}  // namespace dyadic
