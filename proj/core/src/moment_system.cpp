#include "dyadic/moment_system.hpp"

#include <cmath>

namespace dyadic {

MomentSystem MomentSystem::monomials(int kappa) {
  if (kappa < 1) throw std::invalid_argument("MomentSystem::monomials: kappa must be >= 1");
  MomentSystem sys;
  sys.kind_ = Kind::Monomials;
  sys.kappa_ = kappa;
  return sys;
}

MomentSystem MomentSystem::custom(std::vector<SystemFn> fns, int smoothness) {
  if (fns.empty()) throw std::invalid_argument("MomentSystem::custom: empty system");
  if (smoothness < 1) throw std::invalid_argument("MomentSystem::custom: smoothness must be >= 1");
  for (const auto& fn : fns)
    if (!fn.eval) throw std::invalid_argument("MomentSystem::custom: missing eval callback");
  MomentSystem sys;
  sys.kind_ = Kind::Custom;
  sys.kappa_ = smoothness;
  sys.fns_ = std::move(fns);
  return sys;
}

int MomentSystem::dimension(int space_dim) const {
  if (kind_ == Kind::Custom) return static_cast<int>(fns_.size());
  return static_cast<int>(multi_indices_below(space_dim, kappa_).size());
}

LocalSystem::LocalSystem(const MomentSystem& sys, int space_dim, Point center, double scale_len)
    : sys_(&sys), center_(std::move(center)), scale_(scale_len) {
  if (static_cast<int>(center_.size()) != space_dim)
    throw std::invalid_argument("LocalSystem: center dimension mismatch");
  if (!(scale_ > 0)) throw std::invalid_argument("LocalSystem: scale must be positive");
  if (sys.kind() == MomentSystem::Kind::Monomials)
    exps_ = multi_indices_below(space_dim, sys.kappa());
  size_ = sys.dimension(space_dim);
}

double LocalSystem::eval(int i, const Point& x) const {
  if (sys_->kind() == MomentSystem::Kind::Custom) return sys_->functions()[static_cast<std::size_t>(i)].eval(x);
  const MultiIndex& beta = exps_[static_cast<std::size_t>(i)];
  double v = 1;
  for (std::size_t k = 0; k < beta.size(); ++k)
    v *= std::pow((x[k] - center_[k]) / scale_, beta[k]);
  return v;
}

LocalSystem cube_frame(const MomentSystem& sys, const DyadicCube& cube) {
  return LocalSystem(sys, cube.dimension(), cube.center(),
                     cube.side_length().to_double());
}

}  // namespace dyadic
