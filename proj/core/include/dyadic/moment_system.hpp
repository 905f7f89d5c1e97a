#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic/grid.hpp"
#include "dyadic/multi_index.hpp"

namespace dyadic {

// One user-supplied system function. `derivative` (partial of order alpha) is
// optional; when absent, callers fall back to central finite differences.
struct SystemFn {
  std::function<double(const Point&)> eval;
  std::function<double(const MultiIndex&, const Point&)> derivative;
};

// The annihilated span: monomials of degree < kappa, or an explicit list of
// callbacks phi_1..phi_d with phi_1 == 1 (required, not checkable here).
class MomentSystem {
 public:
  enum class Kind { Monomials, Custom };

  static MomentSystem monomials(int kappa);
  static MomentSystem custom(std::vector<SystemFn> fns, int smoothness);

  Kind kind() const { return kind_; }
  // Degree bound for Monomials; declared smoothness order for Custom.
  int kappa() const { return kappa_; }
  int dimension(int space_dim) const;
  const std::vector<SystemFn>& functions() const { return fns_; }

 private:
  MomentSystem() = default;

  Kind kind_ = Kind::Monomials;
  int kappa_ = 1;
  std::vector<SystemFn> fns_;
};

// System functions pinned to a spatial dimension and an affine frame
// x~ = (x - center)/scale_len. Monomials are evaluated in the frame (for
// conditioning); custom callbacks are global and ignore it.
class LocalSystem {
 public:
  LocalSystem(const MomentSystem& sys, int space_dim, Point center, double scale_len);

  int size() const { return size_; }
  double eval(int i, const Point& x) const;
  const Point& center() const { return center_; }
  double scale_len() const { return scale_; }
  const std::vector<MultiIndex>& exponents() const { return exps_; }

 private:
  const MomentSystem* sys_;
  std::vector<MultiIndex> exps_;  // Monomials only
  Point center_;
  double scale_ = 1;
  int size_ = 0;
};

// Frame of a cube: center point and side length.
LocalSystem cube_frame(const MomentSystem& sys, const DyadicCube& cube);

}  // namespace dyadic
