#include "dyadic/alpert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace dyadic {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Rank-revealed solve of S c = b for a symmetric PSD Gram S.
VectorXd pinv_solve(const MatrixXd& S, const VectorXd& b) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (S + S.transpose()));
  const VectorXd& lam = eig.eigenvalues();
  const double lmax = lam.size() ? lam(lam.size() - 1) : 0.0;
  const double cut = std::max(kRankTolRelative * lmax, kRankTolAbsolute);
  VectorXd c = VectorXd::Zero(b.size());
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) <= cut) continue;
    const VectorXd v = eig.eigenvectors().col(i);
    c += (v.dot(b) / lam(i)) * v;
  }
  return c;
}

double fd_derivative(const SystemFn& phi, const MultiIndex& alpha, const Point& a, double h) {
  int axis = -1;
  for (std::size_t k = 0; k < alpha.size(); ++k)
    if (alpha[k] > 0) {
      axis = static_cast<int>(k);
      break;
    }
  if (axis < 0) return phi.eval(a);
  MultiIndex lower = alpha;
  --lower[static_cast<std::size_t>(axis)];
  Point ap = a, am = a;
  ap[static_cast<std::size_t>(axis)] += h;
  am[static_cast<std::size_t>(axis)] -= h;
  return (fd_derivative(phi, lower, ap, h) - fd_derivative(phi, lower, am, h)) / (2 * h);
}

}  // namespace

AlpertBasis build_alpert_basis(const GridSpec& grid, const DyadicCube& Q, const Measure& mu,
                               const MomentSystem& sys) {
  AlpertBasis basis;
  basis.cube = Q;
  const int n = Q.dimension();
  const int d = sys.dimension(n);

  std::vector<DyadicCube> kids;
  for (auto& child : children(grid, Q))
    if (mass(mu, child) > 0) kids.push_back(child);
  if (kids.empty()) return basis;
  const int nc = static_cast<int>(kids.size());
  const int m = nc * d;

  const LocalSystem parent_frame = cube_frame(sys, Q);

  // Generator Gram (block diagonal per child) and parent-moment constraints.
  MatrixXd G = MatrixXd::Zero(m, m);
  MatrixXd M = MatrixXd::Zero(d, m);
  for (int c = 0; c < nc; ++c) {
    const auto nodes = integration_nodes(mu, SuperCube::from_cube(kids[static_cast<std::size_t>(c)]));
    const LocalSystem child_frame = cube_frame(sys, kids[static_cast<std::size_t>(c)]);
    MatrixXd Vc(static_cast<Eigen::Index>(nodes.size()), d);
    MatrixXd Vp(static_cast<Eigen::Index>(nodes.size()), d);
    VectorXd w(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t t = 0; t < nodes.size(); ++t) {
      w(static_cast<Eigen::Index>(t)) = nodes[t].w;
      for (int i = 0; i < d; ++i) {
        Vc(static_cast<Eigen::Index>(t), i) = child_frame.eval(i, nodes[t].x);
        Vp(static_cast<Eigen::Index>(t), i) = parent_frame.eval(i, nodes[t].x);
      }
    }
    G.block(c * d, c * d, d, d) = Vc.transpose() * w.asDiagonal() * Vc;
    M.block(0, c * d, d, d) = Vp.transpose() * w.asDiagonal() * Vc;
  }

  // Null space of the moment constraints.
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > std::max(kRankTolRelative * smax, kRankTolAbsolute)) ++rank;
  const int null_dim = m - rank;
  if (null_dim <= 0) return basis;
  const MatrixXd N = svd.matrixV().rightCols(null_dim);

  // Orthonormalize inside the null space under the Gram inner product.
  const MatrixXd H = N.transpose() * G * N;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (H + H.transpose()));
  const VectorXd& lam = eig.eigenvalues();  // ascending
  const double lmax = lam(lam.size() - 1);
  const double cut = std::max(kRankTolRelative * lmax, kRankTolAbsolute);
  std::vector<int> keep;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) > cut) keep.push_back(i);
  const int r = static_cast<int>(keep.size());
  if (r == 0) return basis;
  MatrixXd B(m, r);
  for (int k = 0; k < r; ++k)
    B.col(k) = N * eig.eigenvectors().col(keep[static_cast<std::size_t>(k)]) /
               std::sqrt(lam(keep[static_cast<std::size_t>(k)]));

  // Canonical pass: Gram-Schmidt over the Riesz representatives of the
  // child-moment functionals u -> <u, 1_{child} phi_i>_mu, in child-major
  // order. Row j of A holds representative j in the B-coordinates (where the
  // inner product is Euclidean), so the result depends only on the subspace
  // and the functional sequence — not on the generator frame. Each pivot is
  // automatically positive against its own functional.
  const MatrixXd A = G * B;
  double max_norm = 0;
  for (int j = 0; j < m; ++j) max_norm = std::max(max_norm, A.row(j).norm());
  MatrixXd W(r, r);
  int got = 0;
  for (double tol : {1e-7, 1e-9, 1e-11}) {
    got = 0;
    for (int j = 0; j < m && got < r; ++j) {
      VectorXd v = A.row(j).transpose();
      for (int pass = 0; pass < 2; ++pass)
        for (int k = 0; k < got; ++k) v -= W.col(k).dot(v) * W.col(k);
      if (v.norm() > tol * max_norm) W.col(got++) = v / v.norm();
    }
    if (got == r) break;
  }
  if (got != r) throw std::logic_error("build_alpert_basis: canonical pass lost rank");

  const MatrixXd C = B * W;  // generator coefficients per basis function
  for (int k = 0; k < r; ++k) {
    std::vector<PolyPiece> pieces;
    for (int c = 0; c < nc; ++c) {
      std::vector<double> coeffs(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) coeffs[static_cast<std::size_t>(i)] = C(c * d + i, k);
      pieces.push_back({kids[static_cast<std::size_t>(c)], std::move(coeffs)});
    }
    basis.functions.emplace_back(sys, n, std::move(pieces));
  }
  return basis;
}

std::pair<std::vector<double>, PiecewisePolyFn> project_delta(const PiecewisePolyFn& f,
                                                              const AlpertBasis& basis,
                                                              const Measure& mu) {
  std::vector<double> fhat(static_cast<std::size_t>(basis.dim()), 0.0);
  PiecewisePolyFn delta;
  if (basis.dim() == 0 || f.is_zero()) return {std::move(fhat), std::move(delta)};

  AxisCuts cuts = f.cuts();
  for (const auto& h : basis.functions) cuts = merge_cuts(std::move(cuts), h.cuts());
  const auto nodes = integration_nodes(mu, SuperCube::from_cube(basis.cube), cuts);
  std::vector<double> fv(nodes.size());
  for (std::size_t t = 0; t < nodes.size(); ++t) fv[t] = f(nodes[t].x);
  for (int a = 0; a < basis.dim(); ++a) {
    double s = 0;
    const auto& h = basis.functions[static_cast<std::size_t>(a)];
    for (std::size_t t = 0; t < nodes.size(); ++t) s += nodes[t].w * fv[t] * h(nodes[t].x);
    fhat[static_cast<std::size_t>(a)] = s;
  }
  for (int a = 0; a < basis.dim(); ++a)
    delta.add_scaled(fhat[static_cast<std::size_t>(a)], basis.functions[static_cast<std::size_t>(a)]);
  return {std::move(fhat), std::move(delta)};
}

namespace {

PiecewisePolyFn project_on_nodes(const PiecewisePolyFn& f, const DyadicCube& carrier,
                                 const std::vector<WeightedNode>& nodes,
                                 const MomentSystem& sys) {
  if (nodes.empty()) return {};
  const int n = carrier.dimension();
  const LocalSystem loc = cube_frame(sys, carrier);
  const int d = loc.size();
  MatrixXd V(static_cast<Eigen::Index>(nodes.size()), d);
  VectorXd w(static_cast<Eigen::Index>(nodes.size()));
  VectorXd fv(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    w(static_cast<Eigen::Index>(t)) = nodes[t].w;
    fv(static_cast<Eigen::Index>(t)) = f.is_zero() ? 0.0 : f(nodes[t].x);
    for (int i = 0; i < d; ++i) V(static_cast<Eigen::Index>(t), i) = loc.eval(i, nodes[t].x);
  }
  const MatrixXd S = V.transpose() * w.asDiagonal() * V;
  const VectorXd b = V.transpose() * w.asDiagonal() * fv;
  const VectorXd c = pinv_solve(S, b);
  std::vector<double> coeffs(c.data(), c.data() + c.size());
  return PiecewisePolyFn(sys, n, {{carrier, std::move(coeffs)}});
}

}  // namespace

PiecewisePolyFn project_E(const PiecewisePolyFn& f, const DyadicCube& region,
                          const Measure& mu, const MomentSystem& sys) {
  const auto nodes = integration_nodes(mu, SuperCube::from_cube(region), f.cuts());
  return project_on_nodes(f, region, nodes, sys);
}

int e_span_dimension(const SuperCube& region, const Measure& mu, const MomentSystem& sys) {
  const auto nodes = integration_nodes(mu, region);
  if (nodes.empty()) return 0;
  const LocalSystem loc = cube_frame(sys, mu.support_box());
  const int d = loc.size();
  MatrixXd V(static_cast<Eigen::Index>(nodes.size()), d);
  VectorXd w(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    w(static_cast<Eigen::Index>(t)) = nodes[t].w;
    for (int i = 0; i < d; ++i) V(static_cast<Eigen::Index>(t), i) = loc.eval(i, nodes[t].x);
  }
  const MatrixXd G = V.transpose() * w.asDiagonal() * V;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (G + G.transpose()));
  const VectorXd& lam = eig.eigenvalues();
  const double lmax = lam(lam.size() - 1);
  const double cut = std::max(kRankTolRelative * lmax, kRankTolAbsolute);
  int rank = 0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) > cut) ++rank;
  return rank;
}

PiecewisePolyFn project_E_top(const PiecewisePolyFn& f, const SuperCube& top,
                              const GridSpec& grid, const Measure& mu,
                              const MomentSystem& sys) {
  const auto part = top.clip(mu.support_box().box());
  if (!part || mass(mu, top) == 0) return {};

  // Carrier: climb the tower over the clipped box's corner until it covers
  // the box. Grid cubes never cross top boundaries, so the carrier stays
  // inside the top.
  std::vector<DyadicRational> seed;
  for (const auto& iv : *part) seed.push_back(iv.lo);
  DyadicCube carrier;
  bool found = false;
  for (std::int64_t m = mu.support_box().scale; m <= kMaxScale && !found; ++m) {
    carrier = cube_at(grid, seed, m);
    found = true;
    const DyadicRational side = carrier.side_length();
    for (std::size_t k = 0; k < seed.size() && found; ++k)
      found = !(carrier.lower_corner[k] + side < (*part)[k].hi);
  }
  if (!found) throw std::domain_error("project_E_top: support exceeds representable scales");

  const auto nodes = integration_nodes(mu, top, f.cuts());
  return project_on_nodes(f, carrier, nodes, sys);
}

double check_moment_vanishing(const AlpertBasis& basis, const Measure& mu,
                              const MomentSystem& sys) {
  if (basis.dim() == 0) return 0;
  const LocalSystem loc = cube_frame(sys, basis.cube);
  AxisCuts cuts;
  for (const auto& h : basis.functions) cuts = merge_cuts(std::move(cuts), h.cuts());
  const auto nodes = integration_nodes(mu, SuperCube::from_cube(basis.cube), cuts);

  double worst = 0;
  for (const auto& h : basis.functions) {
    std::vector<double> hv(nodes.size());
    for (std::size_t t = 0; t < nodes.size(); ++t) hv[t] = h(nodes[t].x);
    for (int i = 0; i < loc.size(); ++i) {
      double s = 0;
      for (std::size_t t = 0; t < nodes.size(); ++t)
        s += nodes[t].w * hv[t] * loc.eval(i, nodes[t].x);
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

EBoundReport e_bound_report(const PiecewisePolyFn& f, const DyadicCube& I, const Measure& mu,
                            const MomentSystem& sys) {
  const auto nodes = integration_nodes(mu, SuperCube::from_cube(I), f.cuts());
  EBoundReport rep;
  for (const auto& node : nodes) rep.cube_mass += node.w;
  if (!(rep.cube_mass > 0)) throw std::domain_error("e_bound_report: |I|_mu = 0");

  std::vector<double> fv(nodes.size());
  double abs_sum = 0, sq_sum = 0;
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    fv[t] = f(nodes[t].x);
    abs_sum += nodes[t].w * std::abs(fv[t]);
    sq_sum += nodes[t].w * fv[t] * fv[t];
  }
  rep.mean_abs = abs_sum / rep.cube_mass;
  rep.mean_sq = sq_sum / rep.cube_mass;
  if (!(rep.mean_abs > 0)) throw std::domain_error("e_bound_report: f vanishes mu-a.e. on I");

  const PiecewisePolyFn Ef = project_E(f, I, mu, sys);
  for (const auto& node : nodes) rep.sup_E = std::max(rep.sup_E, std::abs(Ef(node.x)));
  rep.r1 = rep.sup_E / rep.mean_abs;
  rep.r2 = rep.mean_abs / std::sqrt(rep.mean_sq);
  return rep;
}

std::vector<MultiIndex> admissible_top_exponents(const Measure& mu, const SuperCube& top,
                                                 int kappa) {
  if (mass(mu, top) == 0) return {};
  return multi_indices_below(mu.dimension(), kappa);
}

FiniteTypeEstimate finite_type_estimate(const SystemFn& phi, int kappa,
                                        const std::vector<DyadicCube>& cubes) {
  if (cubes.empty()) throw std::invalid_argument("finite_type_estimate: no cubes");
  if (kappa < 1) throw std::invalid_argument("finite_type_estimate: kappa must be >= 1");

  FiniteTypeEstimate est;
  est.infimum = std::numeric_limits<double>::infinity();
  for (const DyadicCube& Q : cubes) {
    const int n = Q.dimension();
    const double side = Q.side_length().to_double();
    const double h = std::ldexp(side, -20);
    const auto alphas = multi_indices_below(n, kappa);

    // 3^n lattice at quarter offsets
    std::vector<int> pick(static_cast<std::size_t>(n), 0);
    while (true) {
      Point a(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k)
        a[static_cast<std::size_t>(k)] =
            Q.lower_corner[static_cast<std::size_t>(k)].to_double() +
            side * (pick[static_cast<std::size_t>(k)] + 1) * 0.25;
      double sum = 0;
      for (const auto& alpha : alphas) {
        const double dv = phi.derivative ? phi.derivative(alpha, a)
                                         : fd_derivative(phi, alpha, a, h);
        sum += std::abs(dv) * std::pow(side, total_degree(alpha));
      }
      if (sum < est.infimum) {
        est.infimum = sum;
        est.argmin_cube = Q;
        est.argmin_point = a;
      }
      int k = n - 1;
      while (k >= 0) {
        if (++pick[static_cast<std::size_t>(k)] < 3) break;
        pick[static_cast<std::size_t>(k)] = 0;
        --k;
      }
      if (k < 0) break;
    }
  }
  return est;
}

}  // namespace dyadic
