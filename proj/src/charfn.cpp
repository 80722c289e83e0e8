#include "ctrfn/charfn.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <utility>

namespace ctrfn {

namespace {

// Square root and range frame from one eigendecomposition of the Gram.
// Ranking on the Gram's eigenvalues (not on singular values of the root)
// keeps the full quadratic separation between true defect directions and
// roundoff dust.
std::pair<Matrix, Matrix> root_and_frame(const Matrix& G,
                                         const Tolerance& tol) {
  const int n = static_cast<int>(G.rows());
  if (n == 0) return {Matrix(0, 0), Matrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (G + G.adjoint()));
  const Eigen::VectorXd lam = es.eigenvalues();
  const double cut = tol.rank_tol * std::max(0.0, lam.maxCoeff());
  Eigen::VectorXd roots(n);
  int rank = 0;
  for (int i = 0; i < n; ++i) {
    roots(i) = lam(i) > cut ? std::sqrt(lam(i)) : 0.0;
    if (lam(i) > cut) ++rank;
  }
  const Matrix sqrtG =
      es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
  // Eigenvalues come out ascending: the kept directions are the last ones.
  const Matrix frame = es.eigenvectors().rightCols(rank);
  return {sqrtG, frame};
}

}  // namespace

DefectData defect_data(const WindowedShiftOperator& op, const Tolerance& tol) {
  auto [bt, bts] = defect_grams(op, tol);
  DefectData dd;
  dd.coords_T = fiber_coordinates(op, bt.fibers);
  dd.coords_Tstar = fiber_coordinates(op, bts.fibers);
  std::tie(dd.sqrt_T, dd.frame_T) = root_and_frame(bt.mat, tol);
  std::tie(dd.sqrt_Tstar, dd.frame_Tstar) = root_and_frame(bts.mat, tol);
  dd.block_T = std::move(bt);
  dd.block_Tstar = std::move(bts);
  return dd;
}

std::vector<Matrix> theta_coeffs(const WindowedShiftOperator& op, int kmax,
                                 const Tolerance& tol) {
  if (kmax < 0) throw ConfigError("theta_coeffs needs kmax >= 0");
  const DefectData dd = defect_data(op, tol);
  const int p = dd.defect_rank();
  const int q = dd.defect_rank_star();
  std::vector<Matrix> out;
  out.reserve(kmax + 1);

  // Theta_0 = -P T restricted to the defect frames.
  Matrix theta0(q, p);
  std::vector<WindowVector> carried(p);
  for (int j = 0; j < p; ++j) {
    const WindowVector u = expand_from(dd.coords_T, dd.frame_T.col(j));
    const WindowVector Tu = ctrfn::apply(op, u);
    theta0.col(j) = -(dd.frame_Tstar.adjoint() * restrict_to(Tu, dd.coords_Tstar));
    // Seed for the higher coefficients: D_T u.
    carried[j] = expand_from(dd.coords_T, dd.sqrt_T * dd.frame_T.col(j));
  }
  out.push_back(theta0);

  // Theta_k = D_{T*} T*^{k-1} D_T, compressed to the frames.
  const Matrix lift = (dd.sqrt_Tstar * dd.frame_Tstar).adjoint();
  for (int k = 1; k <= kmax; ++k) {
    Matrix tk(q, p);
    for (int j = 0; j < p; ++j) {
      if (k > 1) carried[j] = adjoint_apply(op, carried[j]);
      tk.col(j) = lift * restrict_to(carried[j], dd.coords_Tstar);
    }
    out.push_back(tk);
  }
  return out;
}

Degree poly_degree(const std::vector<Matrix>& coeffs, const Tolerance& tol) {
  double scale = 0.0;
  for (const Matrix& c : coeffs) scale = std::max(scale, c.norm());
  if (scale <= 0.0) return Degree{0, false};
  const double cut = tol.rank_tol * scale;
  int deg = 0;
  for (size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k].norm() > cut) deg = static_cast<int>(k);
  }
  const bool open = !coeffs.empty() && coeffs.back().norm() > cut;
  return Degree{deg, open};
}

Matrix eval_poly(const std::vector<Matrix>& coeffs, cplx z) {
  if (coeffs.empty()) return Matrix(0, 0);
  Matrix acc = coeffs.back();
  for (size_t k = coeffs.size() - 1; k-- > 0;) {
    acc = coeffs[k] + z * acc;
  }
  return acc;
}

int degree_bound(const WindowedShiftOperator& op) {
  return (op.hi - op.lo + 1) + op.max_jump() + 2;
}

Matrix theta_at(const WindowedShiftOperator& op, cplx z, const Tolerance& tol,
                int budget) {
  if (std::abs(z) >= 1.0) {
    throw OutsideDisk("|z| = " + std::to_string(std::abs(z)));
  }
  const int bound = budget >= 0 ? budget : degree_bound(op);
  const std::vector<Matrix> coeffs = theta_coeffs(op, bound, tol);
  const Degree deg = poly_degree(coeffs, tol);
  if (deg.at_least) {
    throw BudgetExceeded("coefficient " + std::to_string(deg.value) +
                         " still carries mass at the degree bound");
  }
  return eval_poly(coeffs, z);
}

bool in_disk_spectrum(const WindowedShiftOperator& op, cplx z,
                      const Tolerance& tol) {
  if (std::abs(z) >= 1.0) {
    throw OutsideDisk("|z| = " + std::to_string(std::abs(z)));
  }
  const Matrix th = theta_at(op, z, tol);
  if (th.rows() != th.cols()) return true;
  if (th.rows() == 0) return false;  // unitary part absent, empty defects
  Eigen::JacobiSVD<Matrix> svd(th);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) <= tol.rank_tol;
}

}  // namespace ctrfn
