#include "ctrfn/numlin.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace ctrfn {

void validate(const Tolerance& tol) {
  if (!(tol.rank_tol > 0.0) || !(tol.rank_tol <= 1e-2) ||
      !(tol.eq_tol > 0.0) || !(tol.eq_tol <= 1e-2)) {
    throw ConfigError("tolerances must lie in (0, 1e-2]");
  }
}

Tolerance default_tolerance() {
  Tolerance tol;
  if (const char* env = std::getenv("CTRFN_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0) || !(v <= 1e-2)) {
      throw ConfigError("CTRFN_TOL must be a number in (0, 1e-2]");
    }
    tol.rank_tol = v;
    tol.eq_tol = v / 10.0;
  }
  validate(tol);
  return tol;
}

Subspace make_subspace(int ambient_dim, const Matrix& frame) {
  if (frame.rows() != ambient_dim) {
    throw DimensionMismatch("frame rows " + std::to_string(frame.rows()) +
                            " vs ambient dim " + std::to_string(ambient_dim));
  }
  return Subspace{ambient_dim, frame};
}

int numerical_rank(const Matrix& M, const Tolerance& tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  // The floor keeps a matrix that is noise through and through at rank 0
  // instead of promoting its largest rounding error to a pivot.
  const double cut = tol.rank_tol * std::max(1.0, s(0));
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return r;
}

Matrix orthonormal_columns(const Matrix& M, const Tolerance& tol) {
  if (M.rows() == 0 || M.cols() == 0) return Matrix(M.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return Matrix(M.rows(), 0);
  const double cut = tol.rank_tol * std::max(1.0, s(0));
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return svd.matrixU().leftCols(r);
}

Subspace kernel_space(const Matrix& M, const Tolerance& tol) {
  const int n = static_cast<int>(M.cols());
  if (M.rows() == 0 || n == 0) {
    return Subspace{n, Matrix::Identity(n, n)};
  }
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = (s.size() > 0) ? s(0) : 0.0;
  if (smax <= 0.0) {
    return Subspace{n, Matrix::Identity(n, n)};
  }
  const double cut = tol.rank_tol * std::max(1.0, smax);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return Subspace{n, svd.matrixV().rightCols(n - r)};
}

Subspace range_space(const Matrix& M, const Tolerance& tol) {
  return Subspace{static_cast<int>(M.rows()), orthonormal_columns(M, tol)};
}

Subspace subspace_intersect(const Subspace& U, const Subspace& V,
                            const Tolerance& tol) {
  if (U.ambient_dim != V.ambient_dim) {
    throw DimensionMismatch("subspace ambient dims " +
                            std::to_string(U.ambient_dim) + " vs " +
                            std::to_string(V.ambient_dim));
  }
  const int n = U.ambient_dim;
  if (U.dim() == 0 || V.dim() == 0) {
    return Subspace{n, Matrix(n, 0)};
  }
  // x lies in both spans iff both orthogonal projections fix it.
  Matrix stacked(2 * n, n);
  stacked.topRows(n) = Matrix::Identity(n, n) - U.frame * U.frame.adjoint();
  stacked.bottomRows(n) = Matrix::Identity(n, n) - V.frame * V.frame.adjoint();
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  // Projection defect is an absolute quantity for unit vectors; cut at
  // rank_tol directly rather than relative to sigma_max (which is ~1 here).
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol.rank_tol) ++r;
  }
  return Subspace{n, svd.matrixV().rightCols(n - r)};
}

Subspace ominus(const Subspace& B, const Subspace& A, const Tolerance& tol) {
  if (B.ambient_dim != A.ambient_dim) {
    throw DimensionMismatch("ominus ambient dims " +
                            std::to_string(B.ambient_dim) + " vs " +
                            std::to_string(A.ambient_dim));
  }
  if (B.dim() == 0) return Subspace{B.ambient_dim, Matrix(B.ambient_dim, 0)};
  if (A.dim() == 0) return B;
  // Coordinates of B directions orthogonal to A: kernel of A^H B inside B.
  const Matrix overlap = A.frame.adjoint() * B.frame;
  Subspace coord_kernel = [&] {
    Eigen::JacobiSVD<Matrix> svd(overlap, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > tol.rank_tol) ++r;
    }
    return Subspace{B.dim(), svd.matrixV().rightCols(B.dim() - r)};
  }();
  return Subspace{B.ambient_dim, B.frame * coord_kernel.frame};
}

bool subspace_contains(const Subspace& outer, const Subspace& inner,
                       const Tolerance& tol) {
  if (outer.ambient_dim != inner.ambient_dim) {
    throw DimensionMismatch("containment ambient dims " +
                            std::to_string(outer.ambient_dim) + " vs " +
                            std::to_string(inner.ambient_dim));
  }
  if (inner.dim() == 0) return true;
  if (outer.dim() == 0) return false;
  const Matrix resid =
      inner.frame - outer.frame * (outer.frame.adjoint() * inner.frame);
  for (Eigen::Index j = 0; j < resid.cols(); ++j) {
    if (resid.col(j).norm() > tol.eq_tol * 10.0) return false;
  }
  return true;
}

Matrix hermitian_sqrt(const Matrix& M, const Tolerance& tol) {
  if (M.rows() != M.cols()) {
    throw DimensionMismatch("hermitian_sqrt needs a square matrix");
  }
  if ((M - M.adjoint()).norm() > tol.eq_tol) {
    throw NotHermitian("asymmetry " + std::to_string((M - M.adjoint()).norm()));
  }
  const Matrix H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) {
    throw Inconclusive("eigensolver failed in hermitian_sqrt");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  const double floor = -10.0 * tol.rank_tol;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < floor) {
      throw NegativeEigenvalue("eigenvalue " + std::to_string(lam(i)));
    }
    if (lam(i) < 0.0) lam(i) = 0.0;
  }
  const Eigen::VectorXd roots = lam.cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() *
         es.eigenvectors().adjoint();
}

Matrix polar_unitary(const Matrix& M, const Tolerance& tol) {
  if (M.rows() != M.cols()) {
    throw DimensionMismatch("polar_unitary needs a square matrix");
  }
  if (M.rows() == 0) return Matrix(0, 0);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = (s.size() > 0) ? s(0) : 0.0;
  const double smin = (s.size() > 0) ? s(s.size() - 1) : 0.0;
  if (s.size() == 0 || smin <= tol.rank_tol * std::max(1.0, smax)) {
    throw RankDeficient("sigma_min " + std::to_string(smin));
  }
  return svd.matrixU() * svd.matrixV().adjoint();
}

Matrix svd_unitary_factor(const Matrix& M) {
  if (M.rows() != M.cols()) {
    throw DimensionMismatch("svd_unitary_factor needs a square matrix");
  }
  if (M.rows() == 0) return Matrix(0, 0);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

std::vector<int> rank_sequence(const Matrix& N, int kmax,
                               const Tolerance& tol) {
  if (N.rows() != N.cols()) {
    throw DimensionMismatch("rank_sequence needs a square matrix");
  }
  if (kmax < 0) throw ConfigError("rank_sequence kmax must be >= 0");
  std::vector<int> ranks;
  ranks.reserve(kmax + 1);
  const int n = static_cast<int>(N.rows());
  ranks.push_back(n);  // N^0 = I
  const double base = (n == 0) ? 1.0 : std::max(1.0, N.operatorNorm());
  Matrix P = Matrix::Identity(n, n);
  double scale = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    P = P * N;
    scale *= base;
    if (n == 0) {
      ranks.push_back(0);
      continue;
    }
    Eigen::JacobiSVD<Matrix> svd(P);
    const auto& s = svd.singularValues();
    const double cut = tol.rank_tol * scale;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > cut) ++r;
    }
    ranks.push_back(r);
  }
  return ranks;
}

}  // namespace ctrfn
