#include "ctrfn/models.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

namespace ctrfn {

namespace {

Matrix scalar(cplx v) {
  Matrix M(1, 1);
  M(0, 0) = v;
  return M;
}

constexpr double kSlack = 1e-12;

double largest_singular_value(const Matrix& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

}  // namespace

cplx gamma_of(const TabcParams& p) {
  const double denom =
      std::sqrt(std::max(0.0, (1.0 - std::norm(p.a)) * (1.0 - std::norm(p.b))));
  if (denom <= kSlack) return 0.0;
  return p.c / denom;
}

WindowedShiftOperator make_Tabc(const TabcParams& p,
                                std::vector<std::string>* warnings) {
  const double na = std::norm(p.a), nb = std::norm(p.b), nc = std::norm(p.c);
  if (na > 1.0 + kSlack || nb > 1.0 + kSlack) {
    throw NotContraction("|a| and |b| must not exceed 1");
  }
  const double cap = (1.0 - std::min(1.0, na)) * (1.0 - std::min(1.0, nb));
  if (nc > cap + kSlack) {
    throw NotContraction("|c|^2 = " + std::to_string(nc) +
                         " exceeds (1-|a|^2)(1-|b|^2) = " +
                         std::to_string(cap));
  }
  if (warnings != nullptr && std::abs(1.0 - na) <= kSlack &&
      std::abs(1.0 - nb) <= kSlack) {
    warnings->push_back(
        "BilateralShiftCase: |a| = |b| = 1 gives a unitary bilateral shift "
        "with no contractive part");
  }
  std::map<int, std::vector<Block>> blocks;
  blocks[-1] = {Block{0, scalar(p.b)}, Block{1, scalar(p.c)}};
  blocks[0] = {Block{1, scalar(p.a)}};
  return make_windowed(FiberProfile{1, 1}, -1, 0, std::move(blocks));
}

Matrix make_Jm(int m, int dim) {
  if (m < 1 || dim < 1) throw ConfigError("make_Jm needs m >= 1 and dim >= 1");
  const int n = m * dim;
  Matrix J = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < m; ++k) {
    for (int i = 0; i < dim; ++i) J(k * dim + i, (k + 1) * dim + i) = 1.0;
  }
  return J;
}

WindowedShiftOperator jordan_window_model(int m, int dim) {
  if (m < 1 || dim < 1) {
    throw ConfigError("jordan_window_model needs m >= 1 and dim >= 1");
  }
  std::map<int, std::vector<Block>> blocks;
  for (int k = 0; k + 1 < m; ++k) {
    blocks[k] = {Block{k + 1, Matrix::Identity(dim, dim)}};
  }
  return make_windowed(FiberProfile{0, dim}, 0, m - 1, std::move(blocks),
                       true);
}

WindowedShiftOperator shift_model(int mult) {
  if (mult < 1) throw ConfigError("shift_model needs multiplicity >= 1");
  return make_windowed(FiberProfile{0, mult}, -1, -1, {});
}

WindowedShiftOperator coshift_model(int mult) {
  if (mult < 1) throw ConfigError("coshift_model needs multiplicity >= 1");
  return make_windowed(FiberProfile{mult, 0}, -1, -1, {});
}

namespace {

void require_pure(const Matrix& A, const Tolerance& tol) {
  const double smax = largest_singular_value(A);
  if (smax > 1.0 + tol.rank_tol) {
    throw NotContraction("coefficient norm " + std::to_string(smax));
  }
  if (smax > 1.0 - tol.rank_tol) {
    throw NotPureContraction("coefficient norm " + std::to_string(smax) +
                             " is not strictly below 1");
  }
}

}  // namespace

WindowedShiftOperator make_TA(const MonomialParams& p, const Tolerance& tol) {
  if (p.m < 1) throw ConfigError("monomial power must be >= 1");
  const int rows = static_cast<int>(p.A.rows());
  const int cols = static_cast<int>(p.A.cols());
  if (rows < 1 || cols < 1) throw ConfigError("empty monomial coefficient");
  require_pure(p.A, tol);
  const Matrix DAstar =
      hermitian_sqrt(Matrix::Identity(rows, rows) - p.A * p.A.adjoint(), tol);
  std::map<int, std::vector<Block>> blocks;
  blocks[-1] = {Block{p.m, -p.A}};
  for (int k = 0; k + 1 <= p.m - 1; ++k) {
    blocks[k] = {Block{k + 1, Matrix::Identity(rows, rows)}};
  }
  blocks[p.m - 1] = {Block{p.m, DAstar}};
  return make_windowed(FiberProfile{cols, rows}, -1, p.m - 1,
                       std::move(blocks));
}

WindowedShiftOperator make_TA_star(const MonomialParams& p,
                                   const Tolerance& tol) {
  if (p.m < 1) throw ConfigError("monomial power must be >= 1");
  const int rows = static_cast<int>(p.A.rows());
  const int cols = static_cast<int>(p.A.cols());
  if (rows < 1 || cols < 1) throw ConfigError("empty monomial coefficient");
  require_pure(p.A, tol);
  const Matrix DA =
      hermitian_sqrt(Matrix::Identity(cols, cols) - p.A.adjoint() * p.A, tol);
  std::map<int, std::vector<Block>> blocks;
  blocks[-p.m - 1] = {Block{0, -p.A}, Block{-p.m, DA}};
  for (int k = -p.m; k <= -2; ++k) {
    blocks[k] = {Block{k + 1, Matrix::Identity(cols, cols)}};
  }
  blocks[-1] = {};
  return make_windowed(FiberProfile{cols, rows}, -p.m - 1, -1,
                       std::move(blocks));
}

PurityResult is_purely_contractive(const Matrix& M, const Tolerance& tol) {
  const double smax = largest_singular_value(M);
  const double margin = 1.0 - smax;
  if (std::abs(margin) <= tol.rank_tol) {
    throw Inconclusive("largest singular value " + std::to_string(smax) +
                       " is within rank_tol of 1");
  }
  return PurityResult{margin > 0.0, margin};
}

Realization realize_degree_one(const DegreeOnePoly& target) {
  const double ma = std::abs(target.alpha);
  const double mb = std::abs(target.beta);
  if (ma > 1.0 + kSlack || mb > 1.0 + kSlack) {
    throw NotRealizable("coefficients must lie in the closed unit disk");
  }
  if (mb >= 1.0 - kSlack) {
    if (ma > kSlack) {
      throw NotRealizable("|beta| = 1 forces alpha = 0");
    }
    return MonomialParams{scalar(target.beta), 1};
  }
  if (ma + mb > 1.0 + kSlack) {
    throw NotRealizable("|alpha| + |beta| = " + std::to_string(ma + mb) +
                        " exceeds 1");
  }
  // x, y are the roots of t^2 - (1 + |alpha|^2 - |beta|^2) t + |alpha|^2,
  // with x the larger; then (1-x)(1-y) = |beta|^2 exactly.
  const double s = 1.0 + ma * ma - mb * mb;
  const double disc = std::max(0.0, s * s - 4.0 * ma * ma);
  const double x = 0.5 * (s + std::sqrt(disc));
  const double y = (x > 0.0) ? (ma * ma) / x : 0.0;
  const double phase_arg = (ma > 0.0) ? std::arg(target.alpha) : 0.0;
  TabcParams p;
  p.a = std::sqrt(std::max(0.0, std::min(1.0, x)));
  p.b = std::polar(std::sqrt(std::max(0.0, std::min(1.0, y))), phase_arg);
  p.c = target.beta;
  return p;
}

}  // namespace ctrfn
