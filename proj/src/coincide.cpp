#include "ctrfn/coincide.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

namespace ctrfn {

namespace {

cplx unit_phase(cplx v) {
  const double m = std::abs(v);
  return m > 0.0 ? v / m : cplx(1.0);
}

Matrix ones1(cplx v) {
  Matrix M(1, 1);
  M(0, 0) = v;
  return M;
}

double family_scale(const std::vector<Matrix>& P) {
  double s = 0.0;
  for (const Matrix& c : P) s = std::max(s, c.norm());
  return s;
}

double pair_residual(const std::vector<Matrix>& P,
                     const std::vector<Matrix>& Q, const Matrix& tau,
                     const Matrix& tau_star) {
  double sq = 0.0;
  const size_t n = std::max(P.size(), Q.size());
  for (size_t k = 0; k < n; ++k) {
    const Matrix lhs = k < P.size()
                           ? Matrix(tau_star * P[k])
                           : Matrix::Zero(tau_star.rows(), tau.cols());
    const Matrix rhs = k < Q.size()
                           ? Matrix(Q[k] * tau)
                           : Matrix::Zero(tau_star.rows(), tau.cols());
    sq += (lhs - rhs).squaredNorm();
  }
  return std::sqrt(sq);
}

Matrix unitary_factor(const Matrix& M, const Tolerance& tol) {
  try {
    return polar_unitary(M, tol);
  } catch (const RankDeficient&) {
    return svd_unitary_factor(M);
  }
}

Matrix haar_unitary(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = cplx(g(gen), g(gen));
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix R = Q.adjoint() * M;
  for (int j = 0; j < n; ++j) Q.col(j) *= unit_phase(R(j, j));
  return Q;
}

// Effective degree under a shared relative cut; -1 for an all-zero family.
int effective_degree(const std::vector<Matrix>& P, double cut) {
  int deg = -1;
  for (size_t k = 0; k < P.size(); ++k) {
    if (P[k].norm() > cut) deg = static_cast<int>(k);
  }
  return deg;
}

}  // namespace

CoincidenceResult coincide_scalar(const std::vector<cplx>& P,
                                  const std::vector<cplx>& Q,
                                  const Tolerance& tol) {
  CoincidenceResult res;
  res.tau = ones1(1.0);
  double pmax = 0.0;
  size_t kstar = 0;
  for (size_t k = 0; k < P.size(); ++k) {
    if (std::abs(P[k]) > pmax) {
      pmax = std::abs(P[k]);
      kstar = k;
    }
  }
  double qmax = 0.0;
  for (const cplx& q : Q) qmax = std::max(qmax, std::abs(q));
  if (pmax == 0.0 && qmax == 0.0) {
    res.kind = CoincidenceResult::Kind::Coincide;
    res.tau_star = ones1(1.0);
    res.residual = 0.0;
    return res;
  }
  const cplx lambda =
      pmax > 0.0 ? unit_phase((kstar < Q.size() ? Q[kstar] : cplx(0.0)) *
                              std::conj(P[kstar]))
                 : cplx(1.0);
  double resid = 0.0;
  const size_t n = std::max(P.size(), Q.size());
  for (size_t k = 0; k < n; ++k) {
    const cplx p = k < P.size() ? P[k] : cplx(0.0);
    const cplx q = k < Q.size() ? Q[k] : cplx(0.0);
    resid = std::max(resid, std::abs(lambda * p - q));
  }
  res.tau_star = ones1(lambda);
  res.residual = resid;
  if (resid <= tol.eq_tol) {
    res.kind = CoincidenceResult::Kind::Coincide;
  } else {
    res.kind = CoincidenceResult::Kind::NoCoincidence;
    res.reason = "no unimodular factor matches all coefficients";
  }
  return res;
}

CoincidenceResult coincide_monomial(const std::vector<Matrix>& P,
                                    const std::vector<Matrix>& Q,
                                    const Tolerance& tol) {
  const double ps = family_scale(P), qs = family_scale(Q);
  const double pcut = tol.rank_tol * ps, qcut = tol.rank_tol * qs;
  int kp = -1, kq = -1;
  for (size_t k = 0; k < P.size(); ++k) {
    if (P[k].norm() > pcut) {
      if (kp >= 0) throw DegreeMismatch("first input is not a monomial");
      kp = static_cast<int>(k);
    }
  }
  for (size_t k = 0; k < Q.size(); ++k) {
    if (Q[k].norm() > qcut) {
      if (kq >= 0) throw DegreeMismatch("second input is not a monomial");
      kq = static_cast<int>(k);
    }
  }
  if (kp < 0 || kq < 0 || kp != kq) {
    throw DegreeMismatch("monomial powers " + std::to_string(kp) + " vs " +
                         std::to_string(kq));
  }
  const Matrix& A = P[kp];
  const Matrix& B = Q[kq];
  CoincidenceResult res;
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    res.kind = CoincidenceResult::Kind::NoCoincidence;
    res.reason = "coefficient shapes differ";
    return res;
  }
  Eigen::JacobiSVD<Matrix> sa(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::JacobiSVD<Matrix> sb(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double sdiff =
      (sa.singularValues() - sb.singularValues()).lpNorm<Eigen::Infinity>();
  if (sdiff > tol.eq_tol * std::max(1.0, sa.singularValues()(0))) {
    res.kind = CoincidenceResult::Kind::NoCoincidence;
    res.reason = "singular values differ by " + std::to_string(sdiff);
    return res;
  }
  // With matching spectra any SVD pair certifies: tau_star A = U_B S_A V_A^H
  // and B tau = U_B S_B V_A^H agree up to the spectral gap.
  res.tau_star = sb.matrixU() * sa.matrixU().adjoint();
  res.tau = sb.matrixV() * sa.matrixV().adjoint();
  res.residual = pair_residual(P, Q, res.tau, res.tau_star);
  if (res.residual > 0.5 * tol.eq_tol) {
    // Polish with a few alternating updates; keep whichever is better.
    Matrix tau = res.tau, tau_star = res.tau_star;
    for (int it = 0; it < 50; ++it) {
      tau_star = unitary_factor(B * tau * A.adjoint(), tol);
      tau = unitary_factor(B.adjoint() * tau_star * A, tol);
    }
    const double polished = pair_residual(P, Q, tau, tau_star);
    if (polished < res.residual) {
      res.tau = tau;
      res.tau_star = tau_star;
      res.residual = polished;
    }
  }
  res.kind = res.residual <= tol.eq_tol
                 ? CoincidenceResult::Kind::Coincide
                 : CoincidenceResult::Kind::NoCoincidence;
  if (res.kind == CoincidenceResult::Kind::NoCoincidence) {
    res.reason = "certificate residual " + std::to_string(res.residual);
  }
  return res;
}

CoincidenceResult coincide_general(const std::vector<Matrix>& P,
                                   const std::vector<Matrix>& Q,
                                   const Tolerance& tol, int restarts,
                                   std::uint64_t seed) {
  CoincidenceResult res;
  const double ps = family_scale(P), qs = family_scale(Q);

  int prows = -1, pcols = -1;
  for (const Matrix& c : P) {
    if (prows < 0) {
      prows = static_cast<int>(c.rows());
      pcols = static_cast<int>(c.cols());
    } else if (c.rows() != prows || c.cols() != pcols) {
      throw DimensionMismatch("ragged coefficient family");
    }
  }
  int qrows = -1, qcols = -1;
  for (const Matrix& c : Q) {
    if (qrows < 0) {
      qrows = static_cast<int>(c.rows());
      qcols = static_cast<int>(c.cols());
    } else if (c.rows() != qrows || c.cols() != qcols) {
      throw DimensionMismatch("ragged coefficient family");
    }
  }
  if (prows < 0 || qrows < 0) {
    throw ConfigError("empty coefficient family");
  }
  if (prows != qrows || pcols != qcols) {
    res.kind = CoincidenceResult::Kind::NoCertificate;
    res.reason = "coefficient shapes differ";
    return res;
  }
  const int q = prows, p = pcols;
  if (p == 0 || q == 0) {
    // Every coefficient is an empty block; any unitary pair certifies.
    res.kind = CoincidenceResult::Kind::Coincide;
    res.tau = Matrix::Identity(p, p);
    res.tau_star = Matrix::Identity(q, q);
    res.residual = 0.0;
    return res;
  }

  const double cut = tol.rank_tol * std::max(ps, qs);
  if (effective_degree(P, cut) != effective_degree(Q, cut)) {
    res.kind = CoincidenceResult::Kind::NoCertificate;
    res.reason = "effective degrees differ";
    return res;
  }
  const size_t terms = std::max(P.size(), Q.size());
  std::vector<Matrix> A(terms), B(terms);
  for (size_t k = 0; k < terms; ++k) {
    A[k] = k < P.size() ? P[k] : Matrix::Zero(q, p);
    B[k] = k < Q.size() ? Q[k] : Matrix::Zero(q, p);
    Eigen::JacobiSVD<Matrix> sa(A[k]);
    Eigen::JacobiSVD<Matrix> sb(B[k]);
    const double gap =
        (sa.singularValues() - sb.singularValues()).lpNorm<Eigen::Infinity>();
    if (gap > tol.rank_tol * std::max(1.0, std::max(ps, qs))) {
      res.kind = CoincidenceResult::Kind::NoCertificate;
      res.reason = "coefficient " + std::to_string(k) +
                   " singular values differ by " + std::to_string(gap);
      return res;
    }
  }

  // Any certificate solves the linear system tau_star A_k = B_k tau, so the
  // joint nullspace over (tau, tau_star) both screens impossibility and hands
  // the search its starting points.
  Matrix L = Matrix::Zero(static_cast<int>(terms) * q * p, p * p + q * q);
  for (size_t k = 0; k < terms; ++k) {
    for (int r = 0; r < q; ++r) {
      for (int c = 0; c < p; ++c) {
        const int row = (static_cast<int>(k) * q + r) * p + c;
        for (int s = 0; s < p; ++s) L(row, c * p + s) = -B[k](r, s);
        for (int s = 0; s < q; ++s) L(row, p * p + s * q + r) += A[k](s, c);
      }
    }
  }
  const Subspace ker = kernel_space(L, tol);
  if (ker.dim() == 0) {
    res.kind = CoincidenceResult::Kind::NoCertificate;
    res.reason = "intertwining equations admit only the trivial solution";
    return res;
  }

  auto run_from = [&](Matrix tau) {
    Matrix tau_star;
    double prev = -1.0;
    for (int it = 0; it < 200; ++it) {
      Matrix M = Matrix::Zero(q, q);
      for (size_t k = 0; k < terms; ++k) M += B[k] * tau * A[k].adjoint();
      tau_star = unitary_factor(M, tol);
      Matrix N = Matrix::Zero(p, p);
      for (size_t k = 0; k < terms; ++k) N += B[k].adjoint() * tau_star * A[k];
      tau = unitary_factor(N, tol);
      const double r = pair_residual(P, Q, tau, tau_star);
      if (prev >= 0.0 && std::abs(prev - r) < 1e-14) break;
      prev = r;
    }
    return std::make_pair(tau, tau_star);
  };

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix> starts;
  auto push_kernel_start = [&](const Vector& u) {
    Matrix X(p, p);
    for (int c = 0; c < p; ++c)
      for (int s = 0; s < p; ++s) X(s, c) = u(c * p + s);
    if (X.norm() > 1e-12 * u.norm()) starts.push_back(unitary_factor(X, tol));
  };
  for (int j = 0; j < ker.dim(); ++j) push_kernel_start(ker.frame.col(j));
  if (ker.dim() > 1) {
    for (int t = 0; t < std::min(restarts, 4); ++t) {
      Vector w(ker.dim());
      for (int j = 0; j < ker.dim(); ++j) w(j) = cplx(gauss(gen), gauss(gen));
      push_kernel_start(ker.frame * w);
    }
  }
  starts.push_back(Matrix::Identity(p, p));
  for (int r = 0; r < restarts; ++r) starts.push_back(haar_unitary(p, gen));

  double best = -1.0;
  for (const Matrix& start : starts) {
    auto [tau, tau_star] = run_from(start);
    const double resid = pair_residual(P, Q, tau, tau_star);
    if (best < 0.0 || resid < best) {
      best = resid;
      res.tau = tau;
      res.tau_star = tau_star;
    }
    if (best <= tol.eq_tol) break;
  }
  res.residual = best;
  if (best <= tol.eq_tol) {
    res.kind = CoincidenceResult::Kind::Coincide;
  } else {
    res.kind = CoincidenceResult::Kind::NoCertificate;
    res.reason = "best certificate residual " + std::to_string(best);
  }
  return res;
}

}  // namespace ctrfn
