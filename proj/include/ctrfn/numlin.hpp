#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ctrfn/errors.hpp"

namespace ctrfn {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// rank_tol gates singular-value cutoffs, eq_tol gates residual equality checks.
// Both must lie in (0, 1e-2].
struct Tolerance {
  double rank_tol = 1e-8;
  double eq_tol = 1e-9;
};

// Defaults above, overridable by the CTRFN_TOL environment variable:
// CTRFN_TOL=v sets rank_tol = v and eq_tol = v / 10.
Tolerance default_tolerance();

void validate(const Tolerance& tol);

// A subspace of C^ambient_dim carried by an orthonormal column frame.
// frame has ambient_dim rows; its column count is the subspace dimension.
struct Subspace {
  int ambient_dim = 0;
  Matrix frame;

  int dim() const { return static_cast<int>(frame.cols()); }
};

Subspace make_subspace(int ambient_dim, const Matrix& frame);

// Number of singular values exceeding rank_tol * sigma_max.
int numerical_rank(const Matrix& M, const Tolerance& tol);

// Orthonormal basis for the span of the columns of M (QR with rank cut).
Matrix orthonormal_columns(const Matrix& M, const Tolerance& tol);

// {x : ||M x|| <= rank_tol * ||M|| * ||x||}, as an orthonormal frame.
Subspace kernel_space(const Matrix& M, const Tolerance& tol);

// Column space of M, as an orthonormal frame.
Subspace range_space(const Matrix& M, const Tolerance& tol);

// Intersection of two subspaces of the same ambient space.
// Throws DimensionMismatch if the ambient dimensions differ.
Subspace subspace_intersect(const Subspace& U, const Subspace& V,
                            const Tolerance& tol);

// Orthogonal complement of A inside B: B ominus (B intersect span A).
Subspace ominus(const Subspace& B, const Subspace& A, const Tolerance& tol);

// True if every column of inner lies within eq_tol of the span of outer.
bool subspace_contains(const Subspace& outer, const Subspace& inner,
                       const Tolerance& tol);

// Principal square root of a positive semidefinite Hermitian matrix.
// Throws NotHermitian if ||M - M^H||_F > eq_tol, NegativeEigenvalue if an
// eigenvalue falls below -10 * rank_tol; small negatives are clamped to zero.
Matrix hermitian_sqrt(const Matrix& M, const Tolerance& tol);

// Unitary factor of the polar decomposition M = U P, for square M.
// Throws DimensionMismatch for nonsquare input and RankDeficient when
// sigma_min <= rank_tol * max(1, sigma_max).
Matrix polar_unitary(const Matrix& M, const Tolerance& tol);

// U V^H from any SVD of M; agrees with polar_unitary on invertible input and
// stays well defined when M is singular. Square input only.
Matrix svd_unitary_factor(const Matrix& M);

// ranks of N^0, N^1, ..., N^kmax, each cut against
// rank_tol * max(1, ||N||_2)^k so roundoff dust in high powers reads as zero.
std::vector<int> rank_sequence(const Matrix& N, int kmax, const Tolerance& tol);

}  // namespace ctrfn
