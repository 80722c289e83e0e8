#pragma once

#include <utility>
#include <vector>

#include "ctrfn/windowed.hpp"

namespace ctrfn {

// Defect operators of a contraction, carried on their exact finite support.
// sqrt_T is D_T on the block coordinates of block_T (and likewise for the
// star side); the frames are orthonormal bases of the defect spaces in the
// same coordinates.
struct DefectData {
  FiberBlock block_T;
  FiberBlock block_Tstar;
  Matrix sqrt_T;
  Matrix sqrt_Tstar;
  Matrix frame_T;
  Matrix frame_Tstar;
  std::vector<std::pair<int, int>> coords_T;
  std::vector<std::pair<int, int>> coords_Tstar;

  int defect_rank() const { return static_cast<int>(frame_T.cols()); }
  int defect_rank_star() const { return static_cast<int>(frame_Tstar.cols()); }
};

DefectData defect_data(const WindowedShiftOperator& op, const Tolerance& tol);

// Taylor coefficients of the characteristic function, reported in the
// orthonormal defect frames: entry (i, j) of the k-th matrix is
// <v_i, Theta_k u_j>. Returns kmax + 1 matrices, each
// defect_rank_star x defect_rank, computed exactly from the block structure.
std::vector<Matrix> theta_coeffs(const WindowedShiftOperator& op, int kmax,
                                 const Tolerance& tol);

struct Degree {
  int value = 0;
  bool at_least = false;  // true when the last coefficient still carries mass
};

// Largest k whose coefficient exceeds rank_tol times the largest coefficient
// norm; degree 0 for an all-zero (or empty) family.
Degree poly_degree(const std::vector<Matrix>& coeffs, const Tolerance& tol);

Matrix eval_poly(const std::vector<Matrix>& coeffs, cplx z);

// Characteristic function value at z, |z| < 1 (throws OutsideDisk
// otherwise). The series is summed to the operator's structural degree
// bound; a nonvanishing final coefficient raises BudgetExceeded.
Matrix theta_at(const WindowedShiftOperator& op, cplx z, const Tolerance& tol,
                int budget = -1);

// Structural bound on the polynomial degree of the characteristic function:
// window span plus one, plus the largest jump, plus margin.
int degree_bound(const WindowedShiftOperator& op);

// True when z (|z| < 1) lies in the spectrum: the characteristic value
// Theta(z) fails to be invertible there.
bool in_disk_spectrum(const WindowedShiftOperator& op, cplx z,
                      const Tolerance& tol);

}  // namespace ctrfn
