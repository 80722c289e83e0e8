#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ctrfn/windowed.hpp"

namespace ctrfn {

// Degree-one weighted shift data: e_0 -> a e_1, e_{-1} -> b e_0 + c e_1,
// identity shift on every other fiber.
struct TabcParams {
  cplx a;
  cplx b;
  cplx c;
};

// Target of the degree-one realizer: the polynomial alpha + beta z (up to a
// unimodular factor).
struct DegreeOnePoly {
  cplx alpha;
  cplx beta;
};

// Monomial model data: coefficient A (mapping C^cols -> C^rows) attached to
// the power z^m.
struct MonomialParams {
  Matrix A;
  int m = 1;
};

// c may not exceed sqrt((1-|a|^2)(1-|b|^2)) in modulus; gamma names the ratio.
cplx gamma_of(const TabcParams& p);

// Builds the degree-one weighted shift. Throws NotContraction when the
// parameters violate the contraction constraints. When |a| = |b| = 1 the
// operator is a bilateral weighted shift with no contractive part; a
// BilateralShiftCase note is appended to `warnings` if provided.
WindowedShiftOperator make_Tabc(const TabcParams& p,
                                std::vector<std::string>* warnings = nullptr);

// Dense nilpotent block Jordan matrix of order m with dim-sized identity
// superdiagonal blocks, acting on C^{m*dim}.
Matrix make_Jm(int m, int dim);

// The same operator carried as a bounded windowed operator on fibers
// 0..m-1 of size dim.
WindowedShiftOperator jordan_window_model(int m, int dim);

// Unilateral shift of the given multiplicity (isometry), and its mirror
// co-shift (co-isometry).
WindowedShiftOperator shift_model(int mult);
WindowedShiftOperator coshift_model(int mult);

// Model operator for the monomial z^m A with pure contraction A.
// Throws NotContraction if ||A|| > 1, NotPureContraction if ||A|| is 1 up to
// rank_tol, ConfigError for m < 1.
WindowedShiftOperator make_TA(const MonomialParams& p, const Tolerance& tol);

// Star-side monomial model, supported on the negative fibers.
WindowedShiftOperator make_TA_star(const MonomialParams& p,
                                   const Tolerance& tol);

struct PurityResult {
  bool pure = false;
  double margin = 0.0;  // 1 - sigma_max
};

// Decides whether M is purely contractive (no unit vector with ||Mv|| = 1).
// Throws Inconclusive when sigma_max sits within rank_tol of 1.
PurityResult is_purely_contractive(const Matrix& M, const Tolerance& tol);

// Either a weighted-shift realization or, for |beta| = 1 (which forces
// alpha = 0), a one-step Jordan marker routed to the nilpotent model.
using Realization = std::variant<TabcParams, MonomialParams>;

// Finds parameters with a b = alpha and c = beta, so the realized operator's
// characteristic polynomial class is {lambda (alpha + beta z)}. Throws
// NotRealizable when |alpha| + |beta| > 1 (up to roundoff) or a modulus
// exceeds 1.
Realization realize_degree_one(const DegreeOnePoly& target);

}  // namespace ctrfn
