#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctrfn/numlin.hpp"

namespace ctrfn {

// Certificate for tau_star P(z) = Q(z) tau with unitary tau, tau_star.
// NoCoincidence is a proven negative (an invariant separates the inputs);
// NoCertificate means no certificate was found within the search budget.
struct CoincidenceResult {
  enum class Kind { Coincide, NoCoincidence, NoCertificate };
  Kind kind = Kind::NoCertificate;
  double residual = 0.0;
  Matrix tau;
  Matrix tau_star;
  std::string reason;
};

// Scalar polynomials: coincidence is a single unimodular factor.
CoincidenceResult coincide_scalar(const std::vector<cplx>& P,
                                  const std::vector<cplx>& Q,
                                  const Tolerance& tol);

// Monomial families c z^k: certificates come directly from paired singular
// value decompositions. Throws DegreeMismatch when an input is not a clean
// monomial or the powers differ.
CoincidenceResult coincide_monomial(const std::vector<Matrix>& P,
                                    const std::vector<Matrix>& Q,
                                    const Tolerance& tol);

// General polynomial families, searched by alternating orthogonal
// Procrustes updates from one aligned start plus Haar-random restarts.
CoincidenceResult coincide_general(const std::vector<Matrix>& P,
                                   const std::vector<Matrix>& Q,
                                   const Tolerance& tol, int restarts = 8,
                                   std::uint64_t seed = 12345);

}  // namespace ctrfn
