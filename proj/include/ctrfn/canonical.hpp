#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "ctrfn/charfn.hpp"
#include "ctrfn/windowed.hpp"

namespace ctrfn {

// Direction of an isometric-region probe: `forward` asks on which vectors
// every power of the operator is isometric, `backward` asks the same for
// the adjoint.
enum class Side { forward, backward };

// Which triangular splitting to build: `canonical` makes the invariant
// shift part as small as possible, `star_canonical` as large as possible,
// and `user` marks a caller-supplied splitting.
enum class Variant { canonical, star_canonical, user };

// Certificate that the truncated computation settled: `depth` counts the
// interior margin left after the window, the detected degree, and the
// probing battery are paid for; `residual` is the worst violation of the
// probe rows beyond the battery on the reported kernels.
struct ExactnessCertificate {
  int depth = 0;
  double residual = 0.0;
};

// Orthogonal splitting H = H1 + H0 + Hm1 of the truncated carrier on which
// the compressed operator is upper block triangular: an isometric-type part
// on H1, a nilpotent part on H0, and a co-isometric-type part on Hm1.
// Frames live in truncation coordinates. mult_S is the kernel dimension of
// S_block's adjoint, mult_C the kernel dimension of C_block; both are
// stable against truncation edge artifacts, which inflate the opposite
// kernels instead.
struct CanonicalDecomposition {
  Variant variant = Variant::canonical;
  Subspace H1;
  Subspace H0;
  Subspace Hm1;
  Matrix S_block;
  Matrix N_block;
  Matrix C_block;
  int nilpotent_order = 0;
  int mult_S = 0;
  int mult_C = 0;
  ExactnessCertificate exactness;
  Truncation trunc;
};

// Intertwiner between the compressions of the operator induced by two
// triangular splittings, together with its kernel and range defects and the
// residual of the intertwining relation.
struct QuasiAffinityWitness {
  Matrix Y_tilde;
  int ker_dim = 0;
  int range_codim = 0;
  double intertwining_residual = 0.0;
};

// Structural form of a contraction with a degenerate-degree characteristic
// polynomial: which of the shift (S), nilpotent (N), and co-shift (C)
// summands actually occur.
enum class Form { S, N, C, SN, NC, SC, SNC };

struct Classification {
  Form form = Form::SNC;
  std::string cls;  // asymptotic class tag: C00, C10, C01, C.0, C0., C..
};

const char* form_name(Form f);

// Largest subspace of the truncation, supported on certifiably probed
// fibers, on which all powers up to `steps` of the operator (forward) or
// its adjoint (backward) are isometric. Computed as the joint kernel of
// defect constraints along exact sparse orbits. Throws BudgetExceeded when
// `steps` cannot be certified inside the truncation radius.
Subspace isometric_subspace(const WindowedShiftOperator& op, Side side,
                            int steps, int radius, const Tolerance& tol);

// Builds the extremal triangular splitting of the requested variant at the
// given truncation radius. Throws DegreeUndetected when the characteristic
// polynomial degree cannot be pinned, ExactnessTooShallow when the radius
// leaves no certified interior or the constraint batteries fail to
// stabilize, and ConfigError for the `user` variant (see
// user_decomposition).
CanonicalDecomposition canonical_decomposition(const WindowedShiftOperator& op,
                                               Variant variant, int radius,
                                               const Tolerance& tol);

// Wraps caller-supplied orthonormal frames as a `user` splitting after
// validating mutual orthogonality, spanning, and upper block triangularity
// of the compressed operator. Throws ConfigError when validation fails.
CanonicalDecomposition user_decomposition(const WindowedShiftOperator& op,
                                          int radius, const Matrix& H1_frame,
                                          const Matrix& H0_frame,
                                          const Matrix& Hm1_frame,
                                          const Tolerance& tol);

// (mult_S, mult_C) of a decomposition; invariant across variants.
std::pair<int, int> multiplicities(const CanonicalDecomposition& d);

// Shrinks the central space of a splitting by moving its intersection with
// the forward isometric region into H1 and its intersection with the
// backward one into Hm1. The result is again a valid triangular splitting,
// tagged `user`.
CanonicalDecomposition minimal_splitting(const WindowedShiftOperator& op,
                                         const CanonicalDecomposition& d,
                                         const Tolerance& tol);

// Central nilpotent blocks of the two extremal splittings after minimal
// extraction: first from the canonical splitting with the forward isometric
// overlap removed, second from the star splitting with the backward overlap
// removed.
std::pair<Matrix, Matrix> minimal_nilpotents(const WindowedShiftOperator& op,
                                             int radius, const Tolerance& tol);

// Searches for an injective X with X N1 = N2 X by drawing from the solution
// space of the intertwining equations; a generic draw attains the maximal
// rank, so failure over the given draws certifies that no injection exists.
// Throws NotNilpotent unless both inputs are nilpotent.
std::optional<Matrix> injection_intertwiner(const Matrix& N1, const Matrix& N2,
                                            const Tolerance& tol,
                                            int draws = 50,
                                            std::uint64_t seed = 12345);

// Explicit unitary U with U N1 = N2 U, built by aligning orthonormal chain
// bases of the two nilpotents. Returns nullopt when the rank profiles
// differ or either operator's chains fail to be orthonormal (in which case
// no such unitary is certified by this construction). Throws NotNilpotent
// for non-nilpotent input.
std::optional<Matrix> jordan_chain_unitary(const Matrix& N1, const Matrix& N2,
                                           const Tolerance& tol);

// Compression of the projection onto the second splitting's lower spaces,
// restricted per the standard comparison construction: the H1 overlap is
// removed on the left, the Hm1 overlap on the right. Requires the central
// spaces of both splittings to meet the isometric regions trivially; throws
// HypothesisViolated (carrying the offending dimension) otherwise.
QuasiAffinityWitness quasi_affinity_witness(const WindowedShiftOperator& op,
                                            const CanonicalDecomposition& da,
                                            const CanonicalDecomposition& db,
                                            const Tolerance& tol);

// Decides which of the three triangular summands are present and the
// matching asymptotic class tag.
Classification classify_degenerate(const WindowedShiftOperator& op, int radius,
                                   const Tolerance& tol);

// Dimension of the certified band on which every power of the operator and
// of its adjoint up to `steps` is isometric: the truncated trace of the
// unitary summand. Throws BudgetExceeded when the band is not certifiable
// at this radius.
int unitary_part_dim(const WindowedShiftOperator& op, int steps, int radius,
                     const Tolerance& tol);

}  // namespace ctrfn
