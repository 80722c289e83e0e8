#pragma once

#include <map>
#include <utility>
#include <vector>

#include "ctrfn/numlin.hpp"

namespace ctrfn {

// Fiber dimensions of the carrier: C^right on fibers n >= 0, C^left on
// fibers n <= -1.
struct FiberProfile {
  int left = 0;
  int right = 0;
};

// One modification block: the source fiber maps into fiber `to` via `mat`.
struct Block {
  int to = 0;
  Matrix mat;
};

// An operator on the direct sum of fibers that acts as the identity shift
// L_n -> L_{n+1} outside the window [lo, hi] and via `blocks` on window
// sources (a window source with no blocks is annihilated). With `bounded`
// set, fibers outside the window are zero-dimensional and no shift exists;
// the operator then lives on a finite space.
struct WindowedShiftOperator {
  FiberProfile profile;
  int lo = 0;
  int hi = 0;
  std::map<int, std::vector<Block>> blocks;
  bool bounded = false;

  int fiber_dim(int n) const {
    if (bounded && (n < lo || n > hi)) return 0;
    return n >= 0 ? profile.right : profile.left;
  }

  // Largest number of fibers a block jumps over; the identity shift jumps
  // over none.
  int max_jump() const;
};

// Validates profile, window, and block shapes. Throws ConfigError for a
// block keyed outside the window, DimensionMismatch for a block matrix whose
// shape disagrees with its fibers or for an unbounded operator whose shift
// would cross the fiber-size boundary at -1 -> 0.
WindowedShiftOperator make_windowed(FiberProfile profile, int lo, int hi,
                                    std::map<int, std::vector<Block>> blocks,
                                    bool bounded = false);

// Finitely supported vector in the carrier: fiber index -> coordinates.
using WindowVector = std::map<int, Vector>;

// <a, b>, conjugate-linear in the first argument.
cplx wv_inner(const WindowVector& a, const WindowVector& b);
double wv_norm(const WindowVector& a);

WindowVector basis_vector(const WindowedShiftOperator& op, int fiber, int i);

WindowVector apply(const WindowedShiftOperator& op, const WindowVector& x);
WindowVector adjoint_apply(const WindowedShiftOperator& op,
                           const WindowVector& x);

// A finite Hermitian block supported on the listed fibers (ascending),
// coordinates fiber-major.
struct FiberBlock {
  std::vector<int> fibers;
  Matrix mat;
};

// Coordinate labels (fiber, in-fiber index) for a fiber-major block.
std::vector<std::pair<int, int>> fiber_coordinates(
    const WindowedShiftOperator& op, const std::vector<int>& fibers);

// Components of x on the listed coordinates (zero where x has no fiber).
Vector restrict_to(const WindowVector& x,
                   const std::vector<std::pair<int, int>>& coords);

// Window vector with the given components on the listed coordinates.
WindowVector expand_from(const std::vector<std::pair<int, int>>& coords,
                         const Vector& v);

// Grams of I - T*T and I - TT*, computed exactly from the block structure
// and trimmed to the fibers actually carrying defect. Throws NotContraction
// when either block has an eigenvalue below -eq_tol * max(1, ||G||).
std::pair<FiberBlock, FiberBlock> defect_grams(const WindowedShiftOperator& op,
                                               const Tolerance& tol);

// Compression of the operator to fibers -radius..radius.
struct Truncation {
  int radius = 0;
  std::vector<int> fibers;     // -radius..radius ascending
  std::map<int, int> offsets;  // fiber -> first coordinate index
  int dim = 0;
  Matrix mat;
};

// Throws RadiusTooSmall unless radius >= |lo|, |hi| and
// radius >= (hi - lo) + max_jump + 2, so the window and one full jump of
// margin sit strictly inside the kept range.
Truncation truncate(const WindowedShiftOperator& op, int radius);

}  // namespace ctrfn
