#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "ctrfn/windowed.hpp"

using namespace ctrfn;

namespace {

Matrix scalar(cplx v) {
  Matrix M(1, 1);
  M(0, 0) = v;
  return M;
}

// Degree-one weighted shift: e_{-1} -> b e_0 + c e_1, e_0 -> a e_1,
// identity shift elsewhere.
WindowedShiftOperator weighted_shift(cplx a, cplx b, cplx c) {
  std::map<int, std::vector<Block>> blocks;
  blocks[-1] = {Block{0, scalar(b)}, Block{1, scalar(c)}};
  blocks[0] = {Block{1, scalar(a)}};
  return make_windowed(FiberProfile{1, 1}, -1, 0, std::move(blocks));
}

WindowVector random_window_vector(const WindowedShiftOperator& op, int span,
                                  std::mt19937& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  WindowVector x;
  for (int n = -span; n <= span; ++n) {
    const int d = op.fiber_dim(n);
    if (d == 0) continue;
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = cplx(dist(gen), dist(gen));
    x[n] = v;
  }
  return x;
}

Vector to_coords(const Truncation& tr, const WindowedShiftOperator& op,
                 const WindowVector& x) {
  Vector v = Vector::Zero(tr.dim);
  for (const auto& [n, w] : x) {
    REQUIRE(std::abs(n) <= tr.radius);
    v.segment(tr.offsets.at(n), op.fiber_dim(n)) = w;
  }
  return v;
}

}  // namespace

TEST_CASE("construction validates profile, window, and block shapes") {
  CHECK_THROWS_AS(make_windowed(FiberProfile{0, 0}, -1, 0, {}), ConfigError);
  CHECK_THROWS_AS(make_windowed(FiberProfile{1, 1}, 2, 1, {}), ConfigError);
  // Unbounded shift crossing -1 -> 0 with unequal fiber sizes.
  CHECK_THROWS_AS(make_windowed(FiberProfile{1, 2}, 0, 1, {}),
                  DimensionMismatch);
  CHECK_NOTHROW(make_windowed(FiberProfile{2, 2}, 0, 1, {}));

  std::map<int, std::vector<Block>> outside;
  outside[3] = {Block{4, scalar(1.0)}};
  CHECK_THROWS_AS(make_windowed(FiberProfile{1, 1}, -1, 0, outside),
                  ConfigError);

  std::map<int, std::vector<Block>> badshape;
  badshape[-1] = {Block{0, Matrix::Zero(2, 1)}};
  CHECK_THROWS_AS(make_windowed(FiberProfile{1, 1}, -1, 0, badshape),
                  DimensionMismatch);
}

TEST_CASE("apply shifts outside the window and follows blocks inside") {
  const WindowedShiftOperator op = weighted_shift(0.3, 0.5, 0.7);
  CHECK(op.max_jump() == 1);

  WindowVector y = ctrfn::apply(op, basis_vector(op, -3, 0));
  REQUIRE(y.count(-2) == 1);
  CHECK(std::abs(y.at(-2)(0) - cplx(1.0)) < 1e-15);

  y = ctrfn::apply(op, basis_vector(op, -1, 0));
  CHECK(std::abs(y.at(0)(0) - cplx(0.5)) < 1e-15);
  CHECK(std::abs(y.at(1)(0) - cplx(0.7)) < 1e-15);

  y = ctrfn::apply(op, basis_vector(op, 0, 0));
  CHECK(y.count(0) == 0);
  CHECK(std::abs(y.at(1)(0) - cplx(0.3)) < 1e-15);

  // A window source with no blocks is annihilated.
  const WindowedShiftOperator hole =
      make_windowed(FiberProfile{1, 1}, -1, -1, {});
  CHECK(ctrfn::apply(hole, basis_vector(hole, -1, 0)).empty());

  WindowVector bad{{0, Vector::Zero(2)}};
  CHECK_THROWS_AS(ctrfn::apply(op, bad), DimensionMismatch);
}

TEST_CASE("adjoint_apply is the true adjoint") {
  std::mt19937 gen(8101);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  std::map<int, std::vector<Block>> blocks;
  auto rnd = [&](int rows, int cols) {
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = 0.3 * cplx(dist(gen), dist(gen));
    return M;
  };
  blocks[-2] = {Block{-1, rnd(2, 2)}, Block{1, rnd(2, 2)}};
  blocks[-1] = {Block{0, rnd(2, 2)}};
  blocks[1] = {Block{2, rnd(2, 2)}, Block{3, rnd(2, 2)}};
  const WindowedShiftOperator op =
      make_windowed(FiberProfile{2, 2}, -2, 1, std::move(blocks));

  for (int trial = 0; trial < 20; ++trial) {
    const WindowVector x = random_window_vector(op, 6, gen);
    const WindowVector y = random_window_vector(op, 6, gen);
    const cplx lhs = wv_inner(ctrfn::apply(op, x), y);
    const cplx rhs = wv_inner(x, adjoint_apply(op, y));
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }

  const WindowedShiftOperator ws = weighted_shift(0.4, 0.6, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    const WindowVector x = random_window_vector(ws, 6, gen);
    const WindowVector y = random_window_vector(ws, 6, gen);
    CHECK(std::abs(wv_inner(ctrfn::apply(ws, x), y) -
                   wv_inner(x, adjoint_apply(ws, y))) < 1e-12);
  }
}

TEST_CASE("defect grams of the degree-one weighted shift") {
  const Tolerance tol = default_tolerance();
  const double aa = 0.5, bb = 0.4;
  const cplx a = aa, b = bb;
  const cplx c = std::sqrt((1.0 - aa * aa) * (1.0 - bb * bb));  // |gamma| = 1
  const WindowedShiftOperator op = weighted_shift(a, b, c);
  const auto [dt, dts] = defect_grams(op, tol);

  // I - T*T supported on fibers -1, 0 (ascending, scalar fibers).
  REQUIRE(dt.fibers == std::vector<int>{-1, 0});
  CHECK(std::abs(dt.mat(0, 0) - (1.0 - std::norm(b) - std::norm(c))) < 1e-15);
  CHECK(std::abs(dt.mat(1, 1) - (1.0 - std::norm(a))) < 1e-15);
  CHECK(std::abs(dt.mat(0, 1) - (-std::conj(c) * a)) < 1e-15);
  CHECK(std::abs(dt.mat(1, 0) - (-std::conj(a) * c)) < 1e-15);

  // I - TT* supported on fibers 0, 1.
  REQUIRE(dts.fibers == std::vector<int>{0, 1});
  CHECK(std::abs(dts.mat(0, 0) - (1.0 - std::norm(b))) < 1e-15);
  CHECK(std::abs(dts.mat(1, 1) - (1.0 - std::norm(a) - std::norm(c))) < 1e-15);
  CHECK(std::abs(dts.mat(0, 1) - (-b * std::conj(c))) < 1e-15);

  // With |gamma| = 1 both determinants vanish: rank-one defects.
  CHECK(std::abs(dt.mat.determinant()) < 1e-15);
  CHECK(std::abs(dts.mat.determinant()) < 1e-15);
}

TEST_CASE("defect grams detect a non-contraction") {
  const Tolerance tol = default_tolerance();
  const WindowedShiftOperator op = weighted_shift(0.9, 0.9, 0.9);
  CHECK_THROWS_AS(defect_grams(op, tol), NotContraction);
}

TEST_CASE("isometries and co-isometries have one-sided defects") {
  const Tolerance tol = default_tolerance();

  std::map<int, std::vector<Block>> none;
  const WindowedShiftOperator shift =
      make_windowed(FiberProfile{0, 1}, -1, -1, none);
  const auto [sdt, sdts] = defect_grams(shift, tol);
  CHECK(sdt.fibers.empty());
  CHECK(sdt.mat.rows() == 0);
  REQUIRE(sdts.fibers == std::vector<int>{0});
  CHECK(std::abs(sdts.mat(0, 0) - 1.0) < 1e-15);

  const WindowedShiftOperator coshift =
      make_windowed(FiberProfile{1, 0}, -1, -1, none);
  const auto [cdt, cdts] = defect_grams(coshift, tol);
  REQUIRE(cdt.fibers == std::vector<int>{-1});
  CHECK(std::abs(cdt.mat(0, 0) - 1.0) < 1e-15);
  CHECK(cdts.fibers.empty());

  // Scalar shift with an annihilated fiber has rank-one defects both sides.
  const WindowedShiftOperator hole =
      make_windowed(FiberProfile{1, 1}, -1, -1, none);
  const auto [hdt, hdts] = defect_grams(hole, tol);
  CHECK(hdt.fibers == std::vector<int>{-1});
  CHECK(hdts.fibers == std::vector<int>{0});
}

TEST_CASE("bounded operator lives on finitely many fibers") {
  const Tolerance tol = default_tolerance();
  const int m = 3, d = 2;
  std::map<int, std::vector<Block>> blocks;
  for (int k = 0; k + 1 < m; ++k) {
    blocks[k] = {Block{k + 1, Matrix::Identity(d, d)}};
  }
  const WindowedShiftOperator op =
      make_windowed(FiberProfile{0, d}, 0, m - 1, std::move(blocks), true);
  CHECK(op.fiber_dim(-1) == 0);
  CHECK(op.fiber_dim(m) == 0);
  CHECK(op.fiber_dim(1) == d);

  const auto [dt, dts] = defect_grams(op, tol);
  REQUIRE(dt.fibers == std::vector<int>{m - 1});
  CHECK((dt.mat - Matrix::Identity(d, d)).norm() < 1e-15);
  REQUIRE(dts.fibers == std::vector<int>{0});
  CHECK((dts.mat - Matrix::Identity(d, d)).norm() < 1e-15);

  const Truncation tr = truncate(op, 4);
  CHECK(tr.dim == m * d);
  const std::vector<int> ranks = rank_sequence(tr.mat, m, tol);
  CHECK(ranks == std::vector<int>{6, 4, 2, 0});
}

TEST_CASE("truncation of the weighted shift at radius 4") {
  const WindowedShiftOperator op = weighted_shift(0.3, 0.8, 0.2);
  CHECK_THROWS_AS(truncate(op, 3), RadiusTooSmall);

  const Truncation tr = truncate(op, 4);
  CHECK(tr.dim == 9);
  CHECK(tr.offsets.at(-4) == 0);
  CHECK(tr.offsets.at(4) == 8);
  // Plain shift entries away from the window.
  for (int n : {-4, -3, -2, 1, 2, 3}) {
    CHECK(std::abs(tr.mat(tr.offsets.at(n + 1), tr.offsets.at(n)) -
                   cplx(1.0)) < 1e-15);
  }
  // Window columns.
  CHECK(std::abs(tr.mat(tr.offsets.at(0), tr.offsets.at(-1)) - cplx(0.8)) <
        1e-15);
  CHECK(std::abs(tr.mat(tr.offsets.at(1), tr.offsets.at(-1)) - cplx(0.2)) <
        1e-15);
  CHECK(std::abs(tr.mat(tr.offsets.at(1), tr.offsets.at(0)) - cplx(0.3)) <
        1e-15);
  // The top edge column falls off the kept range.
  CHECK(tr.mat.col(tr.offsets.at(4)).norm() < 1e-15);
  // Column count: one entry per column except the last.
  CHECK(tr.mat.norm() > 0.0);
}

TEST_CASE("truncation agrees with apply well inside the radius") {
  std::mt19937 gen(8102);
  const WindowedShiftOperator op = weighted_shift(0.25, 0.45, 0.6);
  const Truncation tr = truncate(op, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const WindowVector x = random_window_vector(op, 5, gen);
    const Vector lhs = tr.mat * to_coords(tr, op, x);
    const Vector rhs = to_coords(tr, op, ctrfn::apply(op, x));
    CHECK((lhs - rhs).norm() < 1e-14);
  }
}
