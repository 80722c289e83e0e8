#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "ctrfn/canonical.hpp"
#include "ctrfn/models.hpp"

using namespace ctrfn;

namespace {

cplx unit(double phase) { return std::polar(1.0, phase); }

// c with |c| = t * sqrt((1-|a|^2)(1-|b|^2)), so t = 1 pins the boundary case.
cplx c_for(cplx a, cplx b, double t, double phase) {
  const double cap =
      std::sqrt((1.0 - std::norm(a)) * (1.0 - std::norm(b)));
  return std::polar(t * cap, phase);
}

Vector scalar_basis(const Truncation& tr, int fiber) {
  Vector v = Vector::Zero(tr.dim);
  v(tr.offsets.at(fiber)) = 1.0;
  return v;
}

Matrix fiber_frame(const WindowedShiftOperator& op, const Truncation& tr,
                   int flo, int fhi) {
  int count = 0;
  for (int f = flo; f <= fhi; ++f) count += op.fiber_dim(f);
  Matrix F = Matrix::Zero(tr.dim, count);
  int c = 0;
  for (int f = flo; f <= fhi; ++f) {
    for (int d = 0; d < op.fiber_dim(f); ++d) {
      F(tr.offsets.at(f) + d, c++) = 1.0;
    }
  }
  return F;
}

double triangular_residual(const CanonicalDecomposition& d) {
  const Matrix& T = d.trunc.mat;
  return std::max({(d.H0.frame.adjoint() * T * d.H1.frame).norm(),
                   (d.Hm1.frame.adjoint() * T * d.H1.frame).norm(),
                   (d.Hm1.frame.adjoint() * T * d.H0.frame).norm()});
}

void check_splitting(const CanonicalDecomposition& d) {
  CHECK(d.H1.dim() + d.H0.dim() + d.Hm1.dim() == d.trunc.dim);
  CHECK((d.H1.frame.adjoint() * d.H0.frame).norm() < 1e-9);
  CHECK((d.H1.frame.adjoint() * d.Hm1.frame).norm() < 1e-9);
  CHECK((d.H0.frame.adjoint() * d.Hm1.frame).norm() < 1e-9);
  CHECK(triangular_residual(d) < 1e-9);
}

Matrix random_matrix(int rows, int cols, std::mt19937& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = cplx(normal(gen), normal(gen));
  }
  return M;
}

Matrix random_unitary(int n, std::mt19937& gen) {
  Matrix A = random_matrix(n, n, gen);
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const cplx d = R(j, j);
    if (std::abs(d) > 0) Q.col(j) *= d / std::abs(d);
  }
  return Q;
}

Matrix random_pure(int rows, int cols, double top, std::mt19937& gen) {
  Matrix A = random_matrix(rows, cols, gen);
  Eigen::JacobiSVD<Matrix> svd(A);
  return A * (top / svd.singularValues()(0));
}

}  // namespace

TEST_CASE("canonical splittings of degree one weighted shifts") {
  const Tolerance tol = default_tolerance();
  const cplx a = 0.8 * unit(0.3);
  const cplx b = 0.3 * unit(-1.1);
  const auto op = make_Tabc({a, b, c_for(a, b, 1.0, 0.7)});
  const int radius = 48;
  const auto dc = canonical_decomposition(op, Variant::canonical, radius, tol);
  const auto tr = dc.trunc;

  check_splitting(dc);
  CHECK(dc.variant == Variant::canonical);
  CHECK(dc.Hm1.dim() == radius);
  CHECK(dc.H0.dim() == 1);
  CHECK(dc.H1.dim() == radius);
  CHECK(dc.exactness.depth == 21);
  CHECK(dc.exactness.residual < 1e-12);

  // With the larger weight on the inner fiber the center is exactly the
  // inner basis vector and the co-shift side is exactly the negative range.
  CHECK(subspace_contains(dc.H0, Subspace{tr.dim, scalar_basis(tr, 0)}, tol));
  CHECK(subspace_contains(
      dc.Hm1, Subspace{tr.dim, fiber_frame(op, tr, -radius, -1)}, tol));
  for (int j = 1; j <= 15; ++j) {
    CHECK(subspace_contains(dc.H1, Subspace{tr.dim, scalar_basis(tr, j)},
                            tol));
  }

  CHECK(dc.nilpotent_order == 1);
  CHECK(dc.N_block.norm() < 1e-9);
  CHECK(dc.mult_S == 1);
  CHECK(dc.mult_C == 1);

  // The compressed shift part moves interior basis vectors isometrically;
  // the co-shift part does the same for the adjoint.
  for (int j = 1; j <= 5; ++j) {
    const Vector x = dc.H1.frame.adjoint() * scalar_basis(tr, j);
    CHECK(std::abs((dc.S_block * x).norm() - 1.0) < 1e-9);
  }
  for (int j = 2; j <= 5; ++j) {
    const Vector y = dc.Hm1.frame.adjoint() * scalar_basis(tr, -j);
    CHECK(std::abs((dc.C_block.adjoint() * y).norm() - 1.0) < 1e-9);
  }

  // The star variant maximizes the shift part. With the inner weight
  // smaller than the outer one the forward region picks up one square
  // summable profile vector over the nonpositive fibers, mirroring the
  // backward trichotomy with the roles of the weights swapped.
  const auto ds =
      canonical_decomposition(op, Variant::star_canonical, radius, tol);
  check_splitting(ds);
  CHECK(ds.H1.dim() == radius + 1);
  CHECK(ds.H0.dim() == 1);
  CHECK(ds.Hm1.dim() == radius - 1);
  CHECK(ds.nilpotent_order == 1);
  CHECK(ds.mult_S == 1);
  CHECK(ds.mult_C == 1);
  for (int j = 1; j <= 15; ++j) {
    CHECK(subspace_contains(ds.H1, Subspace{tr.dim, scalar_basis(tr, j)},
                            tol));
  }

  CHECK_THROWS_AS(canonical_decomposition(op, Variant::user, radius, tol),
                  ConfigError);
  CHECK_THROWS_AS(canonical_decomposition(op, Variant::canonical, 6, tol),
                  ExactnessTooShallow);
}

TEST_CASE("backward isometric region follows the weight trichotomy") {
  const Tolerance tol = default_tolerance();
  const int radius = 48;
  const int steps = 24;

  auto coshift_dim = [&](cplx a, cplx b, double phase) {
    const auto op = make_Tabc({a, b, c_for(a, b, 1.0, phase)});
    const Subspace Mm1 =
        isometric_subspace(op, Side::backward, steps, radius, tol);
    const Truncation tr = truncate(op, radius);
    CHECK(subspace_contains(
        Mm1, Subspace{tr.dim, fiber_frame(op, tr, -radius, -1)}, tol));
    // The backward region of the splitting is this kernel by construction;
    // cross-check through the decomposition as well.
    const auto dc =
        canonical_decomposition(op, Variant::canonical, radius, tol);
    CHECK(dc.Hm1.dim() == Mm1.dim());
    CHECK(subspace_contains(dc.Hm1, Mm1, tol));
    return Mm1.dim();
  };

  // Dominant inner weight: the region is exactly the negative half.
  CHECK(coshift_dim(cplx(0.8), cplx(0.3), 0.0) == radius);
  // Equal weights: the only candidate profile fails to be square summable.
  CHECK(coshift_dim(cplx(0.5), cplx(0.5), 1.9) == radius);

  // Dominant outer weight: one extra generator with a geometric profile.
  const cplx a = cplx(0.3);
  const cplx b = cplx(0.8);
  const cplx c = c_for(a, b, 1.0, 2.1);
  const auto op = make_Tabc({a, b, c});
  const Subspace Mm1 =
      isometric_subspace(op, Side::backward, steps, radius, tol);
  CHECK(Mm1.dim() == radius + 1);
  const Truncation tr = truncate(op, radius);
  const Subspace coshift{tr.dim, fiber_frame(op, tr, -radius, -1)};
  const Subspace extra = ominus(Mm1, coshift, tol);
  REQUIRE(extra.dim() == 1);
  const Vector w = extra.frame.col(0);
  const double expected_ratio = (std::abs(a) * std::sqrt(1.0 - std::norm(b))) /
                                (std::abs(b) * std::sqrt(1.0 - std::norm(a)));
  for (int j = 2; j <= 8; ++j) {
    const cplx lo = w(tr.offsets.at(j));
    const cplx hi = w(tr.offsets.at(j + 1));
    REQUIRE(std::abs(lo) > 1e-8);
    CHECK(std::abs(std::abs(hi / lo) - expected_ratio) < 1e-8);
  }
}

TEST_CASE("extremal splittings bracket user splittings") {
  const Tolerance tol = default_tolerance();
  const int radius = 48;

  // Annihilated inner fiber: the canonical center is a mixed direction and
  // the extremal shift parts are strictly smaller than the plain splitting.
  const cplx b = 0.6 * unit(0.4);
  const cplx c = c_for(0.0, b, 1.0, -0.2);
  const auto op = make_Tabc({0.0, b, c});
  const Truncation tr = truncate(op, radius);

  const Matrix H1u = fiber_frame(op, tr, 1, radius);
  const Matrix H0u = scalar_basis(tr, 0);
  const Matrix Hm1u = fiber_frame(op, tr, -radius, -1);
  const auto du = user_decomposition(op, radius, H1u, H0u, Hm1u, tol);
  check_splitting(du);
  CHECK(du.variant == Variant::user);
  CHECK(du.mult_S == 1);
  CHECK(du.mult_C == 1);

  const auto dc = canonical_decomposition(op, Variant::canonical, radius, tol);
  const auto ds =
      canonical_decomposition(op, Variant::star_canonical, radius, tol);
  check_splitting(dc);
  check_splitting(ds);

  // Canonical H1 sits inside the user's H1; canonical Hm1 engulfs the
  // user's Hm1 strictly, picking up the mixed profile direction.
  CHECK(subspace_contains(du.H1, dc.H1, tol));
  CHECK(dc.H1.dim() == radius - 1);
  CHECK(dc.Hm1.dim() == radius + 1);
  CHECK(subspace_contains(dc.Hm1, du.Hm1, tol));

  // The star variant is extremal the other way around.
  CHECK(subspace_contains(ds.H1, du.H1, tol));
  CHECK(ds.Hm1.dim() <= du.Hm1.dim());
  CHECK(subspace_contains(du.Hm1, ds.Hm1, tol));

  // The canonical center is the defect direction, not the basis vector.
  REQUIRE(dc.H0.dim() == 1);
  Vector v = Vector::Zero(tr.dim);
  v(tr.offsets.at(0)) = 1.0 - std::norm(b);
  v(tr.offsets.at(1)) = -std::conj(b) * c;
  v /= v.norm();
  CHECK(subspace_contains(dc.H0, Subspace{tr.dim, v}, tol));

  // Multiplicities agree across every splitting of the same operator.
  CHECK(multiplicities(dc) == multiplicities(du));
  CHECK(multiplicities(ds) == multiplicities(du));

  // A swapped splitting is rejected as non-triangular.
  CHECK_THROWS_AS(user_decomposition(op, radius, Hm1u, H0u, H1u, tol),
                  ConfigError);
}

TEST_CASE("central blocks inject along the splitting order") {
  const Tolerance tol = default_tolerance();
  const int radius = 48;
  const cplx b = cplx(0.6);
  const cplx c = c_for(0.0, b, 1.0, 0.0);
  const auto op = make_Tabc({0.0, b, c});
  const Truncation tr = truncate(op, radius);

  const auto narrow = user_decomposition(
      op, radius, fiber_frame(op, tr, 1, radius), scalar_basis(tr, 0),
      fiber_frame(op, tr, -radius, -1), tol);
  Matrix H0wide(tr.dim, 2);
  H0wide.col(0) = scalar_basis(tr, 0);
  H0wide.col(1) = scalar_basis(tr, 1);
  const auto wide = user_decomposition(op, radius,
                                       fiber_frame(op, tr, 2, radius), H0wide,
                                       fiber_frame(op, tr, -radius, -1), tol);
  check_splitting(narrow);
  check_splitting(wide);
  REQUIRE(narrow.H0.dim() == 1);
  REQUIRE(wide.H0.dim() == 2);
  CHECK(narrow.N_block.norm() < 1e-12);
  CHECK(wide.N_block.norm() < 1e-12);

  // The small center injects into the large one, never the reverse.
  const auto fwd = injection_intertwiner(narrow.N_block, wide.N_block, tol);
  REQUIRE(fwd.has_value());
  CHECK((*fwd * narrow.N_block - wide.N_block * *fwd).norm() < 1e-10);
  CHECK(numerical_rank(*fwd, tol) == 1);
  CHECK(!injection_intertwiner(wide.N_block, narrow.N_block, tol).has_value());

  // Minimal extraction strips both centers to the same one dimensional
  // nilpotent.
  const auto [N0, Ns0] = minimal_nilpotents(op, radius, tol);
  CHECK(N0.rows() == 1);
  CHECK(Ns0.rows() == 1);
  CHECK(N0.norm() < 1e-9);
  CHECK(Ns0.norm() < 1e-9);

  // Minimal extraction of the wide user splitting also lands on one
  // dimension: one direction moves to the shift side, none to the co-shift
  // side once the center is reduced.
  const auto wide_min = minimal_splitting(op, wide, tol);
  check_splitting(wide_min);
  CHECK(wide_min.H0.dim() == 1);

  // A nilpotent of higher order admits no injection into a flat one.
  const Matrix J2 = make_Jm(2, 1);
  const Matrix flat2 = Matrix::Zero(2, 2);
  CHECK(!injection_intertwiner(J2, flat2, tol).has_value());
  CHECK(!injection_intertwiner(J2, Matrix::Zero(1, 1), tol).has_value());
  const auto self = injection_intertwiner(J2, J2, tol);
  REQUIRE(self.has_value());
  CHECK(numerical_rank(*self, tol) == 2);
  CHECK_THROWS_AS(
      injection_intertwiner(Matrix::Identity(2, 2), J2, tol), NotNilpotent);
}

TEST_CASE("quasi affinity witnesses and their hypotheses") {
  const Tolerance tol = default_tolerance();
  const int radius = 48;
  const cplx b = cplx(0.6);
  const cplx c = c_for(0.0, b, 1.0, 1.0);
  const auto op = make_Tabc({0.0, b, c});
  const Truncation tr = truncate(op, radius);

  const auto dc = canonical_decomposition(op, Variant::canonical, radius, tol);

  // A splitting whose center swallows a forward isometric direction and the
  // backward profile direction violates the comparison hypotheses.
  Matrix H0wide(tr.dim, 2);
  H0wide.col(0) = scalar_basis(tr, 0);
  H0wide.col(1) = scalar_basis(tr, 1);
  const auto wide = user_decomposition(op, radius,
                                       fiber_frame(op, tr, 2, radius), H0wide,
                                       fiber_frame(op, tr, -radius, -1), tol);
  try {
    quasi_affinity_witness(op, wide, dc, tol);
    FAIL("expected HypothesisViolated");
  } catch (const HypothesisViolated& e) {
    CHECK(e.offending_dim == 1);
  }

  // The canonical splitting against itself gives an identity witness.
  const auto w = quasi_affinity_witness(op, dc, dc, tol);
  CHECK(w.ker_dim == 0);
  CHECK(w.range_codim == 0);
  CHECK(w.Y_tilde.rows() == 1);
  CHECK(w.intertwining_residual < 1e-12);
}

TEST_CASE("monomial models split along their block structure") {
  const Tolerance tol = default_tolerance();
  std::mt19937 gen(12007);
  const int m = 2;
  const int radius = 24;
  const Matrix A = random_pure(3, 2, 0.75, gen);
  const auto op = make_TA({A, m}, tol);
  const auto dc = canonical_decomposition(op, Variant::canonical, radius, tol);
  const auto tr = dc.trunc;

  check_splitting(dc);
  CHECK(dc.Hm1.dim() == radius * 2);
  CHECK(dc.H0.dim() == m * 3);
  CHECK(dc.H1.dim() == (radius - m + 1) * 3);
  CHECK(subspace_contains(dc.H0, Subspace{tr.dim, fiber_frame(op, tr, 0, m - 1)},
                          tol));
  CHECK(subspace_contains(
      dc.Hm1, Subspace{tr.dim, fiber_frame(op, tr, -radius, -1)}, tol));
  CHECK(dc.nilpotent_order == m);
  CHECK(dc.mult_S == 3);
  CHECK(dc.mult_C == 2);

  const auto ds =
      canonical_decomposition(op, Variant::star_canonical, radius, tol);
  check_splitting(ds);
  CHECK(ds.mult_S == 3);
  CHECK(ds.mult_C == 2);
  CHECK(ds.nilpotent_order == m);

  // Raw centers overlap the isometric regions (the orthogonal complement of
  // the coefficient range persists under the shift), so the comparison
  // hypotheses fail with exactly that overlap.
  try {
    quasi_affinity_witness(op, dc, ds, tol);
    FAIL("expected HypothesisViolated");
  } catch (const HypothesisViolated& e) {
    CHECK(e.offending_dim == m * (3 - 2));
  }

  // Minimal extraction removes the overlap; the reduced centers share the
  // Jordan profile of order m with multiplicity rank(A) and are linked by
  // an explicit unitary and an invertible witness.
  const auto [N0, Ns0] = minimal_nilpotents(op, radius, tol);
  REQUIRE(N0.rows() == m * 2);
  REQUIRE(Ns0.rows() == m * 2);
  const auto prof0 = rank_sequence(N0, m, tol);
  const auto profs = rank_sequence(Ns0, m, tol);
  CHECK(prof0 == profs);
  CHECK(prof0 == std::vector<int>{4, 2, 0});

  const auto U = jordan_chain_unitary(N0, Ns0, tol);
  REQUIRE(U.has_value());
  CHECK((U->adjoint() * *U - Matrix::Identity(4, 4)).norm() < 1e-9);
  CHECK((*U * N0 - Ns0 * *U).norm() < 1e-9);

  const auto dcm = minimal_splitting(op, dc, tol);
  const auto dsm = minimal_splitting(op, ds, tol);
  check_splitting(dcm);
  check_splitting(dsm);
  CHECK(dcm.H0.dim() == m * 2);
  CHECK(dsm.H0.dim() == m * 2);
  const auto w = quasi_affinity_witness(op, dcm, dsm, tol);
  CHECK(w.ker_dim == 0);
  CHECK(w.range_codim == 0);
  CHECK(w.intertwining_residual < 1e-9);
}

TEST_CASE("jordan models are purely central") {
  const Tolerance tol = default_tolerance();
  const auto op = jordan_window_model(3, 2);
  const int radius = 8;
  const auto dc = canonical_decomposition(op, Variant::canonical, radius, tol);
  check_splitting(dc);
  CHECK(dc.H1.dim() == 0);
  CHECK(dc.Hm1.dim() == 0);
  CHECK(dc.H0.dim() == 6);
  CHECK(dc.nilpotent_order == 3);
  CHECK(dc.mult_S == 0);
  CHECK(dc.mult_C == 0);

  const auto ds =
      canonical_decomposition(op, Variant::star_canonical, radius, tol);
  CHECK(ds.H1.dim() == 0);
  CHECK(ds.Hm1.dim() == 0);
  CHECK(ds.H0.dim() == 6);

  const auto [N0, Ns0] = minimal_nilpotents(op, radius, tol);
  const Matrix J = make_Jm(3, 2);
  CHECK(rank_sequence(N0, 3, tol) == rank_sequence(J, 3, tol));
  CHECK(rank_sequence(Ns0, 3, tol) == rank_sequence(J, 3, tol));
  const auto U = jordan_chain_unitary(N0, J, tol);
  REQUIRE(U.has_value());
  CHECK((*U * N0 - J * *U).norm() < 1e-9);
}

TEST_CASE("classifier recognizes degenerate forms") {
  const Tolerance tol = default_tolerance();

  auto check_form = [&](const WindowedShiftOperator& op, int radius, Form f,
                        const std::string& cls) {
    const auto c = classify_degenerate(op, radius, tol);
    CHECK(c.form == f);
    CHECK(c.cls == cls);
  };

  check_form(jordan_window_model(3, 2), 8, Form::N, "C00");
  check_form(jordan_window_model(2, 1), 8, Form::N, "C00");
  check_form(shift_model(2), 12, Form::S, "C10");
  check_form(coshift_model(3), 12, Form::C, "C01");

  // Unimodular outer weight with a dead inner arrow: constant nonzero
  // characteristic polynomial, shift and co-shift parts, no center.
  check_form(make_Tabc({cplx(0.6), cplx(1.0), cplx(0.0)}), 16, Form::SC,
             "C..");

  // Generic degree one weighted shift keeps all three parts.
  check_form(make_Tabc({cplx(0.5), cplx(0.5), c_for(0.5, 0.5, 1.0, 0.8)}), 16,
             Form::SNC, "C..");

  // Shift with a dead finite tongue: no backward isometric region.
  {
    std::map<int, std::vector<Block>> blocks;
    blocks[-1] = {};
    blocks[0] = {Block{1, Matrix::Identity(1, 1)}};
    blocks[1] = {};
    const auto op = make_windowed({0, 1}, -1, 1, blocks);
    check_form(op, 12, Form::SN, "C.0");
  }

  // Co-shift with a dead incoming lane: no forward isometric region.
  {
    Matrix keep(2, 2);
    keep << 1.0, 0.0, 0.0, 0.0;
    std::map<int, std::vector<Block>> blocks;
    blocks[-2] = {Block{-1, keep}};
    blocks[-1] = {};
    const auto op = make_windowed({2, 0}, -2, -1, blocks);
    check_form(op, 12, Form::NC, "C0.");
  }
}

TEST_CASE("probing budgets are enforced") {
  const Tolerance tol = default_tolerance();
  const auto op = make_Tabc({cplx(0.5), cplx(0.4), c_for(0.5, 0.4, 1.0, 0.0)});

  CHECK_THROWS_AS(isometric_subspace(op, Side::backward, 60, 16, tol),
                  BudgetExceeded);
  CHECK_THROWS_AS(isometric_subspace(op, Side::forward, 60, 16, tol),
                  BudgetExceeded);
  CHECK_THROWS_AS(isometric_subspace(op, Side::backward, 2, 16, tol),
                  BudgetExceeded);
  CHECK_THROWS_AS(unitary_part_dim(op, 60, 16, tol), BudgetExceeded);

  // Both isometric regions of a bilateral shift are everything.
  const auto bilateral = make_Tabc({cplx(1.0), cplx(1.0), cplx(0.0)});
  const Truncation tr = truncate(bilateral, 16);
  const Subspace M1 = isometric_subspace(bilateral, Side::forward, 8, 16, tol);
  const Subspace Mm1 =
      isometric_subspace(bilateral, Side::backward, 8, 16, tol);
  CHECK(M1.dim() == tr.dim);
  CHECK(Mm1.dim() == tr.dim);
  CHECK(subspace_contains(M1, Mm1, tol));
  CHECK(subspace_contains(Mm1, M1, tol));
}

TEST_CASE("unitary part detection") {
  const Tolerance tol = default_tolerance();

  // A unimodular jump weight leaves a bilateral lane plus one dead vector.
  const auto lane = make_Tabc({cplx(0.0), cplx(0.0), unit(0.3)});
  CHECK(unitary_part_dim(lane, 16, 48, tol) >= 1);

  // Strictly contractive jump weights leave nothing unitary.
  for (double mag : {0.0, 0.5, 0.9}) {
    const auto op = make_Tabc({cplx(0.0), cplx(0.0), mag * unit(1.1)});
    CHECK(unitary_part_dim(op, 16, 48, tol) == 0);
  }
  const auto generic =
      make_Tabc({cplx(0.7), cplx(0.2), c_for(0.7, 0.2, 0.5, 0.4)});
  CHECK(unitary_part_dim(generic, 16, 48, tol) == 0);

  std::mt19937 gen(12011);
  const auto mono = make_TA({random_pure(2, 2, 0.8, gen), 2}, tol);
  CHECK(unitary_part_dim(mono, 8, 30, tol) == 0);
  CHECK(unitary_part_dim(jordan_window_model(3, 1), 4, 8, tol) == 0);

  // Vanishing defects on both sides certify the whole probe band.
  const auto bilateral = make_Tabc({cplx(1.0), cplx(1.0), cplx(0.0)});
  CHECK(unitary_part_dim(bilateral, 8, 16, tol) > 0);
}

TEST_CASE("splittings are equivariant under fiber unitaries") {
  const Tolerance tol = default_tolerance();
  std::mt19937 gen(12013);
  const int m = 2;
  const int radius = 24;
  const Matrix A = random_pure(2, 2, 0.7, gen);
  const auto op = make_TA({A, m}, tol);

  const Matrix Up = random_unitary(2, gen);
  std::map<int, Matrix> Uwin;
  for (int f = op.lo; f <= op.hi; ++f) {
    Uwin[f] = random_unitary(op.fiber_dim(f), gen);
  }
  // Fibers below the window ride the implicit identity shift, so they must
  // share the unitary of the lowest window fiber to keep that shift intact.
  auto U_of = [&](int f) -> const Matrix& {
    if (f < op.lo) return Uwin.at(op.lo);
    if (f > op.hi) return Up;
    return Uwin.at(f);
  };

  std::map<int, std::vector<Block>> blocks;
  for (const auto& [src, bl] : op.blocks) {
    for (const Block& b : bl) {
      blocks[src].push_back(Block{b.to, U_of(b.to) * b.mat *
                                            U_of(src).adjoint()});
    }
  }
  const auto conj = make_windowed(op.profile, op.lo, op.hi, blocks);

  const Truncation tr = truncate(op, radius);
  Matrix Umat = Matrix::Zero(tr.dim, tr.dim);
  for (int f = -radius; f <= radius; ++f) {
    const int d = op.fiber_dim(f);
    if (d > 0) Umat.block(tr.offsets.at(f), tr.offsets.at(f), d, d) = U_of(f);
  }

  for (Variant v : {Variant::canonical, Variant::star_canonical}) {
    const auto d1 = canonical_decomposition(op, v, radius, tol);
    const auto d2 = canonical_decomposition(conj, v, radius, tol);
    CHECK(d1.H1.dim() == d2.H1.dim());
    CHECK(d1.H0.dim() == d2.H0.dim());
    CHECK(d1.Hm1.dim() == d2.Hm1.dim());
    CHECK(multiplicities(d1) == multiplicities(d2));
    CHECK(d1.nilpotent_order == d2.nilpotent_order);
    const Subspace mapped1{tr.dim, Umat * d1.H1.frame};
    const Subspace mapped0{tr.dim, Umat * d1.H0.frame};
    const Subspace mapped_m1{tr.dim, Umat * d1.Hm1.frame};
    CHECK(subspace_contains(d2.H1, mapped1, tol));
    CHECK(subspace_contains(mapped1, d2.H1, tol));
    CHECK(subspace_contains(d2.H0, mapped0, tol));
    CHECK(subspace_contains(mapped0, d2.H0, tol));
    CHECK(subspace_contains(d2.Hm1, mapped_m1, tol));
    CHECK(subspace_contains(mapped_m1, d2.Hm1, tol));
  }
}

TEST_CASE("chain unitaries require isometric structure") {
  const Tolerance tol = default_tolerance();
  const Matrix J2 = make_Jm(2, 1);

  // Identity on identical blocks.
  const auto self = jordan_chain_unitary(J2, J2, tol);
  REQUIRE(self.has_value());
  CHECK((*self - Matrix::Identity(2, 2)).norm() < 1e-10);

  // A scaled chain is nilpotent with the same profile but shifts no
  // orthonormal basis, so no unitary is certified.
  Matrix scaled = Matrix::Zero(2, 2);
  scaled(1, 0) = 2.0;
  CHECK(!jordan_chain_unitary(J2, scaled, tol).has_value());

  // Profile mismatch is rejected before any chain work.
  CHECK(!jordan_chain_unitary(make_Jm(2, 2), make_Jm(4, 1), tol).has_value());
  CHECK(!jordan_chain_unitary(J2, Matrix::Zero(1, 1), tol).has_value());

  CHECK_THROWS_AS(jordan_chain_unitary(Matrix::Identity(2, 2), J2, tol),
                  NotNilpotent);

  // Block Jordan pairs with permuted fibers still align.
  std::mt19937 gen(12017);
  const Matrix J32 = make_Jm(3, 2);
  const Matrix V = random_unitary(6, gen);
  const Matrix rotated = V * J32 * V.adjoint();
  const auto U = jordan_chain_unitary(J32, rotated, tol);
  REQUIRE(U.has_value());
  CHECK((*U * J32 - rotated * *U).norm() < 1e-9);
}

TEST_CASE("multiplicities are invariant across variants") {
  const Tolerance tol = default_tolerance();
  const int radius = 16;
  const std::pair<double, double> weights[] = {
      {0.7, 0.2}, {0.2, 0.7}, {0.55, 0.55}};
  for (const auto& [am, bm] : weights) {
    for (double phase : {0.0, 1.3}) {
      const cplx a = am * unit(0.2 * phase);
      const cplx b = bm * unit(-phase);
      const auto op = make_Tabc({a, b, c_for(a, b, 1.0, phase)});
      const auto dc =
          canonical_decomposition(op, Variant::canonical, radius, tol);
      const auto ds =
          canonical_decomposition(op, Variant::star_canonical, radius, tol);
      CHECK(multiplicities(dc) == std::pair<int, int>{1, 1});
      CHECK(multiplicities(ds) == std::pair<int, int>{1, 1});
      CHECK(dc.nilpotent_order == 1);
      CHECK(ds.nilpotent_order == 1);
    }
  }

  // Degenerate boundary: dead inner arrow with unimodular outer weight.
  const auto sc = make_Tabc({cplx(0.6), cplx(1.0), cplx(0.0)});
  const auto dsc = canonical_decomposition(sc, Variant::canonical, 16, tol);
  CHECK(multiplicities(dsc) == std::pair<int, int>{1, 1});
  CHECK(dsc.H0.dim() == 0);
}
