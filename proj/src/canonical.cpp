#include "ctrfn/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace ctrfn {

namespace {

// Candidate coordinate set: the truncation coordinates of a contiguous fiber
// range, with a fiber -> first-slot lookup for sparse row assembly.
struct CandidateCoords {
  std::vector<int> global;  // truncation coordinate of each slot
  std::map<int, int> base;  // fiber -> first slot
  int count = 0;
};

CandidateCoords candidate_coords(const WindowedShiftOperator& op,
                                 const Truncation& trunc, int c_lo, int c_hi) {
  CandidateCoords cc;
  const int lo = std::max(c_lo, -trunc.radius);
  const int hi = std::min(c_hi, trunc.radius);
  for (int f = lo; f <= hi; ++f) {
    const int d = op.fiber_dim(f);
    if (d == 0) continue;
    cc.base[f] = cc.count;
    const int off = trunc.offsets.at(f);
    for (int i = 0; i < d; ++i) cc.global.push_back(off + i);
    cc.count += d;
  }
  return cc;
}

std::vector<WindowVector> defect_generators(const DefectData& dd, bool star) {
  const Matrix& fr = star ? dd.frame_Tstar : dd.frame_T;
  const auto& coords = star ? dd.coords_Tstar : dd.coords_T;
  std::vector<WindowVector> gens;
  gens.reserve(fr.cols());
  for (Eigen::Index j = 0; j < fr.cols(); ++j) {
    gens.push_back(expand_from(coords, fr.col(j)));
  }
  return gens;
}

// orbit[k][i] = k-th (adjoint) power applied to generator i, exactly.
std::vector<std::vector<WindowVector>> power_orbits(
    const WindowedShiftOperator& op, const std::vector<WindowVector>& gens,
    int kmax, bool adjoint) {
  std::vector<std::vector<WindowVector>> orbit(kmax + 1);
  orbit[0] = gens;
  for (int k = 1; k <= kmax; ++k) {
    orbit[k].reserve(gens.size());
    for (const WindowVector& prev : orbit[k - 1]) {
      orbit[k].push_back(adjoint ? adjoint_apply(op, prev)
                                 : ctrfn::apply(op, prev));
    }
  }
  return orbit;
}

// Constraint matrix whose kernel is { x in candidates : <orbit row, x> = 0 }
// for every orbit row with power in [kfrom, kto]. Rows are exact restrictions
// of the sparse orbit vectors; an empty power range gives zero rows.
Matrix battery_rows(const std::vector<std::vector<WindowVector>>& orbit,
                    int kfrom, int kto,
                    const CandidateCoords& cc) {
  kfrom = std::max(kfrom, 0);
  kto = std::min<int>(kto, static_cast<int>(orbit.size()) - 1);
  const int gens = orbit.empty() ? 0 : static_cast<int>(orbit[0].size());
  const int nrows = (kto >= kfrom) ? (kto - kfrom + 1) * gens : 0;
  Matrix R = Matrix::Zero(nrows, cc.count);
  int r = 0;
  for (int k = kfrom; k <= kto; ++k) {
    for (const WindowVector& w : orbit[k]) {
      for (const auto& [fiber, vec] : w) {
        auto it = cc.base.find(fiber);
        if (it == cc.base.end()) continue;
        for (Eigen::Index d = 0; d < vec.size(); ++d) {
          R(r, it->second + d) = std::conj(vec(d));
        }
      }
      ++r;
    }
  }
  return R;
}

Subspace embed_coords(const Subspace& K, const CandidateCoords& cc,
                      int ambient) {
  Matrix F = Matrix::Zero(ambient, K.dim());
  for (int j = 0; j < cc.count; ++j) F.row(cc.global[j]) = K.frame.row(j);
  return Subspace{ambient, F};
}

Subspace full_space(int dim) {
  return Subspace{dim, Matrix::Identity(dim, dim)};
}

Matrix hcat(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows(), A.cols() + B.cols());
  C.leftCols(A.cols()) = A;
  C.rightCols(B.cols()) = B;
  return C;
}

int battery_slack(const WindowedShiftOperator& op) {
  return (op.hi - op.lo) + op.max_jump() + 2;
}

CanonicalDecomposition assemble(Variant variant, const Truncation& trunc,
                                Subspace H1, Subspace H0, Subspace Hm1,
                                const ExactnessCertificate& cert,
                                const Tolerance& tol) {
  CanonicalDecomposition d;
  d.variant = variant;
  d.trunc = trunc;
  d.H1 = std::move(H1);
  d.H0 = std::move(H0);
  d.Hm1 = std::move(Hm1);
  const Matrix& T = d.trunc.mat;
  d.S_block = d.H1.frame.adjoint() * T * d.H1.frame;
  d.N_block = d.H0.frame.adjoint() * T * d.H0.frame;
  d.C_block = d.Hm1.frame.adjoint() * T * d.Hm1.frame;
  const int h0 = d.H0.dim();
  d.nilpotent_order = 0;
  if (h0 > 0) {
    const auto ranks = rank_sequence(d.N_block, h0, tol);
    d.nilpotent_order = h0 + 1;  // flags a non-nilpotent central block
    for (int k = 1; k <= h0; ++k) {
      if (ranks[k] == 0) {
        d.nilpotent_order = k;
        break;
      }
    }
  }
  d.mult_S = d.H1.dim() - numerical_rank(d.S_block, tol);
  d.mult_C = d.Hm1.dim() - numerical_rank(d.C_block, tol);
  d.exactness = cert;
  return d;
}

// Certified fiber range for one battery direction. Backward probes travel
// upward from the window, so full probing caps the top; forward probes
// mirror this at the bottom. Bounded operators are exact everywhere.
struct ProbeRange {
  int lo = 0;
  int hi = 0;
  bool covers_window = true;
};

ProbeRange probe_range(const WindowedShiftOperator& op, bool backward,
                       int steps, int radius) {
  ProbeRange pr;
  if (op.bounded) {
    pr.lo = -radius;
    pr.hi = radius;
    return pr;
  }
  const int slack = battery_slack(op);
  if (backward) {
    pr.lo = -radius;
    pr.hi = op.hi + steps - slack;
    pr.covers_window = pr.hi >= op.hi;
  } else {
    pr.lo = op.lo - steps + slack;
    pr.hi = radius;
    pr.covers_window = pr.lo <= op.lo;
  }
  return pr;
}

}  // namespace

const char* form_name(Form f) {
  switch (f) {
    case Form::S: return "S";
    case Form::N: return "N";
    case Form::C: return "C";
    case Form::SN: return "SN";
    case Form::NC: return "NC";
    case Form::SC: return "SC";
    case Form::SNC: return "SNC";
  }
  return "?";
}

Subspace isometric_subspace(const WindowedShiftOperator& op, Side side,
                            int steps, int radius, const Tolerance& tol) {
  validate(tol);
  if (steps < 1) throw ConfigError("isometric_subspace needs steps >= 1");
  const Truncation trunc = truncate(op, radius);
  const DefectData dd = defect_data(op, tol);
  const bool backward = (side == Side::backward);
  // Forward isometry is obstructed by the defect of the operator, probed
  // along adjoint orbits; backward isometry mirrors this.
  std::vector<WindowVector> gens = defect_generators(dd, /*star=*/backward);
  if (gens.empty()) return full_space(trunc.dim);
  const ProbeRange pr = probe_range(op, backward, steps, radius);
  if (!op.bounded) {
    if ((backward && pr.hi > radius) || (!backward && pr.lo < -radius)) {
      throw BudgetExceeded("steps " + std::to_string(steps) +
                           " exceed the probing budget at radius " +
                           std::to_string(radius));
    }
    if (!pr.covers_window) {
      throw BudgetExceeded("steps " + std::to_string(steps) +
                           " are too few to probe the window fibers");
    }
  }
  const CandidateCoords cc = candidate_coords(op, trunc, pr.lo, pr.hi);
  const auto orbit = power_orbits(op, gens, steps, /*adjoint=*/!backward);
  const Matrix R = battery_rows(orbit, 0, steps, cc);
  return embed_coords(kernel_space(R, tol), cc, trunc.dim);
}

CanonicalDecomposition canonical_decomposition(const WindowedShiftOperator& op,
                                               Variant variant, int radius,
                                               const Tolerance& tol) {
  validate(tol);
  if (variant == Variant::user) {
    throw ConfigError("user splittings are built by user_decomposition");
  }
  const Truncation trunc = truncate(op, radius);
  const DefectData dd = defect_data(op, tol);
  const auto coeffs = theta_coeffs(op, degree_bound(op), tol);
  const Degree deg = poly_degree(coeffs, tol);
  if (deg.at_least) {
    throw DegreeUndetected(
        "characteristic coefficients still carry mass at the structural "
        "bound");
  }
  const int n = deg.value;
  const int steps = radius / 2;
  const int slack = battery_slack(op);
  const bool star = (variant == Variant::star_canonical);

  // The canonical variant splits off the backward isometric region first:
  // its constraints ride forward orbits of the co-defect. The star variant
  // mirrors this with adjoint orbits of the defect.
  std::vector<WindowVector> gens = defect_generators(dd, /*star=*/!star);

  ExactnessCertificate cert;
  cert.depth =
      op.bounded ? radius : radius - (n + (op.hi - op.lo + 1) + steps);
  if (!op.bounded && cert.depth < 1) {
    throw ExactnessTooShallow("radius " + std::to_string(radius) +
                              " leaves no certified interior margin");
  }

  Subspace inner;  // kernel of the full battery
  Subspace mid;    // kernel of the battery starting at the degree
  if (gens.empty()) {
    // A vanishing defect means the constraints hold everywhere, exactly.
    inner = full_space(trunc.dim);
    mid = inner;
  } else {
    const ProbeRange pr = probe_range(op, /*backward=*/!star, steps, radius);
    if (!op.bounded && (!pr.covers_window || steps < n + 1)) {
      throw ExactnessTooShallow("radius " + std::to_string(radius) +
                                " gives too few probing steps for window and "
                                "degree");
    }
    const CandidateCoords cc = candidate_coords(op, trunc, pr.lo, pr.hi);
    const int kmax = steps + slack;
    const auto orbit = power_orbits(op, gens, kmax, /*adjoint=*/star);
    const Matrix R_full = battery_rows(orbit, 0, steps, cc);
    const Matrix R_mid = battery_rows(orbit, n, steps, cc);
    const Subspace K_full = kernel_space(R_full, tol);
    const Subspace K_mid = kernel_space(R_mid, tol);
    // Stabilization: one battery step fewer must already give the same
    // kernels, and the probe rows beyond the battery must vanish on them.
    const Matrix R_full1 = battery_rows(orbit, 0, steps - 1, cc);
    const Matrix R_mid1 = battery_rows(orbit, n, steps - 1, cc);
    if (kernel_space(R_full1, tol).dim() != K_full.dim() ||
        kernel_space(R_mid1, tol).dim() != K_mid.dim()) {
      throw ExactnessTooShallow(
          "constraint batteries have not stabilized at radius " +
          std::to_string(radius));
    }
    const Matrix R_extra = battery_rows(orbit, steps + 1, kmax, cc);
    if (R_extra.rows() > 0 && K_mid.dim() > 0) {
      const Matrix viol = R_extra * K_mid.frame;
      double worst = 0.0;
      for (Eigen::Index j = 0; j < viol.cols(); ++j) {
        worst = std::max(worst, viol.col(j).norm());
      }
      cert.residual = worst;
      if (worst > 100.0 * tol.eq_tol * std::max(1.0, R_extra.norm())) {
        throw ExactnessTooShallow(
            "deep probe rows still act on the reported kernel, residual " +
            std::to_string(worst));
      }
    }
    inner = embed_coords(K_full, cc, trunc.dim);
    mid = embed_coords(K_mid, cc, trunc.dim);
  }

  const Subspace full = full_space(trunc.dim);
  Subspace H0 = ominus(mid, inner, tol);
  Subspace H1, Hm1;
  if (star) {
    H1 = inner;
    Hm1 = ominus(full, mid, tol);
  } else {
    Hm1 = inner;
    H1 = ominus(full, mid, tol);
  }
  return assemble(variant, trunc, std::move(H1), std::move(H0),
                  std::move(Hm1), cert, tol);
}

CanonicalDecomposition user_decomposition(const WindowedShiftOperator& op,
                                          int radius, const Matrix& H1_frame,
                                          const Matrix& H0_frame,
                                          const Matrix& Hm1_frame,
                                          const Tolerance& tol) {
  validate(tol);
  const Truncation trunc = truncate(op, radius);
  const Matrix* frames[3] = {&H1_frame, &H0_frame, &Hm1_frame};
  for (const Matrix* f : frames) {
    if (f->rows() != trunc.dim) {
      throw DimensionMismatch("frame rows " + std::to_string(f->rows()) +
                              " vs truncation dim " +
                              std::to_string(trunc.dim));
    }
    if (f->cols() > 0) {
      const Matrix g = f->adjoint() * (*f);
      if ((g - Matrix::Identity(g.rows(), g.cols())).norm() > tol.rank_tol) {
        throw ConfigError("splitting frame is not orthonormal");
      }
    }
  }
  if (H1_frame.cols() + H0_frame.cols() + Hm1_frame.cols() != trunc.dim) {
    throw ConfigError("splitting frames do not span the truncation");
  }
  const double cross =
      std::max({(H1_frame.adjoint() * H0_frame).norm(),
                (H1_frame.adjoint() * Hm1_frame).norm(),
                (H0_frame.adjoint() * Hm1_frame).norm()});
  if (cross > tol.rank_tol) {
    throw ConfigError("splitting frames are not mutually orthogonal");
  }
  const Matrix& T = trunc.mat;
  const double lower =
      std::max({(H0_frame.adjoint() * T * H1_frame).norm(),
                (Hm1_frame.adjoint() * T * H1_frame).norm(),
                (Hm1_frame.adjoint() * T * H0_frame).norm()});
  if (lower > 100.0 * tol.eq_tol) {
    throw ConfigError(
        "compressed operator is not upper triangular for these frames, "
        "residual " +
        std::to_string(lower));
  }
  ExactnessCertificate cert;
  cert.depth = radius;
  cert.residual = lower;
  return assemble(Variant::user, trunc, Subspace{trunc.dim, H1_frame},
                  Subspace{trunc.dim, H0_frame},
                  Subspace{trunc.dim, Hm1_frame}, cert, tol);
}

std::pair<int, int> multiplicities(const CanonicalDecomposition& d) {
  return {d.mult_S, d.mult_C};
}

CanonicalDecomposition minimal_splitting(const WindowedShiftOperator& op,
                                         const CanonicalDecomposition& d,
                                         const Tolerance& tol) {
  validate(tol);
  const int radius = d.trunc.radius;
  const int steps = radius / 2;
  const Subspace M1 =
      isometric_subspace(op, Side::forward, steps, radius, tol);
  const Subspace Mm1 =
      isometric_subspace(op, Side::backward, steps, radius, tol);
  // The strips happen one after the other: the overlaps need not be
  // orthogonal to each other, but the second intersection is taken against
  // the already-reduced center, which keeps the splitting orthogonal.
  const Subspace up = subspace_intersect(M1, d.H0, tol);
  const Matrix H1f = orthonormal_columns(hcat(d.H1.frame, up.frame), tol);
  const Subspace H0a = ominus(d.H0, up, tol);
  const Subspace dn = subspace_intersect(H0a, Mm1, tol);
  const Matrix Hm1f = orthonormal_columns(hcat(d.Hm1.frame, dn.frame), tol);
  const Subspace H0b = ominus(H0a, dn, tol);
  return assemble(Variant::user, d.trunc, Subspace{d.trunc.dim, H1f}, H0b,
                  Subspace{d.trunc.dim, Hm1f}, d.exactness, tol);
}

std::pair<Matrix, Matrix> minimal_nilpotents(const WindowedShiftOperator& op,
                                             int radius, const Tolerance& tol) {
  const CanonicalDecomposition dc =
      canonical_decomposition(op, Variant::canonical, radius, tol);
  const CanonicalDecomposition ds =
      canonical_decomposition(op, Variant::star_canonical, radius, tol);
  const CanonicalDecomposition dcm = minimal_splitting(op, dc, tol);
  const CanonicalDecomposition dsm = minimal_splitting(op, ds, tol);
  return {dcm.N_block, dsm.N_block};
}

namespace {

void require_nilpotent(const Matrix& N, const char* which,
                       const Tolerance& tol) {
  if (N.rows() != N.cols()) {
    throw DimensionMismatch("nilpotent comparison needs square blocks");
  }
  const int d = static_cast<int>(N.rows());
  if (d == 0) return;
  const auto ranks = rank_sequence(N, d, tol);
  if (ranks[d] != 0) {
    throw NotNilpotent(std::string(which) + " block has rank " +
                       std::to_string(ranks[d]) + " at power " +
                       std::to_string(d));
  }
}

Matrix unvec(const Vector& v, int rows, int cols) {
  Matrix X(rows, cols);
  for (int c = 0; c < cols; ++c) X.col(c) = v.segment(c * rows, rows);
  return X;
}

}  // namespace

std::optional<Matrix> injection_intertwiner(const Matrix& N1, const Matrix& N2,
                                            const Tolerance& tol, int draws,
                                            std::uint64_t seed) {
  validate(tol);
  require_nilpotent(N1, "first", tol);
  require_nilpotent(N2, "second", tol);
  const int d1 = static_cast<int>(N1.rows());
  const int d2 = static_cast<int>(N2.rows());
  if (d1 == 0) return Matrix(d2, 0);
  if (d2 < d1) return std::nullopt;  // no injective map into fewer dimensions
  // vec(X N1 - N2 X) = 0 over X in C^{d2 x d1}, column-major vec.
  const int unknowns = d1 * d2;
  Matrix E = Matrix::Zero(unknowns, unknowns);
  for (int j = 0; j < d1; ++j) {
    for (int i = 0; i < d2; ++i) {
      const int row = j * d2 + i;
      for (int s = 0; s < d1; ++s) E(row, s * d2 + i) += N1(s, j);
      for (int s = 0; s < d2; ++s) E(row, j * d2 + s) -= N2(i, s);
    }
  }
  const Subspace ker = kernel_space(E, tol);
  if (ker.dim() == 0) return std::nullopt;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // A generic element of the solution space attains the maximal rank, so a
  // handful of draws decides injectivity. The basis vectors themselves go
  // first for determinism on one-dimensional solution spaces.
  for (int t = 0; t < draws; ++t) {
    Vector w;
    if (t < ker.dim()) {
      w = ker.frame.col(t);
    } else {
      w = Vector(ker.dim());
      for (int j = 0; j < ker.dim(); ++j) {
        w(j) = cplx(normal(gen), normal(gen));
      }
      w = ker.frame * w;
    }
    const Matrix X = unvec(w, d2, d1);
    if (X.norm() <= tol.rank_tol) continue;
    if (numerical_rank(X, tol) == d1) return X / X.norm();
  }
  return std::nullopt;
}

namespace {

// Orthonormal chain basis of a nilpotent: columns grouped by chain, tops
// first within each chain, chains ordered by descending height. Returns
// nullopt when the extracted chains fail to be orthonormal, i.e. the
// operator does not shift an orthonormal basis.
std::optional<Matrix> isometric_chain_basis(const Matrix& N,
                                            const Tolerance& tol) {
  const int d = static_cast<int>(N.rows());
  if (d == 0) return Matrix(0, 0);
  const auto ranks = rank_sequence(N, d, tol);
  int order = d + 1;
  for (int k = 1; k <= d; ++k) {
    if (ranks[k] == 0) {
      order = k;
      break;
    }
  }
  if (order > d) return std::nullopt;
  std::vector<Subspace> kernels(order + 1, Subspace{d, Matrix(d, 0)});
  Matrix P = Matrix::Identity(d, d);
  for (int k = 1; k <= order; ++k) {
    P = P * N;
    kernels[k] = kernel_space(P, tol);
  }
  std::vector<std::vector<Vector>> chains;  // chain[i] descends from its top
  for (int h = order; h >= 1; --h) {
    // Directions already passing through height h from taller chains.
    Matrix avoid = kernels[h - 1].frame;
    for (const auto& chain : chains) {
      const int hc = static_cast<int>(chain.size());
      if (hc > h) {
        Matrix col(d, 1);
        col.col(0) = chain[hc - h];  // the chain's element of height h
        avoid = hcat(avoid, col);
      }
    }
    const Subspace avail =
        ominus(kernels[h], Subspace{d, orthonormal_columns(avoid, tol)}, tol);
    for (int j = 0; j < avail.dim(); ++j) {
      std::vector<Vector> chain;
      Vector v = avail.frame.col(j);
      for (int i = 0; i < h; ++i) {
        chain.push_back(v);
        if (i + 1 < h) v = N * v;
      }
      chains.push_back(std::move(chain));
    }
  }
  int total = 0;
  for (const auto& chain : chains) total += static_cast<int>(chain.size());
  if (total != d) return std::nullopt;
  Matrix B(d, d);
  int c = 0;
  for (const auto& chain : chains) {
    for (const Vector& v : chain) B.col(c++) = v;
  }
  if ((B.adjoint() * B - Matrix::Identity(d, d)).norm() > 1e-8) {
    return std::nullopt;
  }
  return B;
}

}  // namespace

std::optional<Matrix> jordan_chain_unitary(const Matrix& N1, const Matrix& N2,
                                           const Tolerance& tol) {
  validate(tol);
  require_nilpotent(N1, "first", tol);
  require_nilpotent(N2, "second", tol);
  if (N1.rows() != N2.rows()) return std::nullopt;
  const int d = static_cast<int>(N1.rows());
  if (d == 0) return Matrix(0, 0);
  if (rank_sequence(N1, d, tol) != rank_sequence(N2, d, tol)) {
    return std::nullopt;
  }
  const auto B1 = isometric_chain_basis(N1, tol);
  const auto B2 = isometric_chain_basis(N2, tol);
  if (!B1 || !B2) return std::nullopt;
  // Equal rank profiles align the chain lists height by height, so mapping
  // basis to basis intertwines the shifts exactly.
  const Matrix U = (*B2) * B1->adjoint();
  if ((U * N1 - N2 * U).norm() > 1e-6 * std::max(1.0, N1.norm())) {
    return std::nullopt;
  }
  return U;
}

QuasiAffinityWitness quasi_affinity_witness(const WindowedShiftOperator& op,
                                            const CanonicalDecomposition& da,
                                            const CanonicalDecomposition& db,
                                            const Tolerance& tol) {
  validate(tol);
  if (da.trunc.radius != db.trunc.radius || da.trunc.dim != db.trunc.dim) {
    throw DimensionMismatch("witness needs both splittings at one radius");
  }
  const int radius = da.trunc.radius;
  const int steps = radius / 2;
  const Subspace M1 =
      isometric_subspace(op, Side::forward, steps, radius, tol);
  const Subspace Mm1 =
      isometric_subspace(op, Side::backward, steps, radius, tol);
  const CanonicalDecomposition* ds[2] = {&da, &db};
  const char* names[2] = {"first", "second"};
  for (int i = 0; i < 2; ++i) {
    const Subspace up = subspace_intersect(M1, ds[i]->H0, tol);
    if (up.dim() > 0) {
      throw HypothesisViolated(
          std::string("forward isometric region meets the central space of "
                      "the ") +
              names[i] + " splitting",
          up.dim());
    }
    const Subspace dn = subspace_intersect(ds[i]->H0, Mm1, tol);
    if (dn.dim() > 0) {
      throw HypothesisViolated(
          std::string("backward isometric region meets the central space of "
                      "the ") +
              names[i] + " splitting",
          dn.dim());
    }
  }
  const Subspace L1 =
      ominus(da.H1, subspace_intersect(da.H1, db.H1, tol), tol);
  const Subspace Lm1 =
      ominus(db.Hm1, subspace_intersect(da.Hm1, db.Hm1, tol), tol);
  const Matrix D = hcat(L1.frame, da.H0.frame);
  const Matrix E = hcat(db.H0.frame, Lm1.frame);
  const Matrix& T = da.trunc.mat;
  QuasiAffinityWitness w;
  w.Y_tilde = E.adjoint() * D;
  const Matrix Tt = D.adjoint() * T * D;
  const Matrix Tp = E.adjoint() * T * E;
  w.intertwining_residual = (w.Y_tilde * Tt - Tp * w.Y_tilde).norm();
  const int rank = numerical_rank(w.Y_tilde, tol);
  w.ker_dim = static_cast<int>(w.Y_tilde.cols()) - rank;
  w.range_codim = static_cast<int>(w.Y_tilde.rows()) - rank;
  return w;
}

Classification classify_degenerate(const WindowedShiftOperator& op, int radius,
                                   const Tolerance& tol) {
  validate(tol);
  const DefectData dd = defect_data(op, tol);
  const int p = dd.defect_rank();
  const int q = dd.defect_rank_star();
  const auto coeffs = theta_coeffs(op, degree_bound(op), tol);
  const Degree deg = poly_degree(coeffs, tol);
  if (deg.at_least) {
    throw DegreeUndetected(
        "characteristic coefficients still carry mass at the structural "
        "bound");
  }
  const CanonicalDecomposition dc =
      canonical_decomposition(op, Variant::canonical, radius, tol);
  const int steps = radius / 2;
  const Subspace M1 =
      isometric_subspace(op, Side::forward, steps, radius, tol);
  const Subspace Mm1 =
      isometric_subspace(op, Side::backward, steps, radius, tol);
  const bool h1_triv = (M1.dim() == 0);
  const bool hm1_triv = (Mm1.dim() == 0);
  const bool h0_triv = (dc.H0.dim() == 0);
  if (p == 0 && h0_triv && hm1_triv) return {Form::S, "C10"};
  if (q == 0 && h0_triv && h1_triv) return {Form::C, "C01"};
  if (h1_triv && hm1_triv) return {Form::N, "C00"};
  if (hm1_triv) return {Form::SN, "C.0"};
  if (h1_triv) return {Form::NC, "C0."};
  if (deg.value == 0 && p > 0 && q > 0) return {Form::SC, "C.."};
  return {Form::SNC, "C.."};
}

int unitary_part_dim(const WindowedShiftOperator& op, int steps, int radius,
                     const Tolerance& tol) {
  validate(tol);
  if (steps < 1) throw ConfigError("unitary_part_dim needs steps >= 1");
  const Truncation trunc = truncate(op, radius);
  const DefectData dd = defect_data(op, tol);
  int band_lo, band_hi;
  if (op.bounded) {
    band_lo = -radius;
    band_hi = radius;
  } else {
    const int slack = battery_slack(op);
    band_lo = op.lo - steps + slack;
    band_hi = op.hi + steps - slack;
    if (band_hi > radius || band_lo < -radius) {
      throw BudgetExceeded("steps " + std::to_string(steps) +
                           " exceed the probing budget at radius " +
                           std::to_string(radius));
    }
    if (band_lo > band_hi) {
      throw BudgetExceeded("steps " + std::to_string(steps) +
                           " certify no fiber at all");
    }
  }
  const CandidateCoords cc = candidate_coords(op, trunc, band_lo, band_hi);
  const auto gens_f = defect_generators(dd, /*star=*/false);
  const auto gens_b = defect_generators(dd, /*star=*/true);
  if (gens_f.empty() && gens_b.empty()) return cc.count;
  Matrix R(0, cc.count);
  if (!gens_f.empty()) {
    const auto orbit = power_orbits(op, gens_f, steps, /*adjoint=*/true);
    R = battery_rows(orbit, 0, steps, cc);
  }
  if (!gens_b.empty()) {
    const auto orbit = power_orbits(op, gens_b, steps, /*adjoint=*/false);
    const Matrix Rb = battery_rows(orbit, 0, steps, cc);
    Matrix stacked(R.rows() + Rb.rows(), cc.count);
    stacked.topRows(R.rows()) = R;
    stacked.bottomRows(Rb.rows()) = Rb;
    R = std::move(stacked);
  }
  return kernel_space(R, tol).dim();
}

}  // namespace ctrfn
