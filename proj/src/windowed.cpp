#include "ctrfn/windowed.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace ctrfn {

namespace {

void validate_vector(const WindowedShiftOperator& op, const WindowVector& x) {
  for (const auto& [n, v] : x) {
    if (v.size() != op.fiber_dim(n)) {
      throw DimensionMismatch("vector has " + std::to_string(v.size()) +
                              " coordinates on fiber " + std::to_string(n) +
                              ", expected " + std::to_string(op.fiber_dim(n)));
    }
  }
}

void accumulate(WindowVector& out, int fiber, const Vector& w) {
  if (w.size() == 0) return;
  auto it = out.find(fiber);
  if (it == out.end()) {
    out.emplace(fiber, w);
  } else {
    it->second += w;
  }
}

}  // namespace

int WindowedShiftOperator::max_jump() const {
  int j = 0;
  for (const auto& [from, list] : blocks) {
    for (const Block& blk : list) {
      j = std::max(j, blk.to - from - 1);
    }
  }
  return j;
}

WindowedShiftOperator make_windowed(FiberProfile profile, int lo, int hi,
                                    std::map<int, std::vector<Block>> blocks,
                                    bool bounded) {
  if (profile.left < 0 || profile.right < 0 ||
      profile.left + profile.right < 1) {
    throw ConfigError("fiber profile must be nonnegative with left+right >= 1");
  }
  if (lo > hi) throw ConfigError("window lower bound exceeds upper bound");
  WindowedShiftOperator op{profile, lo, hi, std::move(blocks), bounded};
  if (!bounded && (lo > -1 || hi < -1) && profile.left != profile.right) {
    throw DimensionMismatch(
        "identity shift would cross the fiber-size boundary: window must "
        "contain -1 or the profile must be constant");
  }
  for (const auto& [from, list] : op.blocks) {
    if (from < lo || from > hi) {
      throw ConfigError("block source fiber " + std::to_string(from) +
                        " lies outside the window");
    }
    for (const Block& blk : list) {
      if (blk.mat.rows() != op.fiber_dim(blk.to) ||
          blk.mat.cols() != op.fiber_dim(from)) {
        throw DimensionMismatch(
            "block " + std::to_string(from) + " -> " + std::to_string(blk.to) +
            " has shape " + std::to_string(blk.mat.rows()) + "x" +
            std::to_string(blk.mat.cols()) + ", fibers need " +
            std::to_string(op.fiber_dim(blk.to)) + "x" +
            std::to_string(op.fiber_dim(from)));
      }
    }
  }
  return op;
}

cplx wv_inner(const WindowVector& a, const WindowVector& b) {
  cplx s = 0.0;
  for (const auto& [n, v] : a) {
    auto it = b.find(n);
    if (it != b.end() && v.size() == it->second.size()) {
      s += v.dot(it->second);
    }
  }
  return s;
}

double wv_norm(const WindowVector& a) {
  return std::sqrt(std::abs(wv_inner(a, a)));
}

WindowVector basis_vector(const WindowedShiftOperator& op, int fiber, int i) {
  const int d = op.fiber_dim(fiber);
  if (i < 0 || i >= d) {
    throw DimensionMismatch("basis index " + std::to_string(i) +
                            " out of range for fiber " + std::to_string(fiber));
  }
  Vector v = Vector::Zero(d);
  v(i) = 1.0;
  return WindowVector{{fiber, v}};
}

WindowVector apply(const WindowedShiftOperator& op, const WindowVector& x) {
  validate_vector(op, x);
  WindowVector out;
  for (const auto& [n, v] : x) {
    if (v.size() == 0) continue;
    if (n >= op.lo && n <= op.hi) {
      auto it = op.blocks.find(n);
      if (it == op.blocks.end()) continue;
      for (const Block& blk : it->second) {
        if (blk.mat.rows() == 0) continue;
        accumulate(out, blk.to, blk.mat * v);
      }
    } else {
      accumulate(out, n + 1, v);
    }
  }
  return out;
}

WindowVector adjoint_apply(const WindowedShiftOperator& op,
                           const WindowVector& x) {
  validate_vector(op, x);
  std::map<int, std::vector<std::pair<int, const Matrix*>>> into;
  for (const auto& [from, list] : op.blocks) {
    for (const Block& blk : list) {
      into[blk.to].emplace_back(from, &blk.mat);
    }
  }
  WindowVector out;
  for (const auto& [m, w] : x) {
    if (w.size() == 0) continue;
    const int n = m - 1;
    if (!op.bounded && (n < op.lo || n > op.hi)) {
      accumulate(out, n, w);
    }
    auto it = into.find(m);
    if (it != into.end()) {
      for (const auto& [from, mat] : it->second) {
        if (mat->cols() == 0) continue;
        accumulate(out, from, mat->adjoint() * w);
      }
    }
  }
  return out;
}

std::vector<std::pair<int, int>> fiber_coordinates(
    const WindowedShiftOperator& op, const std::vector<int>& fibers) {
  std::vector<std::pair<int, int>> coords;
  for (int n : fibers) {
    for (int i = 0; i < op.fiber_dim(n); ++i) coords.emplace_back(n, i);
  }
  return coords;
}

Vector restrict_to(const WindowVector& x,
                   const std::vector<std::pair<int, int>>& coords) {
  Vector v = Vector::Zero(coords.size());
  for (size_t k = 0; k < coords.size(); ++k) {
    auto it = x.find(coords[k].first);
    if (it != x.end()) v(k) = it->second(coords[k].second);
  }
  return v;
}

WindowVector expand_from(const std::vector<std::pair<int, int>>& coords,
                         const Vector& v) {
  if (v.size() != static_cast<Eigen::Index>(coords.size())) {
    throw DimensionMismatch("expand_from size mismatch");
  }
  WindowVector x;
  for (size_t k = 0; k < coords.size(); ++k) {
    auto it = x.find(coords[k].first);
    if (it == x.end()) {
      int d = 0;
      for (const auto& [n, i] : coords) {
        if (n == coords[k].first) d = std::max(d, i + 1);
      }
      it = x.emplace(coords[k].first, Vector::Zero(d)).first;
    }
    it->second(coords[k].second) = v(k);
  }
  return x;
}

namespace {

FiberBlock defect_block(const WindowedShiftOperator& op,
                        const std::set<int>& candidates, bool star,
                        const Tolerance& tol) {
  std::vector<std::pair<int, int>> coords;
  std::vector<WindowVector> images;
  for (int n : candidates) {
    for (int i = 0; i < op.fiber_dim(n); ++i) {
      coords.emplace_back(n, i);
      const WindowVector e = basis_vector(op, n, i);
      images.push_back(star ? adjoint_apply(op, e) : ctrfn::apply(op, e));
    }
  }
  const int d = static_cast<int>(coords.size());
  Matrix G(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const cplx g = wv_inner(images[i], images[j]);
      G(i, j) = (i == j ? cplx(1.0) : cplx(0.0)) - g;
    }
  }
  if (d > 0) {
    const Matrix sym = 0.5 * (G + G.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    const double floor = -tol.eq_tol * std::max(1.0, G.norm());
    if (es.eigenvalues().minCoeff() < floor) {
      throw NotContraction("defect eigenvalue " +
                           std::to_string(es.eigenvalues().minCoeff()));
    }
  }
  // Keep only fibers whose rows carry mass; entries outside the modified
  // region are exactly zero by construction.
  const double cut = 1e-14 * std::max(1.0, d > 0 ? G.norm() : 0.0);
  std::vector<int> kept_fibers;
  std::vector<int> kept_idx;
  for (int n : candidates) {
    bool carry = false;
    for (int i = 0; i < d; ++i) {
      if (coords[i].first != n) continue;
      if (G.row(i).norm() > cut) {
        carry = true;
        break;
      }
    }
    if (!carry) continue;
    kept_fibers.push_back(n);
    for (int i = 0; i < d; ++i) {
      if (coords[i].first == n) kept_idx.push_back(i);
    }
  }
  const int kd = static_cast<int>(kept_idx.size());
  Matrix sub(kd, kd);
  for (int i = 0; i < kd; ++i) {
    for (int j = 0; j < kd; ++j) sub(i, j) = G(kept_idx[i], kept_idx[j]);
  }
  return FiberBlock{kept_fibers, sub};
}

}  // namespace

std::pair<FiberBlock, FiberBlock> defect_grams(const WindowedShiftOperator& op,
                                               const Tolerance& tol) {
  std::set<int> cand_src, cand_tgt;
  for (int n = op.lo; n <= op.hi; ++n) {
    cand_src.insert(n);
    cand_tgt.insert(n);
  }
  cand_tgt.insert(op.hi + 1);
  for (const auto& [from, list] : op.blocks) {
    for (const Block& blk : list) {
      cand_src.insert(blk.to - 1);
      cand_tgt.insert(blk.to);
    }
  }
  FiberBlock dt = defect_block(op, cand_src, false, tol);
  FiberBlock dts = defect_block(op, cand_tgt, true, tol);
  return {std::move(dt), std::move(dts)};
}

Truncation truncate(const WindowedShiftOperator& op, int radius) {
  const int span_need = (op.hi - op.lo) + op.max_jump() + 2;
  if (radius < std::abs(op.lo) || radius < std::abs(op.hi) ||
      radius < span_need) {
    throw RadiusTooSmall("radius " + std::to_string(radius) +
                         " < required " +
                         std::to_string(std::max({std::abs(op.lo),
                                                  std::abs(op.hi),
                                                  span_need})));
  }
  Truncation tr;
  tr.radius = radius;
  int off = 0;
  for (int n = -radius; n <= radius; ++n) {
    tr.fibers.push_back(n);
    tr.offsets[n] = off;
    off += op.fiber_dim(n);
  }
  tr.dim = off;
  tr.mat = Matrix::Zero(tr.dim, tr.dim);
  for (int n = -radius; n <= radius; ++n) {
    for (int i = 0; i < op.fiber_dim(n); ++i) {
      const WindowVector y = ctrfn::apply(op, basis_vector(op, n, i));
      const int col = tr.offsets.at(n) + i;
      for (const auto& [m, w] : y) {
        if (m < -radius || m > radius) continue;
        tr.mat.col(col).segment(tr.offsets.at(m), w.size()) = w;
      }
    }
  }
  return tr;
}

}  // namespace ctrfn
