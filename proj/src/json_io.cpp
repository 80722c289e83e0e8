#include "ctrfn/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "ctrfn/errors.hpp"
#include "ctrfn/models.hpp"

namespace ctrfn {

namespace {

const json& require_field(const json& j, const char* name, const char* ctx) {
  if (!j.is_object()) {
    throw ConfigError(std::string(ctx) + " must be a JSON object");
  }
  const auto it = j.find(name);
  if (it == j.end()) {
    throw ConfigError(std::string(ctx) + " needs a '" + name + "' field");
  }
  return *it;
}

int require_int(const json& j, const char* what) {
  if (!j.is_number_integer()) {
    throw ConfigError(std::string(what) + " must be an integer");
  }
  return j.get<int>();
}

}  // namespace

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw ConfigError("complex scalars are [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const Matrix& M) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      entries.push_back(complex_to_json(M(i, c)));
    }
  }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"entries", entries}};
}

Matrix matrix_from_json(const json& j) {
  const int rows = require_int(require_field(j, "rows", "matrix"), "rows");
  const int cols = require_int(require_field(j, "cols", "matrix"), "cols");
  if (rows < 0 || cols < 0) {
    throw ConfigError("matrix dimensions must be nonnegative");
  }
  const json& entries = require_field(j, "entries", "matrix");
  if (!entries.is_array() ||
      entries.size() != static_cast<std::size_t>(rows) * cols) {
    throw ConfigError("matrix entries must list rows*cols [re, im] pairs");
  }
  Matrix M(rows, cols);
  std::size_t k = 0;
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) M(i, c) = complex_from_json(entries[k++]);
  }
  return M;
}

json operator_to_json(const WindowedShiftOperator& op) {
  json blocks = json::array();
  for (const auto& [from, list] : op.blocks) {
    for (const Block& b : list) {
      blocks.push_back(json{{"from", from},
                            {"to", b.to},
                            {"matrix", matrix_to_json(b.mat)}});
    }
  }
  json j{{"profile",
          json{{"left", op.profile.left}, {"right", op.profile.right}}},
         {"window", json::array({op.lo, op.hi})},
         {"blocks", blocks}};
  if (op.bounded) j["bounded"] = true;
  return j;
}

WindowedShiftOperator operator_from_json(const json& j) {
  const json& prof = require_field(j, "profile", "operator");
  FiberProfile profile{
      require_int(require_field(prof, "left", "profile"), "profile.left"),
      require_int(require_field(prof, "right", "profile"), "profile.right")};
  const json& window = require_field(j, "window", "operator");
  if (!window.is_array() || window.size() != 2) {
    throw ConfigError("operator window must be [lo, hi]");
  }
  const int lo = require_int(window[0], "window lo");
  const int hi = require_int(window[1], "window hi");
  const json& blist = require_field(j, "blocks", "operator");
  if (!blist.is_array()) throw ConfigError("operator blocks must be a list");
  std::map<int, std::vector<Block>> blocks;
  for (int f = lo; f <= hi; ++f) blocks[f] = {};
  for (const json& bj : blist) {
    const int from = require_int(require_field(bj, "from", "block"), "from");
    const int to = require_int(require_field(bj, "to", "block"), "to");
    blocks[from].push_back(
        Block{to, matrix_from_json(require_field(bj, "matrix", "block"))});
  }
  const bool bounded = j.value("bounded", false);
  return make_windowed(profile, lo, hi, std::move(blocks), bounded);
}

json poly_to_json(const std::vector<Matrix>& coeffs) {
  const int cod = coeffs.empty() ? 0 : static_cast<int>(coeffs[0].rows());
  const int dom = coeffs.empty() ? 0 : static_cast<int>(coeffs[0].cols());
  json list = json::array();
  for (const Matrix& C : coeffs) {
    if (C.rows() != cod || C.cols() != dom) {
      throw DimensionMismatch("polynomial coefficients must share one shape");
    }
    list.push_back(matrix_to_json(C));
  }
  return json{{"dom", dom}, {"cod", cod}, {"coeffs", list}};
}

std::vector<Matrix> poly_from_json(const json& j) {
  const int dom = require_int(require_field(j, "dom", "polynomial"), "dom");
  const int cod = require_int(require_field(j, "cod", "polynomial"), "cod");
  const json& list = require_field(j, "coeffs", "polynomial");
  if (!list.is_array()) throw ConfigError("polynomial coeffs must be a list");
  std::vector<Matrix> coeffs;
  coeffs.reserve(list.size());
  for (const json& cj : list) {
    Matrix C = matrix_from_json(cj);
    if (C.rows() != cod || C.cols() != dom) {
      throw ConfigError("polynomial coefficient shape differs from cod x dom");
    }
    coeffs.push_back(std::move(C));
  }
  return coeffs;
}

WindowedShiftOperator model_from_json(const json& j, const Tolerance& tol,
                                      std::vector<std::string>* warnings) {
  const json& name_j = require_field(j, "model", "model config");
  if (!name_j.is_string()) throw ConfigError("model name must be a string");
  const std::string name = name_j.get<std::string>();
  const json& params = require_field(j, "params", "model config");
  if (name == "tabc") {
    const cplx a = complex_from_json(require_field(params, "a", "tabc"));
    const cplx b = complex_from_json(require_field(params, "b", "tabc"));
    const cplx gamma =
        complex_from_json(require_field(params, "gamma", "tabc"));
    const double cap = std::sqrt(std::max(0.0, (1.0 - std::norm(a)) *
                                                   (1.0 - std::norm(b))));
    return make_Tabc({a, b, gamma * cap}, warnings);
  }
  if (name == "jordan") {
    const int m = require_int(require_field(params, "m", "jordan"), "m");
    const int dim =
        require_int(require_field(params, "dim", "jordan"), "dim");
    return jordan_window_model(m, dim);
  }
  if (name == "monomial" || name == "monomial_star") {
    const Matrix A = matrix_from_json(require_field(params, "A", name.c_str()));
    const int m = require_int(require_field(params, "m", name.c_str()), "m");
    const MonomialParams p{A, m};
    return name == "monomial" ? make_TA(p, tol) : make_TA_star(p, tol);
  }
  throw ConfigError("unknown model '" + name +
                    "': expected tabc, jordan, monomial, or monomial_star");
}

json coincidence_to_json(const CoincidenceResult& r) {
  json j;
  switch (r.kind) {
    case CoincidenceResult::Kind::Coincide: j["coincide"] = true; break;
    case CoincidenceResult::Kind::NoCoincidence: j["coincide"] = false; break;
    case CoincidenceResult::Kind::NoCertificate:
      j["coincide"] = "no-certificate";
      break;
  }
  j["residual"] = r.residual;
  j["tau"] = matrix_to_json(r.tau);
  j["tau_star"] = matrix_to_json(r.tau_star);
  return j;
}

json decomposition_to_json(const CanonicalDecomposition& d) {
  const char* variant = "user";
  if (d.variant == Variant::canonical) variant = "canonical";
  if (d.variant == Variant::star_canonical) variant = "star_canonical";
  return json{
      {"variant", variant},
      {"dims",
       json::array({d.H1.dim(), d.H0.dim(), d.Hm1.dim()})},
      {"nilpotent_order", d.nilpotent_order},
      {"mult_S", d.mult_S},
      {"mult_C", d.mult_C},
      {"exactness_depth", d.exactness.depth},
      {"frames", json{{"H1", matrix_to_json(d.H1.frame)},
                      {"H0", matrix_to_json(d.H0.frame)},
                      {"Hm1", matrix_to_json(d.Hm1.frame)}}}};
}

}  // namespace ctrfn
