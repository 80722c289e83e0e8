#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "ctrfn/canonical.hpp"
#include "ctrfn/coincide.hpp"
#include "ctrfn/numlin.hpp"
#include "ctrfn/windowed.hpp"

namespace ctrfn {

using json = nlohmann::json;

// Complex scalars travel as [re, im] pairs.
json complex_to_json(cplx z);
cplx complex_from_json(const json& j);

// Matrices travel as {"rows": r, "cols": c, "entries": [[re, im], ...]}
// with entries listed row-major.
json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const json& j);

// Operators travel as {"profile": {"left": l, "right": r},
// "window": [lo, hi], "blocks": [{"from": n, "to": m, "matrix": ...}]},
// plus "bounded": true for operators supported on the window alone.
json operator_to_json(const WindowedShiftOperator& op);
WindowedShiftOperator operator_from_json(const json& j);

// Matrix polynomials travel as {"dom": d, "cod": c, "coeffs": [...]}
// with coeffs[k] the coefficient of z^k, each of shape cod x dom.
json poly_to_json(const std::vector<Matrix>& coeffs);
std::vector<Matrix> poly_from_json(const json& j);

// Model configs look like {"model": "tabc" | "jordan" | "monomial" |
// "monomial_star", "params": {...}}. The tabc params are complex "a", "b"
// and "gamma", the jump weight normalized by the defect cap. Construction
// warnings are appended to *warnings when given.
WindowedShiftOperator model_from_json(const json& j, const Tolerance& tol,
                                      std::vector<std::string>* warnings);

// {"coincide": true | false | "no-certificate", "residual": r,
// "tau": ..., "tau_star": ...}
json coincidence_to_json(const CoincidenceResult& r);

// {"variant": ..., "dims": [d1, d0, dm1], "nilpotent_order": n,
// "mult_S": s, "mult_C": c, "exactness_depth": d, "frames": {...}}
json decomposition_to_json(const CanonicalDecomposition& d);

}  // namespace ctrfn
