#include "ctrfn/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "ctrfn/canonical.hpp"
#include "ctrfn/charfn.hpp"
#include "ctrfn/coincide.hpp"
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

int int_field(const json& j, const char* name, int dflt) {
  const auto it = j.find(name);
  if (it == j.end()) return dflt;
  return require_int(*it, name);
}

std::string str_field(const json& j, const char* name,
                      const std::string& dflt) {
  const auto it = j.find(name);
  if (it == j.end()) return dflt;
  if (!it->is_string()) {
    throw ConfigError(std::string(name) + " must be a string");
  }
  return it->get<std::string>();
}

Tolerance tolerance_from(const json& config) {
  Tolerance tol = default_tolerance();
  const auto it = config.find("tolerances");
  if (it != config.end()) {
    if (!it->is_object()) {
      throw ConfigError("tolerances must be an object");
    }
    if (it->contains("rank_tol")) {
      tol.rank_tol = (*it)["rank_tol"].is_number()
                         ? (*it)["rank_tol"].get<double>()
                         : throw ConfigError("rank_tol must be a number");
    }
    if (it->contains("eq_tol")) {
      tol.eq_tol = (*it)["eq_tol"].is_number()
                       ? (*it)["eq_tol"].get<double>()
                       : throw ConfigError("eq_tol must be a number");
    }
  }
  validate(tol);
  return tol;
}

std::uint64_t seed_from(const json& config) {
  const auto it = config.find("seed");
  if (it == config.end()) return 12345;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
    throw ConfigError("seed must be a nonnegative integer");
  }
  return it->get<std::uint64_t>();
}

struct Outcome {
  json results = json::object();
  json certificates;
  std::string status = "ok";
  std::string error;
};

std::vector<cplx> scalar_coeffs(const std::vector<Matrix>& coeffs,
                                const char* which) {
  std::vector<cplx> out;
  out.reserve(coeffs.size());
  for (const Matrix& C : coeffs) {
    if (C.rows() != 1 || C.cols() != 1) {
      throw ConfigError(std::string(which) +
                        " is not scalar: coefficients must be 1 x 1");
    }
    out.push_back(C(0, 0));
  }
  return out;
}

Outcome run_build(const json& config, const Tolerance& tol,
                  std::vector<std::string>& warnings) {
  const auto op =
      model_from_json(require_field(config, "model", "build"), tol, &warnings);
  const DefectData dd = defect_data(op, tol);
  Outcome out;
  out.results = json{{"operator", operator_to_json(op)},
                     {"defect_rank", dd.defect_rank()},
                     {"defect_rank_star", dd.defect_rank_star()},
                     {"degree_bound", degree_bound(op)}};
  return out;
}

Outcome run_charfn(const json& config, const Tolerance& tol,
                   std::vector<std::string>& warnings) {
  const auto op = model_from_json(require_field(config, "model", "charfn"),
                                  tol, &warnings);
  const int bound = degree_bound(op);
  const int budget = int_field(config, "budget", bound);
  if (budget < 0) throw ConfigError("budget must be >= 0");
  const auto coeffs = theta_coeffs(op, budget, tol);
  const Degree deg = poly_degree(coeffs, tol);
  // The detected degree is certified only once the budget covers the
  // structural bound: below it, mass may hide in coefficients never computed
  // (a pure monomial family looks identically zero from a short prefix).
  const bool at_least = deg.at_least || budget < bound;
  Outcome out;
  if (at_least) {
    out.status = "inconclusive";
    warnings.push_back(deg.at_least
                           ? "coefficients still carry mass at the budget; "
                             "raise it to pin the degree"
                           : "budget " + std::to_string(budget) +
                                 " is below the structural degree bound " +
                                 std::to_string(bound) +
                                 "; higher coefficients were not examined");
  }
  const std::vector<Matrix> trimmed(
      coeffs.begin(),
      deg.at_least ? coeffs.end() : coeffs.begin() + deg.value + 1);
  out.results = json{{"theta", poly_to_json(trimmed)},
                     {"degree", deg.value},
                     {"degree_at_least", at_least}};
  return out;
}

Outcome run_decompose(const json& config, const Tolerance& tol,
                      std::vector<std::string>& warnings) {
  const auto op = model_from_json(require_field(config, "model", "decompose"),
                                  tol, &warnings);
  const std::string vname = str_field(config, "variant", "canonical");
  Variant variant;
  if (vname == "canonical") {
    variant = Variant::canonical;
  } else if (vname == "star_canonical") {
    variant = Variant::star_canonical;
  } else {
    throw ConfigError("variant must be canonical or star_canonical");
  }
  const int radius = int_field(config, "radius", 32);
  CanonicalDecomposition d = canonical_decomposition(op, variant, radius, tol);
  const bool minimal = config.value("minimal", false);
  if (minimal) d = minimal_splitting(op, d, tol);
  Outcome out;
  out.results = decomposition_to_json(d);
  out.results["minimal"] = minimal;
  if (!config.value("frames", true)) out.results.erase("frames");
  out.certificates = json{{"radius", radius},
                          {"exactness_depth", d.exactness.depth},
                          {"residual", d.exactness.residual}};
  return out;
}

Outcome run_coincide(const json& config, const Tolerance& tol,
                     std::uint64_t seed,
                     std::vector<std::string>& warnings) {
  const auto P = poly_from_json(require_field(config, "P", "coincide"));
  const auto Q = poly_from_json(require_field(config, "Q", "coincide"));
  std::string mode = str_field(config, "mode", "auto");
  if (mode == "auto") {
    const auto scalar = [](const std::vector<Matrix>& v) {
      for (const Matrix& C : v) {
        if (C.rows() != 1 || C.cols() != 1) return false;
      }
      return true;
    };
    mode = (scalar(P) && scalar(Q)) ? "scalar" : "general";
  }
  CoincidenceResult r;
  if (mode == "scalar") {
    r = coincide_scalar(scalar_coeffs(P, "P"), scalar_coeffs(Q, "Q"), tol);
  } else if (mode == "monomial") {
    r = coincide_monomial(P, Q, tol);
  } else if (mode == "general") {
    const int restarts = int_field(config, "restarts", 8);
    if (restarts < 0) throw ConfigError("restarts must be >= 0");
    r = coincide_general(P, Q, tol, restarts, seed);
  } else {
    throw ConfigError("mode must be auto, scalar, monomial, or general");
  }
  Outcome out;
  out.results = coincidence_to_json(r);
  if (!r.reason.empty()) warnings.push_back(r.reason);
  if (r.kind == CoincidenceResult::Kind::NoCertificate) {
    out.status = "inconclusive";
  }
  return out;
}

Outcome run_classify(const json& config, const Tolerance& tol,
                     std::vector<std::string>& warnings) {
  const auto op = model_from_json(require_field(config, "model", "classify"),
                                  tol, &warnings);
  const int radius = int_field(config, "radius", 32);
  const Classification c = classify_degenerate(op, radius, tol);
  Outcome out;
  out.results = json{{"form", form_name(c.form)}, {"class", c.cls}};
  return out;
}

Outcome run_sweep(const json& config, const Tolerance& tol,
                  std::vector<std::string>& warnings) {
  const json& pts = require_field(config, "points", "sweep");
  if (!pts.is_array()) throw ConfigError("sweep points must be a list");
  const int radius = int_field(config, "radius", 32);
  const int steps = int_field(config, "steps", radius / 3);
  json point_reports = json::array();
  int passed = 0;
  int failed = 0;
  int inconclusive = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const json& pj = pts[i];
    const auto op = model_from_json(require_field(pj, "model", "sweep point"),
                                    tol, &warnings);
    const json expect = pj.value("expect", json::object());
    json pr{{"index", static_cast<int>(i)}};
    bool pass = true;
    bool budget_short = false;

    const int budget = int_field(config, "budget", degree_bound(op));
    const auto coeffs = theta_coeffs(op, budget, tol);
    const Degree deg = poly_degree(coeffs, tol);
    pr["degree"] = deg.value;
    pr["degree_at_least"] = deg.at_least || budget < degree_bound(op);
    if (pr["degree_at_least"].get<bool>()) {
      budget_short = true;
    }
    if (deg.at_least) {
      // keep the full prefix: the boundary coefficient still carries mass
    } else {
      const std::vector<Matrix> trimmed(coeffs.begin(),
                                        coeffs.begin() + deg.value + 1);
      pr["theta"] = poly_to_json(trimmed);
    }
    if (expect.contains("degree")) {
      pass = pass && !budget_short &&
             deg.value == require_int(expect["degree"], "expect.degree");
    }
    if (expect.contains("form") || expect.contains("class")) {
      const Classification c = classify_degenerate(op, radius, tol);
      pr["form"] = form_name(c.form);
      pr["class"] = c.cls;
      if (expect.contains("form")) pass = pass && (pr["form"] == expect["form"]);
      if (expect.contains("class")) {
        pass = pass && (pr["class"] == expect["class"]);
      }
    }
    if (expect.contains("unitary_part_dim_min")) {
      const int u = unitary_part_dim(op, steps, radius, tol);
      pr["unitary_part_dim"] = u;
      pass = pass && u >= require_int(expect["unitary_part_dim_min"],
                                      "expect.unitary_part_dim_min");
    }
    pr["pass"] = pass && !budget_short;
    if (!pass) {
      ++failed;
    } else if (budget_short) {
      ++inconclusive;
    } else {
      ++passed;
    }
    point_reports.push_back(std::move(pr));
  }
  Outcome out;
  out.results =
      json{{"points", point_reports},
           {"aggregate", json{{"points", pts.size()},
                              {"passed", passed},
                              {"failed", failed},
                              {"inconclusive", inconclusive}}}};
  if (failed > 0) {
    out.status = "error";
    out.error = std::to_string(failed) + " of " + std::to_string(pts.size()) +
                " sweep points failed their expectations";
  } else if (inconclusive > 0) {
    out.status = "inconclusive";
  }
  return out;
}

Outcome run_verify(const Tolerance& tol) {
  struct Check {
    std::string name;
    bool pass = false;
    std::string message;
  };
  std::vector<Check> checks;
  const auto add_check = [&](const std::string& name,
                             const std::function<bool()>& fn) {
    Check c{name, false, ""};
    try {
      c.pass = fn();
      if (!c.pass) c.message = "property does not hold";
    } catch (const std::exception& e) {
      c.message = e.what();
    }
    checks.push_back(std::move(c));
  };

  add_check("jordan_is_purely_central", [&] {
    const auto op = jordan_window_model(3, 2);
    const Classification c = classify_degenerate(op, 8, tol);
    const auto d = canonical_decomposition(op, Variant::canonical, 8, tol);
    return c.form == Form::N && c.cls == "C00" && d.H1.dim() == 0 &&
           d.Hm1.dim() == 0 && d.nilpotent_order == 3;
  });
  add_check("shift_is_pure_forward", [&] {
    const Classification c = classify_degenerate(shift_model(2), 12, tol);
    return c.form == Form::S && c.cls == "C10";
  });
  add_check("coshift_is_pure_backward", [&] {
    const Classification c = classify_degenerate(coshift_model(3), 12, tol);
    return c.form == Form::C && c.cls == "C01";
  });
  add_check("degree_one_multiplicities_agree", [&] {
    const double cap = std::sqrt((1.0 - 0.36) * (1.0 - 0.25));
    const auto op = make_Tabc({cplx(0.6), cplx(0.5), cplx(cap)});
    const auto coeffs = theta_coeffs(op, degree_bound(op), tol);
    const Degree deg = poly_degree(coeffs, tol);
    const auto dc = canonical_decomposition(op, Variant::canonical, 16, tol);
    const auto ds =
        canonical_decomposition(op, Variant::star_canonical, 16, tol);
    return !deg.at_least && deg.value == 1 &&
           multiplicities(dc) == std::pair<int, int>{1, 1} &&
           multiplicities(ds) == std::pair<int, int>{1, 1};
  });
  add_check("scalar_coincidence_round_trip", [&] {
    const double cap = std::sqrt((1.0 - 0.36) * (1.0 - 0.25));
    const auto op = make_Tabc({cplx(0.6), cplx(0.5), cplx(cap)});
    const auto coeffs = theta_coeffs(op, 4, tol);
    const auto p = scalar_coeffs(coeffs, "theta");
    const auto r = coincide_scalar(p, p, tol);
    return r.kind == CoincidenceResult::Kind::Coincide &&
           r.residual <= 10.0 * tol.eq_tol;
  });
  add_check("monomial_minimal_profiles_match", [&] {
    Matrix A(2, 2);
    A << cplx(0.6), cplx(0.15), cplx(0.0), cplx(0.45);
    const auto op = make_TA({A, 2}, tol);
    const auto [N0, Ns0] = minimal_nilpotents(op, 20, tol);
    return rank_sequence(N0, 2, tol) == rank_sequence(Ns0, 2, tol);
  });

  json rows = json::array();
  int passed = 0;
  for (const Check& c : checks) {
    json row{{"name", c.name}, {"pass", c.pass}};
    if (!c.message.empty()) row["message"] = c.message;
    rows.push_back(std::move(row));
    if (c.pass) ++passed;
  }
  Outcome out;
  out.results = json{{"checks", rows},
                     {"passed", passed},
                     {"failed", static_cast<int>(checks.size()) - passed}};
  if (passed != static_cast<int>(checks.size())) {
    out.status = "error";
    out.error = "self checks failed";
  }
  return out;
}

}  // namespace

RunResult run_config(const json& config) {
  json report = json::object();
  int exit_code = 0;
  try {
    if (!config.is_object()) {
      throw ConfigError("config must be a JSON object");
    }
    const std::string command =
        str_field(config, "command", "");
    if (command.empty()) throw ConfigError("config needs a 'command' field");
    report["command"] = command;
    const Tolerance tol = tolerance_from(config);
    const std::uint64_t seed = seed_from(config);
    report["tolerances"] =
        json{{"rank_tol", tol.rank_tol}, {"eq_tol", tol.eq_tol}};
    report["seed"] = seed;

    std::vector<std::string> warnings;
    Outcome out;
    if (command == "build") {
      out = run_build(config, tol, warnings);
    } else if (command == "charfn") {
      out = run_charfn(config, tol, warnings);
    } else if (command == "decompose") {
      out = run_decompose(config, tol, warnings);
    } else if (command == "coincide") {
      out = run_coincide(config, tol, seed, warnings);
    } else if (command == "classify") {
      out = run_classify(config, tol, warnings);
    } else if (command == "sweep") {
      out = run_sweep(config, tol, warnings);
    } else if (command == "verify") {
      out = run_verify(tol);
    } else {
      throw ConfigError("unknown command '" + command +
                        "': expected build, charfn, decompose, coincide, "
                        "classify, sweep, or verify");
    }

    report["results"] = out.results;
    if (!out.certificates.is_null()) report["certificates"] = out.certificates;
    json warn = json::array();
    for (const std::string& w : warnings) warn.push_back(w);
    report["warnings"] = warn;
    report["status"] = out.status;
    if (!out.error.empty()) report["error"] = out.error;
    if (out.status == "inconclusive") {
      exit_code = 2;
    } else if (out.status == "error") {
      exit_code = 1;
    }
  } catch (const Inconclusive& e) {
    report["status"] = "inconclusive";
    report["error"] = e.what();
    exit_code = 2;
  } catch (const DegreeUndetected& e) {
    report["status"] = "inconclusive";
    report["error"] = e.what();
    exit_code = 2;
  } catch (const Error& e) {
    report["status"] = "error";
    report["error"] = e.what();
    exit_code = 1;
  } catch (const json::exception& e) {
    report["status"] = "error";
    report["error"] = std::string("config: ") + e.what();
    exit_code = 1;
  } catch (const std::exception& e) {
    report["status"] = "error";
    report["error"] = e.what();
    exit_code = 1;
  }
  return RunResult{std::move(report), exit_code};
}

int run_cli(int argc, char** argv) {
  CLI::App app{
      "workbench for windowed shift contractions and their polynomial "
      "characteristic data"};
  std::string command;
  std::string config_path;
  std::string out_path;
  long long seed = -1;
  app.add_option("command", command,
                 "build | charfn | decompose | coincide | classify | sweep | "
                 "verify")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_path,
                 "write the report JSON here instead of stdout");
  app.add_option("--seed", seed, "override the config seed")
      ->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  RunResult rr;
  std::string load_error;
  json config = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      load_error = "cannot open config file '" + config_path + "'";
    } else {
      try {
        config = json::parse(in);
        if (!config.is_object()) load_error = "config must be a JSON object";
      } catch (const json::parse_error& e) {
        load_error = std::string("config does not parse: ") + e.what();
      }
    }
  } else if (command != "verify") {
    load_error = "command '" + command + "' needs --config";
  }

  if (!load_error.empty()) {
    rr.report = json{{"command", command},
                     {"status", "error"},
                     {"error", load_error}};
    rr.exit_code = 1;
  } else {
    config["command"] = command;
    if (seed >= 0) config["seed"] = seed;
    rr = run_config(config);
  }

  const std::string text = rr.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot write the report to '" << out_path << "'\n";
      return 1;
    }
    out << text;
  }
  if (rr.exit_code != 0) {
    std::cerr << "ctrfn " << command << ": "
              << rr.report.value("status", "error");
    if (rr.report.contains("error")) {
      std::cerr << ": " << rr.report["error"].get<std::string>();
    }
    std::cerr << "\n";
  }
  return rr.exit_code;
}

}  // namespace ctrfn
