#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qqopt/etls.hpp"
#include "qqopt/oracle.hpp"
#include "qqopt/problem_io.hpp"
#include "qqopt/qq1.hpp"
#include "qqopt/qq2_global.hpp"
#include "qqopt/qq2_local.hpp"
#include "qqopt/trs.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace qqopt;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitAssumption = 2;
constexpr int kExitInfeasible = 3;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json num(double v) { return json(fmt_num(v)); }

json vec_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(fmt_num(v[i]));
  return a;
}

void render_text(const json& j, int indent = 0) {
  const std::string pad(indent, ' ');
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      std::cout << pad << key << ":\n";
      render_text(value, indent + 2);
    } else if (value.is_array()) {
      std::cout << pad << key << ": [";
      bool first = true;
      for (const auto& e : value) {
        if (!first) std::cout << ", ";
        first = false;
        if (e.is_object()) {
          std::cout << "\n";
          render_text(e, indent + 4);
        } else if (e.is_string()) {
          std::cout << e.get<std::string>();
        } else {
          std::cout << e.dump();
        }
      }
      std::cout << "]\n";
    } else if (value.is_string()) {
      std::cout << pad << key << ": " << value.get<std::string>() << "\n";
    } else {
      std::cout << pad << key << ": " << value.dump() << "\n";
    }
  }
}

void emit(const json& rep, bool as_json) {
  if (as_json) {
    std::cout << rep.dump(2) << "\n";
  } else {
    render_text(rep);
  }
}

struct CommonFlags {
  std::string file;
  std::string format = "text";
  double tol_feas = 1e-9;
  double tol_psd = 1e-7;
  double tol_rank = 1e-8;
  std::uint64_t seed = 7;
  int jobs = 1;
};

SolveOptions make_options(const CommonFlags& f) {
  SolveOptions o;
  o.tol_feas = f.tol_feas;
  o.tol_psd = f.tol_psd;
  o.tol_rank = f.tol_rank;
  o.seed = f.seed;
  return o;
}

json tolerances_json(const CommonFlags& f) {
  json t;
  t["feas"] = num(f.tol_feas);
  t["psd"] = num(f.tol_psd);
  t["rank"] = num(f.tol_rank);
  return t;
}

json inertia_json(const Inertia& inr) {
  json j;
  j["n_neg"] = inr.n_neg;
  j["n_zero"] = inr.n_zero;
  j["n_pos"] = inr.n_pos;
  return j;
}

json assumptions_json(const AssumptionReport& a) {
  json j;
  if (a.definite_combination) {
    j["definite_combination"] =
        json::array({num(a.definite_combination->first),
                     num(a.definite_combination->second)});
    j["pencil_lambda_min"] = num(a.pencil_best_lambda_min);
  } else {
    j["definite_combination"] = nullptr;
    j["pencil_definitely_none"] = a.pencil_definitely_none;
    j["pencil_resolution"] = a.pencil_resolution;
  }
  j["q2_min"] = a.q2_min_is_bound ? num(a.q2_min) : json("-inf");
  j["q2_max"] = a.q2_max_is_bound ? num(a.q2_max) : json("+inf");
  j["interior_witness_found"] = bool(a.interior_witness);
  j["exterior_witness_found"] = bool(a.exterior_witness);
  j["a2_minus_a1_indefinite"] = a.a2_minus_a1_indefinite;
  return j;
}

const char* status_name(Qq2Status s) {
  switch (s) {
    case Qq2Status::Global: return "global";
    case Qq2Status::Infeasible: return "infeasible";
    case Qq2Status::Unbounded: return "unbounded";
    case Qq2Status::Unattained: return "unattained";
    case Qq2Status::AssumptionFailure: return "assumption_failure";
  }
  return "?";
}

int exit_for(Qq2Status s) {
  switch (s) {
    case Qq2Status::Infeasible: return kExitInfeasible;
    case Qq2Status::AssumptionFailure: return kExitAssumption;
    default: return kExitOk;
  }
}

json classification_json(const PointClassification& c) {
  json j;
  j["verdict"] = to_string(c.verdict);
  j["value"] = num(c.value);
  if (!std::isnan(c.global_value)) j["global_value"] = num(c.global_value);
  if (c.kkt) {
    json k;
    k["alpha"] = num(c.kkt->alpha);
    k["beta"] = num(c.kkt->beta);
    k["stationarity_residual"] = num(c.kkt->stationarity_residual);
    k["licq_ok"] = c.kkt->licq_ok;
    k["licq_gram_lambda_min"] = num(c.kkt->licq_gram_lambda_min);
    j["kkt"] = k;
  }
  if (c.inertia_g) j["inertia_G"] = inertia_json(*c.inertia_g);
  if (c.projected_hessian_spectrum.size() > 0) {
    j["projected_hessian_spectrum"] = vec_json(c.projected_hessian_spectrum);
  }
  if (c.nonstrict) {
    json n;
    n["v_bar"] = vec_json(c.nonstrict->v_bar);
    n["residual_a1"] = num(c.nonstrict->r_a1);
    n["residual_a2"] = num(c.nonstrict->r_a2);
    n["residual_hessian"] = num(c.nonstrict->r_hess);
    n["residual_form"] = num(c.nonstrict->r_form);
    j["nonstrict_direction"] = n;
  }
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

const QQ2Problem& require_qq2(const ProblemFile& pf) {
  if (!pf.qq2) {
    throw std::invalid_argument("this command needs a qq2 problem file");
  }
  return *pf.qq2;
}

json report_header(const std::string& command, const CommonFlags& f,
                   const ProblemFile& pf) {
  json rep;
  rep["command"] = command;
  rep["file"] = f.file;
  rep["tolerances"] = tolerances_json(f);
  if (!pf.warnings.empty()) rep["warnings"] = pf.warnings;
  return rep;
}

int cmd_solve(const CommonFlags& f, double oracle_check_resolution) {
  const ProblemFile pf = load_problem_file(f.file);
  const QQ2Problem& p = require_qq2(pf);
  const SolveOptions opts = make_options(f);
  json rep = report_header("solve", f, pf);
  rep["n"] = p.n();
  rep["mode"] =
      p.mode == ConstraintMode::Inequality ? "inequality" : "equality";

  const Qq2Solution sol = solve_qq2(p, opts);
  rep["status"] = status_name(sol.status);
  rep["assumptions"] = assumptions_json(sol.assumptions);
  if (!sol.detail.empty()) rep["detail"] = sol.detail;
  if (sol.status == Qq2Status::Global) {
    rep["value"] = num(sol.value);
    rep["x"] = vec_json(sol.x_star);
    rep["alpha"] = num(sol.certificate.alpha);
    rep["beta"] = num(sol.certificate.beta);
    rep["lambda_min_G"] = num(sol.certificate.lambda_min_g);
    const Matrix g = p.a0.mat() + sol.certificate.alpha * p.a1.mat() +
                     sol.certificate.beta * p.a2.mat();
    rep["inertia_G"] = inertia_json(inertia(g, opts.tol_rank));
    rep["reduced_to_single_constraint"] = sol.reduced_to_qq1;
    if (!sol.reduced_to_qq1) {
      json d;
      d["value"] = num(sol.dual.value);
      d["gap"] = num(sol.dual.gap);
      d["iterations"] = sol.dual.iterations;
      rep["dual"] = d;
    }
    if (oracle_check_resolution > 0 && p.n() <= 4) {
      const OracleReport orc =
          oracle_global(p, oracle_check_resolution, std::nullopt, f.jobs);
      json o;
      o["value"] = num(orc.value);
      o["resolution"] = num(orc.resolution);
      o["error_bound"] = num(orc.error_bound);
      o["n_feasible"] = orc.n_feasible;
      o["gap_to_solver"] = num(sol.value - orc.value);
      rep["oracle_check"] = o;
    }
  } else if (sol.status == Qq2Status::Unattained) {
    rep["infimum"] = num(sol.value);
  }
  emit(rep, f.format == "json");
  return exit_for(sol.status);
}

int cmd_classify(const CommonFlags& f) {
  const ProblemFile pf = load_problem_file(f.file);
  const QQ2Problem& p = require_qq2(pf);
  if (!pf.point) {
    throw std::invalid_argument("classify needs a point \"x\" in the file");
  }
  const SolveOptions opts = make_options(f);
  json rep = report_header("classify", f, pf);
  rep["x"] = vec_json(*pf.point);
  const PointClassification c = classify_point(p, *pf.point, f.tol_psd, opts);
  rep["classification"] = classification_json(c);
  emit(rep, f.format == "json");
  return kExitOk;
}

int cmd_compactness(const CommonFlags& f) {
  const ProblemFile pf = load_problem_file(f.file);
  const QQ2Problem& p = require_qq2(pf);
  json rep = report_header("compactness", f, pf);
  const CompactnessReport c = check_compactness(p, make_options(f));
  const char* name = "?";
  switch (c.result) {
    case Compactness::CompactEquality: name = "compact_equality"; break;
    case Compactness::CompactInequality: name = "compact_inequality"; break;
    case Compactness::NotCompact: name = "not_compact"; break;
    case Compactness::UnknownAtResolution: name = "unknown_at_resolution"; break;
    case Compactness::EmptyFeasible: name = "empty"; break;
  }
  rep["result"] = name;
  if (c.result == Compactness::CompactEquality ||
      c.result == Compactness::CompactInequality) {
    rep["mu"] = json::array({num(c.mu1), num(c.mu2)});
    rep["lambda_min"] = num(c.achieved_lambda_min);
  }
  if (c.resolution > 0) rep["resolution"] = c.resolution;
  if (!c.notes.empty()) rep["notes"] = c.notes;
  emit(rep, f.format == "json");
  return kExitOk;
}

int cmd_find_local(const CommonFlags& f, int starts) {
  const ProblemFile pf = load_problem_file(f.file);
  const QQ2Problem& p = require_qq2(pf);
  const SolveOptions opts = make_options(f);
  json rep = report_header("find-local", f, pf);
  rep["starts"] = starts;
  rep["seed"] = f.seed;
  const auto found = find_local_nonglobal(p, starts, f.seed, opts);
  rep["count"] = static_cast<int>(found.size());
  json list = json::array();
  for (const auto& [x, c] : found) {
    json e;
    e["x"] = vec_json(x);
    e["verdict"] = to_string(c.verdict);
    e["value"] = num(c.value);
    if (c.kkt) {
      e["alpha"] = num(c.kkt->alpha);
      e["beta"] = num(c.kkt->beta);
    }
    list.push_back(e);
  }
  rep["points"] = list;
  emit(rep, f.format == "json");
  return kExitOk;
}

int cmd_trs(const CommonFlags& f) {
  const ProblemFile pf = load_problem_file(f.file);
  if (!pf.trs) {
    throw std::invalid_argument("trs command needs a file with a trs block");
  }
  json rep = report_header("trs", f, pf);
  const TRSSolution sol = solve_trs(*pf.trs, make_options(f));
  rep["global_x"] = vec_json(sol.global_x);
  rep["global_value"] = num(sol.global_value);
  rep["mu"] = num(sol.mu_global);
  rep["hard_case"] = sol.hard_case;
  if (sol.local_nonglobal) {
    json l;
    l["y"] = vec_json(sol.local_nonglobal->y);
    l["mu"] = num(sol.local_nonglobal->mu);
    l["secular_residual"] = num(sol.local_nonglobal->secular_residual);
    l["projected_lambda_min"] = num(sol.local_nonglobal->projected_lambda_min);
    rep["local_nonglobal"] = l;
  } else {
    rep["local_nonglobal"] = nullptr;
  }
  emit(rep, f.format == "json");
  return kExitOk;
}

int cmd_etls(const CommonFlags& f) {
  const ProblemFile pf = load_problem_file(f.file);
  if (!pf.etls) {
    throw std::invalid_argument("etls command needs a file with an etls block");
  }
  json rep = report_header("etls", f, pf);
  const ETLSSolution sol = solve_etls(*pf.etls, make_options(f));
  rep["x"] = vec_json(sol.x);
  rep["value"] = num(sol.value);
  rep["yz"] = vec_json(sol.yz);
  rep["alpha"] = num(sol.certificate.alpha);
  rep["beta"] = num(sol.certificate.beta);
  rep["lambda_min_G"] = num(sol.certificate.lambda_min_g);
  emit(rep, f.format == "json");
  return kExitOk;
}

int cmd_oracle(const CommonFlags& f, double resolution) {
  const ProblemFile pf = load_problem_file(f.file);
  const QQ2Problem& p = require_qq2(pf);
  json rep = report_header("oracle", f, pf);
  const OracleReport orc = oracle_global(p, resolution, std::nullopt, f.jobs);
  rep["value"] = num(orc.value);
  rep["argmin"] = vec_json(orc.argmin);
  rep["n_feasible"] = orc.n_feasible;
  rep["resolution"] = num(orc.resolution);
  rep["error_bound"] = num(orc.error_bound);
  emit(rep, f.format == "json");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Solver and certificate toolkit for homogeneous quadratic optimization "
      "with one or two quadratic-form constraints"};
  app.require_subcommand(1);

  CommonFlags f;
  double oracle_resolution = 1e-2;
  double solve_oracle_check = 0.0;
  int starts = 200;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", f.file, "problem file (JSON)")->required();
    sub->add_option("--format", f.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--tol-feas", f.tol_feas, "feasibility tolerance");
    sub->add_option("--tol-psd", f.tol_psd, "PSD / certificate tolerance");
    sub->add_option("--tol-rank", f.tol_rank, "rank / null-space tolerance");
    sub->add_option("--seed", f.seed, "seed for randomized fallbacks");
    sub->add_option("--jobs", f.jobs, "worker threads for grid scans")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* solve = app.add_subcommand("solve", "global solve with certificate");
  add_common(solve);
  solve->add_option("--oracle-check", solve_oracle_check,
                    "append a brute-force cross-check at this resolution");

  CLI::App* classify = app.add_subcommand("classify", "classify the point x");
  add_common(classify);

  CLI::App* compactness =
      app.add_subcommand("compactness", "feasible-set compactness test");
  add_common(compactness);

  CLI::App* find_local =
      app.add_subcommand("find-local", "multistart local non-global search");
  add_common(find_local);
  find_local->add_option("--starts", starts, "number of descent starts");

  CLI::App* trs = app.add_subcommand("trs", "trust-region subproblem front end");
  add_common(trs);

  CLI::App* etls =
      app.add_subcommand("etls", "regularized total least squares front end");
  add_common(etls);

  CLI::App* oracle = app.add_subcommand("oracle", "brute-force grid minimum");
  add_common(oracle);
  oracle->add_option("--resolution", oracle_resolution,
                     "angular grid step in radians");

  CLI11_PARSE(app, argc, argv);

  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitInternal;
  try {
    if (solve->parsed()) {
      code = cmd_solve(f, solve_oracle_check);
    } else if (classify->parsed()) {
      code = cmd_classify(f);
    } else if (compactness->parsed()) {
      code = cmd_compactness(f);
    } else if (find_local->parsed()) {
      code = cmd_find_local(f, starts);
    } else if (trs->parsed()) {
      code = cmd_trs(f);
    } else if (etls->parsed()) {
      code = cmd_etls(f);
    } else if (oracle->parsed()) {
      code = cmd_oracle(f, oracle_resolution);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kExitInternal;
  }
  const auto t1 = std::chrono::steady_clock::now();
  std::cerr << "wall_time_ms="
            << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0)
                   .count()
            << "\n";
  return code;
}
