#include "qqopt/problem_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qqopt {

namespace {

using nlohmann::json;

Matrix read_matrix(const json& j, const std::string& name, int rows_expected,
                   int cols_expected) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw std::invalid_argument("problem file: " + name +
                                " must be an array of rows");
  }
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  if (rows_expected > 0 && rows != rows_expected) {
    throw std::invalid_argument("problem file: " + name + " has " +
                                std::to_string(rows) + " rows, expected " +
                                std::to_string(rows_expected));
  }
  if (cols_expected > 0 && cols != cols_expected) {
    throw std::invalid_argument("problem file: " + name + " column mismatch");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw std::invalid_argument("problem file: ragged rows in " + name);
    }
    for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

Vector read_vector(const json& j, const std::string& name) {
  if (!j.is_array()) {
    throw std::invalid_argument("problem file: " + name + " must be an array");
  }
  Vector v(j.size());
  for (int i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

SymMat read_sym(const json& j, const std::string& name, int n,
                std::vector<std::string>& warnings) {
  const Matrix m = read_matrix(j, name, n, n);
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-12) {
    std::ostringstream os;
    os << name << " symmetrized on load (asymmetry " << asym << ")";
    warnings.push_back(os.str());
  }
  return SymMat(m);
}

}  // namespace

ProblemFile parse_problem_json(const std::string& text) {
  const json j = json::parse(text);
  ProblemFile pf;
  pf.schema_version = j.value("schema_version", "");
  if (pf.schema_version != "1") {
    throw std::invalid_argument("problem file: schema_version must be \"1\"");
  }

  const bool has_qq2 = j.contains("A0") || j.contains("A1") || j.contains("A2");
  const bool has_trs = j.contains("trs");
  const bool has_etls = j.contains("etls");
  if (int(has_qq2) + int(has_trs) + int(has_etls) != 1) {
    throw std::invalid_argument(
        "problem file: exactly one of {A0/A1/A2, trs, etls} must be present");
  }

  if (has_qq2) {
    if (!j.contains("n") || !j.contains("mode")) {
      throw std::invalid_argument("problem file: qq2 needs \"n\" and \"mode\"");
    }
    const int n = j["n"].get<int>();
    const std::string mode_s = j["mode"].get<std::string>();
    ConstraintMode mode;
    if (mode_s == "inequality") {
      mode = ConstraintMode::Inequality;
    } else if (mode_s == "equality") {
      mode = ConstraintMode::Equality;
    } else {
      throw std::invalid_argument(
          "problem file: mode must be \"inequality\" or \"equality\"");
    }
    pf.qq2.emplace(read_sym(j.at("A0"), "A0", n, pf.warnings),
                   read_sym(j.at("A1"), "A1", n, pf.warnings),
                   read_sym(j.at("A2"), "A2", n, pf.warnings), mode);
  } else if (has_trs) {
    const json& t = j["trs"];
    const Matrix q = read_matrix(t.at("Q"), "trs.Q", -1, -1);
    pf.trs.emplace(SymMat(q), read_vector(t.at("b"), "trs.b"));
  } else {
    const json& e = j["etls"];
    pf.etls.emplace(read_matrix(e.at("A"), "etls.A", -1, -1),
                    read_vector(e.at("b"), "etls.b"),
                    read_matrix(e.at("L"), "etls.L", -1, -1),
                    e.at("rho").get<double>());
  }

  if (j.contains("x")) pf.point = read_vector(j["x"], "x");
  return pf;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open problem file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_json(ss.str());
}

}  // namespace qqopt
