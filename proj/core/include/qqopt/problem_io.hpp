#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qqopt/etls.hpp"
#include "qqopt/qq2.hpp"
#include "qqopt/trs.hpp"

namespace qqopt {

/// Parsed problem file (JSON, schema_version "1"). Exactly one of the qq2
/// matrices, the trs block or the etls block is present. Matrices are
/// symmetrized on load; asymmetry beyond 1e-12 produces a warning.
struct ProblemFile {
  std::string schema_version;
  std::optional<QQ2Problem> qq2;
  std::optional<TRSProblem> trs;
  std::optional<ETLSProblem> etls;
  std::optional<Vector> point;
  std::vector<std::string> warnings;
};

ProblemFile load_problem_file(const std::string& path);
ProblemFile parse_problem_json(const std::string& text);

}  // namespace qqopt
