#pragma once

#include "clqr/problem.hpp"

#include <map>
#include <optional>
#include <string>

namespace clqr {

inline constexpr const char* kProblemFormatVersion = "clqr-problem-v1";

/// Problem file contents. `options` holds the raw solver-option overrides
/// (key -> textual value) so the CLI can merge them with its own flags.
struct ProblemFile {
  LtiProblem problem;
  bool weight_given = false;
  std::map<std::string, std::string> options;
};

/// Parses the JSON problem format:
///
///   { "version": "clqr-problem-v1", "n": 2, "m": 1,
///     "A": [..n*n row-major..], "B": [..n*m..], "Q": [..], "R": [..],
///     "Cx": [..px*n..], "cx": [..px..], "Cu": [..pu*m..], "cu": [..pu..],
///     "x_init": [..n..], "w": 0.8264, "options": { "tol": 1e-4, ... } }
///
/// When "w" is absent the default weight min{1, 1/rho(A)^2} is used.
/// Throws ClqrError(ParseError) naming the offending field.
ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::string& path);

std::string serialize_problem(const LtiProblem& problem,
                              const std::map<std::string, std::string>& options = {});
void save_problem(const std::string& path, const LtiProblem& problem,
                  const std::map<std::string, std::string>& options = {});

}  // namespace clqr
