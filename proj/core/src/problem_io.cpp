#include "clqr/problem_io.hpp"

#include "clqr/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace clqr {

namespace {

using nlohmann::json;

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {"version", "n",  "m",  "A",  "B",      "Q", "R",
                                             "Cx",      "cx", "Cu", "cu", "x_init", "w", "options"};
  return keys;
}

[[noreturn]] void fail(const std::string& msg) { throw ClqrError(ErrorKind::ParseError, msg); }

std::vector<double> numbers(const json& doc, const char* key) {
  if (!doc.contains(key)) fail(std::string("missing field '") + key + "'");
  const json& arr = doc.at(key);
  if (!arr.is_array()) fail(std::string("field '") + key + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      fail(std::string("field '") + key + "' entry " + std::to_string(i) + " is not a number");
    }
    out.push_back(arr[i].get<double>());
  }
  return out;
}

Matrix matrix_field(const json& doc, const char* key, Eigen::Index cols) {
  const auto vals = numbers(doc, key);
  if (cols <= 0) fail(std::string("field '") + key + "' has no columns");
  if (vals.size() % static_cast<std::size_t>(cols) != 0) {
    std::ostringstream os;
    os << "field '" << key << "' has " << vals.size() << " entries, not a multiple of row length "
       << cols << " (row " << vals.size() / cols << " is incomplete)";
    fail(os.str());
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(vals.size()) / cols;
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = vals[r * cols + c];
  }
  return M;
}

Matrix matrix_field(const json& doc, const char* key, Eigen::Index rows, Eigen::Index cols) {
  Matrix M = matrix_field(doc, key, cols);
  if (M.rows() != rows) {
    std::ostringstream os;
    os << "field '" << key << "' has " << M.rows() << " rows of length " << cols << ", expected "
       << rows;
    fail(os.str());
  }
  return M;
}

Vector vector_field(const json& doc, const char* key) {
  const auto vals = numbers(doc, key);
  return Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::Index dim_field(const json& doc, const char* key) {
  if (!doc.contains(key)) fail(std::string("missing field '") + key + "'");
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    fail(std::string("field '") + key + "' must be a positive integer");
  }
  return static_cast<Eigen::Index>(v.get<long long>());
}

json flat(const Matrix& M) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) arr.push_back(M(r, c));
  }
  return arr;
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (!allowed_keys().count(key)) fail("unknown field '" + key + "'");
  }
  if (doc.contains("version")) {
    if (!doc["version"].is_string() || doc["version"].get<std::string>() != kProblemFormatVersion) {
      fail(std::string("field 'version' must be \"") + kProblemFormatVersion + "\"");
    }
  }

  ProblemFile out;
  LtiProblem& p = out.problem;
  const Eigen::Index n = dim_field(doc, "n");
  const Eigen::Index m = dim_field(doc, "m");
  p.A = matrix_field(doc, "A", n, n);
  p.B = matrix_field(doc, "B", n, m);
  p.Q = matrix_field(doc, "Q", n, n);
  p.R = matrix_field(doc, "R", m, m);
  p.cx = vector_field(doc, "cx");
  p.cu = vector_field(doc, "cu");
  p.Cx = matrix_field(doc, "Cx", p.cx.size(), n);
  p.Cu = matrix_field(doc, "Cu", p.cu.size(), m);
  p.x_init = vector_field(doc, "x_init");
  if (p.x_init.size() != n) {
    fail("field 'x_init' has length " + std::to_string(p.x_init.size()) + ", expected " +
         std::to_string(n));
  }
  if (doc.contains("w")) {
    if (!doc["w"].is_number()) fail("field 'w' must be a number");
    p.w = doc["w"].get<double>();
    out.weight_given = true;
  } else {
    p.w = default_weight(p.A);
  }
  if (doc.contains("options")) {
    const json& opts = doc["options"];
    if (!opts.is_object()) fail("field 'options' must be an object");
    for (const auto& [key, val] : opts.items()) {
      out.options[key] = val.is_string() ? val.get<std::string>() : val.dump();
    }
  }
  p.check_shapes();
  return out;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

std::string serialize_problem(const LtiProblem& p, const std::map<std::string, std::string>& options) {
  json doc;
  doc["version"] = kProblemFormatVersion;
  doc["n"] = p.n();
  doc["m"] = p.m();
  doc["A"] = flat(p.A);
  doc["B"] = flat(p.B);
  doc["Q"] = flat(p.Q);
  doc["R"] = flat(p.R);
  doc["Cx"] = flat(p.Cx);
  doc["cx"] = flat(p.cx);
  doc["Cu"] = flat(p.Cu);
  doc["cu"] = flat(p.cu);
  doc["x_init"] = flat(p.x_init);
  doc["w"] = p.w;
  if (!options.empty()) {
    json opts = json::object();
    for (const auto& [k, v] : options) {
      json parsed = json::parse(v, nullptr, false);
      opts[k] = parsed.is_discarded() ? json(v) : parsed;
    }
    doc["options"] = opts;
  }
  return doc.dump(2) + "\n";
}

void save_problem(const std::string& path, const LtiProblem& problem,
                  const std::map<std::string, std::string>& options) {
  std::ofstream out(path);
  if (!out) fail("cannot write problem file '" + path + "'");
  out << serialize_problem(problem, options);
}

}  // namespace clqr
