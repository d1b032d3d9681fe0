#include "clqr/errors.hpp"
#include "clqr/problem_io.hpp"
#include "clqr/systems.hpp"

#include <gtest/gtest.h>

#include <string>

namespace clqr {
namespace {

const char* kScalar = R"({
  "version": "clqr-problem-v1", "n": 1, "m": 1,
  "A": [0.5], "B": [1], "Q": [1], "R": [1],
  "Cx": [1, -1], "cx": [10, 10], "Cu": [1, -1], "cu": [1, 1],
  "x_init": [3]
})";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const ClqrError& e) {
    return e.kind();
  }
  return ErrorKind::NotFound;
}

std::string message_of(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const ClqrError& e) {
    return e.what();
  }
  return {};
}

TEST(ProblemIo, ParsesScalarAndDefaultsWeight) {
  const ProblemFile file = parse_problem(kScalar);
  EXPECT_FALSE(file.weight_given);
  EXPECT_DOUBLE_EQ(file.problem.w, 1.0);
  EXPECT_EQ(file.problem.px(), 2);
  EXPECT_EQ(file.problem.pu(), 2);
  EXPECT_DOUBLE_EQ(file.problem.x_init(0), 3.0);
}

TEST(ProblemIo, RoundTripIsExact) {
  const LtiProblem p = quadrotor_standin(5);
  const ProblemFile back = parse_problem(serialize_problem(p, {{"tol", "1e-05"}, {"mode", "fixed"}}));
  EXPECT_EQ(back.problem.A, p.A);
  EXPECT_EQ(back.problem.B, p.B);
  EXPECT_EQ(back.problem.Q, p.Q);
  EXPECT_EQ(back.problem.R, p.R);
  EXPECT_EQ(back.problem.Cx, p.Cx);
  EXPECT_EQ(back.problem.cx, p.cx);
  EXPECT_EQ(back.problem.Cu, p.Cu);
  EXPECT_EQ(back.problem.cu, p.cu);
  EXPECT_EQ(back.problem.x_init, p.x_init);
  EXPECT_EQ(back.problem.w, p.w);
  EXPECT_TRUE(back.weight_given);
  EXPECT_EQ(back.options.at("tol"), "1e-05");
  EXPECT_EQ(back.options.at("mode"), "fixed");
}

TEST(ProblemIo, MalformedMatrixNamesFieldAndRow) {
  std::string text = kScalar;
  text.replace(text.find("\"Cx\": [1, -1]"), 13, "\"Cx\": [1, -1, 2]");
  EXPECT_EQ(kind_of(text), ErrorKind::ParseError);
  const std::string msg = message_of(text);
  EXPECT_NE(msg.find("'Cx'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("rows"), std::string::npos) << msg;
}

TEST(ProblemIo, RejectsBadDocuments) {
  EXPECT_EQ(kind_of("{"), ErrorKind::ParseError);
  EXPECT_EQ(kind_of("[1, 2]"), ErrorKind::ParseError);
  std::string unknown = kScalar;
  unknown.replace(unknown.find("\"x_init\""), 8, "\"x_start\"");
  EXPECT_NE(message_of(unknown).find("x_start"), std::string::npos);
  std::string wrong_version = kScalar;
  wrong_version.replace(wrong_version.find("v1"), 2, "v9");
  EXPECT_EQ(kind_of(wrong_version), ErrorKind::ParseError);
  std::string not_number = kScalar;
  not_number.replace(not_number.find("\"Q\": [1]"), 8, "\"Q\": [\"a\"]");
  EXPECT_NE(message_of(not_number).find("'Q'"), std::string::npos);
  std::string short_init = kScalar;
  short_init.replace(short_init.find("[3]"), 3, "[3, 4]");
  EXPECT_NE(message_of(short_init).find("x_init"), std::string::npos);
}

TEST(ProblemIo, MissingFileIsParseError) {
  try {
    load_problem("/nonexistent/problem.json");
    FAIL();
  } catch (const ClqrError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  }
}

}  // namespace
}  // namespace clqr
