#include "mpoc/problem_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mpoc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("problem file: " + where + ": " + what);
}

Vector parse_vector(const json& j, const std::string& where, int expect = -1) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(where, "entry " + std::to_string(i) + " is not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  if (expect >= 0 && v.size() != expect)
    fail(where, "expected length " + std::to_string(expect) + ", got " +
                    std::to_string(v.size()));
  return v;
}

Matrix parse_matrix(const json& j, const std::string& where, int cols) {
  if (!j.is_array()) fail(where, "expected an array of rows");
  Matrix A(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    Vector row = parse_vector(j[r], where + "[" + std::to_string(r) + "]", cols);
    A.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return A;
}

SmoothMap parse_affine_block(const json& j, const std::string& where, int n) {
  if (!j.is_object() || !j.contains("A")) fail(where, "expected an object with \"A\"");
  Matrix A = parse_matrix(j.at("A"), where + ".A", n);
  Vector b = Vector::Zero(A.rows());
  if (j.contains("b")) b = parse_vector(j.at("b"), where + ".b", static_cast<int>(A.rows()));
  return make_affine_map(A, b);
}

std::vector<int> parse_indices(const json& j, const std::string& where, int n) {
  if (!j.is_array()) fail(where, "expected an array of indices");
  std::vector<int> idx;
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) fail(where, "entry " + std::to_string(i) + " is not an integer");
    int v = j[i].get<int>();
    if (v < 0 || v >= n)
      fail(where, "index " + std::to_string(v) + " outside [0, " + std::to_string(n) + ")");
    idx.push_back(v);
  }
  return idx;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("problem file: ") + e.what());
  }
}

SmoothMap parse_quadratic(const json& j, const std::string& where, int n) {
  if (!j.is_object() || !j.contains("Q")) fail(where, "expected an object with \"Q\"");
  Matrix Q = parse_matrix(j.at("Q"), where + ".Q", n);
  if (Q.rows() != n) fail(where + ".Q", "expected " + std::to_string(n) + " rows");
  Vector c = Vector::Zero(n);
  if (j.contains("c")) c = parse_vector(j.at("c"), where + ".c", n);
  double r = 0.0;
  if (j.contains("r")) {
    if (!j.at("r").is_number()) fail(where + ".r", "expected a number");
    r = j.at("r").get<double>();
  }
  return make_quadratic_objective(Q, c, r);
}

}  // namespace

MpocProblem load_problem_text(const std::string& text) {
  json doc = parse_document(text);
  if (!doc.is_object()) fail("$", "top level must be an object");
  if (!doc.contains("n") || !doc.at("n").is_number_integer())
    fail("$.n", "required integer");
  const int n = doc.at("n").get<int>();
  if (n <= 0) fail("$.n", "must be positive");

  if (!doc.contains("quadratic_f")) fail("$.quadratic_f", "required");
  SmoothMap f = parse_quadratic(doc.at("quadratic_f"), "$.quadratic_f", n);

  SmoothMap h = make_empty_map(n), g = make_empty_map(n);
  if (doc.contains("linear_h")) h = parse_affine_block(doc.at("linear_h"), "$.linear_h", n);
  if (doc.contains("linear_g")) g = parse_affine_block(doc.at("linear_g"), "$.linear_g", n);

  SmoothMap F1 = make_empty_map(n), F2 = make_empty_map(n);
  const bool has1 = doc.contains("coordinate_F1");
  const bool has2 = doc.contains("coordinate_F2");
  if (has1 != has2) fail("$", "coordinate_F1 and coordinate_F2 must appear together");
  if (has1) {
    auto i1 = parse_indices(doc.at("coordinate_F1"), "$.coordinate_F1", n);
    auto i2 = parse_indices(doc.at("coordinate_F2"), "$.coordinate_F2", n);
    if (i1.size() != i2.size())
      fail("$.coordinate_F2", "must match coordinate_F1 in length");
    F1 = make_coordinate_map(n, i1);
    F2 = make_coordinate_map(n, i2);
  }
  return make_problem(n, std::move(f), std::move(h), std::move(g), std::move(F1),
                      std::move(F2));
}

MpocProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("problem file: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_problem_text(buf.str());
}

SmoothMap load_quadratic_objective_text(const std::string& text, int& n_out) {
  json doc = parse_document(text);
  if (!doc.is_object()) fail("$", "top level must be an object");
  if (!doc.contains("n") || !doc.at("n").is_number_integer())
    fail("$.n", "required integer");
  n_out = doc.at("n").get<int>();
  if (n_out <= 0) fail("$.n", "must be positive");
  return parse_quadratic(doc, "$", n_out);
}

SmoothMap load_quadratic_objective_file(const std::string& path, int& n_out) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("problem file: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_quadratic_objective_text(buf.str(), n_out);
}

}  // namespace mpoc
