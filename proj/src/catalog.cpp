#include "mpoc/catalog.hpp"

#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mpoc {

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// f(x) = (x1+1)^2 + (x2-1)^2 with the pair (x1, x2); two minimizers at value 1
// separated by a saddle of value 2 at the origin.
CatalogEntry make_saddle() {
  Matrix Q = 2.0 * Matrix::Identity(2, 2);
  Vector c = vec2(2.0, -2.0);
  CatalogEntry e;
  e.name = "saddle";
  e.description =
      "f(x) = (x1+1)^2 + (x2-1)^2 subject to x1*x2 = 0, x2 >= 0; "
      "two branch minimizers at value 1 and a biactive saddle at value 2";
  e.problem = make_problem(2, make_quadratic_objective(Q, c, 2.0),
                           make_empty_map(2), make_empty_map(2),
                           make_coordinate_map(2, {0}), make_coordinate_map(2, {1}));
  e.stationary_points = {
      {vec2(-1.0, 0.0), "nondegenerate local minimizer, f = 1"},
      {vec2(0.0, 1.0), "nondegenerate local minimizer, f = 1"},
      {vec2(0.0, 0.0), "nondegenerate saddle (QI = 0, BI = 1), f = 2"},
  };
  return e;
}

// f(x) = x1^2 + x2^2: the global minimizer sits at the biactive origin with
// both branch multipliers vanishing, hence degenerate.
CatalogEntry make_instability() {
  Matrix Q = 2.0 * Matrix::Identity(2, 2);
  CatalogEntry e;
  e.name = "instability";
  e.description =
      "f(x) = x1^2 + x2^2 subject to x1*x2 = 0, x2 >= 0; "
      "degenerate global minimizer at the origin";
  e.problem = make_problem(2, make_quadratic_objective(Q, Vector::Zero(2), 0.0),
                           make_empty_map(2), make_empty_map(2),
                           make_coordinate_map(2, {0}), make_coordinate_map(2, {1}));
  e.stationary_points = {
      {vec2(0.0, 0.0), "degenerate T-stationary global minimizer, f = 0"},
  };
  return e;
}

// f(x) = (x1+eps)^2 + (x2-eps)^2: perturbing "instability" splits the origin
// into three T-stationary points.
CatalogEntry make_instability_perturbed(double eps) {
  Matrix Q = 2.0 * Matrix::Identity(2, 2);
  Vector c = vec2(2.0 * eps, -2.0 * eps);
  CatalogEntry e;
  std::ostringstream name;
  name << "instability_perturbed(" << eps << ")";
  e.name = name.str();
  e.description =
      "f(x) = (x1+eps)^2 + (x2-eps)^2 subject to x1*x2 = 0, x2 >= 0; "
      "perturbation splits the degenerate origin into three stationary points";
  e.problem = make_problem(2, make_quadratic_objective(Q, c, 2.0 * eps * eps),
                           make_empty_map(2), make_empty_map(2),
                           make_coordinate_map(2, {0}), make_coordinate_map(2, {1}));
  e.stationary_points = {
      {vec2(0.0, 0.0), "nondegenerate saddle, f = 2 eps^2"},
      {vec2(0.0, eps), "nondegenerate local minimizer, f = eps^2"},
      {vec2(-eps, 0.0), "nondegenerate local minimizer, f = eps^2"},
  };
  return e;
}

std::map<std::string, std::function<CatalogEntry()>>& registry() {
  static std::map<std::string, std::function<CatalogEntry()>> reg = {
      {"saddle", make_saddle},
      {"instability", make_instability},
  };
  return reg;
}

bool parse_perturbed_name(const std::string& name, double& eps) {
  const std::string prefix = "instability_perturbed(";
  if (name.rfind(prefix, 0) != 0 || name.back() != ')') return false;
  const std::string arg = name.substr(prefix.size(), name.size() - prefix.size() - 1);
  char* end = nullptr;
  eps = std::strtod(arg.c_str(), &end);
  return end != nullptr && *end == '\0' && !arg.empty();
}

}  // namespace

CatalogEntry catalog(const std::string& name) {
  auto& reg = registry();
  auto it = reg.find(name);
  if (it != reg.end()) return it->second();

  double eps = 0.0;
  if (parse_perturbed_name(name, eps)) return make_instability_perturbed(eps);

  std::ostringstream os;
  os << "catalog: unknown problem '" << name << "'; available:";
  for (const std::string& n : catalog_names()) os << " " << n;
  throw std::invalid_argument(os.str());
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const auto& [name, maker] : registry()) names.push_back(name);
  names.push_back("instability_perturbed(<eps>)");
  return names;
}

void register_catalog_problem(const std::string& name,
                              std::function<CatalogEntry()> maker) {
  registry()[name] = std::move(maker);
}

}  // namespace mpoc
