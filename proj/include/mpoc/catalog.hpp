#pragma once

// Built-in test problems with their documented stationary points, plus a
// registration hook for user-defined entries.

#include "mpoc/problem.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mpoc {

struct CatalogPoint {
  Vector x;
  std::string note;
};

struct CatalogEntry {
  std::string name;
  std::string description;
  MpocProblem problem;
  std::vector<CatalogPoint> stationary_points;
};

// Built-in names: "saddle", "instability", "instability_perturbed(<eps>)".
// Unknown names raise std::invalid_argument listing the available entries.
CatalogEntry catalog(const std::string& name);

std::vector<std::string> catalog_names();

// Registers (or replaces) a user-defined entry under the given name.
void register_catalog_problem(const std::string& name,
                              std::function<CatalogEntry()> maker);

}  // namespace mpoc
