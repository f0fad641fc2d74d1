#pragma once

// JSON problem files.  The accepted document shape is
//
//   {
//     "n": 2,
//     "quadratic_f": {"Q": [[...]], "c": [...], "r": 0.0},
//     "linear_h":   {"A": [[...]], "b": [...]},   // rows: A x + b  = 0  (optional)
//     "linear_g":   {"A": [[...]], "b": [...]},   // rows: A x + b >= 0  (optional)
//     "coordinate_F1": [0],                        // F1_m(x) = x[index]  (optional)
//     "coordinate_F2": [1]                         // paired with F1
//   }
//
// f(x) = 0.5 x'Qx + c'x + r; "c" and "r" may be omitted (zero), indices are
// 0-based.  Parse and shape errors raise std::invalid_argument with the
// offending location.

#include "mpoc/problem.hpp"

#include <string>

namespace mpoc {

MpocProblem load_problem_text(const std::string& json_text);
MpocProblem load_problem_file(const std::string& path);

// Quadratic-objective documents {"n":..., "Q":..., "c":..., "r":...} used by
// the sparsity-constrained front end.
SmoothMap load_quadratic_objective_text(const std::string& json_text, int& n_out);
SmoothMap load_quadratic_objective_file(const std::string& path, int& n_out);

}  // namespace mpoc
