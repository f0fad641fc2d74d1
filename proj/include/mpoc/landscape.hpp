#pragma once

// Numerical check of the level-set topology claims on 2-dimensional
// problems: discretize the feasible set on a grid (thickened, since the
// orthogonality branches have measure zero), then count connected components
// of the sublevel sets f <= a with union-find while a sweeps upward.
// Component counts change exactly when a crosses a stationary value: a local
// minimizer adds a component, a saddle with one biactive pair joins two.

#include "mpoc/problem.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mpoc {

struct GridSpec {
  Vector lower;         // 2-vector
  Vector upper;         // 2-vector, componentwise > lower
  int resolution = 801; // points per axis, >= 3
  // Membership thickness delta; values <= 0 select the default of half a
  // grid-cell diagonal.
  double thickness = 0.0;

  void validate() const;
  double delta() const;  // resolved thickness
};

struct FeasibleGrid {
  GridSpec grid;
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> mask;  // row-major, index = iy * nx + ix
  std::vector<double> objective;   // f at every grid point, same layout
};

// A grid point z qualifies when, with delta the thickness,
//   |h(z)| <= delta,  g(z) >= -delta,  F2(z) >= -delta,
//   |F1_m F2_m| <= delta * (1 + |F1_m| + |F2_m|),  and
//   |F1_m F2_m| <= sqrt(2) * delta * ||F2_m DF1_m + F1_m DF2_m||.
// The last bound is a first-order distance estimate to the branch set; the
// scale bound alone also admits points near a biactive pair whose distance
// to the branches grows like sqrt(delta), which would visibly distort the
// component counts there.  Requires problem.n == 2.
FeasibleGrid grid_feasible_mask(const MpocProblem& problem, const GridSpec& grid);

// Connected components (8-neighbor adjacency) of {mask and f <= level};
// an empty sublevel set has 0 components.
int betti0_lower_level(const FeasibleGrid& feasible, double level);
int betti0_lower_level(const MpocProblem& problem, const GridSpec& grid, double level);

struct LevelSweepReport {
  std::vector<double> levels;
  std::vector<int> betti0_per_level;
  // Levels where the count differs from the previous level (the count before
  // the first level is taken as 0).
  std::vector<double> change_levels;
  std::vector<double> stationary_values;  // caller-supplied, for comparison
  // The box must contain the sublevel sets of interest; that hypothesis is
  // the caller's to guarantee and is recorded here, not verified.
  bool box_compactness_assumed = true;
};

// Requires levels sorted ascending.
LevelSweepReport sweep_levels(const MpocProblem& problem, const GridSpec& grid,
                              const std::vector<double>& levels,
                              const std::vector<double>& stationary_values = {});

// "level,betti0" rows.
void write_sweep_csv(const LevelSweepReport& report, std::ostream& out);

// Step plot of the component count over the swept levels, with markers at
// the supplied stationary values.
void write_sweep_svg(const LevelSweepReport& report, std::ostream& out);

}  // namespace mpoc
