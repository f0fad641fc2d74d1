#include "mpoc/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace mpoc {

void GridSpec::validate() const {
  if (lower.size() != 2 || upper.size() != 2)
    throw std::invalid_argument("GridSpec: lower/upper must be 2-vectors");
  if (!(lower[0] < upper[0]) || !(lower[1] < upper[1]))
    throw std::invalid_argument("GridSpec: bounds must be ordered");
  if (resolution < 3) throw std::invalid_argument("GridSpec: resolution must be >= 3");
}

double GridSpec::delta() const {
  if (thickness > 0) return thickness;
  const double dx = (upper[0] - lower[0]) / (resolution - 1);
  const double dy = (upper[1] - lower[1]) / (resolution - 1);
  return 0.5 * std::hypot(dx, dy);
}

FeasibleGrid grid_feasible_mask(const MpocProblem& problem, const GridSpec& grid) {
  grid.validate();
  if (problem.n != 2)
    throw std::invalid_argument("grid_feasible_mask: only 2-dimensional problems");

  FeasibleGrid out;
  out.grid = grid;
  out.nx = out.ny = grid.resolution;
  out.mask.assign(static_cast<size_t>(out.nx) * out.ny, 0);
  out.objective.assign(static_cast<size_t>(out.nx) * out.ny, 0.0);

  const double delta = grid.delta();
  const double dx = (grid.upper[0] - grid.lower[0]) / (grid.resolution - 1);
  const double dy = (grid.upper[1] - grid.lower[1]) / (grid.resolution - 1);
  const int k = problem.num_pairs();

  Vector z(2);
  for (int iy = 0; iy < out.ny; ++iy) {
    z[1] = grid.lower[1] + iy * dy;
    for (int ix = 0; ix < out.nx; ++ix) {
      z[0] = grid.lower[0] + ix * dx;
      const size_t at = static_cast<size_t>(iy) * out.nx + ix;
      out.objective[at] = problem.f.value(z)[0];

      bool ok = true;
      if (!problem.h.empty()) {
        Vector hv = problem.h.value(z);
        ok = (hv.cwiseAbs().array() <= delta).all();
      }
      if (ok && !problem.g.empty()) {
        Vector gv = problem.g.value(z);
        ok = (gv.array() >= -delta).all();
      }
      if (ok && k > 0) {
        Vector v1 = problem.F1.value(z);
        Vector v2 = problem.F2.value(z);
        Matrix J1 = problem.F1.jacobian(z);
        Matrix J2 = problem.F2.jacobian(z);
        for (int m = 0; m < k && ok; ++m) {
          if (v2[m] < -delta) { ok = false; break; }
          const double prod = std::abs(v1[m] * v2[m]);
          if (prod > delta * (1.0 + std::abs(v1[m]) + std::abs(v2[m]))) {
            ok = false;
            break;
          }
          const double grad_norm = (v2[m] * J1.row(m) + v1[m] * J2.row(m)).norm();
          if (prod > std::sqrt(2.0) * delta * grad_norm) ok = false;
        }
      }
      out.mask[at] = ok ? 1 : 0;
    }
  }
  return out;
}

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a != b) parent[b] = a;
}

}  // namespace

int betti0_lower_level(const FeasibleGrid& feasible, double level) {
  const int nx = feasible.nx, ny = feasible.ny;
  std::vector<int> parent(static_cast<size_t>(nx) * ny, -1);

  auto in_set = [&](int ix, int iy) {
    const size_t at = static_cast<size_t>(iy) * nx + ix;
    return feasible.mask[at] != 0 && feasible.objective[at] <= level;
  };

  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      if (!in_set(ix, iy)) continue;
      const int at = iy * nx + ix;
      parent[at] = at;
      // Join with already-visited neighbors: W, NW, N, NE.
      if (ix > 0 && in_set(ix - 1, iy)) unite(parent, at, at - 1);
      if (iy > 0) {
        if (ix > 0 && in_set(ix - 1, iy - 1)) unite(parent, at, at - nx - 1);
        if (in_set(ix, iy - 1)) unite(parent, at, at - nx);
        if (ix + 1 < nx && in_set(ix + 1, iy - 1)) unite(parent, at, at - nx + 1);
      }
    }
  }

  int count = 0;
  for (size_t i = 0; i < parent.size(); ++i)
    if (parent[i] == static_cast<int>(i)) ++count;
  return count;
}

int betti0_lower_level(const MpocProblem& problem, const GridSpec& grid, double level) {
  return betti0_lower_level(grid_feasible_mask(problem, grid), level);
}

LevelSweepReport sweep_levels(const MpocProblem& problem, const GridSpec& grid,
                              const std::vector<double>& levels,
                              const std::vector<double>& stationary_values) {
  if (!std::is_sorted(levels.begin(), levels.end()))
    throw std::invalid_argument("sweep_levels: levels must be sorted ascending");
  FeasibleGrid feasible = grid_feasible_mask(problem, grid);

  LevelSweepReport report;
  report.levels = levels;
  report.stationary_values = stationary_values;
  report.betti0_per_level.reserve(levels.size());
  int previous = 0;
  for (double level : levels) {
    const int count = betti0_lower_level(feasible, level);
    report.betti0_per_level.push_back(count);
    if (count != previous) report.change_levels.push_back(level);
    previous = count;
  }
  return report;
}

void write_sweep_csv(const LevelSweepReport& report, std::ostream& out) {
  out << "level,betti0\n";
  char buf[64];
  for (size_t i = 0; i < report.levels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", report.levels[i]);
    out << buf << ',' << report.betti0_per_level[i] << '\n';
  }
}

void write_sweep_svg(const LevelSweepReport& report, std::ostream& out) {
  const int width = 640, height = 360, margin = 48;
  double lo = 0.0, hi = 1.0;
  int max_count = 1;
  if (!report.levels.empty()) {
    lo = report.levels.front();
    hi = report.levels.back();
    if (hi <= lo) hi = lo + 1.0;
    max_count = std::max(1, *std::max_element(report.betti0_per_level.begin(),
                                              report.betti0_per_level.end()));
  }
  auto sx = [&](double level) {
    return margin + (level - lo) / (hi - lo) * (width - 2 * margin);
  };
  auto sy = [&](double count) {
    return height - margin - count / static_cast<double>(max_count) * (height - 2 * margin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";

  for (double v : report.stationary_values) {
    if (v < lo || v > hi) continue;
    out << "<line x1=\"" << sx(v) << "\" y1=\"" << margin << "\" x2=\"" << sx(v)
        << "\" y2=\"" << height - margin
        << "\" stroke=\"#c00\" stroke-dasharray=\"4 3\"/>\n";
  }

  if (!report.levels.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#06c\" stroke-width=\"2\" points=\"";
    double prev_y = sy(0.0);
    for (size_t i = 0; i < report.levels.size(); ++i) {
      const double x = sx(report.levels[i]);
      const double y = sy(report.betti0_per_level[i]);
      if (i > 0) out << x << ',' << prev_y << ' ';
      out << x << ',' << y << ' ';
      prev_y = y;
    }
    out << "\"/>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">level</text>\n";
  out << "<text x=\"14\" y=\"" << height / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 14 " << height / 2
      << ")\" text-anchor=\"middle\">components</text>\n";
  out << "</svg>\n";
}

}  // namespace mpoc
