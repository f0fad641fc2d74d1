#include "mpoc/cli.hpp"

#include "mpoc/catalog.hpp"
#include "mpoc/problem_io.hpp"
#include "mpoc/serialize.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <sys/stat.h>
#include <thread>

namespace mpoc {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 2;

Vector parse_csv_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("could not parse '" + item + "' as a number");
    }
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    if (pos != item.size())
      throw std::invalid_argument("could not parse '" + item + "' as a number");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty vector argument");
  Vector out(static_cast<Eigen::Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[i];
  return out;
}

// "lo:hi:step" -> ascending levels, endpoint included up to rounding.
std::vector<double> parse_levels(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  std::vector<double> parts;
  while (std::getline(ss, part, ':')) parts.push_back(std::stod(part));
  if (parts.size() != 3)
    throw std::invalid_argument("levels must be given as lo:hi:step");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0) || hi < lo)
    throw std::invalid_argument("levels must satisfy lo <= hi with step > 0");
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> levels(count);
  for (int i = 0; i < count; ++i) levels[i] = lo + i * step;
  return levels;
}

bool file_exists(const std::string& path) {
  struct stat st;
  return ::stat(path.c_str(), &st) == 0;
}

// A catalog name, or a path to a problem file.
struct ProblemSource {
  std::string name;
  MpocProblem problem;
  std::vector<CatalogPoint> stationary_points;  // empty for file sources
};

ProblemSource resolve_problem(const std::string& spec) {
  ProblemSource src;
  src.name = spec;
  try {
    CatalogEntry entry = catalog(spec);
    src.problem = entry.problem;
    src.stationary_points = entry.stationary_points;
    return src;
  } catch (const std::invalid_argument&) {
    if (!file_exists(spec)) throw;
  }
  src.problem = load_problem_file(spec);
  return src;
}

struct ToleranceFlags {
  Tolerances tol;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol-activity", tol.activity, "activity threshold");
    cmd->add_option("--tol-stationarity", tol.stationarity_residual,
                    "stationarity residual bound");
    cmd->add_option("--tol-eigen", tol.eigen_singularity,
                    "singular value / eigenvalue zero cutoff");
    cmd->add_option("--tol-multiplier", tol.multiplier_zero,
                    "multiplier sign and zero cutoff");
    cmd->add_option("--tol-feasibility", tol.feasibility,
                    "constraint violation bound");
  }
};

void emit(std::ostream& out, const Json& record) { out << dump_fixed(record) << '\n'; }

// Uniform double in [lo, hi) from the top 53 bits of the generator, so the
// stream does not depend on the standard library's distribution code.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + unit * (hi - lo);
}

long long resolve_seed(long long flag_seed, std::ostream& err, bool& ok) {
  ok = true;
  const char* env = std::getenv("MPOC_SEED");
  if (env == nullptr || *env == '\0') return flag_seed;
  char* end = nullptr;
  const long long v = std::strtoll(env, &end, 10);
  if (end == nullptr || *end != '\0') {
    err << "error: MPOC_SEED is set but not an integer: '" << env << "'\n";
    ok = false;
    return flag_seed;
  }
  return v;
}

// ---------------------------------------------------------------- classify

int cmd_classify(const std::string& problem_spec, const std::string& x_text,
                 const Tolerances& tol, std::ostream& out) {
  ProblemSource src = resolve_problem(problem_spec);
  Vector x = parse_csv_vector(x_text);
  ClassificationResult result = classify_point(src.problem, x, tol);
  Json record{{"command", "classify"}, {"problem", src.name}};
  record["certificate"] = to_json(result.certificate);
  record["report"] = result.report.has_value() ? to_json(*result.report) : Json();
  emit(out, record);
  return result.certificate.is_t_stationary ? kExitOk : kExitNegative;
}

// -------------------------------------------------------------- regularize

int cmd_regularize(const std::string& problem_spec, const std::string& x0_text,
                   const DriveSchedule& schedule, int multistart,
                   const std::string& box_text, long long seed,
                   const Tolerances& tol, std::ostream& out) {
  ProblemSource src = resolve_problem(problem_spec);

  if (multistart <= 0) {
    Vector x0 = parse_csv_vector(x0_text);
    RegularizationTrace trace = drive(src.problem, x0, schedule, tol);
    for (size_t i = 0; i < trace.schedule.size(); ++i) {
      Json record{{"command", "regularize"},
                  {"event", "iterate"},
                  {"t", trace.schedule[i]},
                  {"point", to_json(trace.iterates[i])}};
      emit(out, record);
    }
    Json record{{"command", "regularize"},
                {"event", "certificate"},
                {"trace", to_json(trace)}};
    emit(out, record);
    return trace.converged ? kExitOk : kExitNegative;
  }

  Vector box = parse_csv_vector(box_text);
  if (box.size() != 2 || !(box[0] < box[1]))
    throw std::invalid_argument("regularize: --box wants lo,hi with lo < hi");

  // Draw every start up front so the stream is independent of scheduling.
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  std::vector<Vector> starts(static_cast<size_t>(multistart));
  for (auto& x0 : starts) {
    x0.resize(src.problem.n);
    for (int i = 0; i < src.problem.n; ++i) x0[i] = uniform(rng, box[0], box[1]);
  }

  std::vector<RegularizationTrace> traces(starts.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < starts.size(); i = next.fetch_add(1)) {
      try {
        traces[i] = drive(src.problem, starts[i], schedule, tol);
      } catch (const std::exception& e) {
        traces[i].limit_point = starts[i];
        traces[i].converged = false;
        traces[i].failure_stage = std::string("exception: ") + e.what();
      }
    }
  };
  const unsigned hw = std::thread::hardware_concurrency();
  const size_t num_threads =
      std::min<size_t>(starts.size(), hw == 0 ? 4 : std::min(hw, 8u));
  std::vector<std::thread> pool;
  for (size_t i = 0; i + 1 < num_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int converged = 0;
  for (size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].converged) ++converged;
    Json record{{"command", "regularize"},
                {"event", "multistart"},
                {"index", static_cast<int>(i)},
                {"x0", to_json(starts[i])},
                {"trace", to_json(traces[i])}};
    emit(out, record);
  }
  Json summary{{"command", "regularize"},
               {"event", "summary"},
               {"starts", multistart},
               {"converged", converged},
               {"seed", seed}};
  emit(out, summary);
  return converged > 0 ? kExitOk : kExitNegative;
}

// -------------------------------------------------------------------- scno

int cmd_scno(const std::string& f_path, int s, const std::string& x_text,
             const std::string& y_text, const Tolerances& tol, std::ostream& out) {
  int n = 0;
  SmoothMap f = load_quadratic_objective_file(f_path, n);
  ScnoProblem scno = make_scno_problem(n, f, s);

  RelaxedPoint point;
  point.x = parse_csv_vector(x_text);
  if (point.x.size() != n)
    throw std::invalid_argument("scno: --x does not match the objective dimension");
  point.y = y_text.empty() ? canonical_completion(scno, point.x, tol)
                           : parse_csv_vector(y_text);
  if (point.y.size() != n)
    throw std::invalid_argument("scno: --y does not match the objective dimension");

  MStationarityReport m = m_stationarity_check(scno, point.x, tol);
  const bool s_stat = s_stationarity_check(scno, point, tol);
  RelaxationCertificate cert = t_stationarity_check_relaxation(scno, point, tol);

  Json record{{"command", "scno"},
              {"n", n},
              {"s", s},
              {"x", to_json(point.x)},
              {"y", to_json(point.y)},
              {"m_stationary", m.m_stationary},
              {"s_stationary", s_stat},
              {"t_stationary", cert.is_t_stationary},
              {"relaxation", to_json(cert)}};
  if (cert.is_t_stationary) {
    DegeneracyAudit audit = degeneracy_audit(scno, point, tol);
    record["audit"] = to_json(audit);
  } else {
    record["audit"] = Json();
  }
  emit(out, record);
  return cert.is_t_stationary ? kExitOk : kExitNegative;
}

// --------------------------------------------------------------- landscape

int cmd_landscape(const std::string& problem_spec, const std::string& box_text,
                  int resolution, const std::string& levels_text, double delta,
                  const std::string& csv_path, const std::string& svg_path,
                  std::ostream& out) {
  ProblemSource src = resolve_problem(problem_spec);
  Vector box = parse_csv_vector(box_text);
  if (box.size() != 4)
    throw std::invalid_argument("landscape: --box wants xlo,xhi,ylo,yhi");

  GridSpec grid;
  grid.lower = Vector(2);
  grid.upper = Vector(2);
  grid.lower << box[0], box[2];
  grid.upper << box[1], box[3];
  grid.resolution = resolution;
  grid.thickness = delta;

  std::vector<double> levels = parse_levels(levels_text);
  std::vector<double> stationary_values;
  for (const CatalogPoint& p : src.stationary_points)
    stationary_values.push_back(src.problem.f.value(p.x)[0]);

  LevelSweepReport report = sweep_levels(src.problem, grid, levels, stationary_values);

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("landscape: cannot open " + csv_path);
    write_sweep_csv(report, csv);
  }
  if (!svg_path.empty()) {
    std::ofstream svg(svg_path);
    if (!svg) throw std::runtime_error("landscape: cannot open " + svg_path);
    write_sweep_svg(report, svg);
  }

  Json record{{"command", "landscape"},
              {"problem", src.name},
              {"box", to_json(box)},
              {"resolution", resolution},
              {"delta", grid.delta()},
              {"report", to_json(report)}};
  emit(out, record);
  return kExitOk;
}

// ----------------------------------------------------------------- catalog

int cmd_catalog(const std::string& name, std::ostream& out) {
  std::vector<std::string> names;
  if (!name.empty()) {
    names.push_back(name);
  } else {
    for (const std::string& n : catalog_names())
      if (n.find('<') == std::string::npos) names.push_back(n);
    names.push_back("instability_perturbed(0.1)");
  }
  for (const std::string& n : names) {
    CatalogEntry entry = catalog(n);
    Json points = Json::array();
    for (const CatalogPoint& p : entry.stationary_points)
      points.push_back(Json{{"x", to_json(p.x)},
                            {"f", entry.problem.f.value(p.x)[0]},
                            {"note", p.note}});
    Json record{{"command", "catalog"},
                {"name", entry.name},
                {"description", entry.description},
                {"n", entry.problem.n},
                {"equalities", entry.problem.num_equalities()},
                {"inequalities", entry.problem.num_inequalities()},
                {"pairs", entry.problem.num_pairs()},
                {"stationary_points", points}};
    emit(out, record);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- selftest

int cmd_selftest(std::ostream& out) {
  int failed = 0;
  int total = 0;
  auto check = [&](const std::string& name, bool passed, const std::string& detail) {
    ++total;
    if (!passed) ++failed;
    Json record{{"command", "selftest"},
                {"check", name},
                {"passed", passed},
                {"detail", detail}};
    emit(out, record);
  };
  auto run = [&](const std::string& name, std::function<void()> body) {
    try {
      body();
      check(name, true, "");
    } catch (const std::exception& e) {
      check(name, false, e.what());
    }
  };
  auto expect = [](bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
  };

  Vector probe(2);
  probe << 0.3, -0.7;

  run("derivative_callbacks", [&]() {
    for (const std::string& name :
         {std::string("saddle"), std::string("instability"),
          std::string("instability_perturbed(0.1)")}) {
      const MpocProblem p = catalog(name).problem;
      for (const SmoothMap* map : {&p.f, &p.F1, &p.F2}) {
        const double err = fd_derivative_check(*map, probe);
        expect(err <= 1e-5, name + ": derivative check error above 1e-5");
      }
    }
  });

  run("branch_minimizers", [&]() {
    const MpocProblem p = catalog("saddle").problem;
    Vector a(2), b(2);
    a << -1.0, 0.0;
    b << 0.0, 1.0;
    for (const Vector& x : {a, b}) {
      ClassificationResult r = classify_point(p, x);
      expect(r.certificate.is_t_stationary, "branch point not T-stationary");
      expect(r.report.has_value() &&
                 r.report->classification == Classification::NONDEGENERATE_LOCAL_MIN,
             "branch point not a nondegenerate local minimizer");
      expect(r.report->t_index.value_or(-1) == 0, "branch point T-index not 0");
    }
  });

  run("biactive_saddle", [&]() {
    const MpocProblem p = catalog("saddle").problem;
    ClassificationResult r = classify_point(p, Vector::Zero(2));
    expect(r.certificate.is_t_stationary, "origin not T-stationary");
    expect(r.report.has_value() &&
               r.report->classification == Classification::NONDEGENERATE_SADDLE,
           "origin not a nondegenerate saddle");
    expect(r.report->quadratic_index == 0 && r.report->biactive_index == 1,
           "origin has wrong indices");
    const MultiplierSet& m = r.certificate.multipliers;
    expect(m.rho1.size() == 1 && std::abs(m.rho1[0] - 2.0) <= 1e-8 &&
               std::abs(m.rho2[0] + 2.0) <= 1e-8,
           "origin has wrong biactive multipliers");
  });

  run("degenerate_minimizer", [&]() {
    ClassificationResult r =
        classify_point(catalog("instability").problem, Vector::Zero(2));
    expect(r.certificate.is_t_stationary, "origin not T-stationary");
    expect(r.report.has_value() &&
               r.report->classification == Classification::DEGENERATE,
           "origin not reported degenerate");
  });

  run("perturbed_points", [&]() {
    const CatalogEntry entry = catalog("instability_perturbed(0.1)");
    for (const CatalogPoint& p : entry.stationary_points) {
      ClassificationResult r = classify_point(entry.problem, p.x);
      expect(r.certificate.is_t_stationary, "perturbed point not T-stationary");
    }
  });

  run("regularization_drive", [&]() {
    Vector x0(2);
    x0 << -0.9, 0.05;
    RegularizationTrace trace = drive(catalog("saddle").problem, x0);
    expect(trace.converged, "drive did not converge");
    Vector target(2);
    target << -1.0, 0.0;
    expect((trace.limit_point - target).norm() <= 1e-6,
           "drive limit misses the branch minimizer");
  });

  run("sparsity_fixture", [&]() {
    Matrix Q = 2.0 * Matrix::Identity(2, 2);
    Vector c(2);
    c << -2.0, -4.0;
    ScnoProblem scno =
        make_scno_problem(2, make_quadratic_objective(Q, c, 5.0), 1);
    RelaxedPoint good{parse_csv_vector("1,0"), parse_csv_vector("0,1")};
    expect(m_stationarity_check(scno, good.x).m_stationary, "x=(1,0) not M-stationary");
    RelaxationCertificate cert = t_stationarity_check_relaxation(scno, good);
    expect(cert.is_t_stationary, "(x,y)=((1,0),(0,1)) not T-stationary");
    DegeneracyAudit audit = degeneracy_audit(scno, good);
    expect(audit.case_tag == AuditCase::CASE1 &&
               audit.failed_conditions == std::vector<NdCondition>{NdCondition::ND1},
           "audit did not fail ND1 in case 1");
    RelaxedPoint bad{parse_csv_vector("0.5,0"), parse_csv_vector("0,1")};
    expect(!t_stationarity_check_relaxation(scno, bad).is_t_stationary,
           "(x,y)=((0.5,0),(0,1)) should not be T-stationary");
  });

  run("landscape_sweep", [&]() {
    // Resolution matters here: the mask keeps a one-cell sleeve around each
    // feasible branch, so the bridge across the branch junction carries a
    // discretization bias of a few cell widths in the merge level. At 801
    // points per axis the bias stays inside one level step.
    const MpocProblem p = catalog("saddle").problem;
    GridSpec grid;
    grid.lower = parse_csv_vector("-3,-3");
    grid.upper = parse_csv_vector("3,3");
    grid.resolution = 801;
    LevelSweepReport report = sweep_levels(p, grid, parse_levels("0.2:3.0:0.05"));
    expect(report.change_levels.size() == 2, "expected exactly two change levels");
    expect(std::abs(report.change_levels[0] - 1.0) <= 0.05 &&
               std::abs(report.change_levels[1] - 2.0) <= 0.05,
           "change levels missed the stationary values");
  });

  Json summary{{"command", "selftest"},
               {"event", "summary"},
               {"total", total},
               {"failed", failed}};
  emit(out, summary);
  return failed == 0 ? kExitOk : kExitNegative;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"orthogonality-constrained optimization toolkit"};
  app.require_subcommand(1);

  // classify
  auto* classify = app.add_subcommand(
      "classify", "T-stationarity and nondegeneracy of a point");
  std::string classify_problem, classify_x;
  ToleranceFlags classify_tol;
  classify->add_option("--problem", classify_problem, "catalog name or problem file")
      ->required();
  classify->add_option("--x", classify_x, "point, comma separated")->required();
  classify_tol.attach(classify);

  // regularize
  auto* regularize = app.add_subcommand(
      "regularize", "drive the relaxed problems to a T-stationary point");
  std::string reg_problem, reg_x0, reg_box = "-2,2";
  DriveSchedule reg_schedule;
  int reg_multistart = 0;
  long long reg_seed = 42;
  ToleranceFlags reg_tol;
  regularize->add_option("--problem", reg_problem, "catalog name or problem file")
      ->required();
  regularize->add_option("--x0", reg_x0, "start point, comma separated");
  regularize->add_option("--t0", reg_schedule.t0, "initial regularization parameter");
  regularize->add_option("--shrink", reg_schedule.shrink, "parameter shrink factor");
  regularize->add_option("--tmin", reg_schedule.t_min, "final regularization parameter");
  regularize->add_option("--multistart", reg_multistart,
                         "number of random starts (0 = use --x0)");
  regularize->add_option("--box", reg_box, "random start box lo,hi per coordinate");
  regularize->add_option("--seed", reg_seed, "random seed (MPOC_SEED overrides)");
  reg_tol.attach(regularize);

  // scno
  auto* scno = app.add_subcommand(
      "scno", "stationarity checks for a sparsity-constrained problem");
  std::string scno_f, scno_x, scno_y;
  int scno_s = 0;
  ToleranceFlags scno_tol;
  scno->add_option("--f", scno_f, "quadratic objective file")->required();
  scno->add_option("--s", scno_s, "sparsity level")->required();
  scno->add_option("--x", scno_x, "x, comma separated")->required();
  scno->add_option("--y", scno_y, "y, comma separated (default: canonical completion)");
  scno_tol.attach(scno);

  // landscape
  auto* landscape = app.add_subcommand(
      "landscape", "sublevel-set component counts over a level sweep");
  std::string land_problem, land_box = "-3,3,-3,3", land_levels = "0.2:3.0:0.05";
  std::string land_csv, land_svg;
  int land_res = 801;
  double land_delta = 0.0;
  landscape->add_option("--problem", land_problem, "catalog name or problem file")
      ->required();
  landscape->add_option("--box", land_box, "grid box xlo,xhi,ylo,yhi");
  landscape->add_option("--res", land_res, "grid resolution per axis");
  landscape->add_option("--levels", land_levels, "level sweep lo:hi:step");
  landscape->add_option("--delta", land_delta,
                        "membership thickness (default: half cell diagonal)");
  landscape->add_option("--csv", land_csv, "write level,betti0 rows to this file");
  landscape->add_option("--svg", land_svg, "write a step plot to this file");

  // catalog
  auto* catalog_cmd = app.add_subcommand("catalog", "list built-in problems");
  std::string catalog_name;
  catalog_cmd->add_option("--name", catalog_name, "show a single entry");

  // selftest
  app.add_subcommand("selftest", "run the built-in fixture suite");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (app.got_subcommand("classify"))
      return cmd_classify(classify_problem, classify_x, classify_tol.tol, out);
    if (app.got_subcommand("regularize")) {
      bool seed_ok = true;
      const long long seed = resolve_seed(reg_seed, err, seed_ok);
      if (!seed_ok) return kExitError;
      if (reg_multistart <= 0 && reg_x0.empty())
        throw std::invalid_argument("regularize: provide --x0 or --multistart");
      return cmd_regularize(reg_problem, reg_x0, reg_schedule, reg_multistart,
                            reg_box, seed, reg_tol.tol, out);
    }
    if (app.got_subcommand("scno"))
      return cmd_scno(scno_f, scno_s, scno_x, scno_y, scno_tol.tol, out);
    if (app.got_subcommand("landscape"))
      return cmd_landscape(land_problem, land_box, land_res, land_levels,
                           land_delta, land_csv, land_svg, out);
    if (app.got_subcommand("catalog")) return cmd_catalog(catalog_name, out);
    if (app.got_subcommand("selftest")) return cmd_selftest(out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  err << "error: no subcommand\n";
  return kExitError;
}

}  // namespace mpoc
