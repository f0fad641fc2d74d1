#include "mpoc/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace mpoc {

Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Json to_json(const ActivePattern& pattern) {
  return Json{{"J0", pattern.J0},   {"a01", pattern.a01}, {"a10", pattern.a10},
              {"a00", pattern.a00}, {"s", pattern.s},     {"q", pattern.q},
              {"p", pattern.p}};
}

Json to_json(const LicqReport& licq) {
  return Json{{"holds", licq.holds},
              {"min_singular_value", licq.min_singular_value},
              {"active_gradient_count", licq.active_gradient_count}};
}

Json to_json(const MultiplierSet& m) {
  return Json{{"lambda", to_json(m.lambda)},
              {"mu", to_json(m.mu)},
              {"sigma1", to_json(m.sigma1)},
              {"sigma2", to_json(m.sigma2)},
              {"rho1", to_json(m.rho1)},
              {"rho2", to_json(m.rho2)},
              {"residual_norm", m.residual_norm},
              {"minimum_norm_fallback", m.minimum_norm_fallback}};
}

Json to_json(const StationarityCertificate& c) {
  Json violated = Json::array();
  for (ConditionTag tag : c.violated_conditions) violated.push_back(to_string(tag));
  return Json{{"point", to_json(c.point)},
              {"pattern", to_json(c.pattern)},
              {"licq", to_json(c.licq)},
              {"multipliers", to_json(c.multipliers)},
              {"is_t_stationary", c.is_t_stationary},
              {"violated_conditions", violated}};
}

Json to_json(const NondegeneracyReport& r) {
  Json t_index;  // null when any of ND1-ND4 fails
  if (r.t_index.has_value()) t_index = *r.t_index;
  return Json{{"nd1_licq", r.nd1_licq},
              {"nd2_strict_complementarity", r.nd2_strict_complementarity},
              {"nd3_biactive_multipliers", r.nd3_biactive_multipliers},
              {"nd4_hessian_nonsingular", r.nd4_hessian_nonsingular},
              {"restricted_hessian_eigenvalues", to_json(r.restricted_hessian_eigenvalues)},
              {"quadratic_index", r.quadratic_index},
              {"biactive_index", r.biactive_index},
              {"t_index", t_index},
              {"classification", to_string(r.classification)}};
}

Json to_json(const ClassificationResult& result) {
  Json report;
  if (result.report.has_value()) report = to_json(*result.report);
  return Json{{"certificate", to_json(result.certificate)}, {"report", report}};
}

Json to_json(const InnerKktPoint& p) {
  return Json{{"x", to_json(p.x)},
              {"lambda", to_json(p.lambda)},
              {"mu", to_json(p.mu)},
              {"eta", to_json(p.eta)},
              {"eta_ge", to_json(p.eta_ge)},
              {"eta_le", to_json(p.eta_le)},
              {"kkt_residual", p.kkt_residual},
              {"converged", p.converged},
              {"iterations", p.iterations}};
}

Json to_json(const RegularizationTrace& t) {
  return Json{{"schedule", t.schedule},
              {"t_final", t.t_final},
              {"limit_point", to_json(t.limit_point)},
              {"limit_pattern", to_json(t.limit_pattern)},
              {"recovered_multipliers", to_json(t.recovered)},
              {"certificate", to_json(t.certificate)},
              {"multiplier_agreement", t.multiplier_agreement},
              {"converged", t.converged},
              {"failure_stage", t.failure_stage}};
}

Json to_json(const RelaxIndexSets& s) {
  return Json{{"I00", s.I00}, {"I01", s.I01}, {"I0neq", s.I0neq}, {"I1", s.I1}};
}

Json to_json(const RelaxationMultipliers& m) {
  return Json{{"mu_bar", m.mu_bar},
              {"mu", to_json(m.mu)},
              {"sigma1", to_json(m.sigma1)},
              {"sigma2", to_json(m.sigma2)},
              {"rho1", to_json(m.rho1)},
              {"rho2", to_json(m.rho2)},
              {"residual_norm", m.residual_norm}};
}

Json to_json(const RelaxationCertificate& c) {
  Json violated = Json::array();
  for (ConditionTag tag : c.violated_conditions) violated.push_back(to_string(tag));
  return Json{{"index_sets", to_json(c.sets)},
              {"sum_constraint_active", c.sum_constraint_active},
              {"multipliers", to_json(c.multipliers)},
              {"is_t_stationary", c.is_t_stationary},
              {"violated_conditions", violated},
              {"generic", to_json(c.generic)}};
}

Json to_json(const DegeneracyAudit& a) {
  Json failed = Json::array();
  for (NdCondition c : a.failed_conditions) failed.push_back(to_string(c));
  return Json{{"case", to_string(a.case_tag)},
              {"failed_conditions", failed},
              {"detail", a.detail},
              {"generic_classification", to_string(a.generic_classification)}};
}

Json to_json(const LevelSweepReport& r) {
  return Json{{"levels", r.levels},
              {"betti0_per_level", r.betti0_per_level},
              {"change_levels", r.change_levels},
              {"stationary_values", r.stationary_values},
              {"note",
               "component counts assume the box contains the swept sublevel "
               "sets; that hypothesis is not verified"}};
}

namespace {

void write_fixed(const Json& j, std::string& out) {
  switch (j.type()) {
    case nlohmann::detail::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write_fixed(it.value(), out);
      }
      out += '}';
      break;
    }
    case nlohmann::detail::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ',';
        first = false;
        write_fixed(item, out);
      }
      out += ']';
      break;
    }
    case nlohmann::detail::value_t::number_float: {
      const double d = j.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
      } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        out += buf;
      }
      break;
    }
    default:
      out += j.dump();  // strings, integers, booleans, null
      break;
  }
}

}  // namespace

std::string dump_fixed(const Json& record) {
  std::string out;
  write_fixed(record, out);
  return out;
}

}  // namespace mpoc
