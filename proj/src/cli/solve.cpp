#include "cli/commands.hpp"

#include <sstream>

namespace gausseot::cli {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::Domain: return kExitValidation;
    case ErrorKind::AssumptionViolated: return kExitAssumptionViolated;
    case ErrorKind::NumericalFailure:
    case ErrorKind::NonConvergence: return kExitNumericalFailure;
  }
  return kExitNumericalFailure;
}

Json error_document(const Error& e) {
  Json j;
  j["status"] = "error";
  j["kind"] = to_string(e.kind());
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) j["field"] = v->field();
  j["message"] = e.what();
  j["exit_code"] = exit_code_for(e.kind());
  return j;
}

Json solve_document(const ProblemSpec& spec) {
  const Problem<double> problem = spec.problem();
  const Solution<double> sol = solve_closed_form(problem);
  const double bw = bures_wasserstein_sq(problem.a(), problem.b());

  Json j;
  j["status"] = "ok";
  j["d"] = spec.d;
  j["epsilon"] = problem.epsilon();
  j["reference"] = to_string(problem.reference().kind());
  j["c_eps"] = matrix_to_json(sol.c_eps);
  j["cost"] = sol.cost;
  j["bw_cost"] = bw;
  j["bias"] = sol.cost - bw;
  j["dual_f"] = matrix_to_json(sol.duals.f.matrix());
  j["dual_g"] = matrix_to_json(sol.duals.g.matrix());
  j["gradient_residual"] = sol.gradient_residual;
  j["duality_gap"] = sol.duality_gap;
  j["r_eps"] = matrix_to_json(sol.r_eps);
  j["m_eps"] = matrix_to_json(sol.intermediates.m_eps);
  j["scale"] = problem.scale();
  Json a;
  a["sufficient_condition"] = sol.assumption.sufficient_condition;
  a["direct_check"] = sol.assumption.direct_check;
  a["verdict"] = to_string(sol.assumption.verdict());
  j["assumption"] = std::move(a);
  return j;
}

namespace {

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      // Matrices: c_eps_1_2 style, 1-based.
      flatten(j[i], prefix + "_" + std::to_string(i + 1), out);
    }
  } else if (j.is_number_float()) {
    out.emplace_back(prefix, format_number(j.get<double>()));
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

}  // namespace

std::string solve_csv(const Json& doc) {
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(doc, "", rows);
  std::string out = "field,value\n";
  for (const auto& [k, v] : rows) out += csv_field(k) + "," + csv_field(v) + "\n";
  return out;
}

}  // namespace gausseot::cli
