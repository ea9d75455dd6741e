#include "cli/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace gausseot::cli {

namespace {

std::optional<double> implied_rho(const ProblemSpec& base) {
  if (base.d != 1) return std::nullopt;
  if (base.reference.kind == ReferenceKind::Product) return 0.0;
  if (base.reference.kind == ReferenceKind::Correlation) return base.reference.matrix(0, 0);
  return std::nullopt;
}

}  // namespace

SweepRow evaluate_point(const ProblemSpec& base, double epsilon, std::optional<double> rho) {
  ProblemSpec spec = base;
  if (rho) {
    spec.reference.kind = ReferenceKind::Correlation;
    spec.reference.matrix = Eigen::MatrixXd::Constant(1, 1, *rho);
  }
  SweepRow row;
  row.epsilon = epsilon;
  row.rho = rho ? rho : implied_rho(spec);
  const SpdMatrix<double> a(spec.a);
  const SpdMatrix<double> b(spec.b);
  row.bw_cost = bures_wasserstein_sq(a, b);
  if (epsilon == 0.0) {
    row.c = sqrt_product(a, b);
    row.cost = row.bw_cost;
    row.bias = 0.0;
    return row;
  }
  try {
    const Problem<double> p = spec.problem(epsilon);
    const Solution<double> sol = solve_closed_form(p);
    row.c = sol.c_eps;
    row.cost = sol.cost;
    row.bias = sol.cost - row.bw_cost;
  } catch (const AssumptionViolated&) {
    row.status = "assumption_violated";
  } catch (const NumericalFailure&) {
    row.status = "numerical_failure";
  }
  return row;
}

std::vector<SweepRow> evaluate_sweep(const SweepSpec& spec) {
  const std::size_t n = spec.values.size();
  std::vector<SweepRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const double v = spec.values[i];
        rows[i] = spec.axis == SweepAxis::Epsilon ? evaluate_point(spec.base, v, std::nullopt)
                                                  : evaluate_point(spec.base, *spec.base.epsilon, v);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::vector<std::string> sweep_header(Index d) {
  std::vector<std::string> h{"epsilon", "rho", "cost", "bw_cost", "bias"};
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) h.push_back("c_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  h.push_back("status");
  return h;
}

std::vector<std::string> sweep_cells(const SweepRow& row, Index d) {
  const bool ok = row.status == "ok";
  const auto value = [ok](double v) { return ok ? format_number(v) : std::string(); };
  std::vector<std::string> cells{format_number(row.epsilon), row.rho ? format_number(*row.rho) : "",
                                 value(row.cost), format_number(row.bw_cost), value(row.bias)};
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) cells.push_back(ok ? format_number(row.c(i, j)) : "");
  cells.push_back(row.status);
  return cells;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, Index d,
                      const std::vector<std::string>* curves) {
  std::string out;
  const auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  std::vector<std::string> header = sweep_header(d);
  if (curves) header.insert(header.begin(), "curve");
  emit(header);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> cells = sweep_cells(rows[r], d);
    if (curves) cells.insert(cells.begin(), (*curves)[r]);
    emit(cells);
  }
  return out;
}

Json sweep_json(const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const SweepRow& row : rows) {
    Json j;
    j["epsilon"] = row.epsilon;
    j["rho"] = row.rho ? Json(*row.rho) : Json(nullptr);
    const bool ok = row.status == "ok";
    j["cost"] = ok ? Json(row.cost) : Json(nullptr);
    j["bw_cost"] = row.bw_cost;
    j["bias"] = ok ? Json(row.bias) : Json(nullptr);
    j["c"] = ok ? matrix_to_json(row.c) : Json(nullptr);
    j["status"] = row.status;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace gausseot::cli
