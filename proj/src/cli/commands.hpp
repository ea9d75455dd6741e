#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/evaluate.hpp"
#include "cli/format.hpp"
#include "gausseot/errors.hpp"

namespace gausseot::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitValidation = 2,
  kExitAssumptionViolated = 3,
  kExitNumericalFailure = 4,
};

int exit_code_for(ErrorKind kind);

Json error_document(const Error& e);

// solve ----------------------------------------------------------------------

Json solve_document(const ProblemSpec& spec);
/// Flat field,value table of the same content.
std::string solve_csv(const Json& doc);

// sweep ----------------------------------------------------------------------

std::string sweep_document(const SweepSpec& spec, bool as_json);

// verify ---------------------------------------------------------------------

struct CheckResult {
  std::string suite;
  std::string property;
  bool passed = false;
  double worst = 0;      // worst residual observed
  double threshold = 0;  // pass iff worst < threshold (or as documented per property)
  std::string detail;
};

const std::vector<std::string>& verify_suites();

/// suite is one of verify_suites() or "all".
std::vector<CheckResult> run_verify(const std::string& suite, std::uint64_t seed);

std::string verify_text(const std::vector<CheckResult>& results, bool quiet);
Json verify_json(const std::vector<CheckResult>& results);

// plot -----------------------------------------------------------------------

struct PlotOutput {
  std::string svg;
  std::string csv;
};

/// params may be null; otherwise an object overriding the figure defaults.
PlotOutput run_plot(int figure, const Json& params);

// entry point ----------------------------------------------------------------

/// Full command line. Output goes to --output or `out`; diagnostics to `err`.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gausseot::cli
