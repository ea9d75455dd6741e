#include "cli/commands.hpp"

namespace gausseot::cli {

std::string sweep_document(const SweepSpec& spec, bool as_json) {
  const std::vector<SweepRow> rows = evaluate_sweep(spec);
  return as_json ? dump_json(sweep_json(rows)) : sweep_csv(rows, spec.base.d);
}

}  // namespace gausseot::cli
