#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "cli/commands.hpp"

namespace gausseot::cli {

namespace {

struct Options {
  std::string input;
  std::string output;
  std::string format;
  int figure = 0;
  std::uint64_t seed = 1;
  std::string suite = "all";
  bool quiet = false;
};

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("input", "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("output", "cannot write " + path);
  f << text;
  if (!f) throw ValidationError("output", "write failed for " + path);
}

std::string companion_csv_path(const std::string& svg_path) {
  const std::string ext = ".svg";
  if (svg_path.size() > ext.size() && svg_path.compare(svg_path.size() - ext.size(), ext.size(), ext) == 0) {
    return svg_path.substr(0, svg_path.size() - ext.size()) + ".csv";
  }
  return svg_path + ".csv";
}

bool wants_json(const Options& o, bool json_default) {
  if (o.format.empty()) return json_default;
  return o.format == "json";
}

int dispatch(const std::string& verb, const Options& o, std::ostream& out, std::ostream& err) {
  if (verb == "solve") {
    const ProblemSpec spec = parse_problem_spec(parse_json_text(read_input(o.input)));
    const Json doc = solve_document(spec);
    write_text(o.output, wants_json(o, true) ? dump_json(doc) : solve_csv(doc), out);
    return kExitOk;
  }
  if (verb == "sweep") {
    const SweepSpec spec = parse_sweep_spec(parse_json_text(read_input(o.input)));
    write_text(o.output, sweep_document(spec, wants_json(o, false)), out);
    return kExitOk;
  }
  if (verb == "verify") {
    if (o.format == "csv") throw ValidationError("format", "verify reports as text or json");
    const std::vector<CheckResult> results = run_verify(o.suite, o.seed);
    const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
    write_text(o.output, wants_json(o, false) ? dump_json(verify_json(results)) : verify_text(results, o.quiet),
               out);
    return ok ? kExitOk : kExitVerificationFailed;
  }
  if (verb == "plot") {
    if (o.figure == 0) throw ValidationError("figure", "plot needs --figure 1|2|3|4");
    if (o.output.empty() || o.output == "-") throw ValidationError("output", "plot needs --output PATH.svg");
    const Json params = o.input.empty() ? Json() : parse_json_text(read_input(o.input));
    const PlotOutput plot = run_plot(o.figure, params);
    const std::string csv_path = companion_csv_path(o.output);
    write_text(o.output, plot.svg, out);
    write_text(csv_path, plot.csv, out);
    if (!o.quiet) err << "wrote " << o.output << " and " << csv_path << "\n";
    return kExitOk;
  }
  throw ValidationError("command", "unknown verb " + verb);
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-form entropic optimal transport between Gaussians", "gausseot"};
  Options o;
  app.add_option("--input", o.input, "problem / sweep / plot-parameter JSON file ('-' for stdin)");
  app.add_option("--output", o.output, "output file (default stdout; required for plot)");
  app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--figure", o.figure, "figure number for plot")->check(CLI::Range(1, 4));
  app.add_option("--seed", o.seed, "seed for verify instances");
  app.add_option("--suite", o.suite, "verify suite: all, descent, duality, sinkhorn, gradient, kl");
  app.add_flag("--quiet", o.quiet, "suppress diagnostics and passing verify lines");
  app.require_subcommand(1);
  for (const char* verb : {"solve", "sweep", "verify", "plot"}) {
    app.add_subcommand(verb)->fallthrough();
  }
  const char* descriptions[][2] = {
      {"solve", "closed-form solution of one problem"},
      {"sweep", "cost and bias over an epsilon or rho grid"},
      {"verify", "run the numerical oracle suites"},
      {"plot", "write a figure as SVG plus companion CSV"}};
  for (const auto& d : descriptions) app.get_subcommand(d[0])->description(d[1]);

  std::string verb;
  try {
    app.parse(argc, argv);
    verb = app.get_subcommands().front()->get_name();
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    const ValidationError v("arguments", e.what());
    out << dump_json(error_document(v));
    if (!o.quiet) err << "gausseot: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    return dispatch(verb, o, out, err);
  } catch (const Error& e) {
    const std::string doc = dump_json(error_document(e));
    try {
      write_text(verb == "plot" ? std::string() : o.output, doc, out);
    } catch (const Error&) {
      out << doc;
    }
    if (!o.quiet) err << "gausseot " << verb << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}

}  // namespace gausseot::cli
