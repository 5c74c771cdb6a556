#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace qkdrate::cli;

namespace {

void add_solver_flags(CLI::App* app, SolverFlags& f) {
  app->add_option("--tol-gap", f.tol_gap, "Relative gap tolerance");
  app->add_option("--tol-feas", f.tol_feas, "Feasibility tolerance");
  app->add_option("--max-iter", f.max_iter, "Iteration limit")->capture_default_str();
  app->add_flag("--no-third-order", f.no_third_order, "Disable the third-order correction");
  app->add_option("--precision", f.precision, "double or extended")->capture_default_str();
}

void add_protocol_flags(CLI::App* app, ProtocolFlags& f, bool with_name) {
  if (with_name) app->add_option("--protocol", f.protocol, "bb84, mub or overlap");
  app->add_option("--qx", f.qx, "BB84 phase error rate")->capture_default_str();
  app->add_option("--qz", f.qz, "BB84 bit error rate")->capture_default_str();
  app->add_option("--d", f.d, "Dimension (mub: prime)")->capture_default_str();
  app->add_option("--v", f.v, "Visibility of the isotropic state")->capture_default_str();
  app->add_option("--bases", f.bases, "Number of MUBs (default all d + 1)");
  app->add_flag("--complex", f.complex_field, "Complex arithmetic for bb84 and overlap");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key rates of QKD protocols by conic optimization"};
  app.require_subcommand(1);

  SolveCommand solve;
  auto* s = app.add_subcommand("solve", "Solve a protocol instance or a problem file");
  add_protocol_flags(s, solve.protocol, true);
  s->add_option("--problem", solve.problem_path, "Problem file");
  add_solver_flags(s, solve.solver);
  s->add_flag("--json", solve.json, "One JSON object per line");
  s->add_flag("--log", solve.log, "Print the iteration log");

  EmitCommand emit;
  auto* e = app.add_subcommand("emit", "Write the reduced problem of a protocol instance");
  add_protocol_flags(e, emit.protocol, true);
  e->add_option("-o,--output", emit.output, "Output file, - for stdout")->capture_default_str();
  add_solver_flags(e, emit.solver);

  PrecisionCommand precision;
  auto* p = app.add_subcommand("precision", "Errors against analytic or cross-oracle references");
  p->add_option("--protocol", precision.protocol, "all, bb84 or mub")->capture_default_str();
  p->add_option("--precision", precision.precision, "all, double or extended")->capture_default_str();
  p->add_flag("--json", precision.json, "One JSON object per line");

  BenchCommand bench;
  auto* b = app.add_subcommand("bench", "Time a parameter sweep");
  add_protocol_flags(b, bench.protocol, true);
  b->add_option("--params", bench.params, "Dimensions (mub, overlap) or QBERs (bb84)")->delimiter(',')->required();
  b->add_option("--reps", bench.reps, "Repetitions per instance")->capture_default_str();
  b->add_option("--plot-data", bench.plot_data, "Write '<param> <seconds>' lines here");
  add_solver_flags(b, bench.solver);
  b->add_flag("--json", bench.json, "One JSON object per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kUsage;
  }

  if (s->parsed()) return run_solve(solve, std::cout, std::cerr);
  if (e->parsed()) return run_emit(emit, std::cout, std::cerr);
  if (p->parsed()) return run_precision(precision, std::cout, std::cerr);
  return run_bench(bench, std::cout, std::cerr);
}
