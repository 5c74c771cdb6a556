#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qkdrate::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kBadInput = 2,       // unreadable or malformed problem file, invalid parameters
  kSolverFailure = 3,  // iteration limit or numerical failure
  kInfeasible = 4,
};

struct SolverFlags {
  std::string tol_gap;   // empty: precision default
  std::string tol_feas;
  int max_iter = 200;
  bool no_third_order = false;
  std::string precision = "double";  // double | extended
};

/// Protocol parameters kept as text so extended runs parse them exactly.
struct ProtocolFlags {
  std::string protocol;  // bb84 | mub | overlap
  std::string qx = "0.025";
  std::string qz = "0.025";
  int d = 3;
  std::string v = "0.95";
  int bases = -1;
  bool complex_field = false;  // bb84 and overlap default to real arithmetic
};

struct SolveCommand {
  ProtocolFlags protocol;
  std::string problem_path;  // set instead of a protocol
  SolverFlags solver;
  bool json = false;
  bool log = false;
};

struct EmitCommand {
  ProtocolFlags protocol;
  SolverFlags solver;
  std::string output;  // "-" for stdout
};

struct PrecisionCommand {
  std::string protocol = "all";   // all | bb84 | mub
  std::string precision = "all";  // all | double | extended
  bool json = false;
};

struct BenchmarkRecord {
  std::string protocol;
  std::string param;
  double seconds = 0;        // solve() only, mean over repetitions
  double min_seconds = 0;
  double max_seconds = 0;
  double setup_seconds = 0;  // excluded from `seconds`
  int iterations = 0;
  double objective = 0;      // bits
  double objective_spread = 0;
  double gap = 0;
  std::string precision;
  std::string status;
  bool ok = false;
};

struct BenchCommand {
  ProtocolFlags protocol;
  std::vector<std::string> params;  // d for mub / overlap, QBER for bb84
  int reps = 1;
  std::string plot_data;            // optional `<param> <seconds>` file
  SolverFlags solver;
  bool json = false;
  std::function<void(const BenchmarkRecord&)> on_record;
};

int run_solve(const SolveCommand& cmd, std::ostream& out, std::ostream& err);
int run_emit(const EmitCommand& cmd, std::ostream& out, std::ostream& err);
int run_precision(const PrecisionCommand& cmd, std::ostream& out, std::ostream& err);
int run_bench(const BenchCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace qkdrate::cli
