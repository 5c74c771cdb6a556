#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "problem_file.hpp"
#include "qkdrate/errors.hpp"
#include "qkdrate/protocols.hpp"

namespace qkdrate::cli {

namespace {

using json = nlohmann::json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Real>
Real parse_param(const std::string& text, const std::string& name) {
  try {
    return parse_real<Real>(text);
  } catch (const std::exception&) {
    throw InputError("--" + name + ": '" + text + "' is not a number");
  }
}

bool wants_extended(const std::string& precision) {
  if (precision == "double") return false;
  if (precision == "extended") return true;
  throw InputError("unsupported precision '" + precision + "' (double or extended)");
}

bool wants_complex(const ProtocolFlags& f) { return f.protocol == "mub" || f.complex_field; }

template <typename Fn>
auto dispatch(bool extended, bool complex_field, Fn&& fn) {
  if (extended) return complex_field ? fn(std::complex<Extended>{}) : fn(Extended{});
  return complex_field ? fn(std::complex<double>{}) : fn(double{});
}

template <typename Real>
SolverOptions<Real> solver_options(const SolverFlags& f) {
  auto o = SolverOptions<Real>::defaults();
  if (!f.tol_gap.empty()) o.tol_gap = parse_param<Real>(f.tol_gap, "tol-gap");
  if (!f.tol_feas.empty()) o.tol_feas = parse_param<Real>(f.tol_feas, "tol-feas");
  if (!(o.tol_gap > Real(0)) || !(o.tol_feas > Real(0))) throw InputError("tolerances must be positive");
  if (f.max_iter < 1) throw InputError("--max-iter must be positive");
  o.max_iter = f.max_iter;
  o.third_order = !f.no_third_order;
  return o;
}

template <typename T>
ProtocolInstance<T> make_instance(const ProtocolFlags& f) {
  using Real = RealOf<T>;
  if (f.protocol == "bb84") return bb84<T>(parse_param<Real>(f.qx, "qx"), parse_param<Real>(f.qz, "qz"));
  if (f.protocol == "mub") return mub<T>(f.d, parse_param<Real>(f.v, "v"), f.bases);
  if (f.protocol == "overlap") return overlap<T>(f.d, parse_param<Real>(f.v, "v"));
  if (f.protocol.empty()) throw InputError("no protocol given (--protocol or --problem)");
  throw InputError("unknown protocol '" + f.protocol + "' (bb84, mub, overlap)");
}

std::string describe(const ProtocolFlags& f) {
  if (f.protocol == "bb84") return "bb84 qx=" + f.qx + " qz=" + f.qz;
  std::string s = f.protocol + " d=" + std::to_string(f.d) + " v=" + f.v;
  if (f.protocol == "mub" && f.bases > 0) s += " bases=" + std::to_string(f.bases);
  return s;
}

int exit_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
    case SolveStatus::near_optimal: return kOk;
    case SolveStatus::infeasible_detected: return kInfeasible;
    default: return kSolverFailure;
  }
}

// Runs `body`, mapping library exceptions to exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
}

template <typename Real>
std::string full(const Real& v) {
  return to_string(v, std::numeric_limits<Real>::digits10);
}

template <typename Real>
std::string brief(const Real& v) {
  return to_string(v, 3);
}

template <typename Real>
void print_log(std::ostream& out, const SolveReport<Real>& rep) {
  out << "  iter  step        alpha     mu         prox      pobj                dobj                pres      dres\n";
  for (const auto& r : rep.log) {
    out << "  " << std::setw(4) << r.iteration << "  " << std::left << std::setw(10) << r.step << std::right << ' '
        << std::setw(9) << brief(r.alpha) << ' ' << std::setw(10) << brief(r.mu) << ' ' << std::setw(9)
        << brief(r.prox) << ' ' << std::setw(19) << to_string(r.primal_obj, 12) << ' ' << std::setw(19)
        << to_string(r.dual_obj, 12) << ' ' << std::setw(9) << brief(r.primal_res) << ' ' << std::setw(9)
        << brief(r.dual_res) << '\n';
  }
}

template <typename T>
int solve_protocol(const SolveCommand& cmd, const std::string& precision, std::ostream& out) {
  using Real = RealOf<T>;
  KeyRateOptions<Real> opts;
  opts.solver = solver_options<Real>(cmd.solver);
  const auto in = make_instance<T>(cmd.protocol);
  const auto r = key_rate(in, opts);
  const int code = r.solved ? exit_for(r.report.status) : kOk;

  if (cmd.json) {
    json j;
    j["kind"] = "key_rate";
    j["protocol"] = cmd.protocol.protocol;
    j["parameters"] = in.parameters;
    j["precision"] = precision;
    j["status"] = to_string(r.report.status);
    j["converged"] = r.converged;
    j["h_ae_bits"] = to_double(r.h_ae);
    j["h_ae_bits_text"] = full(r.h_ae);
    j["dual_bound_bits"] = to_double(r.h_ae_dual);
    j["h_ab_bits"] = to_double(r.h_ab);
    j["key_rate_bits"] = to_double(r.devetak_winter);
    j["iterations"] = r.report.iterations;
    j["gap"] = to_double(r.report.gap);
    j["primal_residual"] = to_double(r.report.primal_res);
    j["dual_residual"] = to_double(r.report.dual_res);
    j["full_dim"] = r.full_dim;
    j["reduced_dim"] = r.reduced_dim;
    j["reduction"] = r.reduction_method;
    j["unique_state"] = r.unique_state;
    j["solve_seconds"] = r.report.solve_seconds;
    j["setup_seconds"] = r.setup_seconds;
    out << j.dump() << '\n';
    return code;
  }

  out << "protocol         " << describe(cmd.protocol) << " (" << precision << ", "
      << (is_complex_v<T> ? "complex" : "real") << ")\n";
  out << "status           " << to_string(r.report.status);
  if (!r.report.message.empty()) out << " (" << r.report.message << ")";
  out << '\n';
  out << "H(A|E)           " << full(r.h_ae) << " bits\n";
  out << "dual bound       " << full(r.h_ae_dual) << " bits\n";
  out << "H(A|B)           " << full(r.h_ab) << " bits\n";
  out << "key rate         " << full(r.devetak_winter) << " bits\n";
  out << "iterations       " << r.report.iterations << '\n';
  out << "gap              " << brief(r.report.gap) << '\n';
  out << "residuals        primal " << brief(r.report.primal_res) << ", dual " << brief(r.report.dual_res) << '\n';
  out << "dimension        " << r.full_dim << " -> " << r.reduced_dim << " (" << r.reduction_method << " support)\n";
  out << "time             solve " << std::setprecision(3) << r.report.solve_seconds << " s, setup "
      << r.setup_seconds << " s\n";
  if (cmd.log) print_log(out, r.report);
  return code;
}

template <typename T>
int solve_file(const SolveCommand& cmd, const std::string& text, const std::string& precision, std::ostream& out) {
  using Real = RealOf<T>;
  const auto file = parse_problem<T>(text);
  const auto rep = solve(file.problem, solver_options<Real>(cmd.solver));
  const auto units = file.meta.find("objective_units");
  const bool nats = units != file.meta.end() && units->second == "nats";

  if (cmd.json) {
    json j;
    j["kind"] = "problem";
    j["path"] = cmd.problem_path;
    j["precision"] = precision;
    j["status"] = to_string(rep.status);
    j["primal_obj"] = to_double(rep.primal_obj);
    j["primal_obj_text"] = full(rep.primal_obj);
    j["dual_obj"] = to_double(rep.dual_obj);
    if (nats) {
      j["h_ae_bits"] = to_double(rep.primal_obj / ln2<Real>());
      j["dual_bound_bits"] = to_double(rep.dual_obj / ln2<Real>());
    }
    j["iterations"] = rep.iterations;
    j["gap"] = to_double(rep.gap);
    j["primal_residual"] = to_double(rep.primal_res);
    j["dual_residual"] = to_double(rep.dual_res);
    j["rows_dropped"] = rep.rows_dropped;
    j["solve_seconds"] = rep.solve_seconds;
    j["meta"] = file.meta;
    out << j.dump() << '\n';
    return exit_for(rep.status);
  }

  out << "problem          " << cmd.problem_path << " (" << precision << ", "
      << (is_complex_v<T> ? "complex" : "real") << ", " << file.problem.num_vars() << " variables, "
      << file.problem.A.rows() << " rows)\n";
  out << "status           " << to_string(rep.status);
  if (!rep.message.empty()) out << " (" << rep.message << ")";
  out << '\n';
  out << "primal objective " << full(rep.primal_obj) << '\n';
  out << "dual objective   " << full(rep.dual_obj) << '\n';
  if (nats) {
    out << "H(A|E)           " << full(Real(rep.primal_obj / ln2<Real>())) << " bits\n";
    out << "dual bound       " << full(Real(rep.dual_obj / ln2<Real>())) << " bits\n";
  }
  out << "iterations       " << rep.iterations << '\n';
  out << "gap              " << brief(rep.gap) << '\n';
  out << "residuals        primal " << brief(rep.primal_res) << ", dual " << brief(rep.dual_res) << '\n';
  if (rep.rows_dropped) out << "dropped rows     " << rep.rows_dropped << '\n';
  out << "time             solve " << std::setprecision(3) << rep.solve_seconds << " s\n";
  if (cmd.log) print_log(out, rep);
  return exit_for(rep.status);
}

template <typename T>
int emit_protocol(const EmitCommand& cmd, std::ostream& out) {
  using Real = RealOf<T>;
  KeyRateOptions<Real> opts;
  opts.solver = solver_options<Real>(cmd.solver);
  const auto in = make_instance<T>(cmd.protocol);
  const auto cert = reduce_instance(in, opts);
  if (cert.unique_state) throw InputError("the constraints determine the state; there is nothing to optimize");
  ProblemFile<T> file;
  file.problem = build_qkd_problem<T>(cert, in.experimental, in.observed);
  file.meta["protocol"] = in.name;
  for (const auto& [k, v] : in.parameters) file.meta["param." + k] = v;
  file.meta["objective_units"] = "nats";
  file.meta["full_dim"] = std::to_string(cert.full_dim);
  file.meta["reduced_dim"] = std::to_string(cert.reduced_dim);
  const std::string text = emit_problem(file);
  if (cmd.output.empty() || cmd.output == "-") {
    out << text;
  } else {
    std::ofstream f(cmd.output, std::ios::binary);
    if (!f) throw InputError("cannot write '" + cmd.output + "'");
    f << text;
  }
  return kOk;
}

struct PrecisionRow {
  std::string protocol;
  std::string precision;
  std::string reference_kind;
  std::string reference;
  std::string computed;
  double error = std::numeric_limits<double>::quiet_NaN();
  std::string status;
};

template <typename Real>
PrecisionRow bb84_precision_row(const std::string& label) {
  const Real q = parse_real<Real>("0.025");
  const auto r = key_rate(bb84<Real>(q, q));
  const Real ref = Real(1) - binary_entropy(q);
  using std::abs;
  return {"bb84 q=0.025", label, "closed form", full(ref), full(r.h_ae), to_double(Real(abs(r.h_ae - ref))),
          to_string(r.report.status)};
}

PrecisionRow mub_precision_row() {
  using C = std::complex<double>;
  const auto in = mub<C>(3, 0.95);
  const auto r = key_rate(in);
  const auto re = solve(build_re_problem<C>(in.observables, in.probabilities, in.pinching),
                        SolverOptions<double>::defaults());
  const double ref = re.primal_obj / std::log(2.0);
  return {"mub d=3 v=0.95", "double", "relative entropy cone", full(ref), full(r.h_ae), std::abs(r.h_ae - ref),
          to_string(r.report.status) + "/" + to_string(re.status)};
}

template <typename Real>
BenchmarkRecord bench_one(const BenchCommand& cmd, const std::string& param, const std::string& precision) {
  using T = Real;
  BenchmarkRecord rec;
  rec.protocol = cmd.protocol.protocol;
  rec.param = param;
  rec.precision = precision;
  ProtocolFlags f = cmd.protocol;
  if (f.protocol == "bb84") {
    f.qx = f.qz = param;
  } else {
    std::size_t used = 0;
    int d = 0;
    try {
      d = std::stoi(param, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != param.size() || used == 0) throw InputError("dimension '" + param + "' is not an integer");
    f.d = d;
  }
  KeyRateOptions<RealOf<T>> opts;
  opts.solver = solver_options<RealOf<T>>(cmd.solver);
  std::vector<double> times, objs;
  for (int rep = 0; rep < std::max(1, cmd.reps); ++rep) {
    const auto in = make_instance<T>(f);
    const auto r = key_rate(in, opts);
    times.push_back(r.report.solve_seconds);
    objs.push_back(to_double(r.h_ae));
    rec.setup_seconds += r.setup_seconds;
    rec.iterations = r.report.iterations;
    rec.gap = to_double(r.report.gap);
    rec.status = to_string(r.report.status);
    rec.ok = r.converged;
    if (!r.converged) break;
  }
  double sum = 0;
  for (double t : times) sum += t;
  rec.seconds = sum / double(times.size());
  rec.min_seconds = *std::min_element(times.begin(), times.end());
  rec.max_seconds = *std::max_element(times.begin(), times.end());
  rec.setup_seconds /= double(times.size());
  rec.objective = objs.back();
  rec.objective_spread = *std::max_element(objs.begin(), objs.end()) - *std::min_element(objs.begin(), objs.end());
  return rec;
}

}  // namespace

int run_solve(const SolveCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const bool ext = wants_extended(cmd.solver.precision);
    if (!cmd.problem_path.empty()) {
      if (!cmd.protocol.protocol.empty()) throw InputError("give either --problem or --protocol, not both");
      std::string text;
      try {
        text = read_file(cmd.problem_path);
      } catch (const std::exception& e) {
        throw InputError(e.what());
      }
      try {
        const ProblemHeader h = read_header(text);
        return dispatch(ext, h.field == FieldMode::complex, [&](auto tag) {
          return solve_file<decltype(tag)>(cmd, text, cmd.solver.precision, out);
        });
      } catch (const ParseError& e) {
        err << cmd.problem_path << ':' << e.what() << '\n';
        return int(kBadInput);
      }
    }
    return dispatch(ext, wants_complex(cmd.protocol), [&](auto tag) {
      return solve_protocol<decltype(tag)>(cmd, cmd.solver.precision, out);
    });
  });
}

int run_emit(const EmitCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const bool ext = wants_extended(cmd.solver.precision);
    return dispatch(ext, wants_complex(cmd.protocol),
                    [&](auto tag) { return emit_protocol<decltype(tag)>(cmd, out); });
  });
}

int run_precision(const PrecisionCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cmd.protocol != "all" && cmd.protocol != "bb84" && cmd.protocol != "mub")
      throw InputError("unknown protocol '" + cmd.protocol + "' (all, bb84, mub)");
    if (cmd.precision != "all") wants_extended(cmd.precision);
    const bool dbl = cmd.precision != "extended", ext = cmd.precision != "double";
    std::vector<PrecisionRow> rows;
    if (cmd.protocol != "mub") {
      if (dbl) rows.push_back(bb84_precision_row<double>("double"));
      if (ext) rows.push_back(bb84_precision_row<Extended>("extended"));
    }
    if (cmd.protocol != "bb84") {
      if (dbl) rows.push_back(mub_precision_row());
      if (ext) rows.push_back({"mub d=3 v=0.95", "extended", "relative entropy cone", "", "",
                               std::numeric_limits<double>::quiet_NaN(),
                               "skipped: the reference solve is itself a double-precision result"});
    }
    if (cmd.json) {
      for (const auto& r : rows) {
        json j{{"kind", "precision"}, {"protocol", r.protocol}, {"precision", r.precision},
               {"reference_kind", r.reference_kind}, {"reference", r.reference}, {"computed", r.computed},
               {"status", r.status}};
        j["abs_error"] = std::isfinite(r.error) ? json(r.error) : json(nullptr);
        out << j.dump() << '\n';
      }
    } else {
      out << std::left << std::setw(16) << "protocol" << std::setw(10) << "precision" << std::setw(24)
          << "reference" << std::setw(38) << "value" << std::setw(38) << "computed" << "abs error\n";
      for (const auto& r : rows) {
        out << std::left << std::setw(16) << r.protocol << std::setw(10) << r.precision << std::setw(24)
            << r.reference_kind << std::setw(38) << (r.reference.empty() ? "-" : r.reference) << std::setw(38)
            << (r.computed.empty() ? "-" : r.computed);
        if (std::isfinite(r.error)) {
          std::ostringstream e;
          e << std::scientific << std::setprecision(2) << r.error;
          out << e.str();
        } else {
          out << r.status;
        }
        out << '\n';
      }
      out << std::right;
    }
    for (const auto& r : rows)
      if (r.status.rfind("optimal", 0) != 0 && r.status.rfind("skipped", 0) != 0) return int(kSolverFailure);
    return int(kOk);
  });
}

int run_bench(const BenchCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const bool ext = wants_extended(cmd.solver.precision);
    if (cmd.protocol.protocol != "bb84" && cmd.protocol.protocol != "mub" && cmd.protocol.protocol != "overlap")
      throw InputError("unknown protocol '" + cmd.protocol.protocol + "' (bb84, mub, overlap)");
    if (cmd.params.empty()) throw InputError("no parameters to sweep");
    if (cmd.reps < 1) throw InputError("--reps must be positive");
    std::ofstream plot;
    if (!cmd.plot_data.empty()) {
      plot.open(cmd.plot_data);
      if (!plot) throw InputError("cannot write '" + cmd.plot_data + "'");
    }
    if (!cmd.json)
      out << std::left << std::setw(9) << "protocol" << std::setw(8) << "param" << std::setw(12) << "seconds"
          << std::setw(12) << "min" << std::setw(12) << "max" << std::setw(7) << "iters" << std::setw(20)
          << "objective_bits" << std::setw(11) << "gap" << std::setw(10) << "precision" << "status\n"
          << std::right;

    int failures = 0;
    for (const auto& param : cmd.params) {
      BenchmarkRecord rec;
      try {
        rec = dispatch(ext, wants_complex(cmd.protocol), [&](auto tag) {
          using T = decltype(tag);
          return bench_one<T>(cmd, param, cmd.solver.precision);
        });
      } catch (const std::exception& e) {
        rec.protocol = cmd.protocol.protocol;
        rec.param = param;
        rec.precision = cmd.solver.precision;
        rec.status = std::string("error: ") + e.what();
        rec.ok = false;
      }
      if (!rec.ok) ++failures;
      if (cmd.on_record) cmd.on_record(rec);
      if (plot && rec.ok) plot << rec.param << ' ' << std::setprecision(6) << rec.seconds << '\n';

      if (cmd.json) {
        json j{{"kind", "bench"}, {"protocol", rec.protocol}, {"param", rec.param}, {"precision", rec.precision},
               {"status", rec.status}, {"ok", rec.ok}};
        if (rec.ok) {
          j["seconds"] = rec.seconds;
          j["min_seconds"] = rec.min_seconds;
          j["max_seconds"] = rec.max_seconds;
          j["setup_seconds"] = rec.setup_seconds;
          j["iterations"] = rec.iterations;
          j["objective_bits"] = rec.objective;
          j["objective_spread"] = rec.objective_spread;
          j["gap"] = rec.gap;
        }
        out << j.dump() << '\n';
      } else {
        std::ostringstream line;
        line << std::left << std::setw(9) << rec.protocol << std::setw(8) << rec.param;
        if (rec.status.rfind("error", 0) == 0) {
          line << rec.status;
        } else {
          line << std::setprecision(4) << std::setw(12) << rec.seconds << std::setw(12) << rec.min_seconds
               << std::setw(12) << rec.max_seconds << std::setw(7) << rec.iterations << std::setprecision(12)
               << std::setw(20) << rec.objective << std::setprecision(2) << std::scientific << std::setw(11)
               << rec.gap << std::defaultfloat << std::setw(10) << rec.precision << rec.status;
        }
        out << line.str() << '\n';
      }
    }
    if (failures) err << failures << " of " << cmd.params.size() << " instances failed\n";
    return failures ? int(kSolverFailure) : int(kOk);
  });
}

}  // namespace qkdrate::cli
