#pragma once

// Versioned text format for conic problems.
//
//   qkdrate-problem 1
//   field real|complex
//   cones <count>
//   nonneg <n> | second_order <n> | rel_entropy <side> | logdet <side>
//   qkd <side>
//     ghat <count> <rows> <cols>   then count operators, column-major
//     zhat <count> <rows> <cols>
//   c <n>        then n numbers
//   A <m> <n>    then m*n numbers, row-major
//   b <m>        then m numbers
//   meta <key> <value>             zero or more
//   end
//
// Complex Kraus entries are written as "re im" pairs. '#' starts a comment.
// A map with count 0 is absent; both absent is the pure logdet cone, which
// the writer spells "logdet".

#include <map>
#include <stdexcept>
#include <string>

#include "qkdrate/ipm_solver.hpp"

namespace qkdrate::cli {

inline constexpr int kProblemFileVersion = 1;

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& what);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ProblemHeader {
  int version = 0;
  FieldMode field = FieldMode::real;
};

/// Reads only the version and field lines.
ProblemHeader read_header(const std::string& text);

template <typename T>
struct ProblemFile {
  ConicProblem<T> problem;
  std::map<std::string, std::string> meta;
};

/// Throws ParseError with the position of the offending token; a field line
/// that does not match T is an error.
template <typename T>
ProblemFile<T> parse_problem(const std::string& text);

/// Canonical form: parse_problem(emit_problem(f)) reproduces f exactly and
/// emit_problem is a fixed point of the round trip.
template <typename T>
std::string emit_problem(const ProblemFile<T>& file);

std::string read_file(const std::string& path);

}  // namespace qkdrate::cli
