#pragma once

#include <stdexcept>
#include <string>

namespace mixvar {

// Base class for every error raised by the library. The CLI maps
// ConfigError to exit code 2 and NumericalError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what)
      : Error("dimension mismatch: " + what) {}
};

class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(const std::string& what)
      : NumericalError("matrix not positive definite: " + what) {}
};

class NonPositiveLog : public Error {
 public:
  explicit NonPositiveLog(const std::string& what)
      : Error("log of non-positive value: " + what) {}
};

class DegenerateColumn : public Error {
 public:
  explicit DegenerateColumn(const std::string& what)
      : Error("degenerate column: " + what) {}
};

class NonBinaryVariable : public Error {
 public:
  explicit NonBinaryVariable(const std::string& what)
      : Error("variable is not binary: " + what) {}
};

class RankDeficientRestriction : public Error {
 public:
  explicit RankDeficientRestriction(const std::string& what)
      : Error("rank-deficient restriction: " + what) {}
};

class InfeasibleRestriction : public Error {
 public:
  explicit InfeasibleRestriction(const std::string& what)
      : Error("infeasible restriction: " + what) {}
};

class EmptyFeasibleSet : public Error {
 public:
  explicit EmptyFeasibleSet(const std::string& what)
      : Error("empty feasible set: " + what) {}
};

class EmptySet : public Error {
 public:
  explicit EmptySet(const std::string& what) : Error("empty set: " + what) {}
};

class SingleClass : public Error {
 public:
  explicit SingleClass(const std::string& what)
      : Error("only one outcome class present: " + what) {}
};

class TooFewDraws : public Error {
 public:
  explicit TooFewDraws(const std::string& what)
      : Error("too few draws: " + what) {}
};

class MissingBenchmark : public Error {
 public:
  explicit MissingBenchmark(const std::string& what)
      : Error("missing benchmark: " + what) {}
};

class NonStationaryAfterRescale : public NumericalError {
 public:
  explicit NonStationaryAfterRescale(const std::string& what)
      : NumericalError("non-stationary after rescale: " + what) {}
};

}  // namespace mixvar
