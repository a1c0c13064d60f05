#pragma once

#include <stdexcept>
#include <string>

namespace procknow {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (corpus line, vector line, problem JSON, ...).
class ParseError : public Error {
public:
  using Error::Error;
};

// A sampling precondition failed or rejection sampling could not terminate.
class SamplingError : public Error {
public:
  using Error::Error;
};

// Training diverged or was configured inconsistently.
class TrainError : public Error {
public:
  using Error::Error;
};

// Checkpoint file is damaged or does not match the requested model shape.
class CheckpointError : public Error {
public:
  using Error::Error;
};

// Ordering problem is infeasible or outside the solver's supported range.
class SolveError : public Error {
public:
  using Error::Error;
};

}  // namespace procknow
