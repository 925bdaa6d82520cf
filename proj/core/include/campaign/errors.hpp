#pragma once

#include <stdexcept>
#include <string>

namespace campaign {

/// Malformed or contract-violating input. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Well-formed input that cannot be carried out (e.g. a task larger than the
/// whole cluster). The CLI maps this to exit code 3.
class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A task whose demand exceeds the capacity of every node combination.
class UnschedulableError : public SemanticError {
 public:
  explicit UnschedulableError(std::string task_id)
      : SemanticError("unschedulable task '" + task_id +
                      "': demand exceeds cluster capacity"),
        task_id_(std::move(task_id)) {}

  const std::string& task_id() const noexcept { return task_id_; }

 private:
  std::string task_id_;
};

/// Broken bookkeeping, e.g. releasing a placement twice.
class LedgerFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Estimator preconditions that are statistical rather than syntactic
/// (single-replica ensembles, incomplete alchemical paths, too few frames).
class EstimationError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace campaign
