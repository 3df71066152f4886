#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dunkl {

/// Invalid scalar parameter (non-positive epsilon, theta out of range, ...).
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Vector or matrix sizes that do not match the ambient dimension.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A point that must lie strictly inside the Weyl chamber does not.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Time-grid nesting or lag violations.
class GridError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The truncated fixed-point map is not a contraction for the requested step.
class ContractionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Not enough usable points for a log-log regression.
class FitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The implicit-step Newton solver did not reach tolerance.  Carries the best
/// iterate found so callers can inspect it; it is never returned as a state.
class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, Eigen::VectorXd best, int iterations,
                double residual)
        : std::runtime_error(what),
          best_(std::move(best)),
          iterations_(iterations),
          residual_(residual) {}

    const Eigen::VectorXd& best_iterate() const { return best_; }
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

  private:
    Eigen::VectorXd best_;
    int iterations_;
    double residual_;
};

/// Solver failure while advancing a path.
class PathError : public std::runtime_error {
  public:
    PathError(const std::string& what, std::uint64_t path_id, int step)
        : std::runtime_error(what), path_id_(path_id), step_(step) {}

    std::uint64_t path_id() const { return path_id_; }
    int step() const { return step_; }

  private:
    std::uint64_t path_id_;
    int step_;
};

/// Output could not be written or input could not be read.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Experiment configuration rejected; lists every problem found.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> problems);

    const std::vector<std::string>& problems() const { return problems_; }

  private:
    std::vector<std::string> problems_;
};

}  // namespace dunkl
