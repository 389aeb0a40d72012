#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gtsim {

// Agent-major storage: row i is agent i's local copy.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Raised when a run's structural identity (tracker mean, block means) drifts
/// beyond tolerance. Carries the iteration at which the audit failed.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(long iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// Configuration problems. `field` names the offending key (dotted path).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gtsim
