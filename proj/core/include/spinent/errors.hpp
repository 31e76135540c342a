#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spinent {

/// Input violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Lookup of an element that is not part of a container (e.g. a spin
/// configuration outside a sector).
class NotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A request would exceed a configured size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method failed to converge. Carries the best residuals
/// reached and the number of operator applications spent.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::vector<double> residuals,
               int iterations)
      : std::runtime_error(what),
        residuals_(std::move(residuals)),
        iterations_(iterations) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }
  int iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> residuals_;
  int iterations_;
};

}  // namespace spinent
