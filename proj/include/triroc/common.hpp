#pragma once

#include <stdexcept>
#include <string>

namespace triroc {

// Estimation / quadrature / optimization failures: the computation was set up
// correctly but could not produce a trustworthy number.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unusable input data (CSV parsing, class labels, sample sizes).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace triroc
