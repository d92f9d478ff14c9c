#pragma once

#include <stdexcept>
#include <string>

namespace coop {

// Model rates for the cooperator-defector contact process.
struct Params {
  double beta = 2.0;    // base birth rate
  double beta_c = 0.0;  // cooperation benefit
  double beta_d = 0.0;  // defector bonus
  int dim = 1;

  // Throws std::invalid_argument on negative rates or dim < 1.
  void validate() const;
};

// beta_c at which the equal-rate construction applies: 2 d beta_d / (2d - 1).
double equal_rate_beta_c(double beta_d, int dim);

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class BoundaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SimplexEscape : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OccupiedSite : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Absorbed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FlavorMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CouplingOrder : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InclusionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InsufficientHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfBounds : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace coop
