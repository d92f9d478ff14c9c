#include "coop/params.hpp"

namespace coop {

void Params::validate() const {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(beta_c >= 0.0)) throw std::invalid_argument("beta_c must be nonnegative");
  if (!(beta_d >= 0.0)) throw std::invalid_argument("beta_d must be nonnegative");
  if (dim < 1) throw std::invalid_argument("dim must be at least 1");
}

double equal_rate_beta_c(double beta_d, int dim) {
  const double two_d = 2.0 * dim;
  return two_d * beta_d / (two_d - 1.0);
}

}  // namespace coop
