#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "coop/params.hpp"
#include "coop/torus.hpp"

// Exact transient law of the process on a ring of n sites (d = 1), from a
// generator written directly from the transition rates. States are base-3
// words with digit i the state of site i (0 empty, 1 cooperator, 2 defector).
namespace ring {

inline int digit(int s, int i) {
  for (; i > 0; --i) s /= 3;
  return s % 3;
}

inline int states(int n) { return static_cast<int>(std::lround(std::pow(3, n))); }

inline Eigen::MatrixXd generator(int n, const coop::Params& p) {
  const int S = states(n);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(S, S);
  std::vector<int> pow3(n);
  for (int i = 0, v = 1; i < n; ++i, v *= 3) pow3[i] = v;
  for (int s = 0; s < S; ++s) {
    auto at = [&](int i) { return digit(s, ((i % n) + n) % n); };
    for (int x = 0; x < n; ++x) {
      if (at(x) != 0) {
        Q(s, s - at(x) * pow3[x]) += 1.0;
        continue;
      }
      double rc = 0, rd = 0;
      for (int y : {x + 1, x - 1}) {
        if (at(y) == 1) {
          int nc = (at(y + 1) == 1) + (at(y - 1) == 1);
          rc += p.beta / 2 + p.beta_c / 4 * nc;
        }
        if (at(y) == 2) rd += (p.beta + p.beta_d) / 2;
      }
      Q(s, s + pow3[x]) += rc;
      Q(s, s + 2 * pow3[x]) += rd;
    }
  }
  for (int s = 0; s < S; ++s) Q(s, s) = -Q.row(s).sum();
  return Q;
}

// Row vector of state probabilities at time t from state s0.
inline Eigen::VectorXd transient(int n, const coop::Params& p, int s0, double t) {
  const Eigen::MatrixXd P = (generator(n, p) * t).exp();
  return P.row(s0).transpose();
}

inline int encode(const coop::Configuration& c) {
  int s = 0;
  for (std::size_t i = c.size(); i-- > 0;) s = 3 * s + static_cast<int>(c[i]);
  return s;
}

}  // namespace ring
