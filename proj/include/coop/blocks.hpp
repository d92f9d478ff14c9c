#pragma once

#include <cstdint>
#include <vector>

#include "coop/params.hpp"

namespace coop {

// Neighborhood boxes B_z = z + {-1, 0, 1}^d around the origin block.
std::size_t card_B_minus(int dim);  // 2d 3^(d-1)
std::size_t card_B_plus(int dim);   // 3^(d-1) (2d + 3)

struct Estimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t hits = 0;
  std::size_t replicas = 0;
};

Estimate make_estimate(std::size_t hits, std::size_t replicas);

// Every site of B_- has a death mark in [T, 2T].
double prob_A1(double T, int dim);
Estimate estimate_A1(double T, int dim, std::size_t replicas, std::uint64_t seed, unsigned jobs = 1);

// Deaths in B_+ and defector-usable arrows (arrows and d-arrows) pointing
// into B_+, at total rate r = |B_+| (beta + beta_d + 1). A2 holds when the
// gaps between consecutive times in [0, 2T), starting from T_0 = 0, all exceed
// 2 delta.
double rate_A2(const Params& p);
// 1 - exp(-aT) - 4rT (1 - exp(-2 delta r)) with a = 2r (2 ln 2 - 1), from
// P(Poisson(2rT) >= 4rT) <= exp(-2rT (2 ln 2 - 1)).
double bound_A2(double T, double delta, const Params& p);
Estimate estimate_A2(const Params& p, double T, double delta, std::size_t replicas,
                     std::uint64_t seed, unsigned jobs = 1);

// Lower bound (1 - exp(-delta R))^(2 |B_+| T / delta), R = (beta + beta_c/2d)/2d.
double prob_A3_bound(double beta, double beta_c, double T, double delta, int dim);
// Each site of B_+ receives a cooperator-usable arrow (arrow or dot-arrow)
// from a site of B_0 in every interval [n delta, (n+1) delta), n < ceil(2T/delta).
Estimate estimate_A3(const Params& p, double T, double delta, std::size_t replicas,
                     std::uint64_t seed, unsigned jobs = 1);

struct JointBlockEstimate {
  Estimate a1, a2, a3, all;
};
// A1, A2, A3 from one sample of the marks around the block.
JointBlockEstimate estimate_A123(const Params& p, double T, double delta, std::size_t replicas,
                                 std::uint64_t seed, unsigned jobs = 1);

// No c+ arrow points into (6L+1)^d sites over a time span 2L^2, with c+ rate
// rho / 4d^2 per triple.
double c_plus_absence_prob(int L, int dim, double rho);
Estimate estimate_c_plus_absence(int L, int dim, double rho, std::size_t replicas,
                                 std::uint64_t seed, unsigned jobs = 1);

struct BlockSpreadSpec {
  int L = 4;
  // Sub-box side; 0 means max(1, round(L^0.1)).
  int subbox_side = 0;
  // Cooperator density outside B_0 at time 0 (0: empty exterior).
  double exterior_rho_c = 0.0;
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

int default_subbox_side(int L);

struct BlockSpreadResult {
  Estimate spread;
  int subbox_side = 0;
  std::size_t subboxes = 0;  // |I_z|
  int torus_side = 0;
};

// Equal-rate process on a torus of side 6L + 1 started from a minimal
// configuration in C+(0, 0): one defector placed uniformly in each sub-box
// D_w of B_0 = [-L, L]^d, no cooperators in B_0. Success means C+(+-e_i, 1)
// and C-(+-e_i, 1) for every i, with T = L^2. Throws DomainError for
// beta_d = 0 and FlavorMismatch if beta_c is not the equal-rate value.
BlockSpreadResult block_spread_estimate(const Params& p, const BlockSpreadSpec& spec);

}  // namespace coop
