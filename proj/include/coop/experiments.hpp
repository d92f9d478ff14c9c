#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coop/lattice_process.hpp"
#include "coop/params.hpp"

namespace coop {

struct SweepSpec {
  double beta = 4.0;
  std::vector<double> beta_c_grid;
  std::vector<double> beta_d_grid;
  int dim = 1;
  int side = 100;
  double horizon = 200.0;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  double rho_c = 0.5;
  double rho_d = 0.5;
  double density_floor = 0.0;
  unsigned jobs = 1;

  // Grids nonempty and strictly increasing, replicas >= 1.
  void validate() const;
};

struct SweepRow {
  double beta_c = 0.0;
  double beta_d = 0.0;
  std::size_t replicas = 0;
  std::size_t c_wins = 0, d_wins = 0, coexist = 0, both_extinct = 0;
  double freq_c_wins = 0.0, freq_d_wins = 0.0, freq_coexist = 0.0, freq_both_extinct = 0.0;
  std::string mf_regime;  // mean-field label, "n/a" when beta <= 1
};

// Rows in grid order (beta_d outer, beta_c inner). Grid point k uses master
// seed derive_seed(spec.seed, k).
std::vector<SweepRow> sweep_phase_diagram(const SweepSpec& spec);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Mean-field label for any beta_c >= 0; beta_c = 0 uses phi = 0.
std::string mean_field_label(const Params& p);

struct MonotonicitySpec {
  Params base;
  double delta_c = 0.0;
  double delta_d = 0.0;
  int side = 100;
  double horizon = 50.0;
  double sample_interval = 1.0;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  double rho_c = 0.5;
  double rho_d = 0.5;
  unsigned jobs = 1;
};

struct MonotonicityReport {
  Params favored;
  std::size_t replicas = 0;
  std::size_t violations = 0;  // replicas that raised InclusionViolation
  std::size_t checks = 0;      // pair checks, marks plus sampled sweeps
  std::size_t identical = 0;   // replicas whose two final configurations agree
  Frequency c_alive_favored, c_alive_base, d_alive_favored, d_alive_base;
  double sigma_c = 0.0, sigma_d = 0.0;
  bool c_ordered = false;  // c_alive(favored) >= c_alive(base) - 3 sigma
  bool d_ordered = false;  // d_alive(favored) <= d_alive(base) + 3 sigma
};

// Favored parameters: beta_c + delta_c and beta_d - min(delta_d, beta_d).
// Both processes start from one product configuration and run off one
// coupled log.
MonotonicityReport monotonicity_check(const MonotonicitySpec& spec);

struct BracketSpec {
  double beta = 4.0;
  double beta_d = 1.0;
  int dim = 1;
  int side = 100;
  double horizon = 200.0;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  double rho_c = 0.5;
  double rho_d = 0.5;
  double tau = 0.9;
  double lo = 0.0;   // initial search interval for beta_c
  double hi = 50.0;
  double tolerance = 0.25;
  std::size_t budget = 40;  // survival estimates allowed
  unsigned jobs = 1;
};

struct BracketPoint {
  double beta_c = 0.0;
  double freq_c_wins = 0.0;
  double freq_d_wins = 0.0;
};

// Estimate only: side and horizon are finite, the critical values are not.
struct CriticalBracket {
  double beta_c_low = 0.0;   // last beta_c seen with freq_d_wins > tau
  double beta_c_high = 0.0;  // first beta_c seen with freq_c_wins > tau
  bool defector_edge_found = false;  // freq_d_wins > tau held at spec.lo
  bool cooperator_edge_found = false;  // freq_c_wins > tau held at spec.hi
  double equal_rate_value = 0.0;  // 2d beta_d / (2d - 1)
  bool low_exceeds_equal_rate = false;
  std::vector<BracketPoint> evaluations;  // in evaluation order
  std::string notes;
};

class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(const std::string& what, CriticalBracket partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const CriticalBracket& partial() const { return partial_; }

 private:
  CriticalBracket partial_;
};

using WinEvaluator = std::function<BracketPoint(double beta_c)>;

// Two bisections inside [lo, hi]: first for the edge of {freq_d_wins > tau},
// then for the edge of {freq_c_wins > tau} above it.
CriticalBracket bracket_search(const WinEvaluator& eval, double lo, double hi, double tau,
                               double tolerance, std::size_t budget);

CriticalBracket bracket_critical(const BracketSpec& spec);

std::string bracket_json(const CriticalBracket& b);

}  // namespace coop
