#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coop/params.hpp"
#include "coop/rng.hpp"
#include "coop/torus.hpp"

namespace coop {

// Rate at which empty site x turns cooperator. Throws OccupiedSite.
double birth_rate_c(const Torus& torus, const Configuration& config, Site x, const Params& p);
// Rate at which empty site x turns defector. Throws OccupiedSite.
double birth_rate_d(const Torus& torus, const Configuration& config, Site x, const Params& p);

struct SiteRates {
  double c = 0.0;
  double d = 0.0;
  double death = 0.0;

  double total() const { return (c + d) + death; }
};

// Per-site transition rates in a binary sum tree. Every internal node is
// recomputed from its children on update, so the cached totals never drift.
class RateTable {
 public:
  RateTable() = default;
  explicit RateTable(std::size_t sites);

  void set(Site x, const SiteRates& r);
  const SiteRates& site(Site x) const { return rates_[x]; }
  std::size_t size() const { return rates_.size(); }

  double total() const { return tree_[1].total; }
  double total_c() const { return tree_[1].c; }
  double total_d() const { return tree_[1].d; }
  double total_death() const { return tree_[1].death; }

  // Finds the site owning u in [0, total()) by cumulative site totals; on
  // return u holds the offset inside that site's bucket.
  Site find(double& u) const;

 private:
  struct Node {
    double c = 0.0;
    double d = 0.0;
    double death = 0.0;
    double total = 0.0;
  };
  std::size_t leaves_ = 0;
  std::vector<Node> tree_;
  std::vector<SiteRates> rates_;
};

enum class Transition : std::uint8_t { birth_c, birth_d, death };

struct Event {
  Transition kind;
  Site site;
  Site parent;  // equals site for deaths
  double time;
};

// Exact event-driven simulation of the generator on a finite torus.
class LatticeProcess {
 public:
  LatticeProcess(Torus torus, Configuration initial, const Params& p);

  const Torus& torus() const { return torus_; }
  const Configuration& configuration() const { return config_; }
  const Params& params() const { return params_; }
  const RateTable& rates() const { return rates_; }
  double time() const { return time_; }
  Counts counts() const { return counts_; }
  bool absorbed() const { return !(rates_.total() > 0.0); }

  // One transition. Throws Absorbed when the total rate is zero.
  Event step(Rng& rng);

  // Applies transitions up to t_end, then sets time() = t_end. A holding
  // time that overshoots t_end is kept for the next call, so where the
  // caller samples never changes the trajectory.
  void advance_to(double t_end, Rng& rng, const std::function<void(const Event&)>& on_event = {});

  // Rates recomputed from the configuration alone.
  SiteRates compute_site_rates(Site x) const;
  RateTable rebuilt_rates() const;

 private:
  void set_state(Site x, SiteState s);
  void refresh_around(Site x);

  Torus torus_;
  Configuration config_;
  Params params_;
  std::vector<std::uint16_t> coop_neighbors_;
  std::vector<std::uint16_t> defector_neighbors_;
  RateTable rates_;
  Counts counts_;
  double time_ = 0.0;
  double next_event_time_ = 0.0;
  bool has_pending_ = false;  // holding time drawn but not yet used
  double arrow_rate_ = 0.0;       // beta / 2d
  double defector_rate_ = 0.0;    // (beta + beta_d) / 2d
  double cooperation_rate_ = 0.0; // beta_c / 4d^2
};

struct CountSample {
  double t;
  Counts counts;
};

using SampleObserver = std::function<void(const CountSample&, const Configuration&)>;

// Samples at t = 0, interval, 2 interval, ... and at t_end. A nonpositive
// interval samples only t = 0 and t_end.
std::vector<CountSample> run(const Torus& torus, Configuration initial, const Params& p,
                             double t_end, double sample_interval, Rng& rng,
                             const SampleObserver& observer = {});

std::string time_series_csv(const std::vector<CountSample>& samples);

enum class Outcome { cooperators_win, defectors_win, coexist, both_extinct };
std::string to_string(Outcome o);

struct SurvivalSpec {
  Params params;
  double rho_c = 0.5;
  double rho_d = 0.5;
  int side = 100;
  double horizon = 200.0;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  // A type counts as extinct for the win rule when count <= floor * sites.
  double density_floor = 0.0;
  unsigned jobs = 1;
};

struct ReplicaOutcome {
  std::size_t index = 0;
  std::uint64_t stream_seed = 0;
  Counts final_counts;
  Outcome outcome = Outcome::both_extinct;
  bool c_alive = false;
  bool d_alive = false;
};

struct Frequency {
  std::size_t hits = 0;
  double value = 0.0;
  double half_width = 0.0;  // Wald 95%
};

Frequency make_frequency(std::size_t hits, std::size_t n);

struct SurvivalEstimate {
  std::size_t replicas = 0;
  Frequency c_alive, d_alive;
  Frequency c_wins, d_wins, coexist, both_extinct;
  Frequency c_outdense;  // final cooperator count exceeds defector count
  std::vector<ReplicaOutcome> outcomes;
};

SurvivalEstimate survival_estimate(const SurvivalSpec& spec);

// Fraction of single-type runs (rate beta, all sites occupied at t = 0)
// still alive at the horizon. Used to check beta lies above the critical
// contact-process value at the chosen scale.
Frequency single_type_survival(double beta, int dim, int side, double horizon,
                               std::size_t replicas, std::uint64_t seed, unsigned jobs = 1);

}  // namespace coop
