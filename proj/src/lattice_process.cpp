#include "coop/lattice_process.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "coop/io.hpp"
#include "coop/parallel.hpp"

namespace coop {

namespace {

void require_empty(const Configuration& config, Site x) {
  if (config.at(x) != SiteState::empty) throw OccupiedSite("birth rate queried at an occupied site");
}

}  // namespace

double birth_rate_c(const Torus& torus, const Configuration& config, Site x, const Params& p) {
  require_empty(config, x);
  const double two_d = 2.0 * torus.dim();
  std::size_t parents = 0;
  std::size_t second = 0;  // cooperators adjacent to cooperator parents, with multiplicity
  for (Site y : torus.neighbors(x)) {
    if (config[y] != SiteState::cooperator) continue;
    ++parents;
    for (Site z : torus.neighbors(y))
      if (config[z] == SiteState::cooperator) ++second;
  }
  return static_cast<double>(parents) * (p.beta / two_d) +
         (p.beta_c / (two_d * two_d)) * static_cast<double>(second);
}

double birth_rate_d(const Torus& torus, const Configuration& config, Site x, const Params& p) {
  require_empty(config, x);
  std::size_t parents = 0;
  for (Site y : torus.neighbors(x))
    if (config[y] == SiteState::defector) ++parents;
  return static_cast<double>(parents) * ((p.beta + p.beta_d) / (2.0 * torus.dim()));
}

RateTable::RateTable(std::size_t sites) : rates_(sites) {
  leaves_ = 1;
  while (leaves_ < sites) leaves_ *= 2;
  tree_.assign(2 * leaves_, Node{});
}

void RateTable::set(Site x, const SiteRates& r) {
  rates_[x] = r;
  std::size_t i = leaves_ + x;
  tree_[i] = {r.c, r.d, r.death, r.total()};
  for (i /= 2; i >= 1; i /= 2) {
    const Node& a = tree_[2 * i];
    const Node& b = tree_[2 * i + 1];
    tree_[i] = {a.c + b.c, a.d + b.d, a.death + b.death, a.total + b.total};
  }
}

Site RateTable::find(double& u) const {
  std::size_t i = 1;
  while (i < leaves_) {
    const Node& left = tree_[2 * i];
    const Node& right = tree_[2 * i + 1];
    if ((u < left.total && left.total > 0.0) || !(right.total > 0.0)) {
      i = 2 * i;
    } else {
      u -= left.total;
      i = 2 * i + 1;
    }
  }
  const Site x = static_cast<Site>(i - leaves_);
  const double own = tree_[i].total;
  if (u >= own) u = std::nextafter(own, 0.0);
  if (u < 0.0) u = 0.0;
  return x;
}

LatticeProcess::LatticeProcess(Torus torus, Configuration initial, const Params& p)
    : torus_(std::move(torus)),
      config_(std::move(initial)),
      params_(p),
      coop_neighbors_(torus_.size(), 0),
      defector_neighbors_(torus_.size(), 0),
      rates_(torus_.size()) {
  params_.validate();
  if (config_.size() != torus_.size())
    throw std::invalid_argument("configuration size does not match the torus");
  const double two_d = 2.0 * torus_.dim();
  arrow_rate_ = params_.beta / two_d;
  defector_rate_ = (params_.beta + params_.beta_d) / two_d;
  cooperation_rate_ = params_.beta_c / (two_d * two_d);
  counts_ = count_states(config_);
  for (Site x = 0; x < torus_.size(); ++x) {
    for (Site y : torus_.neighbors(x)) {
      if (config_[y] == SiteState::cooperator) ++coop_neighbors_[x];
      if (config_[y] == SiteState::defector) ++defector_neighbors_[x];
    }
  }
  for (Site x = 0; x < torus_.size(); ++x) rates_.set(x, compute_site_rates(x));
}

SiteRates LatticeProcess::compute_site_rates(Site x) const {
  SiteRates r;
  if (config_[x] != SiteState::empty) {
    r.death = 1.0;
    return r;
  }
  std::size_t second = 0;
  for (Site y : torus_.neighbors(x))
    if (config_[y] == SiteState::cooperator) second += coop_neighbors_[y];
  r.c = static_cast<double>(coop_neighbors_[x]) * arrow_rate_ +
        cooperation_rate_ * static_cast<double>(second);
  r.d = static_cast<double>(defector_neighbors_[x]) * defector_rate_;
  return r;
}

RateTable LatticeProcess::rebuilt_rates() const {
  LatticeProcess fresh(torus_, config_, params_);
  return fresh.rates_;
}

void LatticeProcess::set_state(Site x, SiteState s) {
  const SiteState old = config_[x];
  if (old == s) return;
  auto bump = [&](SiteState state, int delta) {
    switch (state) {
      case SiteState::cooperator: counts_.c += delta; break;
      case SiteState::defector: counts_.d += delta; break;
      case SiteState::empty: counts_.e += delta; break;
    }
  };
  bump(old, -1);
  bump(s, +1);
  for (Site y : torus_.neighbors(x)) {
    if (old == SiteState::cooperator) --coop_neighbors_[y];
    if (old == SiteState::defector) --defector_neighbors_[y];
    if (s == SiteState::cooperator) ++coop_neighbors_[y];
    if (s == SiteState::defector) ++defector_neighbors_[y];
  }
  config_[x] = s;
  refresh_around(x);
}

// Cooperator birth rates read occupancy up to graph distance 2.
void LatticeProcess::refresh_around(Site x) {
  rates_.set(x, compute_site_rates(x));
  for (Site y : torus_.neighbors(x)) {
    rates_.set(y, compute_site_rates(y));
    for (Site z : torus_.neighbors(y))
      if (z != x) rates_.set(z, compute_site_rates(z));
  }
}

Event LatticeProcess::step(Rng& rng) {
  if (absorbed()) throw Absorbed("total rate is zero (all sites empty)");
  if (!has_pending_) {
    next_event_time_ = time_ + exponential(rng, rates_.total());
  }
  has_pending_ = false;
  time_ = next_event_time_;

  double u = uniform01(rng) * rates_.total();
  const Site x = rates_.find(u);
  if (config_[x] != SiteState::empty) {
    set_state(x, SiteState::empty);
    return {Transition::death, x, x, time_};
  }
  // Parent chosen by scanning neighbors in direction order. Contributions
  // depend on the parent's role only through the rates, which keeps the draw
  // symmetric under relabeling when beta_c = beta_d = 0.
  Site parent = x;
  double cumulative = 0.0;
  bool chosen = false;
  for (Site y : torus_.neighbors(x)) {
    double w = 0.0;
    if (config_[y] == SiteState::cooperator)
      w = arrow_rate_ + cooperation_rate_ * static_cast<double>(coop_neighbors_[y]);
    else if (config_[y] == SiteState::defector)
      w = defector_rate_;
    if (w <= 0.0) continue;
    parent = y;
    cumulative += w;
    if (u < cumulative) {
      chosen = true;
      break;
    }
  }
  (void)chosen;  // rounding can leave u past the last bucket; the last parent keeps it
  if (parent == x && config_[parent] == SiteState::empty)
    throw std::logic_error("rate table selected an empty site with no occupied neighbor");
  const SiteState born = config_[parent];
  set_state(x, born);
  return {born == SiteState::cooperator ? Transition::birth_c : Transition::birth_d, x, parent,
          time_};
}

void LatticeProcess::advance_to(double t_end, Rng& rng,
                                const std::function<void(const Event&)>& on_event) {
  while (true) {
    if (absorbed()) {
      has_pending_ = false;
      if (t_end > time_) time_ = t_end;
      return;
    }
    if (!has_pending_) {
      next_event_time_ = time_ + exponential(rng, rates_.total());
      has_pending_ = true;
    }
    if (next_event_time_ > t_end) {
      if (t_end > time_) time_ = t_end;
      return;
    }
    const Event ev = step(rng);
    if (on_event) on_event(ev);
  }
}

std::vector<CountSample> run(const Torus& torus, Configuration initial, const Params& p,
                             double t_end, double sample_interval, Rng& rng,
                             const SampleObserver& observer) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be nonnegative");
  LatticeProcess proc(torus, std::move(initial), p);
  std::vector<CountSample> samples;
  auto record = [&] {
    samples.push_back({proc.time(), proc.counts()});
    if (observer) observer(samples.back(), proc.configuration());
  };
  record();
  if (sample_interval > 0.0) {
    for (std::size_t k = 1;; ++k) {
      const double t = static_cast<double>(k) * sample_interval;
      if (t > t_end) break;
      proc.advance_to(t, rng);
      record();
    }
  }
  if (samples.back().t < t_end) {
    proc.advance_to(t_end, rng);
    record();
  }
  return samples;
}

std::string time_series_csv(const std::vector<CountSample>& samples) {
  std::ostringstream out;
  out << "t,n_c,n_d,n_e\n";
  for (const auto& s : samples)
    out << fmt17(s.t) << ',' << s.counts.c << ',' << s.counts.d << ',' << s.counts.e << '\n';
  return out.str();
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::cooperators_win: return "cooperators_win";
    case Outcome::defectors_win: return "defectors_win";
    case Outcome::coexist: return "coexist";
    case Outcome::both_extinct: return "both_extinct";
  }
  return "?";
}

Frequency make_frequency(std::size_t hits, std::size_t n) {
  Frequency f;
  f.hits = hits;
  if (n == 0) return f;
  f.value = static_cast<double>(hits) / static_cast<double>(n);
  f.half_width = 1.96 * std::sqrt(f.value * (1.0 - f.value) / static_cast<double>(n));
  return f;
}

SurvivalEstimate survival_estimate(const SurvivalSpec& spec) {
  spec.params.validate();
  if (spec.replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  if (spec.rho_c < 0.0 || spec.rho_d < 0.0 || spec.rho_c + spec.rho_d > 1.0)
    throw std::invalid_argument("initial densities must be nonnegative with sum <= 1");
  const Torus torus(spec.params.dim, spec.side);
  const double floor_count = spec.density_floor * static_cast<double>(torus.size());

  SurvivalEstimate est;
  est.replicas = spec.replicas;
  est.outcomes.resize(spec.replicas);
  parallel_for(spec.replicas, spec.jobs, [&](std::size_t i) {
    Rng rng = make_stream(spec.seed, i);
    LatticeProcess proc(torus, sample_product(torus, spec.rho_c, spec.rho_d, rng), spec.params);
    proc.advance_to(spec.horizon, rng);
    ReplicaOutcome& out = est.outcomes[i];
    out.index = i;
    out.stream_seed = derive_seed(spec.seed, i);
    out.final_counts = proc.counts();
    out.c_alive = out.final_counts.c > 0;
    out.d_alive = out.final_counts.d > 0;
    const bool c_present = static_cast<double>(out.final_counts.c) > floor_count;
    const bool d_present = static_cast<double>(out.final_counts.d) > floor_count;
    if (c_present && d_present)
      out.outcome = Outcome::coexist;
    else if (c_present)
      out.outcome = Outcome::cooperators_win;
    else if (d_present)
      out.outcome = Outcome::defectors_win;
    else
      out.outcome = Outcome::both_extinct;
  });

  std::size_t c_alive = 0, d_alive = 0, cw = 0, dw = 0, co = 0, none = 0, outdense = 0;
  for (const auto& o : est.outcomes) {
    c_alive += o.c_alive;
    d_alive += o.d_alive;
    outdense += o.final_counts.c > o.final_counts.d;
    switch (o.outcome) {
      case Outcome::cooperators_win: ++cw; break;
      case Outcome::defectors_win: ++dw; break;
      case Outcome::coexist: ++co; break;
      case Outcome::both_extinct: ++none; break;
    }
  }
  const std::size_t n = spec.replicas;
  est.c_alive = make_frequency(c_alive, n);
  est.d_alive = make_frequency(d_alive, n);
  est.c_wins = make_frequency(cw, n);
  est.d_wins = make_frequency(dw, n);
  est.coexist = make_frequency(co, n);
  est.both_extinct = make_frequency(none, n);
  est.c_outdense = make_frequency(outdense, n);
  return est;
}

Frequency single_type_survival(double beta, int dim, int side, double horizon,
                               std::size_t replicas, std::uint64_t seed, unsigned jobs) {
  const Torus torus(dim, side);
  const Params p{beta, 0.0, 0.0, dim};
  std::vector<char> alive(replicas, 0);
  parallel_for(replicas, jobs, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    LatticeProcess proc(torus, uniform_configuration(torus, SiteState::defector), p);
    proc.advance_to(horizon, rng);
    alive[i] = proc.counts().d > 0;
  });
  std::size_t hits = 0;
  for (char a : alive) hits += a;
  return make_frequency(hits, replicas);
}

}  // namespace coop
