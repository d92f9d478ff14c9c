#include "coop/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

#include "coop/graphical.hpp"
#include "coop/io.hpp"
#include "coop/mean_field.hpp"
#include "coop/parallel.hpp"

namespace coop {

namespace {

void check_grid(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
}

}  // namespace

void SweepSpec::validate() const {
  check_grid(beta_c_grid, "beta_c");
  check_grid(beta_d_grid, "beta_d");
  if (replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  if (side < 1 || dim < 1) throw std::invalid_argument("bad torus geometry");
}

std::string mean_field_label(const Params& p) {
  if (!(p.beta > 1.0)) return "n/a";
  if (p.beta_c == 0.0) {
    if (p.beta_d > mean_field::kRegimeTolerance) return to_string(mean_field::Regime::defectors_win);
    return to_string(mean_field::Regime::boundary);
  }
  return to_string(mean_field::classify_regime(p));
}

std::vector<SweepRow> sweep_phase_diagram(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows;
  std::size_t k = 0;
  for (double bd : spec.beta_d_grid) {
    for (double bc : spec.beta_c_grid) {
      SurvivalSpec s;
      s.params = {spec.beta, bc, bd, spec.dim};
      s.rho_c = spec.rho_c;
      s.rho_d = spec.rho_d;
      s.side = spec.side;
      s.horizon = spec.horizon;
      s.replicas = spec.replicas;
      s.seed = derive_seed(spec.seed, k++);
      s.density_floor = spec.density_floor;
      s.jobs = spec.jobs;
      const SurvivalEstimate est = survival_estimate(s);

      SweepRow row;
      row.beta_c = bc;
      row.beta_d = bd;
      row.replicas = spec.replicas;
      row.c_wins = est.c_wins.hits;
      row.d_wins = est.d_wins.hits;
      row.coexist = est.coexist.hits;
      row.both_extinct = est.both_extinct.hits;
      const double n = static_cast<double>(spec.replicas);
      row.freq_c_wins = static_cast<double>(row.c_wins) / n;
      row.freq_d_wins = static_cast<double>(row.d_wins) / n;
      row.freq_coexist = static_cast<double>(row.coexist) / n;
      row.freq_both_extinct = static_cast<double>(row.both_extinct) / n;
      row.mf_regime = mean_field_label(s.params);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "beta_c,beta_d,replicas,c_wins,d_wins,coexist,both_extinct,freq_c_wins,freq_d_wins,"
         "freq_coexist,freq_both_extinct,mf_regime\n";
  for (const auto& r : rows)
    out << fmt17(r.beta_c) << ',' << fmt17(r.beta_d) << ',' << r.replicas << ',' << r.c_wins << ','
        << r.d_wins << ',' << r.coexist << ',' << r.both_extinct << ',' << fmt17(r.freq_c_wins) << ','
        << fmt17(r.freq_d_wins) << ',' << fmt17(r.freq_coexist) << ',' << fmt17(r.freq_both_extinct)
        << ',' << r.mf_regime << '\n';
  return out.str();
}

MonotonicityReport monotonicity_check(const MonotonicitySpec& spec) {
  spec.base.validate();
  if (spec.delta_c < 0.0 || spec.delta_d < 0.0) throw std::invalid_argument("deltas must be nonnegative");
  if (spec.replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  MonotonicityReport rep;
  rep.favored = spec.base;
  rep.favored.beta_c += spec.delta_c;
  rep.favored.beta_d -= std::min(spec.delta_d, spec.base.beta_d);
  rep.replicas = spec.replicas;
  const Torus torus(spec.base.dim, spec.side);

  struct Slot {
    bool violated = false;
    bool identical = false;
    bool c_fav = false, c_base = false, d_fav = false, d_base = false;
    std::size_t checks = 0;
  };
  std::vector<Slot> slots(spec.replicas);
  parallel_for(spec.replicas, spec.jobs, [&](std::size_t i) {
    Rng rng = make_stream(spec.seed, i);
    const Configuration c0 = sample_product(torus, spec.rho_c, spec.rho_d, rng);
    const EventLog log =
        sample_coupled_log(rep.favored, spec.base, torus, 0.0, spec.horizon, rng, spec.seed);
    Slot& s = slots[i];
    double next_sample = spec.sample_interval;
    try {
      auto sweep = [&](const Configuration& a, const Configuration& b) {
        for (std::size_t x = 0; x < a.size(); ++x) {
          ++s.checks;
          if (!pair_allowed(a[x], b[x])) throw InclusionViolation("inclusion broken at a sampled time");
        }
      };
      const CoupledResult res = coupled_evolve(
          c0, c0, log, std::nullopt,
          [&](double t, const Configuration& a, const Configuration& b) {
            while (spec.sample_interval > 0.0 && t >= next_sample) {
              sweep(a, b);
              next_sample += spec.sample_interval;
            }
          });
      sweep(res.favored, res.other);
      s.checks += res.checks;
      s.identical = res.favored == res.other;
      const Counts a = count_states(res.favored), b = count_states(res.other);
      s.c_fav = a.c > 0;
      s.c_base = b.c > 0;
      s.d_fav = a.d > 0;
      s.d_base = b.d > 0;
    } catch (const InclusionViolation&) {
      s.violated = true;
    }
  });

  std::size_t cf = 0, cb = 0, df = 0, db = 0;
  for (const Slot& s : slots) {
    rep.violations += s.violated;
    rep.identical += s.identical;
    rep.checks += s.checks;
    cf += s.c_fav;
    cb += s.c_base;
    df += s.d_fav;
    db += s.d_base;
  }
  rep.c_alive_favored = make_frequency(cf, spec.replicas);
  rep.c_alive_base = make_frequency(cb, spec.replicas);
  rep.d_alive_favored = make_frequency(df, spec.replicas);
  rep.d_alive_base = make_frequency(db, spec.replicas);
  auto var = [&](const Frequency& f) {
    return f.value * (1.0 - f.value) / static_cast<double>(spec.replicas);
  };
  rep.sigma_c = std::sqrt(var(rep.c_alive_favored) + var(rep.c_alive_base));
  rep.sigma_d = std::sqrt(var(rep.d_alive_favored) + var(rep.d_alive_base));
  rep.c_ordered = rep.c_alive_favored.value >= rep.c_alive_base.value - 3.0 * rep.sigma_c;
  rep.d_ordered = rep.d_alive_favored.value <= rep.d_alive_base.value + 3.0 * rep.sigma_d;
  return rep;
}

CriticalBracket bracket_search(const WinEvaluator& eval, double lo, double hi, double tau,
                               double tolerance, std::size_t budget) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (!(lo >= 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 <= lo < hi");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

  CriticalBracket b;
  b.beta_c_low = lo;
  b.beta_c_high = hi;
  std::map<double, BracketPoint> seen;
  auto at = [&](double x) -> const BracketPoint& {
    auto it = seen.find(x);
    if (it != seen.end()) return it->second;
    if (b.evaluations.size() >= budget)
      throw BudgetExhausted("bracket budget exhausted", b);
    BracketPoint pt = eval(x);
    pt.beta_c = x;
    b.evaluations.push_back(pt);
    return seen.emplace(x, pt).first->second;
  };
  auto d_side = [&](double x) { return at(x).freq_d_wins > tau; };
  auto c_side = [&](double x) { return at(x).freq_c_wins > tau; };

  b.defector_edge_found = d_side(lo);
  b.cooperator_edge_found = c_side(hi);

  // Edge of the defector region.
  if (b.defector_edge_found) {
    double a = lo, z = hi;
    if (d_side(hi)) {
      a = hi;
    } else {
      while (z - a > tolerance) {
        const double m = 0.5 * (a + z);
        (d_side(m) ? a : z) = m;
        b.beta_c_low = a;
      }
    }
    b.beta_c_low = a;
  }

  // Edge of the cooperator region, searched above the defector edge.
  if (b.cooperator_edge_found) {
    double a = b.beta_c_low, z = hi;
    for (const auto& [x, pt] : seen) {
      if (x < a) continue;
      if (pt.freq_c_wins > tau) {
        z = std::min(z, x);
        break;
      }
      a = x;
    }
    if (c_side(a)) z = a;
    while (z - a > tolerance) {
      const double m = 0.5 * (a + z);
      (c_side(m) ? z : a) = m;
      b.beta_c_high = z;
    }
    b.beta_c_high = z;
  }
  return b;
}

CriticalBracket bracket_critical(const BracketSpec& spec) {
  std::size_t k = 0;
  const WinEvaluator eval = [&](double beta_c) {
    SurvivalSpec s;
    s.params = {spec.beta, beta_c, spec.beta_d, spec.dim};
    s.rho_c = spec.rho_c;
    s.rho_d = spec.rho_d;
    s.side = spec.side;
    s.horizon = spec.horizon;
    s.replicas = spec.replicas;
    s.seed = derive_seed(spec.seed, k++);
    s.jobs = spec.jobs;
    const SurvivalEstimate est = survival_estimate(s);
    return BracketPoint{beta_c, est.c_wins.value, est.d_wins.value};
  };
  auto finish = [&](CriticalBracket b) {
    b.equal_rate_value = equal_rate_beta_c(spec.beta_d, spec.dim);
    b.low_exceeds_equal_rate = b.beta_c_low > b.equal_rate_value;
    std::ostringstream notes;
    notes << "finite-size estimate: side=" << spec.side << " horizon=" << fmt17(spec.horizon)
          << " replicas=" << spec.replicas << " tau=" << fmt17(spec.tau);
    b.notes = notes.str();
    return b;
  };
  try {
    return finish(bracket_search(eval, spec.lo, spec.hi, spec.tau, spec.tolerance, spec.budget));
  } catch (const BudgetExhausted& e) {
    throw BudgetExhausted(e.what(), finish(e.partial()));
  }
}

std::string bracket_json(const CriticalBracket& b) {
  nlohmann::ordered_json j;
  j["beta_c_low"] = b.beta_c_low;
  j["beta_c_high"] = b.beta_c_high;
  j["defector_edge_found"] = b.defector_edge_found;
  j["cooperator_edge_found"] = b.cooperator_edge_found;
  j["equal_rate_value"] = b.equal_rate_value;
  j["low_exceeds_equal_rate"] = b.low_exceeds_equal_rate;
  j["notes"] = b.notes;
  auto& ev = j["evaluations"] = nlohmann::ordered_json::array();
  for (const auto& p : b.evaluations)
    ev.push_back({{"beta_c", p.beta_c}, {"freq_c_wins", p.freq_c_wins}, {"freq_d_wins", p.freq_d_wins}});
  return dump_json(j);
}

}  // namespace coop
