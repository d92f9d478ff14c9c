#include "coop/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coop/graphical.hpp"
#include "coop/parallel.hpp"
#include "coop/rng.hpp"
#include "coop/torus.hpp"

namespace coop {

namespace {

std::size_t pow3(int k) {
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r *= 3;
  return r;
}

void check_dim(int dim) {
  if (dim < 1) throw std::invalid_argument("dim must be at least 1");
}

// Points of Z^d near the origin block, with the neighbor structure the
// block events need.
struct BlockGeometry {
  struct Site {
    bool in_B0 = false;
    bool in_Bminus = false;
    std::vector<char> source_in_B0;  // per direction
  };
  std::vector<Site> plus;  // the sites of B_+

  explicit BlockGeometry(int dim) {
    const std::size_t box = [&] {
      std::size_t n = 1;
      for (int j = 0; j < dim; ++j) n *= 5;
      return n;
    }();
    std::vector<int> x(static_cast<std::size_t>(dim));
    auto in_B0 = [&](const std::vector<int>& p) {
      for (int c : p)
        if (std::abs(c) > 1) return false;
      return true;
    };
    auto in_Bplus = [&](const std::vector<int>& p) {
      for (int i = 0; i < dim; ++i)
        for (int s : {-1, 1}) {
          bool inside = true;
          for (int j = 0; j < dim && inside; ++j) {
            const int centre = j == i ? s : 0;
            inside = std::abs(p[static_cast<std::size_t>(j)] - centre) <= 1;
          }
          if (inside) return true;
        }
      return false;
    };
    for (std::size_t idx = 0; idx < box; ++idx) {
      std::size_t rest = idx;
      for (int j = 0; j < dim; ++j) {
        x[static_cast<std::size_t>(j)] = static_cast<int>(rest % 5) - 2;
        rest /= 5;
      }
      if (!in_Bplus(x)) continue;
      Site s;
      s.in_B0 = in_B0(x);
      s.in_Bminus = !s.in_B0;
      for (int j = 0; j < dim; ++j)
        for (int step : {-1, 1}) {
          std::vector<int> y = x;
          y[static_cast<std::size_t>(j)] += step;
          s.source_in_B0.push_back(in_B0(y));
        }
      plus.push_back(s);
    }
  }
};

// Arrival times of a Poisson process of the given rate on [t0, t1).
void poisson_times(double rate, double t0, double t1, Rng& rng, std::vector<double>& out) {
  if (!(rate > 0.0)) return;
  for (double t = t0 + exponential(rng, rate); t < t1; t += exponential(rng, rate)) out.push_back(t);
}

std::size_t interval_count(double T, double delta) {
  return static_cast<std::size_t>(std::ceil(2.0 * T / delta - 1e-9));
}

struct BlockOutcome {
  bool a1 = false, a2 = false, a3 = false;
};

// One draw of every mark touching B_+ over [0, 2T): crosses at B_+ sites,
// arrows and d-arrows into B_+, and dot-arrows into B_+ whose source lies in
// B_0. The three events read the same marks, so their joint law is exact.
BlockOutcome sample_block(const BlockGeometry& g, const Params& p, double T, double delta,
                          Rng& rng, bool want_a3 = true) {
  const double two_d = 2.0 * p.dim;
  const double horizon = 2.0 * T;
  const std::size_t n = interval_count(T, delta);
  BlockOutcome out{true, true, true};
  std::vector<double> merged, crosses, usable, times;
  std::vector<char> hit;

  for (const auto& s : g.plus) {
    crosses.clear();
    poisson_times(1.0, 0.0, horizon, rng, crosses);
    if (s.in_Bminus &&
        std::none_of(crosses.begin(), crosses.end(), [&](double t) { return t >= T; }))
      out.a1 = false;
    merged.insert(merged.end(), crosses.begin(), crosses.end());

    usable.clear();
    for (int k = 0; k < 2 * p.dim; ++k) {
      times.clear();
      poisson_times(p.beta / two_d, 0.0, horizon, rng, times);
      merged.insert(merged.end(), times.begin(), times.end());
      if (s.source_in_B0[static_cast<std::size_t>(k)]) {
        usable.insert(usable.end(), times.begin(), times.end());
        poisson_times(two_d * (p.beta_c / (two_d * two_d)), 0.0, horizon, rng, usable);
      }
      poisson_times(p.beta_d / two_d, 0.0, horizon, rng, merged);
    }
    if (!want_a3 || !out.a3) continue;
    hit.assign(n, 0);
    for (double t : usable) {
      const auto i = static_cast<std::size_t>(t / delta);
      if (i < n) hit[i] = 1;
    }
    if (std::find(hit.begin(), hit.end(), 0) != hit.end()) out.a3 = false;
  }

  std::sort(merged.begin(), merged.end());
  double prev = 0.0;
  for (double t : merged) {
    if (t - prev <= 2.0 * delta) {
      out.a2 = false;
      break;
    }
    prev = t;
  }
  return out;
}

template <class Fn>
Estimate count_hits(std::size_t replicas, std::uint64_t seed, unsigned jobs, Fn&& trial) {
  if (replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  std::vector<char> hit(replicas, 0);
  parallel_for(replicas, jobs, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    hit[i] = trial(rng);
  });
  std::size_t k = 0;
  for (char h : hit) k += h;
  return make_estimate(k, replicas);
}

void check_time(double T, double delta) {
  if (!(T > 0.0) || !(delta > 0.0)) throw std::invalid_argument("T and delta must be positive");
}

}  // namespace

std::size_t card_B_minus(int dim) {
  check_dim(dim);
  return 2 * static_cast<std::size_t>(dim) * pow3(dim - 1);
}

std::size_t card_B_plus(int dim) {
  check_dim(dim);
  return pow3(dim - 1) * (2 * static_cast<std::size_t>(dim) + 3);
}

Estimate make_estimate(std::size_t hits, std::size_t replicas) {
  Estimate e;
  e.hits = hits;
  e.replicas = replicas;
  if (replicas == 0) return e;
  e.estimate = static_cast<double>(hits) / static_cast<double>(replicas);
  e.stderr_ = std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(replicas));
  return e;
}

double prob_A1(double T, int dim) {
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  return std::pow(-std::expm1(-T), static_cast<double>(card_B_minus(dim)));
}

Estimate estimate_A1(double T, int dim, std::size_t replicas, std::uint64_t seed, unsigned jobs) {
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  const BlockGeometry g(dim);
  Params p{0.0, 0.0, 0.0, dim};
  return count_hits(replicas, seed, jobs,
                    [&](Rng& rng) { return sample_block(g, p, T, 1.0, rng, false).a1; });
}

double rate_A2(const Params& p) {
  return static_cast<double>(card_B_plus(p.dim)) * (p.beta + p.beta_d + 1.0);
}

double bound_A2(double T, double delta, const Params& p) {
  check_time(T, delta);
  const double r = rate_A2(p);
  const double a = 2.0 * r * (2.0 * std::log(2.0) - 1.0);
  return 1.0 - std::exp(-a * T) - 4.0 * r * T * -std::expm1(-2.0 * delta * r);
}

Estimate estimate_A2(const Params& p, double T, double delta, std::size_t replicas,
                     std::uint64_t seed, unsigned jobs) {
  p.validate();
  check_time(T, delta);
  const BlockGeometry g(p.dim);
  return count_hits(replicas, seed, jobs, [&](Rng& rng) {
    return sample_block(g, p, T, delta, rng, false).a2;
  });
}

double prob_A3_bound(double beta, double beta_c, double T, double delta, int dim) {
  check_time(T, delta);
  const double two_d = 2.0 * dim;
  const double R = (beta + beta_c / two_d) / two_d;
  const double exponent = 2.0 * static_cast<double>(card_B_plus(dim)) * T / delta;
  return std::pow(-std::expm1(-delta * R), exponent);
}

Estimate estimate_A3(const Params& p, double T, double delta, std::size_t replicas,
                     std::uint64_t seed, unsigned jobs) {
  p.validate();
  check_time(T, delta);
  const BlockGeometry g(p.dim);
  return count_hits(replicas, seed, jobs, [&](Rng& rng) {
    return sample_block(g, p, T, delta, rng).a3;
  });
}

JointBlockEstimate estimate_A123(const Params& p, double T, double delta, std::size_t replicas,
                                 std::uint64_t seed, unsigned jobs) {
  p.validate();
  check_time(T, delta);
  if (replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  const BlockGeometry g(p.dim);
  std::vector<BlockOutcome> outs(replicas);
  parallel_for(replicas, jobs, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    outs[i] = sample_block(g, p, T, delta, rng);
  });
  std::size_t k1 = 0, k2 = 0, k3 = 0, all = 0;
  for (const auto& o : outs) {
    k1 += o.a1;
    k2 += o.a2;
    k3 += o.a3;
    all += o.a1 && o.a2 && o.a3;
  }
  return {make_estimate(k1, replicas), make_estimate(k2, replicas), make_estimate(k3, replicas),
          make_estimate(all, replicas)};
}

double c_plus_absence_prob(int L, int dim, double rho) {
  if (L < 1) throw std::invalid_argument("L must be at least 1");
  check_dim(dim);
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
  const double sites = std::pow(6.0 * L + 1.0, dim);
  return std::exp(-2.0 * L * L * sites * rho);
}

Estimate estimate_c_plus_absence(int L, int dim, double rho, std::size_t replicas,
                                 std::uint64_t seed, unsigned jobs) {
  c_plus_absence_prob(L, dim, rho);  // argument checks
  const double two_d = 2.0 * dim;
  const double triples = std::pow(6.0 * L + 1.0, dim) * two_d * two_d;
  const double span = 2.0 * L * L;
  return count_hits(replicas, seed, jobs, [&](Rng& rng) {
    std::vector<double> times;
    poisson_times(triples * (rho / (two_d * two_d)), 0.0, span, rng, times);
    return times.empty();
  });
}

int default_subbox_side(int L) {
  return std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(L), 0.1))));
}

namespace {

// Integer points of s w + (-s/2, s/2].
std::pair<int, int> subbox_span(int s, int w) {
  const double lo = s * static_cast<double>(w) - s / 2.0;
  const double hi = s * static_cast<double>(w) + s / 2.0;
  return {static_cast<int>(std::floor(lo)) + 1, static_cast<int>(std::floor(hi))};
}

// Sub-box index ranges per axis with D_w inside [a, b].
std::vector<int> subboxes_inside(int s, int a, int b) {
  std::vector<int> out;
  const int reach = (std::abs(a) + std::abs(b)) / s + 2;
  for (int w = -reach; w <= reach; ++w) {
    const auto [lo, hi] = subbox_span(s, w);
    if (lo >= a && hi <= b) out.push_back(w);
  }
  return out;
}

}  // namespace

BlockSpreadResult block_spread_estimate(const Params& p, const BlockSpreadSpec& spec) {
  p.validate();
  if (!(p.beta_d > 0.0)) throw DomainError("block spreading needs beta_d > 0");
  if (std::abs(p.beta_c - equal_rate_beta_c(p.beta_d, p.dim)) > 1e-12)
    throw FlavorMismatch("block spreading needs beta_c = 2d beta_d / (2d - 1)");
  if (spec.L < 1) throw std::invalid_argument("L must be at least 1");
  if (spec.replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  const int L = spec.L;
  const int d = p.dim;
  const int s = spec.subbox_side > 0 ? spec.subbox_side : default_subbox_side(L);
  const int side = 6 * L + 1;
  const Torus torus(d, side);
  const double T = static_cast<double>(L) * L;

  // Box membership, shifted so the torus origin sits at -3L.
  auto coord = [&](Site x) {
    std::vector<int> c = torus.coords(x);
    for (int& v : c) v -= 3 * L;
    return c;
  };
  auto in_box = [&](const std::vector<int>& c, int axis, int sign) {
    for (int j = 0; j < d; ++j) {
      const int centre = j == axis ? sign * L : 0;
      if (std::abs(c[static_cast<std::size_t>(j)] - centre) > L) return false;
    }
    return true;
  };

  // Sub-boxes as site lists: those of B_0, then those of each B_{+-e_i}.
  auto subbox_sites = [&](int axis, int sign) {
    std::vector<std::vector<int>> ranges(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const int centre = j == axis ? sign * L : 0;
      ranges[static_cast<std::size_t>(j)] = subboxes_inside(s, centre - L, centre + L);
    }
    std::vector<std::vector<Site>> boxes;
    std::vector<std::size_t> pick(static_cast<std::size_t>(d), 0);
    for (;;) {
      bool empty_range = false;
      for (const auto& r : ranges) empty_range = empty_range || r.empty();
      if (empty_range) break;
      std::vector<Site> sites;
      std::vector<int> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) {
        const auto span = subbox_span(s, ranges[static_cast<std::size_t>(j)][pick[static_cast<std::size_t>(j)]]);
        lo[static_cast<std::size_t>(j)] = span.first;
        hi[static_cast<std::size_t>(j)] = span.second;
      }
      std::vector<int> c = lo;
      for (;;) {
        std::vector<int> shifted = c;
        for (int& v : shifted) v += 3 * L;
        sites.push_back(torus.index(shifted));
        int j = 0;
        for (; j < d; ++j) {
          auto& v = c[static_cast<std::size_t>(j)];
          if (++v <= hi[static_cast<std::size_t>(j)]) break;
          v = lo[static_cast<std::size_t>(j)];
        }
        if (j == d) break;
      }
      boxes.push_back(std::move(sites));
      int j = 0;
      for (; j < d; ++j) {
        auto& k = pick[static_cast<std::size_t>(j)];
        if (++k < ranges[static_cast<std::size_t>(j)].size()) break;
        k = 0;
      }
      if (j == d) break;
    }
    return boxes;
  };

  const auto home = subbox_sites(0, 0);
  struct Target {
    int axis, sign;
    std::vector<std::vector<Site>> boxes;
  };
  std::vector<Target> targets;
  for (int i = 0; i < d; ++i)
    for (int sign : {1, -1}) targets.push_back({i, sign, subbox_sites(i, sign)});

  std::vector<char> in_B0(torus.size(), 0), in_targets(torus.size(), 0);
  for (Site x = 0; x < torus.size(); ++x) {
    const auto c = coord(x);
    in_B0[x] = in_box(c, 0, 0);
    for (const auto& t : targets) in_targets[x] = in_targets[x] || in_box(c, t.axis, t.sign);
  }

  std::vector<char> ok(spec.replicas, 0);
  parallel_for(spec.replicas, spec.jobs, [&](std::size_t r) {
    Rng rng = make_stream(spec.seed, r);
    Configuration config(torus.size(), SiteState::empty);
    if (spec.exterior_rho_c > 0.0)
      for (Site x = 0; x < torus.size(); ++x)
        if (!in_B0[x] && uniform01(rng) < spec.exterior_rho_c) config[x] = SiteState::cooperator;
    for (const auto& box : home) config[box[std::min(uniform_index(rng, box.size()), box.size() - 1)]] = SiteState::defector;

    const EventLog log = sample_event_log(p, torus, 0.0, 2.0 * T, rng, Flavor::equal_rate, spec.seed);
    std::size_t m = 0;
    for (; m < log.marks.size() && log.marks[m].time < T; ++m) apply_mark(config, log.marks[m], log.flavor);

    bool good = true;
    for (Site x = 0; x < torus.size() && good; ++x)
      if (in_targets[x] && config[x] == SiteState::cooperator) good = false;
    for (const auto& t : targets)
      for (const auto& box : t.boxes) {
        if (!good) break;
        good = std::any_of(box.begin(), box.end(),
                           [&](Site x) { return config[x] == SiteState::defector; });
      }
    for (; good && m < log.marks.size(); ++m) {
      const Mark& mk = log.marks[m];
      if (apply_mark(config, mk, log.flavor) && in_targets[mk.target] &&
          config[mk.target] == SiteState::cooperator)
        good = false;
    }
    ok[r] = good;
  });

  BlockSpreadResult res;
  std::size_t hits = 0;
  for (char o : ok) hits += o;
  res.spread = make_estimate(hits, spec.replicas);
  res.subbox_side = s;
  res.subboxes = home.size();
  res.torus_side = side;
  return res;
}

}  // namespace coop
