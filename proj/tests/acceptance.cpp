#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "ring_oracle.hpp"

#include "coop/blocks.hpp"
#include "coop/graphical.hpp"
#include "coop/lattice_process.hpp"
#include "coop/mean_field.hpp"
#include "coop/percolation.hpp"

using namespace coop;
namespace fs = std::filesystem;
namespace mf = coop::mean_field;

namespace {

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Check {
  bool ok = true;
  std::ostringstream log;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      log << "    failed: " << what << "\n";
    }
  }
  void note(const std::string& s) { log << "    " << s << "\n"; }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool within_3sigma(Check& c, const std::string& name, double est, double se, double target) {
  const bool ok = std::abs(est - target) <= 3.0 * se;
  c.note(name + ": " + num(est) + " +- " + num(se) + " vs " + num(target));
  c.expect(ok, name + " outside 3 sigma");
  return ok;
}

// 1
void meanfield_regimes(Check& c) {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  c.expect(std::abs(mf::phi(1.0, 2.0) - golden) < 1e-15, "phi(1) at beta 2");
  struct Case {
    double beta_d;
    mf::State start, target;
  };
  const Case cases[] = {{0.7, {0.3, 0.3}, {0.0, 1.0 - 1.0 / 2.7}},
                        {0.5, {0.6, 0.01}, {golden, 0.0}},
                        {0.5, {0.01, 0.5}, {0.0, 0.6}}};
  for (const Case& k : cases) {
    const mf::Convergence r = mf::converge(k.start, {2.0, 1.0, k.beta_d, 1}, 1e5);
    const double err = std::max(std::abs(r.state.x - k.target.x), std::abs(r.state.y - k.target.y));
    c.note("beta_d " + num(k.beta_d) + " from (" + num(k.start.x) + ", " + num(k.start.y) +
           "): error " + num(err) + " at t " + num(r.t));
    c.expect(r.converged && err < 1e-6, "trajectory misses its fixed point");
  }
}

// 2
void phi_suite(Check& c) {
  for (double beta : {1.5, 2.0, 4.0}) {
    double last = mf::phi(0.0, beta);
    c.expect(last == 0.0, "phi(0) is not 0");
    for (int i = 1; i <= 200; ++i) {
      const double bc = 0.1 * i;
      const double v = mf::phi(bc, beta);
      c.expect(v > last, "phi not increasing at beta " + num(beta) + ", beta_c " + num(bc));
      c.expect(v < bc, "phi(beta_c) >= beta_c at beta " + num(beta) + ", beta_c " + num(bc));
      last = v;
    }
    c.expect(mf::phi(1e-6, beta) < 1e-3, "phi(1e-6) too large at beta " + num(beta));
  }
}

std::vector<Params> random_params(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> b(1.05, 6.0), bc(0.05, 10.0), bd(0.0, 5.0);
  std::vector<Params> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({b(gen), bc(gen), bd(gen), 1});
  return out;
}

std::vector<mf::State> random_interior(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<mf::State> out;
  while (out.size() < n) {
    const mf::State s{u(gen), u(gen)};
    if (mf::strictly_interior(s)) out.push_back(s);
  }
  return out;
}

// 3
void dulac(Check& c) {
  std::mt19937_64 gen(3);
  std::size_t violations = 0, points = 0;
  for (const Params& p : random_params(30, 10))
    for (const mf::State& s : random_interior(gen, 10000)) {
      ++points;
      violations += !(mf::dulac_divergence(s, p) < 0.0);
    }
  c.note(std::to_string(points) + " points, " + std::to_string(violations) + " violations");
  c.expect(violations == 0, "nonnegative divergence");
}

// 4
void interior_roots(Check& c) {
  std::mt19937_64 gen(4);
  double global_min = 1e300;
  for (const Params& p : random_params(40, 10)) {
    const mf::RootProbeReport r = mf::interior_root_probe(p, random_interior(gen, 100));
    if (!r.interior_roots.empty()) {
      const mf::State& s = r.interior_roots.front();
      c.expect(false, "interior root (" + num(s.x) + ", " + num(s.y) + ") at (beta, beta_c, beta_d) = (" +
                          num(p.beta) + ", " + num(p.beta_c) + ", " + num(p.beta_d) + "); beta_d/beta_c = " +
                          num(p.beta_d / p.beta_c));
    }
    const int n = 400;
    const double margin = 1e-3;
    double lo = 1e300;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const mf::State s{margin + (1 - 3 * margin) * i / n, margin + (1 - 3 * margin) * j / n};
        if (s.x + s.y > 1.0 - margin) continue;
        const mf::Derivative f = mf::derivative(s, p);
        lo = std::min(lo, std::abs(f.dx) + std::abs(f.dy));
      }
    global_min = std::min(global_min, lo);
    c.expect(lo > 0.0, "vanishing field on the interior grid");
  }
  c.note("smallest |dx|+|dy| on the grids: " + num(global_min));
}

// 5
void closed_forms(Check& c) {
  const std::size_t N = 100000;
  for (auto [d, T] : {std::pair{1, 1.0}, std::pair{2, 1.0}, std::pair{1, 5.0}}) {
    const Estimate e = estimate_A1(T, d, N, 51 + d, jobs());
    within_3sigma(c, "A1 d=" + std::to_string(d) + " T=" + num(T), e.estimate, e.stderr_, prob_A1(T, d));
  }
  for (double sum : {std::log(2.0), 1.0}) {
    const SterileEstimate s = estimate_sterile(sum / 2, sum / 2, 1, N, 52, jobs());
    within_3sigma(c, "sterile at beta+beta_c=" + num(sum), s.estimate, s.stderr_,
                  sterile_probability(sum / 2, sum / 2));
  }
  const Estimate a = estimate_c_plus_absence(2, 1, 0.001, N, 53, jobs());
  within_3sigma(c, "c+ absence", a.estimate, a.stderr_, c_plus_absence_prob(2, 1, 0.001));
}

// 6
void a2_direction(Check& c) {
  const Params p{2.0, 0.0, 1.0, 1};
  const Estimate e = estimate_A2(p, 5.0, 0.001, 100000, 6, jobs());
  const double b = bound_A2(5.0, 0.001, p);
  c.note("P(A2) " + num(e.estimate) + " +- " + num(e.stderr_) + ", bound " + num(b));
  c.expect(e.estimate >= b - 3.0 * e.stderr_, "estimate below the bound");
}

// 7
void no_effect(Check& c) {
  const Torus t(1, 30);
  const Params p{2.0, 2.0, 1.0, 1};  // equal-rate: beta_c = 2d beta_d / (2d - 1)
  std::size_t relabeled = 0, removed = 0, mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    Rng rng = make_stream(7, k);
    const Configuration c0 = sample_product(t, 0.3, 0.3, rng);
    const EventLog log = sample_event_log(p, t, 0.0, 20.0, rng, Flavor::equal_rate);
    const Configuration truth = evolve_from_log(c0, log);
    const EventLog no_c = remove_c_arrows(log);
    removed += log.marks.size() - no_c.marks.size();
    std::size_t n = 0;
    const EventLog relabel = label_sterile(log, &n);
    relabeled += n;
    mismatches += evolve_from_log(c0, no_c) != truth;
    mismatches += evolve_from_log(c0, relabel) != truth;
  }
  c.note(std::to_string(removed) + " c-arrows removed, " + std::to_string(relabeled) +
         " sterile dot-arrows relabeled");
  c.expect(removed > 0 && relabeled > 0, "vacuous check");
  c.expect(mismatches == 0, std::to_string(mismatches) + " final configurations changed");
}

// 8
void coupling(Check& c) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t violations = 0, inclusion = 0, checks = 0;
  for (int k = 0; k < 100; ++k) {
    const int dim = 1 + k % 2;
    const Torus t(dim, dim == 1 ? 60 : 10);
    const Params base{1.0 + 4.0 * u(gen), 3.0 * u(gen), 2.0 * u(gen), dim};
    const Params fav{base.beta, base.beta_c + 2.0 * u(gen), base.beta_d * u(gen), dim};
    Rng rng = make_stream(8, k);
    const Configuration other = sample_product(t, 0.3, 0.3, rng);
    Configuration favored = other;
    for (auto& s : favored) {
      if (s == SiteState::defector && rng() % 3 == 0) s = SiteState::empty;
      if (s == SiteState::empty && rng() % 3 == 0) s = SiteState::cooperator;
    }
    const EventLog log = sample_coupled_log(fav, base, t, 0.0, 10.0, rng);
    try {
      const CoupledResult r = coupled_evolve(favored, other, log, std::nullopt,
                                             [&](double, const Configuration& a, const Configuration& b) {
                                               for (std::size_t i = 0; i < a.size(); ++i)
                                                 violations += !pair_allowed(a[i], b[i]);
                                             });
      checks += r.checks;
    } catch (const InclusionViolation&) {
      ++inclusion;
    }
  }
  c.note(std::to_string(checks) + " pair checks, " + std::to_string(violations) + " pair violations, " +
         std::to_string(inclusion) + " inclusion violations");
  c.expect(checks > 0 && violations == 0 && inclusion == 0, "coupling broke the order");
}

// 9
void engines(Check& c) {
  EquivalenceSpec s;
  s.params = {2.0, 1.0, 1.0, 1};
  s.replicas = 100000;
  s.jobs = jobs();
  s.seed = 9;
  const EquivalenceReport r = distributional_equivalence_check(s);
  const char* names[] = {"c", "d", "e"};
  for (int i = 0; i < 3; ++i)
    c.note(std::string("count of ") + names[i] + ": chi2 " + num(r.per_state[i].statistic) + ", dof " +
           std::to_string(r.per_state[i].dof) + ", p " + num(r.per_state[i].p_value));
  c.expect(r.pass, "chi-square rejects at alpha / 3");

  const Torus t(1, 2);
  const Configuration c0 = configuration_from_string("cd");
  const Eigen::VectorXd law = ring::transient(2, s.params, ring::encode(c0), 1.0);
  const int N = 100000;
  std::vector<double> gil(law.size(), 0.0), gra(law.size(), 0.0);
  for (int i = 0; i < N; ++i) {
    Rng a = make_stream(91, i);
    LatticeProcess proc(t, c0, s.params);
    proc.advance_to(1.0, a);
    gil[ring::encode(proc.configuration())] += 1.0 / N;
    Rng b = make_stream(92, i);
    gra[ring::encode(evolve_from_log(c0, sample_event_log(s.params, t, 0.0, 1.0, b)))] += 1.0 / N;
  }
  double tv_gil = 0, tv_gra = 0;
  for (int k = 0; k < law.size(); ++k) {
    tv_gil += std::abs(gil[k] - law(k)) / 2;
    tv_gra += std::abs(gra[k] - law(k)) / 2;
  }
  c.note("2-site TV: gillespie " + num(tv_gil) + ", graphical " + num(tv_gra));
  c.expect(tv_gil < 0.01 && tv_gra < 0.01, "2-site law off the matrix exponential");
}

// 10
void threshold_direction(Check& c) {
  SurvivalSpec s;
  s.rho_c = 0.1;
  s.rho_d = 0.8;
  s.side = 100;
  s.horizon = 200;
  s.replicas = 200;
  s.seed = 11;
  s.jobs = jobs();
  s.params = {4.0, 1.5, 1.0, 1};
  const SurvivalEstimate low = survival_estimate(s);
  c.note("beta_c 1.5: defectors win " + num(low.d_wins.value));
  c.expect(low.d_wins.value >= 0.9, "defectors win below 90% at beta_c 1.5");
  s.params.beta_c = 50.0;
  const SurvivalEstimate high = survival_estimate(s);
  std::size_t denser = 0;
  for (const auto& o : high.outcomes) denser += o.final_counts.c > o.final_counts.d;
  const double f = static_cast<double>(denser) / static_cast<double>(s.replicas);
  c.note("beta_c 50: cooperators denser " + num(f));
  c.expect(f >= 0.9, "cooperators denser below 90% at beta_c 50");
}

// 11
void percolation(Check& c) {
  std::size_t mono = 0, impl = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    PercolationSpec s;
    s.dim = 1 + static_cast<int>(seed % 2);
    s.width = s.dim == 1 ? 30 : 8;
    s.levels = s.dim == 1 ? 30 : 10;
    s.seed = seed;
    s.epsilon = 0.1;
    const PercolationField lo = percolate(s);
    s.epsilon = 0.3;
    const PercolationField hi = percolate(s);
    for (int n = 0; n <= s.levels; ++n) {
      for (std::size_t i = 0; i < hi.level_size(); ++i) {
        const auto z = hi.coords(i);
        if (PercolationField::parity_ok(z, n) && hi.wet(z, n) && !lo.wet(z, n)) ++mono;
      }
      for (const PercolationField* f : {&lo, &hi}) {
        const auto g = f->dry_reachable(n, PercolationGraph::G), h = f->dry_reachable(n, PercolationGraph::H);
        for (std::size_t i = 0; i < g.size(); ++i) impl += g[i] && !h[i];
      }
    }
  }
  c.expect(mono == 0, std::to_string(mono) + " wet sites lost when epsilon decreased");
  c.expect(impl == 0, std::to_string(impl) + " G-dry sites not H-dry");

  const int levels = 8;
  std::vector<int> freq(levels + 1, 0);
  for (int f = 0; f < 100; ++f) {
    PercolationSpec s;
    s.width = 20;
    s.levels = levels;
    s.epsilon = 0.05;
    s.seed = 1000 + static_cast<std::uint64_t>(f);
    const PercolationField field = percolate(s);
    for (int n = 1; n <= levels; ++n) {
      const auto r = field.dry_reachable(n, PercolationGraph::G);
      freq[n] += std::find(r.begin(), r.end(), 1) != r.end();
    }
  }
  std::string row = "fields with a dry path to level n = 1..8:";
  for (int n = 1; n <= levels; ++n) row += " " + std::to_string(freq[n]);
  c.note(row);
  for (int n = 2; n <= levels; ++n) c.expect(freq[n] <= freq[n - 1], "dry-path frequency rose");
  c.expect(freq[levels] < freq[1], "dry-path frequency flat");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 12
void reproducibility(Check& c) {
  const char* cli = std::getenv("COOP_CLI");
#ifdef COOP_CLI
  if (!cli) cli = COOP_CLI;
#endif
  if (!cli) {
    c.expect(false, "COOP_CLI not set");
    return;
  }
  const std::vector<std::string> runs = {
      "meanfield --beta 2 --beta-c 1 --beta-d 0.5 --x0 0.6 --y0 0.01 --t-end 50 --stride 100",
      "meanfield --beta 2 --phi-curve --points 50",
      "simulate --beta 3 --beta-c 2 --beta-d 1 --side 40 --t-end 10 --replicas 8 --seed 5 --jobs 3",
      "sweep --beta-c-grid 1,4 --beta-d-grid 1 --side 20 --t-end 10 --replicas 10 --seed 2",
      "couple --beta 3 --beta-c 1 --beta-d 1 --delta-c 1 --side 30 --t-end 10 --replicas 5",
      "dual --beta 2 --beta-c 1 --beta-d 1 --side 20 --t-end 2 --write-log --seed 3",
      "blocks a1 --T 1 --replicas 1000",
      "blocks a2 --T 2 --delta 0.01 --replicas 1000",
      "blocks a3 --replicas 500",
      "blocks cplus --replicas 1000",
      "blocks spread --L 4 --replicas 10",
      "blocks perc --width 10 --levels 10 --epsilon 0.2",
      "sterile --replicas 2000 --jobs 2",
  };
  const fs::path root = fs::temp_directory_path() / ("coop_accept_" + std::to_string(::getpid()));
  std::size_t files = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (std::to_string(k) + "_" + std::to_string(rep));
      fs::create_directories(dir);
      const std::string cmd = std::string("\"") + cli + "\" " + runs[k] + " --out \"" + dir.string() +
                              "\" > \"" + (dir / "stdout.txt").string() + "\" 2>&1";
      const int rc = std::system(cmd.c_str());
      c.expect(rc == 0, runs[k] + " exited with " + std::to_string(rc));
      dirs.push_back(dir);
    }
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
    std::size_t other = std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{});
    c.expect(names.size() == other, runs[k] + ": different file sets");
    c.expect(names.size() > 1, runs[k] + ": no output files");
    for (const auto& n : names) {
      ++files;
      c.expect(slurp(dirs[0] / n) == slurp(dirs[1] / n), runs[k] + ": " + n + " differs");
    }
  }
  // stdout mode
  for (int rep = 0; rep < 2; ++rep) {
    const std::string cmd = std::string("\"") + cli + "\" blocks a1 --replicas 100 > \"" +
                            (root / ("stdout_" + std::to_string(rep))).string() + "\"";
    c.expect(std::system(cmd.c_str()) == 0, "stdout run failed");
  }
  c.expect(slurp(root / "stdout_0") == slurp(root / "stdout_1"), "stdout differs");
  c.note(std::to_string(runs.size()) + " commands, " + std::to_string(files) + " files compared");
  std::error_code ec;
  fs::remove_all(root, ec);
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<void(Check&)> run;
    double limit;  // seconds
  };
  // closed-form Monte Carlo holds six estimates of at most a minute each
  const std::vector<Criterion> criteria = {
      {"mean-field regimes", meanfield_regimes, 5},
      {"transition curve properties", phi_suite, 1},
      {"divergence criterion", dulac, 1},
      {"no interior fixed point", interior_roots, 10},
      {"closed-form Monte Carlo", closed_forms, 360},
      {"gap event bound", a2_direction, 60},
      {"c-arrows and sterile dots change nothing", no_effect, 30},
      {"coupling order", coupling, 60},
      {"engine equivalence", engines, 300},
      {"cooperation threshold direction", threshold_direction, 600},
      {"percolation properties", percolation, 60},
      {"byte-identical reruns", reproducibility, 60},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < criteria[i].limit, "over the time limit of " + num(criteria[i].limit) + " s");
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %2zu %s (%.2f s)", c.ok ? "PASS" : "FAIL", i + 1,
                  criteria[i].name.c_str(), secs);
    std::cout << head << "\n" << c.log.str() << std::flush;
    failed += !c.ok;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
