#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coop/blocks.hpp"
#include "coop/experiments.hpp"
#include "coop/graphical.hpp"
#include "coop/io.hpp"
#include "coop/lattice_process.hpp"
#include "coop/mean_field.hpp"
#include "coop/parallel.hpp"
#include "coop/percolation.hpp"

namespace {

using nlohmann::ordered_json;
using namespace coop;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string show(double v) { return fmt17(v); }
std::string show(int v) { return std::to_string(v); }
std::string show(unsigned v) { return std::to_string(v); }
std::string show(std::size_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::string& v) { return v; }
std::string show(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
  return s;
}

struct Settings {
  double beta = 2.0, beta_c = 0.0, beta_d = 0.0;
  int dim = 1, side = 100;
  double t_end = 100.0;
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  unsigned jobs = default_jobs();
  std::string out;

  double x0 = 0.3, y0 = 0.3, dt = 1e-3;
  std::size_t stride = 1000;
  bool phi_curve = false;
  double beta_c_max = 10.0;
  std::size_t points = 100;

  double rho_c = 0.5, rho_d = 0.5, sample_interval = 1.0, density_floor = 0.0;

  std::vector<double> beta_c_grid{0.0, 1.0, 2.0};
  std::vector<double> beta_d_grid{1.0};
  bool bracket = false;
  double tau = 0.9, lo = 0.0, hi = 50.0, tolerance = 0.25;
  std::size_t budget = 40;

  double delta_c = 1.0, delta_d = 0.0;

  std::uint32_t site = 0;
  std::string flavor = "standard";
  bool write_log = false;

  double T = 1.0, delta = 1e-3, rho = 1e-3, exterior_rho_c = 0.0, epsilon = 0.05;
  int L = 4, subbox_side = 0, width = 50, levels = 50;
  bool single_source = false;
};

// Options of one subcommand, remembered in declaration order so the resolved
// configuration can be written back as key=value lines.
struct Command {
  CLI::App* app = nullptr;
  std::string path;
  std::vector<std::pair<std::string, std::function<std::string()>>> fields;
  Settings s;
  std::function<void(const Settings&)> run;

  template <class T>
  CLI::Option* opt(const std::string& name, T& var, const std::string& help) {
    fields.emplace_back(name, [&var] { return show(var); });
    return app->add_option("--" + name, var, help)->capture_default_str();
  }
  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    fields.emplace_back(name, [&var] { return show(var); });
    return app->add_flag("--" + name, var, help);
  }

  std::string config_text() const {
    std::string s;
    for (const auto& [k, get] : fields) s += k + "=" + get() + "\n";
    return s;
  }
};


Command* active = nullptr;

OutputMeta meta() {
  OutputMeta m;
  m.config_text = "command=" + active->path + "\n" + active->config_text();
  m.config_hash = hex64(fnv1a64(m.config_text));
  m.seed = active->s.seed;
  return m;
}

// The first file is the primary output: it goes to stdout when --out is not
// given. With --out every file is written into that directory.
void emit(const std::vector<std::pair<std::string, std::string>>& files) {
  const Settings& S = active->s;
  if (S.out.empty()) {
    std::cout << files.front().second;
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(S.out, ec);
  if (ec) throw IoError("cannot create output directory " + S.out + ": " + ec.message());
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw IoError("cannot write " + path.string());
  };
  for (const auto& [name, text] : files) write(std::filesystem::path(S.out) / name, text);
  const OutputMeta m = meta();
  write(std::filesystem::path(S.out) / "config.txt", m.config_text);
}

ordered_json with_meta(ordered_json body) {
  ordered_json j;
  j["meta"] = meta_json(meta());
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  return j;
}

ordered_json params_json(const Params& p) {
  return {{"beta", p.beta}, {"beta_c", p.beta_c}, {"beta_d", p.beta_d}, {"dim", p.dim}};
}

ordered_json frequency_json(const Frequency& f) {
  return {{"hits", f.hits}, {"value", f.value}, {"half_width_95", f.half_width}};
}

Params params(const Settings& S) { return {S.beta, S.beta_c, S.beta_d, S.dim}; }

void run_meanfield(const Settings& S) {
  if (!(S.beta > 1.0)) throw DomainError("mean-field analysis requires beta > 1");
  const Params p = params(S);
  p.validate();
  if (S.phi_curve) {
    if (S.points < 1 || !(S.beta_c_max > 0.0)) throw std::invalid_argument("need points >= 1 and beta-c-max > 0");
    std::ostringstream csv;
    csv << csv_preamble(meta()) << "beta_c,phi\n";
    for (std::size_t i = 1; i <= S.points; ++i) {
      const double bc = S.beta_c_max * static_cast<double>(i) / static_cast<double>(S.points);
      csv << fmt17(bc) << ',' << fmt17(mean_field::phi(bc, S.beta)) << '\n';
    }
    emit({{"phi_curve.csv", csv.str()}});
    return;
  }
  const auto traj = mean_field::integrate({S.x0, S.y0}, p, S.t_end, S.dt);
  const auto& last = traj.back();
  ordered_json fps = ordered_json::array();
  for (const auto& fp : mean_field::fixed_points(p))
    fps.push_back({{"kind", mean_field::to_string(fp.kind)},
                   {"x", fp.location.x},
                   {"y", fp.location.y},
                   {"in_simplex", fp.in_simplex},
                   {"stability", mean_field::to_string(fp.locally_stable)}});
  ordered_json body;
  body["params"] = params_json(p);
  body["regime"] = mean_field_label(p);
  body["phi"] = mean_field::phi(p.beta_c, p.beta);
  body["start"] = {{"x", S.x0}, {"y", S.y0}};
  body["terminal"] = {{"t", last.t}, {"x", last.state.x}, {"y", last.state.y}};
  body["fixed_points"] = fps;
  emit({{"report.json", dump_json(with_meta(body))},
        {"trajectory.csv", csv_preamble(meta()) + mean_field::trajectory_csv(traj, S.stride)}});
}

void run_simulate(const Settings& S) {
  const Params p = params(S);
  p.validate();
  if (S.replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  const Torus torus(S.dim, S.side);
  Rng rng = make_stream(S.seed, 0);
  const auto samples = run(torus, sample_product(torus, S.rho_c, S.rho_d, rng), p, S.t_end,
                           S.sample_interval, rng);

  SurvivalSpec s;
  s.params = p;
  s.rho_c = S.rho_c;
  s.rho_d = S.rho_d;
  s.side = S.side;
  s.horizon = S.t_end;
  s.replicas = S.replicas;
  s.seed = S.seed;
  s.density_floor = S.density_floor;
  s.jobs = S.jobs;
  const SurvivalEstimate est = survival_estimate(s);
  ordered_json body;
  body["params"] = params_json(p);
  body["horizon_note"] = "finite torus and finite horizon; survival means alive at t-end";
  body["replicas"] = est.replicas;
  body["c_alive"] = frequency_json(est.c_alive);
  body["d_alive"] = frequency_json(est.d_alive);
  body["cooperators_win"] = frequency_json(est.c_wins);
  body["defectors_win"] = frequency_json(est.d_wins);
  body["coexist"] = frequency_json(est.coexist);
  body["both_extinct"] = frequency_json(est.both_extinct);
  body["c_outdense"] = frequency_json(est.c_outdense);
  ordered_json outs = ordered_json::array();
  for (const auto& o : est.outcomes)
    outs.push_back({{"replica", o.index},
                    {"outcome", to_string(o.outcome)},
                    {"c", o.final_counts.c},
                    {"d", o.final_counts.d},
                    {"e", o.final_counts.e}});
  body["outcomes"] = outs;
  emit({{"summary.json", dump_json(with_meta(body))},
        {"timeseries.csv", csv_preamble(meta()) + time_series_csv(samples)}});
}

void run_sweep(const Settings& S) {
  if (S.bracket) {
    BracketSpec b;
    b.beta = S.beta;
    b.beta_d = S.beta_d;
    b.dim = S.dim;
    b.side = S.side;
    b.horizon = S.t_end;
    b.replicas = S.replicas;
    b.seed = S.seed;
    b.rho_c = S.rho_c;
    b.rho_d = S.rho_d;
    b.tau = S.tau;
    b.lo = S.lo;
    b.hi = S.hi;
    b.tolerance = S.tolerance;
    b.budget = S.budget;
    b.jobs = S.jobs;
    CriticalBracket result;
    bool exhausted = false;
    try {
      result = bracket_critical(b);
    } catch (const BudgetExhausted& e) {
      result = e.partial();
      exhausted = true;
      std::cerr << "warning: " << e.what() << ", writing the partial bracket\n";
    }
    ordered_json body = ordered_json::parse(bracket_json(result));
    body["budget_exhausted"] = exhausted;
    emit({{"bracket.json", dump_json(with_meta(body))}});
    return;
  }
  SweepSpec s;
  s.beta = S.beta;
  s.beta_c_grid = S.beta_c_grid;
  s.beta_d_grid = S.beta_d_grid;
  s.dim = S.dim;
  s.side = S.side;
  s.horizon = S.t_end;
  s.replicas = S.replicas;
  s.seed = S.seed;
  s.rho_c = S.rho_c;
  s.rho_d = S.rho_d;
  s.density_floor = S.density_floor;
  s.jobs = S.jobs;
  const auto rows = sweep_phase_diagram(s);
  emit({{"sweep.csv", csv_preamble(meta()) + sweep_csv(rows)}});
}

void run_couple(const Settings& S) {
  MonotonicitySpec m;
  m.base = params(S);
  m.delta_c = S.delta_c;
  m.delta_d = S.delta_d;
  m.side = S.side;
  m.horizon = S.t_end;
  m.sample_interval = S.sample_interval;
  m.replicas = S.replicas;
  m.seed = active->s.seed;
  m.rho_c = S.rho_c;
  m.rho_d = S.rho_d;
  m.jobs = S.jobs;
  const MonotonicityReport r = monotonicity_check(m);
  ordered_json body;
  body["base"] = params_json(m.base);
  body["favored"] = params_json(r.favored);
  body["replicas"] = r.replicas;
  body["violations"] = r.violations;
  body["checks"] = r.checks;
  body["identical"] = r.identical;
  body["c_alive_favored"] = frequency_json(r.c_alive_favored);
  body["c_alive_base"] = frequency_json(r.c_alive_base);
  body["d_alive_favored"] = frequency_json(r.d_alive_favored);
  body["d_alive_base"] = frequency_json(r.d_alive_base);
  body["sigma_c"] = r.sigma_c;
  body["sigma_d"] = r.sigma_d;
  body["c_ordered"] = r.c_ordered;
  body["d_ordered"] = r.d_ordered;
  emit({{"couple.json", dump_json(with_meta(body))}});
}

void run_dual(const Settings& S) {
  const Params p = params(S);
  p.validate();
  const Torus torus(S.dim, S.side);
  if (S.site >= torus.size()) throw std::out_of_range("site outside the torus");
  const Flavor flavor = flavor_from_string(S.flavor);
  Rng rng = make_stream(S.seed, 0);
  const Configuration bottom = sample_product(torus, S.rho_c, S.rho_d, rng);
  const EventLog log = sample_event_log(p, torus, 0.0, S.t_end, rng, flavor, S.seed);
  const DualTree tree = build_dual(log, S.site, S.t_end);
  const Configuration top = evolve_from_log(bottom, log);

  std::ostringstream txt;
  txt << csv_preamble(meta()) << render_hierarchy(tree);
  txt << "# resolved from dual: " << to_string(resolve_type(tree, log, bottom)) << '\n';
  txt << "# forward evolution: " << to_char(top[S.site]) << '\n';
  std::vector<std::pair<std::string, std::string>> files{{"dual.txt", txt.str()}};
  if (S.write_log) {
    files.emplace_back("event_log.txt", serialize(log));
    files.emplace_back("bottom.txt", to_string(bottom) + "\n");
  }
  emit(files);
}

ordered_json block_record(const Settings& S, ordered_json spec, const Estimate& e, const char* ref_name,
                          double ref) {
  ordered_json body;
  body["spec"] = std::move(spec);
  body["estimate"] = e.estimate;
  body["stderr"] = e.stderr_;
  body["hits"] = e.hits;
  body["replicas"] = e.replicas;
  body["seed"] = S.seed;
  if (ref_name) body[ref_name] = ref;
  return with_meta(body);
}

void run_a1(const Settings& S) {
  const Estimate e = estimate_A1(S.T, S.dim, S.replicas, S.seed, S.jobs);
  emit({{"a1.json", dump_json(block_record(S, {{"T", S.T}, {"dim", S.dim}}, e, "closed_form",
                                           prob_A1(S.T, S.dim)))}});
}

void run_a2(const Settings& S) {
  const Params p = params(S);
  const Estimate e = estimate_A2(p, S.T, S.delta, S.replicas, S.seed, S.jobs);
  ordered_json spec{{"params", params_json(p)}, {"T", S.T}, {"delta", S.delta}, {"rate", rate_A2(p)}};
  emit({{"a2.json", dump_json(block_record(S, spec, e, "lower_bound", bound_A2(S.T, S.delta, p)))}});
}

void run_a3(const Settings& S) {
  const Params p = params(S);
  const Estimate e = estimate_A3(p, S.T, S.delta, S.replicas, S.seed, S.jobs);
  ordered_json spec{{"params", params_json(p)}, {"T", S.T}, {"delta", S.delta}};
  emit({{"a3.json", dump_json(block_record(S, spec, e, "lower_bound",
                                           prob_A3_bound(p.beta, p.beta_c, S.T, S.delta, p.dim)))}});
}

void run_cplus(const Settings& S) {
  const Estimate e = estimate_c_plus_absence(S.L, S.dim, S.rho, S.replicas, S.seed, S.jobs);
  emit({{"cplus.json", dump_json(block_record(S, {{"L", S.L}, {"dim", S.dim}, {"rho", S.rho}}, e,
                                              "closed_form", c_plus_absence_prob(S.L, S.dim, S.rho)))}});
}

void run_spread(const Settings& S) {
  Params p{S.beta, equal_rate_beta_c(S.beta_d, S.dim), S.beta_d, S.dim};
  BlockSpreadSpec s;
  s.L = S.L;
  s.subbox_side = S.subbox_side;
  s.exterior_rho_c = S.exterior_rho_c;
  s.replicas = S.replicas;
  s.seed = S.seed;
  s.jobs = S.jobs;
  const BlockSpreadResult r = block_spread_estimate(p, s);
  ordered_json spec{{"params", params_json(p)},
                    {"L", S.L},
                    {"T", static_cast<double>(S.L) * S.L},
                    {"subbox_side", r.subbox_side},
                    {"subboxes", r.subboxes},
                    {"torus_side", r.torus_side},
                    {"exterior_rho_c", S.exterior_rho_c}};
  emit({{"spread.json", dump_json(block_record(S, spec, r.spread, nullptr, 0.0))}});
}

void run_perc(const Settings& S) {
  PercolationSpec s;
  s.dim = S.dim;
  s.width = S.width;
  s.levels = S.levels;
  s.epsilon = S.epsilon;
  s.seed = S.seed;
  if (S.single_source) s.sources.push_back(std::vector<int>(static_cast<std::size_t>(S.dim), 0));
  const PercolationField f = percolate(s);
  ordered_json levels = ordered_json::array();
  for (int n = 0; n <= s.levels; ++n) {
    std::size_t dg = 0, dh = 0;
    for (char c : f.dry_reachable(n, PercolationGraph::G)) dg += c;
    for (char c : f.dry_reachable(n, PercolationGraph::H)) dh += c;
    levels.push_back({{"n", n},
                      {"sites", f.sites_at(n)},
                      {"wet", f.wet_count(n)},
                      {"dry_reachable_G", dg},
                      {"dry_reachable_H", dh}});
  }
  ordered_json body;
  body["spec"] = {{"dim", s.dim}, {"width", s.width}, {"levels", s.levels}, {"epsilon", s.epsilon},
                  {"single_source", S.single_source}};
  body["seed"] = S.seed;
  body["levels"] = levels;
  emit({{"perc.json", dump_json(with_meta(body))}, {"field.rle", f.dump_rle()}});
}

void run_sterile(const Settings& S) {
  const SterileEstimate e = estimate_sterile(S.beta, S.beta_c, S.dim, S.replicas, S.seed, S.jobs);
  ordered_json body;
  body["spec"] = {{"beta", S.beta}, {"beta_c", S.beta_c}, {"dim", S.dim}};
  body["estimate"] = e.estimate;
  body["stderr"] = e.stderr_;
  body["hits"] = e.sterile;
  body["replicas"] = e.samples;
  body["seed"] = S.seed;
  body["closed_form"] = sterile_probability(S.beta, S.beta_c);
  emit({{"sterile.json", dump_json(with_meta(body))}});
}

// --config FILE: flat key=value lines injected as --key=value unless the
// flag is already on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  auto present = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  std::vector<std::string> extra;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "command" || present(key)) continue;
    if (value == "true")
      extra.push_back("--" + key);
    else if (value != "false")
      extra.push_back("--" + key + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperator-defector contact process toolkit", "coop"};
  app.set_version_flag("--version", COOP_VERSION);
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::unique_ptr<Command>> commands;

  // `tune` adjusts the command's defaults before its options are bound.
  auto make = [&](CLI::App* parent, const std::string& name, const std::string& help,
                  void (*run)(const Settings&), const std::function<void(Settings&)>& tune = {})
      -> Command& {
    auto c = std::make_unique<Command>();
    if (tune) tune(c->s);
    c->app = parent->add_subcommand(name, help);
    c->path = parent == &app ? name : parent->get_name() + " " + name;
    c->run = run;
    Command* raw = c.get();
    c->app->callback([raw] { active = raw; });
    c->app->add_option("--out", c->s.out, "output directory (default: primary output to stdout)");
    c->app->add_option("--config", config_path, "flat key=value file; flags override it");
    commands.push_back(std::move(c));
    return *raw;
  };
  auto rates = [](Command& c, bool with_c = true, bool with_d = true) {
    c.opt("beta", c.s.beta, "base birth rate");
    if (with_c) c.opt("beta-c", c.s.beta_c, "cooperation benefit");
    if (with_d) c.opt("beta-d", c.s.beta_d, "defector bonus");
    c.opt("dim", c.s.dim, "lattice dimension");
  };
  auto seeded = [](Command& c) {
    c.opt("seed", c.s.seed, "master seed")->envname("COOP_SEED");
    c.app->add_option("--jobs", c.s.jobs, "worker threads")->capture_default_str();
  };

  {
    Command& c = make(&app, "meanfield", "integrate the mean-field ODE", run_meanfield,
                      [](Settings& s) { s.t_end = 500.0; });
    Settings& s = c.s;
    c.opt("beta", s.beta, "base birth rate (> 1)")->required();
    c.opt("beta-c", s.beta_c, "cooperation benefit");
    c.opt("beta-d", s.beta_d, "defector bonus");
    c.opt("x0", s.x0, "initial cooperator density");
    c.opt("y0", s.y0, "initial defector density");
    c.opt("t-end", s.t_end, "integration horizon");
    c.opt("dt", s.dt, "RK4 step");
    c.opt("stride", s.stride, "write every stride-th step");
    c.flag("phi-curve", s.phi_curve, "write the transition curve table instead");
    c.opt("beta-c-max", s.beta_c_max, "largest beta_c of the curve");
    c.opt("points", s.points, "rows of the curve");
  }
  {
    Command& c = make(&app, "simulate", "exact lattice simulation", run_simulate);
    Settings& s = c.s;
    rates(c);
    c.opt("side", s.side, "torus side");
    c.opt("t-end", s.t_end, "horizon");
    c.opt("rho-c", s.rho_c, "initial cooperator density");
    c.opt("rho-d", s.rho_d, "initial defector density");
    c.opt("sample-interval", s.sample_interval, "time series spacing");
    c.opt("replicas", s.replicas, "replicas for the survival summary");
    c.opt("density-floor", s.density_floor, "count <= floor * sites counts as extinct");
    seeded(c);
  }
  {
    Command& c = make(&app, "sweep", "phase-diagram sweep or critical bracket", run_sweep,
                      [](Settings& s) {
                        s.beta = 4.0;
                        s.beta_d = 1.0;
                        s.replicas = 100;
                        s.t_end = 200.0;
                      });
    Settings& s = c.s;
    c.opt("beta", s.beta, "base birth rate");
    c.opt("beta-c-grid", s.beta_c_grid, "comma-separated beta_c values")->delimiter(',');
    c.opt("beta-d-grid", s.beta_d_grid, "comma-separated beta_d values")->delimiter(',');
    c.opt("dim", s.dim, "lattice dimension");
    c.opt("side", s.side, "torus side");
    c.opt("t-end", s.t_end, "horizon");
    c.opt("replicas", s.replicas, "replicas per point");
    c.opt("rho-c", s.rho_c, "initial cooperator density");
    c.opt("rho-d", s.rho_d, "initial defector density");
    c.opt("density-floor", s.density_floor, "count <= floor * sites counts as extinct");
    c.flag("bracket", s.bracket, "bisect for the critical beta_c bracket instead");
    c.opt("beta-d", s.beta_d, "defector bonus for --bracket");
    c.opt("tau", s.tau, "win threshold");
    c.opt("lo", s.lo, "bracket search lower end");
    c.opt("hi", s.hi, "bracket search upper end");
    c.opt("tolerance", s.tolerance, "bisection tolerance");
    c.opt("budget", s.budget, "maximum survival estimates");
    seeded(c);
  }
  {
    Command& c = make(&app, "couple", "monotone coupling check", run_couple, [](Settings& s) {
      s.beta = 4.0;
      s.beta_c = 1.0;
      s.beta_d = 1.0;
      s.replicas = 100;
      s.t_end = 50.0;
    });
    Settings& s = c.s;
    rates(c);
    c.opt("delta-c", s.delta_c, "increase of beta_c");
    c.opt("delta-d", s.delta_d, "decrease of beta_d");
    c.opt("side", s.side, "torus side");
    c.opt("t-end", s.t_end, "horizon");
    c.opt("sample-interval", s.sample_interval, "full inclusion sweep spacing");
    c.opt("replicas", s.replicas, "replicas");
    c.opt("rho-c", s.rho_c, "initial cooperator density");
    c.opt("rho-d", s.rho_d, "initial defector density");
    seeded(c);
  }
  {
    Command& c = make(&app, "dual", "dual paths of one space-time point", run_dual, [](Settings& s) {
      s.beta_c = 1.0;
      s.beta_d = 1.0;
      s.side = 30;
      s.t_end = 5.0;
      s.rho_c = s.rho_d = 1.0 / 3.0;
    });
    Settings& s = c.s;
    rates(c);
    c.opt("side", s.side, "torus side");
    c.opt("t-end", s.t_end, "log window [0, t-end]; the dual starts at t-end");
    c.opt("site", s.site, "origin site index");
    c.opt("flavor", s.flavor, "standard or equal_rate");
    c.opt("rho-c", s.rho_c, "bottom cooperator density");
    c.opt("rho-d", s.rho_d, "bottom defector density");
    c.flag("write-log", s.write_log, "also write the event log and bottom configuration");
    seeded(c);
  }
  {
    CLI::App* blocks = app.add_subcommand("blocks", "block events and percolation");
    blocks->require_subcommand(1);
    auto many = [](Settings& s) { s.replicas = 100000; };
    {
      Command& c = make(blocks, "a1", "death marks on B-", run_a1, many);
      c.opt("T", c.s.T, "time scale");
      c.opt("dim", c.s.dim, "dimension");
      c.opt("replicas", c.s.replicas, "replicas");
      seeded(c);
    }
    {
      Command& c = make(blocks, "a2", "gap event on B+", run_a2, [](Settings& s) {
        s.replicas = 100000;
        s.beta_d = 1.0;
        s.T = 5.0;
      });
      rates(c, false, true);
      c.opt("T", c.s.T, "time scale");
      c.opt("delta", c.s.delta, "gap length");
      c.opt("replicas", c.s.replicas, "replicas");
      seeded(c);
    }
    {
      Command& c = make(blocks, "a3", "cooperator arrows into B+", run_a3, [](Settings& s) {
        s.replicas = 100000;
        s.beta_c = 2.0;
        s.delta = 1.0;
      });
      rates(c, true, false);
      c.opt("T", c.s.T, "time scale");
      c.opt("delta", c.s.delta, "interval length");
      c.opt("replicas", c.s.replicas, "replicas");
      seeded(c);
    }
    {
      Command& c = make(blocks, "cplus", "absence of c+ arrows", run_cplus, [](Settings& s) {
        s.replicas = 100000;
        s.L = 2;
      });
      c.opt("L", c.s.L, "spatial scale");
      c.opt("dim", c.s.dim, "dimension");
      c.opt("rho", c.s.rho, "c+ rate");
      c.opt("replicas", c.s.replicas, "replicas");
      seeded(c);
    }
    {
      Command& c = make(blocks, "spread", "defector block spread, equal-rate process", run_spread,
                        [](Settings& s) {
                          s.beta = 4.0;
                          s.beta_d = 1.0;
                          s.replicas = 200;
                        });
      rates(c, false, true);
      c.opt("L", c.s.L, "spatial scale, T = L^2");
      c.opt("subbox-side", c.s.subbox_side, "sub-box side (0: max(1, round(L^0.1)))");
      c.opt("exterior-rho-c", c.s.exterior_rho_c, "cooperator density outside B_0");
      c.opt("replicas", c.s.replicas, "replicas");
      seeded(c);
    }
    {
      Command& c = make(blocks, "perc", "oriented site percolation field", run_perc);
      c.opt("dim", c.s.dim, "dimension");
      c.opt("width", c.s.width, "half-width W");
      c.opt("levels", c.s.levels, "levels N");
      c.opt("epsilon", c.s.epsilon, "closure probability");
      c.flag("single-source", c.s.single_source, "only the origin is wet at level 0");
      seeded(c);
    }
  }
  {
    Command& c = make(&app, "sterile", "sterile dot-arrow frequency", run_sterile, [](Settings& s) {
      s.beta = 0.3;
      s.beta_c = 0.7;
      s.replicas = 100000;
    });
    c.opt("beta", c.s.beta, "base birth rate");
    c.opt("beta-c", c.s.beta_c, "cooperation benefit");
    c.opt("dim", c.s.dim, "dimension");
    c.opt("replicas", c.s.replicas, "samples");
    seeded(c);
  }

  auto fail = [](const std::exception& e, int code) {
    std::cerr << "error: " << e.what() << '\n';
    return code;
  };
  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* shown = &app;
    for (const CLI::App* sub = &app;;) {
      const auto got = sub->get_subcommands();
      if (got.empty()) break;
      shown = sub = got.front();
    }
    std::cerr << shown->help();
    return 2;
  } catch (const IoError& e) {
    return fail(e, 1);
  } catch (const std::exception& e) {
    return fail(e, 2);
  }

  try {
    active->run(active->s);
  } catch (const IoError& e) {
    return fail(e, 1);
  } catch (const std::invalid_argument& e) {
    return fail(e, 2);
  } catch (const std::domain_error& e) {
    return fail(e, 2);
  } catch (const std::out_of_range& e) {
    return fail(e, 2);
  } catch (const std::exception& e) {
    return fail(e, 1);
  }
  return 0;
}
