#include "coop/graphical.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "coop/io.hpp"
#include "coop/parallel.hpp"

namespace coop {

namespace {

constexpr const char* kKindNames[kMarkKinds] = {"arrow",   "cross",   "c_arrow", "dot_arrow",
                                                "d_arrow", "c_plus", "d_plus"};

std::size_t slot(MarkKind k) { return static_cast<std::size_t>(k); }

// How a stream's tuple index maps to sites.
enum class Layout { site, pair, triple, triple_back, triple_other };

struct Stream {
  MarkKind kind;
  Layout layout;
  double rate;  // per tuple
};

std::size_t tuple_count(const Torus& t, Layout layout) {
  const std::size_t n = t.size();
  const std::size_t deg = static_cast<std::size_t>(t.degree());
  switch (layout) {
    case Layout::site: return n;
    case Layout::pair: return n * deg;
    case Layout::triple: return n * deg * deg;
    case Layout::triple_back: return n * deg;
    case Layout::triple_other: return n * deg * (deg - 1);
  }
  return 0;
}

Mark decode(const Torus& t, const Stream& s, std::size_t i, double time) {
  const std::size_t deg = static_cast<std::size_t>(t.degree());
  Mark m;
  m.time = time;
  m.kind = s.kind;
  switch (s.layout) {
    case Layout::site:
      m.target = static_cast<Site>(i);
      break;
    case Layout::pair: {
      m.target = static_cast<Site>(i / deg);
      m.source = t.neighbor(m.target, static_cast<int>(i % deg));
      break;
    }
    case Layout::triple: {
      m.target = static_cast<Site>(i / (deg * deg));
      const std::size_t r = i % (deg * deg);
      m.source = t.neighbor(m.target, static_cast<int>(r / deg));
      m.dot = t.neighbor(m.source, static_cast<int>(r % deg));
      break;
    }
    case Layout::triple_back: {
      m.target = static_cast<Site>(i / deg);
      const int k = static_cast<int>(i % deg);
      m.source = t.neighbor(m.target, k);
      m.dot = t.neighbor(m.source, Torus::opposite(k));
      break;
    }
    case Layout::triple_other: {
      const std::size_t per = deg * (deg - 1);
      m.target = static_cast<Site>(i / per);
      const std::size_t r = i % per;
      const int k = static_cast<int>(r / (deg - 1));
      int k2 = static_cast<int>(r % (deg - 1));
      if (k2 >= Torus::opposite(k)) ++k2;
      m.source = t.neighbor(m.target, k);
      m.dot = t.neighbor(m.source, k2);
      break;
    }
  }
  return m;
}

// Superposition: a Poisson stream over all tuples at rate * tuples, each
// point assigned to a uniform tuple.
void sample_streams(EventLog& log, const std::vector<Stream>& streams, Rng& rng) {
  for (const Stream& s : streams) {
    log.intensities[slot(s.kind)] = s.rate;
    const std::size_t tuples = tuple_count(log.torus, s.layout);
    const double total = s.rate * static_cast<double>(tuples);
    if (!(total > 0.0)) continue;
    double t = log.t_start;
    for (;;) {
      t += exponential(rng, total);
      if (!(t < log.t_end)) break;
      std::size_t i = uniform_index(rng, tuples);
      if (i >= tuples) i = tuples - 1;
      log.marks.push_back(decode(log.torus, s, i, t));
    }
  }
  std::sort(log.marks.begin(), log.marks.end(), mark_before);
}

void check_window(double t_start, double t_end) {
  if (!(t_end > t_start)) throw std::invalid_argument("event log window must have t_end > t_start");
}

}  // namespace

std::string to_string(MarkKind k) { return kKindNames[slot(k)]; }

MarkKind mark_kind_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kMarkKinds; ++i)
    if (s == kKindNames[i]) return static_cast<MarkKind>(i);
  throw std::invalid_argument("unknown mark kind: " + s);
}

bool mark_before(const Mark& a, const Mark& b) {
  return std::tie(a.time, a.kind, a.target, a.source, a.dot) <
         std::tie(b.time, b.kind, b.target, b.source, b.dot);
}

std::string to_string(Flavor f) {
  switch (f) {
    case Flavor::standard: return "standard";
    case Flavor::equal_rate: return "equal_rate";
    case Flavor::coupled: return "coupled";
  }
  return "?";
}

Flavor flavor_from_string(const std::string& s) {
  if (s == "standard") return Flavor::standard;
  if (s == "equal_rate") return Flavor::equal_rate;
  if (s == "coupled") return Flavor::coupled;
  throw std::invalid_argument("unknown flavor: " + s);
}

EventLog sample_event_log(const Params& p, const Torus& torus, double t_start, double t_end,
                          Rng& rng, Flavor flavor, std::uint64_t seed) {
  p.validate();
  check_window(t_start, t_end);
  if (p.dim != torus.dim()) throw std::invalid_argument("params.dim does not match the torus");
  if (flavor == Flavor::coupled)
    throw FlavorMismatch("coupled logs need two parameter sets (sample_coupled_log)");
  const double two_d = 2.0 * p.dim;
  const double c_rate = p.beta_c / (two_d * two_d);

  EventLog log;
  log.flavor = flavor;
  log.torus = torus;
  log.t_start = t_start;
  log.t_end = t_end;
  log.params = p;
  log.base = p;
  log.seed = seed;

  std::vector<Stream> streams;
  streams.push_back({MarkKind::arrow, Layout::pair, p.beta / two_d});
  streams.push_back({MarkKind::cross, Layout::site, 1.0});
  if (flavor == Flavor::equal_rate) {
    const double want = equal_rate_beta_c(p.beta_d, p.dim);
    if (std::abs(p.beta_c - want) > 1e-12)
      throw FlavorMismatch("equal-rate construction needs beta_c = 2d beta_d / (2d - 1)");
    if (p.dim == 1 && torus.side() < 3)
      throw std::invalid_argument("equal-rate construction needs side >= 3 in d = 1");
    streams.push_back({MarkKind::c_arrow, Layout::triple_back, c_rate});
    streams.push_back({MarkKind::dot_arrow, Layout::triple_other, c_rate});
  } else {
    streams.push_back({MarkKind::dot_arrow, Layout::triple, c_rate});
    streams.push_back({MarkKind::d_arrow, Layout::pair, p.beta_d / two_d});
  }
  sample_streams(log, streams, rng);
  return log;
}

EventLog sample_coupled_log(const Params& favored, const Params& base, const Torus& torus,
                            double t_start, double t_end, Rng& rng, std::uint64_t seed) {
  favored.validate();
  base.validate();
  check_window(t_start, t_end);
  if (favored.beta != base.beta || favored.dim != base.dim)
    throw CouplingOrder("coupled parameter sets must share beta and dim");
  if (favored.beta_c < base.beta_c || favored.beta_d > base.beta_d)
    throw CouplingOrder("coupling needs favored.beta_c >= base.beta_c and favored.beta_d <= base.beta_d");
  if (favored.dim != torus.dim()) throw std::invalid_argument("params.dim does not match the torus");
  const double two_d = 2.0 * favored.dim;

  EventLog log;
  log.flavor = Flavor::coupled;
  log.torus = torus;
  log.t_start = t_start;
  log.t_end = t_end;
  log.params = favored;
  log.base = base;
  log.seed = seed;

  const std::vector<Stream> streams = {
      {MarkKind::arrow, Layout::pair, favored.beta / two_d},
      {MarkKind::cross, Layout::site, 1.0},
      {MarkKind::dot_arrow, Layout::triple, base.beta_c / (two_d * two_d)},
      {MarkKind::d_arrow, Layout::pair, favored.beta_d / two_d},
      {MarkKind::c_plus_arrow, Layout::triple, (favored.beta_c - base.beta_c) / (two_d * two_d)},
      {MarkKind::d_plus_arrow, Layout::pair, (base.beta_d - favored.beta_d) / two_d},
  };
  sample_streams(log, streams, rng);
  return log;
}

bool apply_mark(Configuration& config, const Mark& m, Flavor flavor, int coupled_role) {
  SiteState& x = config[m.target];
  if (m.kind == MarkKind::cross) {
    if (x == SiteState::empty) return false;
    x = SiteState::empty;
    return true;
  }
  if (x != SiteState::empty) return false;
  const SiteState y = config[m.source];
  SiteState born = SiteState::empty;
  switch (m.kind) {
    case MarkKind::arrow:
      born = y;
      break;
    case MarkKind::dot_arrow:
    case MarkKind::c_arrow:
      if (y == SiteState::cooperator && config[m.dot] == SiteState::cooperator)
        born = SiteState::cooperator;
      else if (y == SiteState::defector && flavor == Flavor::equal_rate &&
               m.kind == MarkKind::dot_arrow)
        born = SiteState::defector;
      break;
    case MarkKind::d_arrow:
      if (y == SiteState::defector) born = SiteState::defector;
      break;
    case MarkKind::c_plus_arrow:
      if (coupled_role == 0 && y == SiteState::cooperator &&
          config[m.dot] == SiteState::cooperator)
        born = SiteState::cooperator;
      break;
    case MarkKind::d_plus_arrow:
      if (coupled_role == 1 && y == SiteState::defector) born = SiteState::defector;
      break;
    case MarkKind::cross:
      break;
  }
  if (born == SiteState::empty) return false;
  x = born;
  return true;
}

Configuration evolve_from_log(Configuration c0, const EventLog& log, std::optional<double> t_stop,
                              const MarkObserver& observer) {
  if (log.flavor == Flavor::coupled)
    throw FlavorMismatch("coupled logs drive two processes (coupled_evolve)");
  if (c0.size() != log.torus.size())
    throw std::invalid_argument("configuration size does not match the log torus");
  const double stop = t_stop.value_or(log.t_end);
  for (const Mark& m : log.marks) {
    if (m.time > stop) break;
    apply_mark(c0, m, log.flavor);
    if (observer) observer(m, c0);
  }
  return c0;
}

bool pair_allowed(SiteState favored, SiteState other) {
  auto rank = [](SiteState s) {
    switch (s) {
      case SiteState::defector: return 0;
      case SiteState::empty: return 1;
      case SiteState::cooperator: return 2;
    }
    return 0;
  };
  return rank(favored) >= rank(other);
}

CoupledResult coupled_evolve(
    Configuration favored, Configuration other, const EventLog& log, std::optional<double> t_stop,
    const std::function<void(double, const Configuration&, const Configuration&)>& observer) {
  if (log.flavor != Flavor::coupled) throw FlavorMismatch("coupled_evolve needs a coupled log");
  if (favored.size() != log.torus.size() || other.size() != log.torus.size())
    throw std::invalid_argument("configuration size does not match the log torus");
  CoupledResult out;
  for (std::size_t x = 0; x < favored.size(); ++x) {
    ++out.checks;
    if (!pair_allowed(favored[x], other[x]))
      throw InclusionViolation("initial configurations violate the coupling order at site " +
                               std::to_string(x));
  }
  const double stop = t_stop.value_or(log.t_end);
  for (const Mark& m : log.marks) {
    if (m.time > stop) break;
    apply_mark(favored, m, Flavor::coupled, 0);
    apply_mark(other, m, Flavor::coupled, 1);
    ++out.checks;
    if (!pair_allowed(favored[m.target], other[m.target]))
      throw InclusionViolation("coupling order broken at site " + std::to_string(m.target) +
                               " time " + fmt17(m.time));
    if (observer) observer(m.time, favored, other);
  }
  out.favored = std::move(favored);
  out.other = std::move(other);
  return out;
}

EventLog remove_c_arrows(const EventLog& log) {
  EventLog out = log;
  std::erase_if(out.marks, [](const Mark& m) { return m.kind == MarkKind::c_arrow; });
  return out;
}

namespace {

bool points_at_dot(const Mark& m, Site z) {
  if (m.target != z) return false;
  switch (m.kind) {
    case MarkKind::arrow:
    case MarkKind::c_arrow:
    case MarkKind::dot_arrow:
    case MarkKind::c_plus_arrow:
      return true;
    default:
      return false;
  }
}

enum class Tri { no, yes, unknown };

}  // namespace

bool classify_sterile(const EventLog& log, std::size_t mark_index) {
  if (mark_index >= log.marks.size()) throw std::out_of_range("mark index past the log");
  const Mark& mark = log.marks[mark_index];
  if (mark.kind != MarkKind::dot_arrow || mark.dot == kNoSite)
    throw std::invalid_argument("classify_sterile needs a dot-arrow");
  const double s = mark.time;
  const Site z = mark.dot;

  std::optional<double> u, v;
  for (std::size_t j = mark_index; j-- > 0;) {
    const Mark& m = log.marks[j];
    if (m.time < s - 2.0) break;  // nothing older can change the answer
    if (!u && m.kind == MarkKind::cross && m.target == z) u = m.time;
    if (!v && points_at_dot(m, z)) v = m.time;
    if (u && v) break;
  }

  // s - u < 1
  Tri recent_death;
  if (u)
    recent_death = s - *u < 1.0 ? Tri::yes : Tri::no;
  else
    recent_death = s - 1.0 >= log.t_start ? Tri::no : Tri::unknown;

  // 1 < s - v and s - v < 2
  Tri quiet, not_too_quiet;
  if (v) {
    quiet = s - *v > 1.0 ? Tri::yes : Tri::no;
    not_too_quiet = s - *v < 2.0 ? Tri::yes : Tri::no;
  } else {
    quiet = s - 1.0 >= log.t_start ? Tri::yes : Tri::unknown;
    not_too_quiet = s - 2.0 >= log.t_start ? Tri::no : Tri::unknown;
  }

  const Tri parts[] = {recent_death, quiet, not_too_quiet};
  bool all_yes = true;
  for (Tri t : parts) {
    if (t == Tri::no) return false;
    if (t != Tri::yes) all_yes = false;
  }
  if (all_yes) return true;
  throw InsufficientHistory("log window too short to classify the dot-arrow at " + fmt17(s));
}

double sterile_probability(double beta, double beta_c) {
  const double r = beta + beta_c;
  if (!(r > 0.0)) throw std::invalid_argument("sterile_probability needs beta + beta_c > 0");
  return -std::expm1(-1.0) * -std::expm1(-r) * std::exp(-r);
}

EventLog label_sterile(const EventLog& log, std::size_t* relabeled) {
  EventLog out = log;
  std::size_t count = 0;
  for (std::size_t i = 0; i < log.marks.size(); ++i) {
    if (log.marks[i].kind != MarkKind::dot_arrow) continue;
    try {
      if (classify_sterile(log, i)) {
        out.marks[i].kind = MarkKind::d_arrow;
        ++count;
      }
    } catch (const InsufficientHistory&) {
    }
  }
  std::stable_sort(out.marks.begin(), out.marks.end(), mark_before);
  if (relabeled) *relabeled = count;
  return out;
}

SterileEstimate estimate_sterile(double beta, double beta_c, int dim, std::size_t samples,
                                 std::uint64_t seed, unsigned jobs) {
  if (dim < 1) throw std::invalid_argument("dim must be at least 1");
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  Params p;
  p.beta = beta;
  p.beta_c = beta_c;
  p.beta_d = beta_c * (2.0 * dim - 1.0) / (2.0 * dim);
  p.dim = dim;
  p.beta_c = equal_rate_beta_c(p.beta_d, dim);
  const Torus torus(dim, 3);
  const Site x = 0;
  const Site y = torus.neighbor(x, 0);
  const Site z = torus.neighbor(y, 0);
  constexpr double s = 2.0;

  std::vector<char> hit(samples, 0);
  parallel_for(samples, jobs, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    EventLog log = sample_event_log(p, torus, 0.0, s, rng, Flavor::equal_rate, seed);
    log.marks.push_back({s, MarkKind::dot_arrow, x, y, z});
    hit[i] = classify_sterile(log, log.marks.size() - 1);
  });
  SterileEstimate est;
  est.samples = samples;
  for (char h : hit) est.sterile += h;
  est.estimate = static_cast<double>(est.sterile) / static_cast<double>(samples);
  est.stderr_ = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(samples));
  return est;
}

namespace {

std::string site_field(Site s) { return s == kNoSite ? "-" : std::to_string(s); }

Site parse_site(const std::string& s) {
  if (s == "-") return kNoSite;
  return static_cast<Site>(std::stoul(s));
}

void write_params(std::ostream& out, const char* key, const Params& p) {
  out << key << ' ' << fmt17(p.beta) << ' ' << fmt17(p.beta_c) << ' ' << fmt17(p.beta_d) << ' '
      << p.dim << '\n';
}

std::istringstream expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("event log truncated before " + key);
  std::istringstream fields(line);
  std::string got;
  fields >> got;
  if (got != key) throw std::invalid_argument("event log: expected '" + key + "', got '" + got + "'");
  return fields;
}

double read_double(std::istream& in) {
  std::string s;
  if (!(in >> s)) throw std::invalid_argument("event log: missing number");
  return std::stod(s);
}

Params read_params(std::istream& in) {
  Params p;
  p.beta = read_double(in);
  p.beta_c = read_double(in);
  p.beta_d = read_double(in);
  if (!(in >> p.dim)) throw std::invalid_argument("event log: missing dim");
  return p;
}

}  // namespace

std::string serialize(const EventLog& log) {
  std::ostringstream out;
  out << "coop-event-log 1\n";
  out << "flavor " << to_string(log.flavor) << '\n';
  out << "torus " << log.torus.dim() << ' ' << log.torus.side() << '\n';
  out << "window " << fmt17(log.t_start) << ' ' << fmt17(log.t_end) << '\n';
  write_params(out, "params", log.params);
  write_params(out, "base", log.base);
  out << "intensities";
  for (std::size_t i = 0; i < kMarkKinds; ++i)
    out << ' ' << kKindNames[i] << '=' << fmt17(log.intensities[i]);
  out << '\n';
  out << "seed " << log.seed << '\n';
  out << "marks " << log.marks.size() << '\n';
  for (const Mark& m : log.marks)
    out << fmt17(m.time) << ' ' << to_string(m.kind) << ' ' << site_field(m.target) << ' '
        << site_field(m.source) << ' ' << site_field(m.dot) << '\n';
  return out.str();
}

EventLog parse_event_log(const std::string& text) {
  std::istringstream in(text);
  EventLog log;
  {
    auto f = expect_line(in, "coop-event-log");
    int version = 0;
    f >> version;
    if (version != 1) throw std::invalid_argument("event log: unsupported version");
  }
  {
    auto f = expect_line(in, "flavor");
    std::string s;
    f >> s;
    log.flavor = flavor_from_string(s);
  }
  {
    auto f = expect_line(in, "torus");
    int dim = 0, side = 0;
    f >> dim >> side;
    log.torus = Torus(dim, side);
  }
  {
    auto f = expect_line(in, "window");
    log.t_start = read_double(f);
    log.t_end = read_double(f);
  }
  {
    auto f = expect_line(in, "params");
    log.params = read_params(f);
  }
  {
    auto f = expect_line(in, "base");
    log.base = read_params(f);
  }
  {
    auto f = expect_line(in, "intensities");
    std::string kv;
    while (f >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("event log: bad intensity " + kv);
      log.intensities[slot(mark_kind_from_string(kv.substr(0, eq)))] = std::stod(kv.substr(eq + 1));
    }
  }
  {
    auto f = expect_line(in, "seed");
    f >> log.seed;
  }
  std::size_t count = 0;
  {
    auto f = expect_line(in, "marks");
    f >> count;
  }
  log.marks.reserve(count);
  std::string line;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::invalid_argument("event log: missing marks");
    std::istringstream f(line);
    std::string t, kind, a, b, c;
    if (!(f >> t >> kind >> a >> b >> c)) throw std::invalid_argument("event log: bad mark line");
    Mark m;
    m.time = std::stod(t);
    m.kind = mark_kind_from_string(kind);
    m.target = parse_site(a);
    m.source = parse_site(b);
    m.dot = parse_site(c);
    if (m.target >= log.torus.size() || (m.source != kNoSite && m.source >= log.torus.size()) ||
        (m.dot != kNoSite && m.dot >= log.torus.size()))
      throw std::invalid_argument("event log: site outside the torus");
    log.marks.push_back(m);
  }
  return log;
}

}  // namespace coop
