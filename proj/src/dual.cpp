#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "coop/graphical.hpp"
#include "coop/io.hpp"
#include "coop/lattice_process.hpp"
#include "coop/parallel.hpp"

namespace coop {

bool is_dual_arrow(MarkKind k) {
  switch (k) {
    case MarkKind::arrow:
    case MarkKind::dot_arrow:
    case MarkKind::d_arrow:
    case MarkKind::d_plus_arrow:
      return true;
    default:
      return false;
  }
}

DualTree build_dual(const EventLog& log, Site x, double t, std::size_t max_paths) {
  if (log.flavor == Flavor::coupled) throw FlavorMismatch("dual of a coupled log is not defined");
  if (x >= log.torus.size()) throw std::out_of_range("dual origin outside the torus");
  if (t < log.t_start || t > log.t_end) throw std::invalid_argument("dual origin outside the log window");

  // Per-site mark indices, in time order.
  const std::size_t n = log.torus.size();
  std::vector<std::vector<std::size_t>> crosses(n), inbound(n);
  for (std::size_t i = 0; i < log.marks.size(); ++i) {
    const Mark& m = log.marks[i];
    if (m.kind == MarkKind::cross)
      crosses[m.target].push_back(i);
    else if (is_dual_arrow(m.kind))
      inbound[m.target].push_back(i);
  }
  auto before = [&](const std::vector<std::size_t>& list, double time) {
    // first position whose mark time is >= time
    return std::lower_bound(list.begin(), list.end(), time,
                            [&](std::size_t i, double v) { return log.marks[i].time < v; });
  };

  DualTree tree;
  tree.origin_site = x;
  tree.origin_time = t;
  tree.window_start = log.t_start;
  std::vector<DualPath>& paths = tree.paths;
  paths.push_back({{1}, x, t, log.t_start, false, -1, 0});

  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t p = queue.front();
    queue.pop_front();
    const Site y = paths[p].site;
    const double top = paths[p].start_time;

    const auto& cr = crosses[y];
    auto it = before(cr, top);
    double bottom = log.t_start;
    if (it != cr.begin()) {
      bottom = log.marks[*std::prev(it)].time;
      paths[p].stopped = true;
    }
    paths[p].stop_time = bottom;

    const auto& in = inbound[y];
    auto hi = before(in, top);
    auto lo = std::upper_bound(in.begin(), hi, bottom,
                               [&](double v, std::size_t i) { return v < log.marks[i].time; });
    int child = 0;
    for (auto k = lo; k != hi; ++k) {
      if (paths.size() >= max_paths) throw std::length_error("dual tree exceeds max_paths");
      const Mark& m = log.marks[*k];
      DualPath c;
      c.index = paths[p].index;
      c.index.push_back(++child);
      c.site = m.source;
      c.start_time = m.time;
      c.stop_time = log.t_start;
      c.parent = static_cast<int>(p);
      c.via_mark = *k;
      paths.push_back(std::move(c));
      queue.push_back(paths.size() - 1);
    }
  }

  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return paths[a].index < paths[b].index; });
  std::vector<int> where(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) where[order[i]] = static_cast<int>(i);
  std::vector<DualPath> sorted;
  sorted.reserve(paths.size());
  for (std::size_t i : order) {
    DualPath q = std::move(paths[i]);
    if (q.parent >= 0) q.parent = where[static_cast<std::size_t>(q.parent)];
    sorted.push_back(std::move(q));
  }
  paths = std::move(sorted);
  return tree;
}

std::vector<Site> DualTree::ancestors_at(double dual_time) const {
  const double real = origin_time - dual_time;
  std::vector<Site> out;
  for (const DualPath& p : paths) {
    const bool above_bottom = p.stopped ? real > p.stop_time : real >= p.stop_time;
    if (above_bottom && real <= p.start_time) out.push_back(p.site);
  }
  return out;
}

std::vector<std::size_t> DualTree::bottom_paths() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < paths.size(); ++i)
    if (!paths[i].stopped) out.push_back(i);
  return out;
}

std::string render_hierarchy(const DualTree& tree) {
  std::ostringstream out;
  out << "# dual from site " << tree.origin_site << " at time " << fmt17(tree.origin_time) << '\n';
  for (const DualPath& p : tree.paths) {
    out << std::string(2 * (p.index.size() - 1), ' ') << '(';
    for (std::size_t i = 0; i < p.index.size(); ++i) out << (i ? "," : "") << p.index[i];
    out << ") site " << p.site << " dual [" << fmt17(tree.origin_time - p.start_time) << ", "
        << fmt17(tree.origin_time - p.stop_time) << "] " << (p.stopped ? "cross" : "bottom")
        << '\n';
  }
  out << "# bottom ancestors:";
  for (std::size_t i : tree.bottom_paths()) out << ' ' << tree.paths[i].site;
  out << '\n';
  return out.str();
}

std::string to_string(DualType t) {
  switch (t) {
    case DualType::empty: return "empty";
    case DualType::cooperator: return "cooperator";
    case DualType::defector: return "defector";
    case DualType::indeterminate: return "indeterminate";
  }
  return "?";
}

DualType resolve_type(const DualTree& tree, const EventLog& log, const Configuration& bottom) {
  for (std::size_t i : tree.bottom_paths()) {
    const SiteState s = bottom.at(tree.paths[i].site);
    if (s == SiteState::empty) continue;
    for (int p = static_cast<int>(i); tree.paths[p].parent >= 0; p = tree.paths[p].parent) {
      const MarkKind k = log.marks[tree.paths[p].via_mark].kind;
      bool usable = k == MarkKind::arrow;
      if (s == SiteState::defector)
        usable = usable || k == MarkKind::d_arrow ||
                 (k == MarkKind::dot_arrow && log.flavor == Flavor::equal_rate);
      if (!usable) return DualType::indeterminate;
    }
    return s == SiteState::cooperator ? DualType::cooperator : DualType::defector;
  }
  return DualType::empty;
}

ChiSquare two_sample_chi_square(const std::vector<std::size_t>& a,
                                const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("histograms differ in length");
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  ChiSquare out;
  if (na == 0 || nb == 0) return out;

  std::vector<std::pair<double, double>> bins;
  double ca = 0, cb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += static_cast<double>(a[i]);
    cb += static_cast<double>(b[i]);
    if (ca + cb >= 5) {
      bins.emplace_back(ca, cb);
      ca = cb = 0;
    }
  }
  if (ca + cb > 0) {
    if (bins.empty())
      bins.emplace_back(ca, cb);
    else {
      bins.back().first += ca;
      bins.back().second += cb;
    }
  }
  if (bins.size() < 2) return out;
  const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  for (const auto& [x, y] : bins) {
    const double diff = ka * x - kb * y;
    out.statistic += diff * diff / (x + y);
  }
  out.dof = static_cast<int>(bins.size()) - 1;
  const boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

EquivalenceReport distributional_equivalence_check(const EquivalenceSpec& spec) {
  spec.params.validate();
  if (spec.replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  if (!(spec.t_probe >= 0.0)) throw std::invalid_argument("t_probe must be nonnegative");
  const Torus torus(spec.params.dim, spec.side);
  const std::size_t sites = torus.size();

  std::vector<Counts> gil(spec.replicas), gra(spec.replicas);
  parallel_for(spec.replicas, spec.jobs, [&](std::size_t i) {
    {
      Rng rng = make_stream(spec.seed, 2 * i);
      LatticeProcess proc(torus, sample_product(torus, spec.rho_c, spec.rho_d, rng), spec.params);
      proc.advance_to(spec.t_probe, rng);
      gil[i] = proc.counts();
    }
    {
      Rng rng = make_stream(spec.seed, 2 * i + 1);
      Configuration c0 = sample_product(torus, spec.rho_c, spec.rho_d, rng);
      if (spec.t_probe > 0.0) {
        const EventLog log =
            sample_event_log(spec.params, torus, 0.0, spec.t_probe, rng, Flavor::standard);
        c0 = evolve_from_log(std::move(c0), log);
      }
      gra[i] = count_states(c0);
    }
  });

  EquivalenceReport rep;
  for (auto& h : rep.gillespie) h.assign(sites + 1, 0);
  for (auto& h : rep.graphical) h.assign(sites + 1, 0);
  for (std::size_t i = 0; i < spec.replicas; ++i) {
    ++rep.gillespie[0][gil[i].c];
    ++rep.gillespie[1][gil[i].d];
    ++rep.gillespie[2][gil[i].e];
    ++rep.graphical[0][gra[i].c];
    ++rep.graphical[1][gra[i].d];
    ++rep.graphical[2][gra[i].e];
  }
  rep.threshold = spec.alpha / 3.0;
  rep.pass = true;
  for (int s = 0; s < 3; ++s) {
    rep.per_state[s] = two_sample_chi_square(rep.gillespie[s], rep.graphical[s]);
    if (rep.per_state[s].p_value < rep.threshold) rep.pass = false;
  }
  return rep;
}

}  // namespace coop
