#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coop/params.hpp"
#include "coop/rng.hpp"
#include "coop/torus.hpp"

namespace coop {

// Mark streams of the Harris construction.
//   arrow         y -> x, either type gives birth
//   cross         death at x
//   dot_arrow     y -> x with dot z ~ y; a cooperator at y needs a
//                 cooperator at z. In the equal-rate flavor a defector at y
//                 also gives birth through it.
//   c_arrow       equal-rate flavor only: the z = x part of the C stream
//   d_arrow       y -> x, defectors only
//   c_plus_arrow  coupled flavor: dot-arrow used by the first process only
//   d_plus_arrow  coupled flavor: d-arrow used by the second process only
enum class MarkKind : std::uint8_t {
  arrow,
  cross,
  c_arrow,
  dot_arrow,
  d_arrow,
  c_plus_arrow,
  d_plus_arrow,
};
constexpr std::size_t kMarkKinds = 7;

std::string to_string(MarkKind k);
MarkKind mark_kind_from_string(const std::string& s);

inline constexpr Site kNoSite = std::numeric_limits<Site>::max();

struct Mark {
  double time = 0.0;
  MarkKind kind = MarkKind::cross;
  Site target = 0;       // x
  Site source = kNoSite; // y
  Site dot = kNoSite;    // z

  bool operator==(const Mark&) const = default;
};

// Deterministic order for marks: time, then stream, then sites.
bool mark_before(const Mark& a, const Mark& b);

enum class Flavor : std::uint8_t { standard, equal_rate, coupled };
std::string to_string(Flavor f);
Flavor flavor_from_string(const std::string& s);

// Intensity per site tuple, indexed by MarkKind.
using Intensities = std::array<double, kMarkKinds>;

struct EventLog {
  Flavor flavor = Flavor::standard;
  Torus torus{1, 1};
  double t_start = 0.0;
  double t_end = 0.0;
  Params params;       // coupled: the cooperator-favored pair
  Params base;         // coupled: the other pair; otherwise equal to params
  Intensities intensities{};
  std::uint64_t seed = 0;
  std::vector<Mark> marks;  // sorted by mark_before
};

// Marks on [t_start, t_end) at the generator's intensities. Equal-rate needs
// beta_c = 2d beta_d / (2d - 1) to within 1e-12 (FlavorMismatch otherwise);
// the D stream is then carried by the z != x dot-arrows. The coupled flavor
// needs two parameter sets, see sample_coupled_log.
EventLog sample_event_log(const Params& p, const Torus& torus, double t_start, double t_end,
                          Rng& rng, Flavor flavor = Flavor::standard, std::uint64_t seed = 0);

// Shared streams at the smaller rates plus c+ and d+ difference streams.
// Needs equal beta and dim, favored.beta_c >= base.beta_c and
// favored.beta_d <= base.beta_d (CouplingOrder otherwise).
EventLog sample_coupled_log(const Params& favored, const Params& base, const Torus& torus,
                            double t_start, double t_end, Rng& rng, std::uint64_t seed = 0);

// Effect of one mark on a configuration. `coupled_role` selects the process
// of a coupled log: 0 for the favored one, 1 for the other.
bool apply_mark(Configuration& config, const Mark& m, Flavor flavor, int coupled_role = 0);

using MarkObserver = std::function<void(const Mark&, const Configuration&)>;

// Applies every mark with time <= t_stop (default: the whole log) to c0,
// which is read as the configuration at log.t_start.
Configuration evolve_from_log(Configuration c0, const EventLog& log,
                              std::optional<double> t_stop = std::nullopt,
                              const MarkObserver& observer = {});

// Ordering of the coupled pair at a site: c > e > d.
bool pair_allowed(SiteState favored, SiteState other);

struct CoupledResult {
  Configuration favored;
  Configuration other;
  std::size_t checks = 0;  // pair checks performed
};

// Both processes off one coupled log; the pair constraint is checked at
// every site initially and at each changed site after every mark.
// Throws InclusionViolation.
CoupledResult coupled_evolve(Configuration favored, Configuration other, const EventLog& log,
                             std::optional<double> t_stop = std::nullopt,
                             const std::function<void(double, const Configuration&,
                                                      const Configuration&)>& observer = {});

// The z = x part of the C stream, which can never fire.
EventLog remove_c_arrows(const EventLog& log);

// Sterile dot-arrow at time s with dot z: s - u < 1 < s - v < 2, where u is
// the last cross at z and v the last arrow, c-arrow, dot-arrow or c+ arrow
// pointing at z, both before s. Throws InsufficientHistory when the log
// window does not decide the condition, std::invalid_argument when the mark
// is not a dot-arrow.
bool classify_sterile(const EventLog& log, std::size_t mark_index);

double sterile_probability(double beta, double beta_c);

// Relabels every decidably sterile dot-arrow as a d-arrow. Classification is
// done on the input log, before any relabeling.
EventLog label_sterile(const EventLog& log, std::size_t* relabeled = nullptr);

struct SterileEstimate {
  std::size_t samples = 0;
  std::size_t sterile = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// Palm-type estimate: each sample draws an independent equal-rate log on
// [s - 2, s) with s = 2 and classifies one dot-arrow placed at time s, so
// samples are independent by construction. beta_d is set to the equal-rate
// value for beta_c.
SterileEstimate estimate_sterile(double beta, double beta_c, int dim, std::size_t samples,
                                 std::uint64_t seed, unsigned jobs = 1);

std::string serialize(const EventLog& log);
EventLog parse_event_log(const std::string& text);

// Dual paths. A path sits at `site` over real times (stop_time, start_time];
// dual time is origin_time minus real time.
struct DualPath {
  std::vector<int> index;  // hierarchy index, root is {1}
  Site site = 0;
  double start_time = 0.0;
  double stop_time = 0.0;
  bool stopped = false;  // ended at a cross rather than the window bottom
  int parent = -1;
  std::size_t via_mark = 0;  // arrow that spawned the path (unused for the root)
};

struct DualTree {
  Site origin_site = 0;
  double origin_time = 0.0;
  double window_start = 0.0;
  std::vector<DualPath> paths;  // lexicographic order of index

  // Sites on live paths at the given dual time, in hierarchy order.
  std::vector<Site> ancestors_at(double dual_time) const;
  // Paths reaching the window bottom, in hierarchy order.
  std::vector<std::size_t> bottom_paths() const;
};

// Marks a dual path can cross: everything but crosses, c-arrows, and
// c+ arrows (coupled logs are rejected by build_dual).
bool is_dual_arrow(MarkKind k);

// Traces all dual paths from (x, t). Throws FlavorMismatch for coupled logs
// and std::length_error past max_paths.
DualTree build_dual(const EventLog& log, Site x, double t, std::size_t max_paths = 1'000'000);

// One line per path in hierarchy order, indented by depth.
std::string render_hierarchy(const DualTree& tree);

enum class DualType : std::uint8_t { empty, cooperator, defector, indeterminate };
std::string to_string(DualType t);

// What the dual alone says about the state at the origin given the
// configuration at the window bottom. Empty when no bottom ancestor is
// occupied. Otherwise the first occupied ancestor in the hierarchy wins when
// every arrow on its chain is usable by its type regardless of dots;
// anything else is indeterminate.
DualType resolve_type(const DualTree& tree, const EventLog& log, const Configuration& bottom);

struct EquivalenceSpec {
  Params params;
  int side = 5;
  double t_probe = 2.0;
  std::size_t replicas = 100000;
  std::uint64_t seed = 1;
  double rho_c = 1.0 / 3.0;
  double rho_d = 1.0 / 3.0;
  double alpha = 0.01;
  unsigned jobs = 1;
};

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

struct EquivalenceReport {
  std::array<ChiSquare, 3> per_state;  // c, d, e
  // Histograms of the per-state count over replicas, bins 0..sites.
  std::array<std::vector<std::size_t>, 3> gillespie;
  std::array<std::vector<std::size_t>, 3> graphical;
  double threshold = 0.0;  // alpha / 3
  bool pass = false;
};

// Two-sample chi-square on binned counts; bins with fewer than 5 combined
// observations are pooled into their neighbor.
ChiSquare two_sample_chi_square(const std::vector<std::size_t>& a,
                                const std::vector<std::size_t>& b);

// Gillespie vs graphical evolution (standard flavor) from i.i.d. product
// starts; each engine uses its own streams.
EquivalenceReport distributional_equivalence_check(const EquivalenceSpec& spec);

}  // namespace coop
