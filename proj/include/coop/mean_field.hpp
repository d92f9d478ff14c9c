#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coop/params.hpp"

namespace coop::mean_field {

// Cooperator density x and defector density y; empty density is 1 - x - y.
struct State {
  double x = 0.0;
  double y = 0.0;

  double empty() const { return 1.0 - x - y; }
};

struct Derivative {
  double dx = 0.0;
  double dy = 0.0;
};

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kRegimeTolerance = 1e-12;
inline constexpr double kConvergenceTolerance = 1e-10;
// Converged probes closer than this to an axis or the diagonal are boundary roots.
inline constexpr double kBoundaryMargin = 1e-9;

bool in_simplex(const State& s, double tol = 0.0);
bool strictly_interior(const State& s);

Derivative derivative(const State& s, const Params& p);

struct TrajectoryPoint {
  double t;
  State state;
};

// Fixed-step classical RK4. Returns ceil(t_end/dt) + 1 points, the last one
// at t_end exactly. Throws SimplexEscape when a step leaves the simplex by
// more than kSimplexTolerance; smaller excursions are clamped.
std::vector<TrajectoryPoint> integrate(const State& s0, const Params& p, double t_end,
                                       double dt = 1e-3);

struct Convergence {
  State state;
  double t = 0.0;
  bool converged = false;  // |f|_1 < kConvergenceTolerance before t_max
};

// Integrates until the L1 norm of the vector field drops below
// kConvergenceTolerance or t_max is reached.
Convergence converge(const State& s0, const Params& p, double t_max, double dt = 1e-3);

// Transition curve; requires beta > 1. phi(0) is the limit value 0.
double phi(double beta_c, double beta);

// Larger and smaller roots of -beta_c x^2 + (beta_c - beta) x + beta - 1.
double cooperator_root_high(double beta_c, double beta);
double cooperator_root_low(double beta_c, double beta);

enum class FixedPointKind { extinction, defector, cooperator_high, cooperator_low };
enum class Stability { stable, unstable, indeterminate };

struct FixedPointReport {
  State location;
  FixedPointKind kind;
  bool in_simplex;
  Stability locally_stable;
};

std::vector<FixedPointReport> fixed_points(const Params& p);

enum class Regime { defectors_win, bistable, boundary };

Regime classify_regime(const Params& p);

// Divergence of (h f, h g) for h = 1 / (x^2 y). Throws BoundaryError on the
// axes.
double dulac_divergence(const State& s, const Params& p);

struct RootProbe {
  State start;
  State location;
  bool converged = false;
  bool interior = false;
  int iterations = 0;
};

struct RootProbeReport {
  std::vector<RootProbe> probes;
  std::vector<State> interior_roots;
};

// Damped Newton search for zeros of the vector field from each start.
RootProbeReport interior_root_probe(const Params& p, const std::vector<State>& starts);

std::string to_string(FixedPointKind k);
std::string to_string(Stability s);
std::string to_string(Regime r);

// Trajectory as CSV rows "t,x,y" with 17 significant digits, header included.
std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj, std::size_t stride = 1);

}  // namespace coop::mean_field
