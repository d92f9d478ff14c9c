#include "coop/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coop/io.hpp"

namespace coop::mean_field {

namespace {

void require_supercritical(double beta) {
  if (!(beta > 1.0)) throw DomainError("mean-field analysis requires beta > 1");
}

State add_scaled(const State& s, const Derivative& k, double h) {
  return {s.x + h * k.dx, s.y + h * k.dy};
}

State rk4_step(const State& s, const Params& p, double h) {
  const Derivative k1 = derivative(s, p);
  const Derivative k2 = derivative(add_scaled(s, k1, h / 2), p);
  const Derivative k3 = derivative(add_scaled(s, k2, h / 2), p);
  const Derivative k4 = derivative(add_scaled(s, k3, h), p);
  return {s.x + h / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx),
          s.y + h / 6 * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy)};
}

State clamp_to_simplex(State s, double t) {
  const double over = s.x + s.y - 1.0;
  if (s.x < -kSimplexTolerance || s.y < -kSimplexTolerance || over > kSimplexTolerance) {
    std::ostringstream msg;
    msg << "trajectory left the simplex at t=" << t << " (x=" << s.x << ", y=" << s.y
        << "); reduce dt";
    throw SimplexEscape(msg.str());
  }
  s.x = std::max(s.x, 0.0);
  s.y = std::max(s.y, 0.0);
  if (s.x + s.y > 1.0) {
    const double total = s.x + s.y;
    s.x /= total;
    s.y /= total;
  }
  return s;
}

void check_integration_args(const State& s0, double t_end, double dt) {
  if (!in_simplex(s0)) throw std::invalid_argument("initial state outside the simplex");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be nonnegative");
}

double l1(const Derivative& f) { return std::abs(f.dx) + std::abs(f.dy); }

}  // namespace

bool in_simplex(const State& s, double tol) {
  return s.x >= -tol && s.y >= -tol && s.x + s.y <= 1.0 + tol;
}

bool strictly_interior(const State& s) { return s.x > 0.0 && s.y > 0.0 && s.x + s.y < 1.0; }

Derivative derivative(const State& s, const Params& p) {
  const double empty = 1.0 - s.x - s.y;
  return {(p.beta + p.beta_c * s.x) * empty * s.x - s.x,
          (p.beta + p.beta_d) * empty * s.y - s.y};
}

std::vector<TrajectoryPoint> integrate(const State& s0, const Params& p, double t_end,
                                       double dt) {
  check_integration_args(s0, t_end, dt);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt));
  std::vector<TrajectoryPoint> out;
  out.reserve(steps + 1);
  out.push_back({0.0, s0});
  State s = s0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t_prev = static_cast<double>(i - 1) * dt;
    const double t_next = i == steps ? t_end : static_cast<double>(i) * dt;
    s = clamp_to_simplex(rk4_step(s, p, t_next - t_prev), t_next);
    out.push_back({t_next, s});
  }
  return out;
}

Convergence converge(const State& s0, const Params& p, double t_max, double dt) {
  check_integration_args(s0, t_max, dt);
  const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt));
  State s = s0;
  double t = 0.0;
  if (l1(derivative(s, p)) < kConvergenceTolerance) return {s, t, true};
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t_next = i == steps ? t_max : static_cast<double>(i) * dt;
    s = clamp_to_simplex(rk4_step(s, p, t_next - t), t_next);
    t = t_next;
    if (l1(derivative(s, p)) < kConvergenceTolerance) return {s, t, true};
  }
  return {s, t, false};
}

// Both roots and phi are evaluated in rationalized form: the textbook
// expressions lose all precision as beta_c -> 0.
double cooperator_root_high(double beta_c, double beta) {
  require_supercritical(beta);
  if (beta_c < 0.0) throw DomainError("beta_c must be nonnegative");
  const double sum = beta_c + beta;
  const double root_delta = std::sqrt(sum * sum - 4.0 * beta_c);
  return 2.0 * (beta - 1.0) / (root_delta + beta - beta_c);
}

double cooperator_root_low(double beta_c, double beta) {
  require_supercritical(beta);
  if (!(beta_c > 0.0)) throw DomainError("second cooperator root requires beta_c > 0");
  const double sum = beta_c + beta;
  const double root_delta = std::sqrt(sum * sum - 4.0 * beta_c);
  return (beta_c - beta - root_delta) / (2.0 * beta_c);
}

double phi(double beta_c, double beta) {
  require_supercritical(beta);
  if (beta_c < 0.0) throw DomainError("beta_c must be nonnegative");
  const double sum = beta_c + beta;
  const double root_delta = std::sqrt(sum * sum - 4.0 * beta_c);
  return 2.0 * beta_c * (beta - 1.0) / (root_delta + beta - beta_c);
}

std::vector<FixedPointReport> fixed_points(const Params& p) {
  require_supercritical(p.beta);
  std::vector<FixedPointReport> out;
  out.push_back({{0.0, 0.0}, FixedPointKind::extinction, true, Stability::unstable});

  const double y_star = 1.0 - 1.0 / (p.beta + p.beta_d);
  out.push_back({{0.0, y_star}, FixedPointKind::defector, true, Stability::stable});

  // beta_c = 0 degenerates to the linear equation beta (1 - x) = 1.
  const double x_high = p.beta_c > 0.0 ? cooperator_root_high(p.beta_c, p.beta)
                                       : 1.0 - 1.0 / p.beta;
  const double threshold = phi(p.beta_c, p.beta);
  Stability high_stability = Stability::indeterminate;
  if (p.beta_d < threshold - kRegimeTolerance) high_stability = Stability::stable;
  if (p.beta_d > threshold + kRegimeTolerance) high_stability = Stability::unstable;
  out.push_back({{x_high, 0.0}, FixedPointKind::cooperator_high, true, high_stability});

  if (p.beta_c > 0.0) {
    const double x_low = cooperator_root_low(p.beta_c, p.beta);
    out.push_back({{x_low, 0.0}, FixedPointKind::cooperator_low, in_simplex({x_low, 0.0}),
                   Stability::indeterminate});
  }
  return out;
}

Regime classify_regime(const Params& p) {
  const double threshold = phi(p.beta_c, p.beta);
  if (p.beta_d > threshold + kRegimeTolerance) return Regime::defectors_win;
  if (p.beta_d < threshold - kRegimeTolerance) return Regime::bistable;
  return Regime::boundary;
}

double dulac_divergence(const State& s, const Params& p) {
  if (s.x == 0.0 || s.y == 0.0) throw BoundaryError("Dulac function undefined on the axes");
  const double x2 = s.x * s.x;
  return -(p.beta_c * x2 + p.beta_d * s.y + (p.beta - 1.0)) / (x2 * s.y);
}

RootProbeReport interior_root_probe(const Params& p, const std::vector<State>& starts) {
  require_supercritical(p.beta);
  RootProbeReport report;
  constexpr int kMaxIter = 200;
  constexpr double kResidual = 1e-13;
  for (const State& start : starts) {
    if (!strictly_interior(start))
      throw std::invalid_argument("root probe starts must lie strictly inside the simplex");
    RootProbe probe{start, start, false, false, 0};
    State s = start;
    Derivative f = derivative(s, p);
    for (int it = 0; it < kMaxIter; ++it) {
      probe.iterations = it;
      if (l1(f) < kResidual) {
        probe.converged = true;
        break;
      }
      const double e = 1.0 - s.x - s.y;
      const double bx = p.beta + p.beta_c * s.x;
      const double by = p.beta + p.beta_d;
      // Jacobian of (f, g).
      const double a = p.beta_c * e * s.x - bx * s.x + bx * e - 1.0;
      const double b = -bx * s.x;
      const double c = -by * s.y;
      const double d = by * e - by * s.y - 1.0;
      const double det = a * d - b * c;
      if (det == 0.0 || !std::isfinite(det)) break;
      const double step_x = (d * f.dx - b * f.dy) / det;
      const double step_y = (-c * f.dx + a * f.dy) / det;
      double lambda = 1.0;
      bool improved = false;
      for (int half = 0; half < 40; ++half, lambda /= 2) {
        const State trial{s.x - lambda * step_x, s.y - lambda * step_y};
        const Derivative ft = derivative(trial, p);
        if (l1(ft) < l1(f)) {
          s = trial;
          f = ft;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (l1(f) < kResidual) probe.converged = true;
    probe.location = s;
    // Newton lands on boundary roots with a coordinate of order 1e-19.
    probe.interior = probe.converged && std::min({s.x, s.y, s.empty()}) > kBoundaryMargin;
    if (probe.interior) report.interior_roots.push_back(s);
    report.probes.push_back(probe);
  }
  return report;
}

std::string to_string(FixedPointKind k) {
  switch (k) {
    case FixedPointKind::extinction: return "extinction";
    case FixedPointKind::defector: return "defector";
    case FixedPointKind::cooperator_high: return "cooperator_high";
    case FixedPointKind::cooperator_low: return "cooperator_low";
  }
  return "?";
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::indeterminate: return "indeterminate";
  }
  return "?";
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::defectors_win: return "defectors_win";
    case Regime::bistable: return "bistable";
    case Regime::boundary: return "boundary";
  }
  return "?";
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj, std::size_t stride) {
  std::ostringstream out;
  out << "t,x,y\n";
  if (stride == 0) stride = 1;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i % stride != 0 && i + 1 != traj.size()) continue;
    out << fmt17(traj[i].t) << ',' << fmt17(traj[i].state.x) << ',' << fmt17(traj[i].state.y)
        << '\n';
  }
  return out.str();
}

}  // namespace coop::mean_field
