#include "brakefall/brake.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace brakefall {

Trajectory drop(const PlanarConfiguration& triangle, const MassSystem& sys, double t_max,
                double tol, const IntegrationOptions& opts, const EventSpec& events) {
  PhaseState start;
  start.positions = triangle;
  start.velocities.assign(triangle.size(), Vec2{});
  start.time = 0.0;
  start = reduce_to_center_of_mass(start, sys);
  return integrate(start, sys, t_max, tol, events, opts);
}

Distinctness distinctness_check(const PlanarConfiguration& a, const PlanarConfiguration& b,
                                const std::vector<double>& masses) {
  // Best direct (no swap, det +1) fit only.
  const int n = static_cast<int>(a.size());
  double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
  for (int i = 0; i < n; ++i) {
    m00 += masses[i] * b[i].x * a[i].x;
    m01 += masses[i] * b[i].x * a[i].y;
    m10 += masses[i] * b[i].y * a[i].x;
    m11 += masses[i] * b[i].y * a[i].y;
  }
  const Mat2 rot = Mat2::rotation(std::atan2(m10 - m01, m00 + m11));
  double res = 0.0;
  for (int i = 0; i < n; ++i) res += masses[i] * norm_sq(rot * a[i] - b[i]);
  const double scale = 0.5 * (moment_of_inertia(a, masses) + moment_of_inertia(b, masses));
  return res < 1e-6 * std::max(scale, 1e-300) ? Distinctness::SameLabelledShape
                                              : Distinctness::Distinct;
}

std::optional<BrakePair> detect_brake_pair(const Trajectory& traj) {
  if (traj.empty()) return std::nullopt;
  const PhaseState start = traj.initial_state();
  const double eps_v = 1e-6 * std::max(1.0, size_scale(start.positions));
  if (!is_braked(start, eps_v))
    throw std::invalid_argument("detect_brake_pair: trajectory does not start braked");

  const double t0 = traj.t_start();
  const double t_sep = 1e-6 * std::max(1.0, traj.t_end() - t0);

  std::vector<const EventRecord*> brakes;
  for (const EventRecord& ev : traj.events)
    if (ev.kind == EventKind::Brake && ev.time > t0 + t_sep) brakes.push_back(&ev);
  if (brakes.empty()) return std::nullopt;

  // Fundamental period: when the candidate equals the start as an exact
  // labelled configuration the true second triangle is an earlier brake.
  size_t pick = 0;
  const double scale = std::max(size_scale(start.positions), 1e-300);
  auto same_config = [&](const PlanarConfiguration& q) {
    return mass_metric_distance(start.positions, q, traj.sys.masses) <
           1e-8 * scale * std::sqrt(traj.sys.total_mass());
  };
  while (pick + 1 < brakes.size() && same_config(brakes[pick]->state.positions)) ++pick;
  if (same_config(brakes[pick]->state.positions) && pick == 0) {
    // Only brake found is the start itself; nothing between to report.
    if (brakes.size() == 1) return std::nullopt;
  }

  BrakePair pair;
  pair.first = start;
  pair.second = brakes[pick]->state;
  pair.half_period = brakes[pick]->time - t0;
  pair.period = 2.0 * pair.half_period;
  pair.same_labelled_shape =
      distinctness_check(start.positions, pair.second.positions, traj.sys.masses) ==
      Distinctness::SameLabelledShape;
  for (const EventRecord& ev : traj.events) {
    if (ev.kind == EventKind::TotalCollisionProximity && ev.time > t0 &&
        ev.time < brakes[pick]->time)
      pair.total_collision_between = true;
  }
  return pair;
}

double verify_periodicity(const PhaseState& initial, const MassSystem& sys, double period,
                          double tol, const IntegrationOptions& opts) {
  if (period == 0.0) return 0.0;
  if (period < 0.0) throw std::invalid_argument("period must be non-negative");
  IntegrationOptions o = opts;
  o.tol = tol;
  Trajectory traj = integrate(initial, sys, initial.time + period, tol, EventSpec::none(), o);
  if (!std::holds_alternative<Completed>(traj.status))
    throw std::runtime_error(std::string("integration stopped before the candidate period: ") +
                             status_name(traj.status));
  const PhaseState end = traj.final_state();
  double worst = 0.0;
  for (int a = 0; a < initial.size(); ++a) {
    worst = std::max(worst, norm(end.positions[a] - initial.positions[a]) +
                                norm(end.velocities[a] - initial.velocities[a]));
  }
  return worst;
}

double verify_periodicity(const Trajectory& traj, double period, double tol,
                          const IntegrationOptions& opts) {
  if (period == 0.0) return 0.0;
  if (!traj.empty() && traj.t_end() - traj.t_start() >= period) {
    const PhaseState start = traj.initial_state();
    const PhaseState end = dense_eval(traj, traj.t_start() + period);
    double worst = 0.0;
    for (int a = 0; a < start.size(); ++a) {
      worst = std::max(worst, norm(end.positions[a] - start.positions[a]) +
                                  norm(end.velocities[a] - start.velocities[a]));
    }
    return worst;
  }
  return verify_periodicity(traj.initial_state(), traj.sys, period, tol, opts);
}

}  // namespace brakefall
