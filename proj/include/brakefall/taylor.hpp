#pragma once

#include <array>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "brakefall/dynamics.hpp"

namespace brakefall {

/// One integration step: Taylor coefficients of every position coordinate
/// about t0, valid on [t0, t0 + dt].
struct TaylorStep {
  double t0 = 0.0;
  double dt = 0.0;
  int order = 0;
  int n = 0;
  /// Flat layout, order-major: coeffs[(k*n + body)*2 + {0,1}].
  std::vector<double> coeffs;

  Vec2 coeff(int k, int body) const {
    const size_t i = (static_cast<size_t>(k) * n + body) * 2;
    return {coeffs[i], coeffs[i + 1]};
  }
  double t_end() const { return t0 + dt; }

  /// Horner evaluation of positions and velocities at local time tau ∈ [0, dt].
  void eval(double tau, std::vector<Vec2>& pos, std::vector<Vec2>& vel) const;
  /// Same, plus accelerations from the second-derivative series.
  void eval2(double tau, std::vector<Vec2>& pos, std::vector<Vec2>& vel,
             std::vector<Vec2>& acc) const;
  PhaseState state_at(double tau) const;
};

enum class EventKind { Brake, Syzygy, CloseApproach, Escape, TotalCollisionProximity };

const char* event_kind_name(EventKind k);

struct EventRecord {
  EventKind kind;
  double time = 0.0;
  PhaseState state;
  /// CloseApproach: the approaching pair. Escape: the bound pair.
  std::array<int, 2> pair{-1, -1};
  /// Escape: the unbound third body.
  int single = -1;
  /// Syzygy on a step where the area vanishes identically.
  bool collinear = false;
  /// Kind-dependent scalar: K at a brake, area at a syzygy, pair distance at a
  /// close approach, moment of inertia at a total-collision passage.
  double value = 0.0;
};

struct Completed {};
struct CollisionStop {
  std::array<int, 2> pair{-1, -1};
  double time = 0.0;
};
struct EscapeStop {
  double time = 0.0;
};
using RunStatus = std::variant<Completed, CollisionStop, EscapeStop>;

const char* status_name(const RunStatus& s);

struct EventSpec {
  bool brake = false;
  bool syzygy = false;
  bool close_approach = false;
  bool escape = false;
  bool total_collision = false;

  /// Close-approach threshold as a fraction of the initial size scale.
  double close_approach_rel = 1e-2;
  /// Brake threshold on kinetic energy as a fraction of |E(0)|.
  double brake_rel = 1e-12;
  /// Total-collision threshold on the moment of inertia relative to I(0).
  double total_collision_rel = 1e-10;
  /// Escape requires its partition test to hold over this many time units.
  double escape_horizon = 10.0;

  static EventSpec all() { return {true, true, true, true, true}; }
  static EventSpec none() { return {}; }
};

struct IntegrationOptions {
  int order = 25;
  double tol = 1e-14;
  /// Newtonian runs stop when min r_ab falls below this fraction of the
  /// initial size scale.
  double collision_rel = 1e-9;
  long max_steps = 8'000'000;
  /// Interior sample count used when scanning a step for events.
  int event_samples = 24;
};

struct Trajectory {
  MassSystem sys;
  std::vector<TaylorStep> steps;
  std::vector<EventRecord> events;
  RunStatus status = Completed{};

  double initial_energy = 0.0;
  double initial_inertia = 0.0;
  double initial_size = 0.0;

  bool empty() const { return steps.empty(); }
  double t_start() const { return steps.front().t0; }
  double t_end() const { return steps.back().t_end(); }
  PhaseState initial_state() const { return steps.front().state_at(0.0); }
  PhaseState final_state() const { return steps.back().state_at(steps.back().dt); }
};

/// Taylor coefficients of the solution through `state`, to the given order.
///
/// Newtonian: per pair, the squared distance s = |q_b−q_a|² and u = s^(−3/2)
/// are propagated alongside the positions; order k of the acceleration needs
/// positions only through order k, so each pass fills order k+2.
/// Hooke: the recurrence is linear in the position coefficients.
std::vector<double> taylor_coefficients(const PhaseState& state, const MassSystem& sys, int order);

/// Step length from the decay of the top two nonzero coefficient norms:
/// dt = 0.9 · min_k (tol / ‖c_k‖∞)^(1/k).
double taylor_step_size(const std::vector<double>& coeffs, int order, int n, double tol);

struct StepResult {
  TaylorStep step;
  PhaseState next;
  /// Set when the step size underflowed (state effectively at collision).
  bool dt_underflow = false;
};

StepResult adaptive_step(const PhaseState& state, const MassSystem& sys, double tol,
                         int order = 25, double dt_cap = 0.0);

Trajectory integrate(const PhaseState& initial, const MassSystem& sys, double t_end, double tol,
                     const EventSpec& events = EventSpec::none(),
                     const IntegrationOptions& opts = IntegrationOptions{});

/// Evaluates the containing step's polynomials at t; throws std::out_of_range
/// outside [t_start, t_end].
PhaseState dense_eval(const Trajectory& traj, double t);

/// Dense evaluation on a batch of times. Slots are independent, so the batch
/// is OpenMP-parallel; results are identical to the serial reference.
std::vector<PhaseState> sample_states(const Trajectory& traj, const std::vector<double>& times);
std::vector<PhaseState> sample_states_serial(const Trajectory& traj,
                                             const std::vector<double>& times);

std::vector<double> uniform_times(double t0, double t1, int count);

/// Scalar event function evaluated on a dense state; `d` receives the time
/// derivative when non-null.
using EventFn = std::function<double(const PhaseState&, const std::vector<Vec2>& acc)>;

/// Root of f on the step located by bisection to |Δt| ≤ 1e−12·max(1,|t|),
/// then polished with the secant rule. Returns absolute time.
std::optional<double> locate_sign_change(const TaylorStep& step, const EventFn& f, double lo,
                                         double hi);

/// Interior minima of f on [0, dt] from sign changes of df (− to +).
/// Returns absolute times.
std::vector<double> locate_minima(const TaylorStep& step, const EventFn& f, const EventFn& df,
                                  int samples);

}  // namespace brakefall
