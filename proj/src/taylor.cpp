#include "brakefall/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace brakefall {

namespace {

constexpr double kMinDistSq = 1e-280;

double dt_floor(double t) { return 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(t), 1.0); }

}  // namespace

void TaylorStep::eval(double tau, std::vector<Vec2>& pos, std::vector<Vec2>& vel) const {
  pos.assign(n, Vec2{});
  vel.assign(n, Vec2{});
  for (int k = order; k >= 0; --k)
    for (int a = 0; a < n; ++a) pos[a] = pos[a] * tau + coeff(k, a);
  for (int k = order; k >= 1; --k)
    for (int a = 0; a < n; ++a) vel[a] = vel[a] * tau + static_cast<double>(k) * coeff(k, a);
}

void TaylorStep::eval2(double tau, std::vector<Vec2>& pos, std::vector<Vec2>& vel,
                       std::vector<Vec2>& acc) const {
  eval(tau, pos, vel);
  acc.assign(n, Vec2{});
  for (int k = order; k >= 2; --k)
    for (int a = 0; a < n; ++a)
      acc[a] = acc[a] * tau + static_cast<double>(k) * static_cast<double>(k - 1) * coeff(k, a);
}

PhaseState TaylorStep::state_at(double tau) const {
  PhaseState s;
  s.time = t0 + tau;
  eval(tau, s.positions, s.velocities);
  return s;
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Brake: return "Brake";
    case EventKind::Syzygy: return "Syzygy";
    case EventKind::CloseApproach: return "CloseApproach";
    case EventKind::Escape: return "Escape";
    case EventKind::TotalCollisionProximity: return "TotalCollisionProximity";
  }
  return "?";
}

const char* status_name(const RunStatus& s) {
  if (std::holds_alternative<Completed>(s)) return "Completed";
  if (std::holds_alternative<CollisionStop>(s)) return "CollisionStop";
  return "EscapeStop";
}

std::vector<double> taylor_coefficients(const PhaseState& state, const MassSystem& sys,
                                        int order) {
  const int n = state.size();
  if (order < 2) throw std::invalid_argument("taylor order must be at least 2");
  const size_t stride = static_cast<size_t>(n) * 2;
  std::vector<double> c((order + 1) * stride, 0.0);
  auto set = [&](int k, int a, const Vec2& v) {
    c[k * stride + 2 * a] = v.x;
    c[k * stride + 2 * a + 1] = v.y;
  };
  auto get = [&](int k, int a) -> Vec2 { return {c[k * stride + 2 * a], c[k * stride + 2 * a + 1]}; };
  for (int a = 0; a < n; ++a) {
    set(0, a, state.positions[a]);
    set(1, a, state.velocities[a]);
  }

  const std::vector<double>& m = sys.masses;

  if (sys.newtonian()) {
    const double G = sys.gravity();
    struct Pair {
      int a, b;
    };
    std::vector<Pair> pairs;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) pairs.push_back({a, b});
    const int np = static_cast<int>(pairs.size());
    const int ords = order + 1;
    // Per-pair series: d = q_b - q_a, s = |d|^2, u = s^(-3/2).
    std::vector<Vec2> d(static_cast<size_t>(np) * ords);
    std::vector<double> s(static_cast<size_t>(np) * ords, 0.0);
    std::vector<double> u(static_cast<size_t>(np) * ords, 0.0);
    std::vector<Vec2> accum(n);

    for (int k = 0; k + 2 <= order; ++k) {
      for (int pi = 0; pi < np; ++pi) {
        const auto [a, b] = pairs[pi];
        Vec2* dp = &d[static_cast<size_t>(pi) * ords];
        double* sp = &s[static_cast<size_t>(pi) * ords];
        double* up = &u[static_cast<size_t>(pi) * ords];
        dp[k] = get(k, b) - get(k, a);
        double sk = 0.0;
        for (int j = 0; j <= k; ++j) sk += dot(dp[j], dp[k - j]);
        sp[k] = sk;
        if (k == 0) {
          if (sp[0] <= kMinDistSq) throw CollisionError(a, b);
          up[0] = std::pow(sp[0], -1.5);
        } else {
          // u = s^alpha  =>  k s0 u_k = sum_{j<k} (alpha (k-j) - j) s_{k-j} u_j
          double acc = 0.0;
          for (int j = 0; j < k; ++j) acc += (-1.5 * (k - j) - j) * sp[k - j] * up[j];
          up[k] = acc / (k * sp[0]);
        }
      }
      std::fill(accum.begin(), accum.end(), Vec2{});
      for (int pi = 0; pi < np; ++pi) {
        const auto [a, b] = pairs[pi];
        const Vec2* dp = &d[static_cast<size_t>(pi) * ords];
        const double* up = &u[static_cast<size_t>(pi) * ords];
        Vec2 conv;
        for (int j = 0; j <= k; ++j) conv += up[j] * dp[k - j];
        accum[a] += (G * m[b]) * conv;
        accum[b] -= (G * m[a]) * conv;
      }
      const double denom = static_cast<double>(k + 1) * static_cast<double>(k + 2);
      for (int a = 0; a < n; ++a) set(k + 2, a, accum[a] / denom);
    }
  } else {
    const HookeModel& h = sys.hooke();
    for (int k = 0; k + 2 <= order; ++k) {
      const double denom = static_cast<double>(k + 1) * static_cast<double>(k + 2);
      for (int a = 0; a < n; ++a) {
        Vec2 sum;
        for (int b = 0; b < n; ++b) {
          if (b == a) continue;
          sum += h.at(a, b) * (get(k, b) - get(k, a));
        }
        set(k + 2, a, (2.0 / m[a]) * sum / denom);
      }
    }
  }
  return c;
}

double taylor_step_size(const std::vector<double>& coeffs, int order, int n, double tol) {
  const size_t stride = static_cast<size_t>(n) * 2;
  auto inf_norm = [&](int k) {
    double v = 0.0;
    for (size_t i = 0; i < stride; ++i) v = std::max(v, std::fabs(coeffs[k * stride + i]));
    return v;
  };
  double dt = std::numeric_limits<double>::infinity();
  int used = 0;
  for (int k = order; k >= 2 && used < 2; --k) {
    const double nk = inf_norm(k);
    if (nk <= 0.0) continue;
    dt = std::min(dt, std::pow(tol / nk, 1.0 / k));
    ++used;
  }
  if (used == 0) return 1e30;
  return 0.9 * dt;
}

StepResult adaptive_step(const PhaseState& state, const MassSystem& sys, double tol, int order,
                         double dt_cap) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  StepResult r;
  r.step.t0 = state.time;
  r.step.order = order;
  r.step.n = state.size();
  r.step.coeffs = taylor_coefficients(state, sys, order);
  double dt = taylor_step_size(r.step.coeffs, order, r.step.n, tol);
  if (dt < dt_floor(state.time)) {
    r.dt_underflow = true;
    dt = dt_floor(state.time);
  }
  if (dt_cap > 0.0 && dt > dt_cap) {
    dt = dt_cap;
    r.dt_underflow = false;
  }
  r.step.dt = dt;
  r.next = r.step.state_at(dt);
  return r;
}

std::optional<double> locate_sign_change(const TaylorStep& step, const EventFn& f, double lo,
                                         double hi) {
  std::vector<Vec2> pos, vel, acc;
  auto value = [&](double tau) {
    step.eval2(tau, pos, vel, acc);
    PhaseState s{pos, vel, step.t0 + tau};
    return f(s, acc);
  };
  double fl = value(lo), fh = value(hi);
  if (fl == 0.0) return step.t0 + lo;
  if (fh == 0.0) return step.t0 + hi;
  if ((fl > 0.0) == (fh > 0.0)) return std::nullopt;
  const double target = 1e-13 * std::max(1.0, std::fabs(step.t0));
  for (int it = 0; it < 200 && (hi - lo) > target; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = value(mid);
    if (fm == 0.0) return step.t0 + mid;
    if ((fm > 0.0) == (fl > 0.0)) {
      lo = mid;
      fl = fm;
    } else {
      hi = mid;
      fh = fm;
    }
  }
  // Secant polish inside the bracket.
  double a = lo, b = hi, fa = fl, fb = fh;
  for (int it = 0; it < 4; ++it) {
    const double denom = fb - fa;
    if (denom == 0.0) break;
    const double c2 = b - fb * (b - a) / denom;
    if (!(c2 >= lo && c2 <= hi)) break;
    const double fc = value(c2);
    a = b;
    fa = fb;
    b = c2;
    fb = fc;
    if (fc == 0.0) break;
  }
  return step.t0 + b;
}

std::vector<double> locate_minima(const TaylorStep& step, const EventFn& f, const EventFn& df,
                                  int samples) {
  (void)f;
  std::vector<Vec2> pos, vel, acc;
  auto dvalue = [&](double tau) {
    step.eval2(tau, pos, vel, acc);
    PhaseState s{pos, vel, step.t0 + tau};
    return df(s, acc);
  };
  std::vector<double> out;
  double prev_tau = 0.0, prev = dvalue(0.0);
  for (int i = 1; i <= samples; ++i) {
    const double tau = step.dt * i / samples;
    const double cur = dvalue(tau);
    if (prev < 0.0 && cur >= 0.0) {
      auto root = locate_sign_change(step, df, prev_tau, tau);
      if (root) out.push_back(*root);
    }
    prev_tau = tau;
    prev = cur;
  }
  return out;
}

std::vector<double> uniform_times(double t0, double t1, int count) {
  std::vector<double> t(std::max(count, 2));
  const int last = static_cast<int>(t.size()) - 1;
  for (int i = 0; i <= last; ++i) t[i] = t0 + (t1 - t0) * i / last;
  t.back() = t1;
  return t;
}

namespace {

// ---------------------------------------------------------------------------
// Event machinery used by integrate().

struct SampledStep {
  std::vector<double> tau;
  std::vector<std::vector<Vec2>> pos, vel, acc;
};

void sample_step(const TaylorStep& step, int samples, double tau_max, SampledStep& out) {
  const int count = samples + 1;
  out.tau.resize(count);
  out.pos.resize(count);
  out.vel.resize(count);
  out.acc.resize(count);
  for (int i = 0; i < count; ++i) {
    out.tau[i] = tau_max * i / samples;
    step.eval2(out.tau[i], out.pos[i], out.vel[i], out.acc[i]);
  }
}

struct EscapeMonitor {
  int single = -1;
  double streak_start = 0.0;
  double last_sep = 0.0;
  bool active = false;
};

struct PartitionStatus {
  bool qualifies = false;
  double e_bind = 0.0;
  double e_rel = 0.0;
  double separation = 0.0;
  std::array<int, 2> pair{-1, -1};
  int single = -1;
};

PartitionStatus partition_test(const PhaseState& s, const MassSystem& sys, int i, int j, int k) {
  PartitionStatus p;
  p.pair = {i, j};
  p.single = k;
  const auto& m = sys.masses;
  const double G = sys.gravity();
  const Vec2 dr = s.positions[j] - s.positions[i];
  const Vec2 dv = s.velocities[j] - s.velocities[i];
  const double r = norm(dr);
  if (r <= 0.0) return p;
  const double mu = m[i] * m[j] / (m[i] + m[j]);
  p.e_bind = 0.5 * mu * norm_sq(dv) - G * m[i] * m[j] / r;
  const double mij = m[i] + m[j];
  const Vec2 bc = (m[i] * s.positions[i] + m[j] * s.positions[j]) / mij;
  const Vec2 vbc = (m[i] * s.velocities[i] + m[j] * s.velocities[j]) / mij;
  const Vec2 sep = s.positions[k] - bc;
  const Vec2 vsep = s.velocities[k] - vbc;
  p.separation = norm(sep);
  if (p.separation <= 0.0) return p;
  const double mu2 = m[k] * mij / (m[k] + mij);
  p.e_rel = 0.5 * mu2 * norm_sq(vsep) - G * mij * m[k] / p.separation;
  p.qualifies = p.e_bind < 0.0 && p.e_rel > 0.0;
  return p;
}

double inertia_about_com(const PlanarConfiguration& q, const std::vector<double>& m) {
  Vec2 com;
  double mt = 0.0;
  for (size_t a = 0; a < q.size(); ++a) {
    com += m[a] * q[a];
    mt += m[a];
  }
  com /= mt;
  double i = 0.0;
  for (size_t a = 0; a < q.size(); ++a) i += m[a] * norm_sq(q[a] - com);
  return i;
}

}  // namespace

Trajectory integrate(const PhaseState& initial, const MassSystem& sys, double t_end, double tol,
                     const EventSpec& events, const IntegrationOptions& opts) {
  sys.validate();
  const int n = initial.size();
  if (n != sys.size()) throw std::invalid_argument("state and mass system sizes differ");
  if (!(t_end > initial.time)) throw std::invalid_argument("t_end must exceed the initial time");

  Trajectory traj;
  traj.sys = sys;

  const ConservedQuantities c0 = conserved_quantities(initial, sys);
  traj.initial_energy = c0.energy;
  traj.initial_size = size_scale(initial.positions);
  traj.initial_inertia = inertia_about_com(initial.positions, sys.masses);

  const double eps_coll = opts.collision_rel * traj.initial_size;
  const double eps_close = events.close_approach_rel * traj.initial_size;
  const double eps_brake = events.brake_rel * std::fabs(c0.energy);
  const double eps_tc = events.total_collision_rel * traj.initial_inertia;

  const std::vector<double>& m = sys.masses;
  const double m_total = sys.total_mass();

  if (sys.newtonian() && min_pair_distance(initial.positions) < eps_coll) {
    int a = 0, b = 1;
    min_pair_distance(initial.positions, &a, &b);
    throw CollisionError(a, b);
  }

  auto push_event = [&](EventRecord ev) {
    for (const EventRecord& e : traj.events) {
      if (e.kind == ev.kind && std::fabs(e.time - ev.time) <= 1e-10 * std::max(1.0, std::fabs(ev.time)) &&
          e.pair == ev.pair)
        return;
    }
    traj.events.push_back(std::move(ev));
  };

  // Event functions on dense states.
  auto fn_kinetic = [&](const PhaseState& s, const std::vector<Vec2>&) {
    return kinetic_energy(s.velocities, m);
  };
  auto fn_kinetic_rate = [&](const PhaseState& s, const std::vector<Vec2>& acc) {
    double r = 0.0;
    for (int a = 0; a < n; ++a) r += m[a] * dot(s.velocities[a], acc[a]);
    return r;
  };
  auto fn_area = [&](const PhaseState& s, const std::vector<Vec2>&) {
    return signed_area(s.positions);
  };
  auto fn_inertia = [&](const PhaseState& s, const std::vector<Vec2>&) {
    return inertia_about_com(s.positions, m);
  };
  auto fn_inertia_rate = [&](const PhaseState& s, const std::vector<Vec2>&) {
    Vec2 com, vcom;
    for (int a = 0; a < n; ++a) {
      com += m[a] * s.positions[a];
      vcom += m[a] * s.velocities[a];
    }
    com /= m_total;
    vcom /= m_total;
    double r = 0.0;
    for (int a = 0; a < n; ++a)
      r += 2.0 * m[a] * dot(s.positions[a] - com, s.velocities[a] - vcom);
    return r;
  };

  PhaseState state = initial;

  if (events.brake && fn_kinetic(state, {}) <= eps_brake) {
    EventRecord ev;
    ev.kind = EventKind::Brake;
    ev.time = state.time;
    ev.state = state;
    ev.value = fn_kinetic(state, {});
    push_event(std::move(ev));
  }

  EscapeMonitor escape;
  SampledStep scan;
  const int samples = std::max(opts.event_samples, 8);

  for (long step_count = 0;; ++step_count) {
    if (step_count >= opts.max_steps) throw std::runtime_error("integration exceeded max_steps");

    const double dt_cap = t_end - state.time;
    StepResult sr;
    try {
      sr = adaptive_step(state, sys, tol, opts.order, dt_cap);
    } catch (const CollisionError& ce) {
      traj.status = CollisionStop{{ce.body_a, ce.body_b}, state.time};
      break;
    }
    if (sr.dt_underflow) {
      int a = 0, b = 1;
      min_pair_distance(state.positions, &a, &b);
      traj.status = CollisionStop{{a, b}, state.time};
      break;
    }
    TaylorStep step = sr.step;
    const bool landing = step.dt >= dt_cap - dt_floor(state.time);

    sample_step(step, samples, step.dt, scan);

    // Newtonian collision stop: earliest downward crossing of any r_ab
    // through eps_coll truncates the step.
    double stop_tau = -1.0;
    std::array<int, 2> stop_pair{-1, -1};
    if (sys.newtonian() && eps_coll > 0.0) {
      const double eps2 = eps_coll * eps_coll;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          for (int i = 1; i < static_cast<int>(scan.tau.size()); ++i) {
            const double r2_prev = norm_sq(scan.pos[i - 1][b] - scan.pos[i - 1][a]);
            const double r2_cur = norm_sq(scan.pos[i][b] - scan.pos[i][a]);
            if (r2_prev > eps2 && r2_cur <= eps2) {
              auto fn = [&, a, b](const PhaseState& s, const std::vector<Vec2>&) {
                return norm_sq(s.positions[b] - s.positions[a]) - eps2;
              };
              auto root = locate_sign_change(step, fn, scan.tau[i - 1], scan.tau[i]);
              const double tau = root ? *root - step.t0 : scan.tau[i];
              if (stop_tau < 0.0 || tau < stop_tau) {
                stop_tau = tau;
                stop_pair = {a, b};
              }
              break;
            }
          }
        }
    }

    bool stopping = stop_tau >= 0.0;
    if (stopping) {
      step.dt = stop_tau;
      sample_step(step, samples, step.dt, scan);
    }

    // Brake: minima of K below threshold.
    if (events.brake && step.dt > 0.0) {
      for (double t_ev : locate_minima(step, fn_kinetic, fn_kinetic_rate, samples)) {
        PhaseState s_ev = step.state_at(t_ev - step.t0);
        const double k_ev = kinetic_energy(s_ev.velocities, m);
        if (k_ev <= eps_brake) {
          EventRecord ev;
          ev.kind = EventKind::Brake;
          ev.time = t_ev;
          ev.state = std::move(s_ev);
          ev.value = k_ev;
          push_event(std::move(ev));
        }
      }
    }

    // Syzygy: area sign changes; a step on which the area vanishes
    // identically is flagged collinear and reported once at the step start.
    if (events.syzygy && n == 3 && step.dt > 0.0) {
      bool all_tiny = true;
      for (size_t i = 0; i < scan.tau.size() && all_tiny; ++i) {
        const double sz = size_scale(scan.pos[i]);
        if (std::fabs(signed_area(scan.pos[i])) > 1e-12 * sz * sz) all_tiny = false;
      }
      if (all_tiny) {
        EventRecord ev;
        ev.kind = EventKind::Syzygy;
        ev.time = step.t0;
        ev.state = step.state_at(0.0);
        ev.collinear = true;
        ev.value = signed_area(ev.state.positions);
        push_event(std::move(ev));
      } else {
        for (int i = 1; i < static_cast<int>(scan.tau.size()); ++i) {
          const double prev = signed_area(scan.pos[i - 1]);
          const double cur = signed_area(scan.pos[i]);
          if (prev == 0.0 || (prev > 0.0) != (cur > 0.0)) {
            auto root = locate_sign_change(step, fn_area, scan.tau[i - 1], scan.tau[i]);
            if (root) {
              EventRecord ev;
              ev.kind = EventKind::Syzygy;
              ev.time = *root;
              ev.state = step.state_at(*root - step.t0);
              ev.value = signed_area(ev.state.positions);
              push_event(std::move(ev));
            }
          }
        }
      }
    }

    // Close approaches: minima of each pair distance below threshold.
    if (events.close_approach && step.dt > 0.0) {
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          auto fn_r2 = [&, a, b](const PhaseState& s, const std::vector<Vec2>&) {
            return norm_sq(s.positions[b] - s.positions[a]);
          };
          auto fn_r2_rate = [&, a, b](const PhaseState& s, const std::vector<Vec2>&) {
            return 2.0 * dot(s.positions[b] - s.positions[a], s.velocities[b] - s.velocities[a]);
          };
          for (double t_ev : locate_minima(step, fn_r2, fn_r2_rate, samples)) {
            PhaseState s_ev = step.state_at(t_ev - step.t0);
            const double r = norm(s_ev.positions[b] - s_ev.positions[a]);
            if (r <= eps_close) {
              EventRecord ev;
              ev.kind = EventKind::CloseApproach;
              ev.time = t_ev;
              ev.state = std::move(s_ev);
              ev.pair = {a, b};
              ev.value = r;
              push_event(std::move(ev));
            }
          }
        }
    }

    // Total-collision proximity: minima of the moment of inertia.
    if (events.total_collision && eps_tc > 0.0 && step.dt > 0.0) {
      for (double t_ev : locate_minima(step, fn_inertia, fn_inertia_rate, samples)) {
        PhaseState s_ev = step.state_at(t_ev - step.t0);
        const double i_ev = inertia_about_com(s_ev.positions, m);
        if (i_ev <= eps_tc) {
          EventRecord ev;
          ev.kind = EventKind::TotalCollisionProximity;
          ev.time = t_ev;
          ev.state = std::move(s_ev);
          ev.value = i_ev;
          push_event(std::move(ev));
        }
      }
    }

    PhaseState next = stopping ? step.state_at(step.dt) : sr.next;
    if (!stopping && landing) next.time = t_end;

    if (step.dt > 0.0) traj.steps.push_back(step);

    if (stopping) {
      const double t_stop = step.t0 + step.dt;
      if (events.total_collision && eps_tc > 0.0 &&
          inertia_about_com(next.positions, m) <= eps_tc) {
        EventRecord ev;
        ev.kind = EventKind::TotalCollisionProximity;
        ev.time = t_stop;
        ev.state = next;
        ev.value = inertia_about_com(next.positions, m);
        push_event(std::move(ev));
      } else if (events.close_approach) {
        EventRecord ev;
        ev.kind = EventKind::CloseApproach;
        ev.time = t_stop;
        ev.state = next;
        ev.pair = stop_pair;
        ev.value = norm(next.positions[stop_pair[1]] - next.positions[stop_pair[0]]);
        push_event(std::move(ev));
      }
      traj.status = CollisionStop{stop_pair, t_stop};
      break;
    }

    // Escape: hierarchical partition test at step ends, required to hold with
    // monotonically growing separation over the horizon.
    if (events.escape && sys.newtonian() && n == 3) {
      PartitionStatus best;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        PartitionStatus p = partition_test(next, sys, std::min(i, j), std::max(i, j), k);
        if (p.qualifies && (!best.qualifies || p.e_bind < best.e_bind)) best = p;
      }
      if (!best.qualifies) {
        escape.active = false;
      } else if (!escape.active || escape.single != best.single) {
        escape = {best.single, next.time, best.separation, true};
      } else if (best.separation > escape.last_sep) {
        escape.last_sep = best.separation;
        if (next.time - escape.streak_start >= events.escape_horizon) {
          EventRecord ev;
          ev.kind = EventKind::Escape;
          ev.time = next.time;
          ev.state = next;
          ev.pair = best.pair;
          ev.single = best.single;
          ev.value = best.e_rel;
          push_event(std::move(ev));
          traj.status = EscapeStop{next.time};
          state = next;
          break;
        }
      } else {
        escape = {best.single, next.time, best.separation, true};
      }
    }

    state = next;
    if (state.time >= t_end) {
      traj.status = Completed{};
      break;
    }
  }

  std::stable_sort(traj.events.begin(), traj.events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });
  return traj;
}

PhaseState dense_eval(const Trajectory& traj, double t) {
  if (traj.empty()) throw std::out_of_range("empty trajectory");
  const double slack = 1e-9 * std::max(1.0, std::fabs(t));
  if (t < traj.t_start() - slack || t > traj.t_end() + slack)
    throw std::out_of_range("time outside trajectory span");
  // First step whose start exceeds t, minus one.
  auto it = std::upper_bound(traj.steps.begin(), traj.steps.end(), t,
                             [](double v, const TaylorStep& s) { return v < s.t0; });
  const TaylorStep& step = it == traj.steps.begin() ? *it : *(it - 1);
  double tau = std::clamp(t - step.t0, 0.0, step.dt);
  return step.state_at(tau);
}

std::vector<PhaseState> sample_states_serial(const Trajectory& traj,
                                             const std::vector<double>& times) {
  std::vector<PhaseState> out(times.size());
  for (size_t i = 0; i < times.size(); ++i) out[i] = dense_eval(traj, times[i]);
  return out;
}

std::vector<PhaseState> sample_states(const Trajectory& traj, const std::vector<double>& times) {
  if (times.size() < 64) return sample_states_serial(traj, times);
  for (double t : times) {
    const double slack = 1e-9 * std::max(1.0, std::fabs(t));
    if (t < traj.t_start() - slack || t > traj.t_end() + slack)
      throw std::out_of_range("time outside trajectory span");
  }
  std::vector<PhaseState> out(times.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(times.size()); ++i)
    out[i] = dense_eval(traj, times[i]);
  return out;
}

}  // namespace brakefall
