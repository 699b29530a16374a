#include "brakefall/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace brakefall {

namespace {

// Pair loops switch to OpenMP above this body count; below it the serial
// reference path is used, which keeps small-n results bit-identical to it.
constexpr int kParallelMinBodies = 32;

constexpr double kMinDistSq = 1e-280;

}  // namespace

double MassSystem::total_mass() const {
  double m = 0.0;
  for (double mi : masses) m += mi;
  return m;
}

void MassSystem::validate() const {
  const int n = size();
  if (n < 2) throw std::invalid_argument("mass system needs at least two bodies");
  for (int a = 0; a < n; ++a) {
    if (!(masses[a] > 0.0) || !std::isfinite(masses[a]))
      throw std::invalid_argument("mass " + std::to_string(a + 1) + " must be positive");
  }
  if (newtonian()) {
    if (!(gravity() > 0.0) || !std::isfinite(gravity()))
      throw std::invalid_argument("G must be positive");
  } else {
    const HookeModel& h = hooke();
    if (h.n != n || h.k.size() != static_cast<size_t>(n) * n)
      throw std::invalid_argument("spring matrix size does not match body count");
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        if (h.at(a, b) != h.at(b, a))
          throw std::invalid_argument("spring matrix must be symmetric");
        if (!(h.at(a, b) > 0.0) || !std::isfinite(h.at(a, b)))
          throw std::invalid_argument("spring constants must be positive");
      }
  }
}

MassSystem MassSystem::make_newtonian(std::vector<double> masses, double G) {
  MassSystem sys{std::move(masses), NewtonianModel{G}};
  sys.validate();
  return sys;
}

MassSystem MassSystem::make_hooke(std::vector<double> masses, double uniform_k) {
  const int n = static_cast<int>(masses.size());
  MassSystem sys{std::move(masses), HookeModel(n, uniform_k)};
  sys.validate();
  return sys;
}

MassSystem MassSystem::make_hooke(std::vector<double> masses, std::vector<double> k_matrix) {
  const int n = static_cast<int>(masses.size());
  MassSystem sys{std::move(masses), HookeModel(n, std::move(k_matrix))};
  sys.validate();
  return sys;
}

double potential_energy_serial(const PlanarConfiguration& q, const MassSystem& sys) {
  const int n = static_cast<int>(q.size());
  double v = 0.0;
  if (sys.newtonian()) {
    const double G = sys.gravity();
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const double r2 = norm_sq(q[b] - q[a]);
        if (r2 <= kMinDistSq) throw CollisionError(a, b);
        v -= G * sys.masses[a] * sys.masses[b] / std::sqrt(r2);
      }
  } else {
    const HookeModel& h = sys.hooke();
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) v += h.at(a, b) * norm_sq(q[b] - q[a]);
  }
  return v;
}

double potential_energy(const PlanarConfiguration& q, const MassSystem& sys) {
  const int n = static_cast<int>(q.size());
  if (n < kParallelMinBodies) return potential_energy_serial(q, sys);

  // Per-thread partial sums combined in thread order, so the result is
  // reproducible for a fixed thread count.
  const int nthreads = omp_get_max_threads();
  std::vector<double> partial(nthreads, 0.0);
  int collision_a = -1, collision_b = -1;
  if (sys.newtonian()) {
    const double G = sys.gravity();
#pragma omp parallel num_threads(nthreads)
    {
      const int tid = omp_get_thread_num();
      double local = 0.0;
#pragma omp for schedule(static)
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          const double r2 = norm_sq(q[b] - q[a]);
          if (r2 <= kMinDistSq) {
#pragma omp critical
            {
              collision_a = a;
              collision_b = b;
            }
            continue;
          }
          local -= G * sys.masses[a] * sys.masses[b] / std::sqrt(r2);
        }
      }
      partial[tid] = local;
    }
    if (collision_a >= 0) throw CollisionError(collision_a, collision_b);
  } else {
    const HookeModel& h = sys.hooke();
#pragma omp parallel num_threads(nthreads)
    {
      const int tid = omp_get_thread_num();
      double local = 0.0;
#pragma omp for schedule(static)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) local += h.at(a, b) * norm_sq(q[b] - q[a]);
      partial[tid] = local;
    }
  }
  double v = 0.0;
  for (double p : partial) v += p;
  return v;
}

namespace {

inline Vec2 newtonian_acc_one(const PlanarConfiguration& q, const std::vector<double>& m, double G,
                              int a, int* col_a, int* col_b) {
  const int n = static_cast<int>(q.size());
  Vec2 acc;
  for (int b = 0; b < n; ++b) {
    if (b == a) continue;
    const Vec2 d = q[b] - q[a];
    const double r2 = norm_sq(d);
    if (r2 <= kMinDistSq) {
      *col_a = std::min(a, b);
      *col_b = std::max(a, b);
      return acc;
    }
    const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
    acc += (G * m[b] * inv_r3) * d;
  }
  return acc;
}

inline Vec2 hooke_acc_one(const PlanarConfiguration& q, const std::vector<double>& m,
                          const HookeModel& h, int a) {
  const int n = static_cast<int>(q.size());
  Vec2 sum;
  for (int b = 0; b < n; ++b) {
    if (b == a) continue;
    sum += h.at(a, b) * (q[b] - q[a]);
  }
  return (2.0 / m[a]) * sum;
}

}  // namespace

std::vector<Vec2> accelerations_serial(const PlanarConfiguration& q, const MassSystem& sys) {
  const int n = static_cast<int>(q.size());
  std::vector<Vec2> acc(n);
  int ca = -1, cb = -1;
  if (sys.newtonian()) {
    const double G = sys.gravity();
    for (int a = 0; a < n; ++a) {
      acc[a] = newtonian_acc_one(q, sys.masses, G, a, &ca, &cb);
      if (ca >= 0) throw CollisionError(ca, cb);
    }
  } else {
    const HookeModel& h = sys.hooke();
    for (int a = 0; a < n; ++a) acc[a] = hooke_acc_one(q, sys.masses, h, a);
  }
  return acc;
}

std::vector<Vec2> accelerations(const PlanarConfiguration& q, const MassSystem& sys) {
  const int n = static_cast<int>(q.size());
  if (n < kParallelMinBodies) return accelerations_serial(q, sys);

  std::vector<Vec2> acc(n);
  int ca = -1, cb = -1;
  if (sys.newtonian()) {
    const double G = sys.gravity();
#pragma omp parallel for schedule(static)
    for (int a = 0; a < n; ++a) {
      int la = -1, lb = -1;
      acc[a] = newtonian_acc_one(q, sys.masses, G, a, &la, &lb);
      if (la >= 0) {
#pragma omp critical
        {
          ca = la;
          cb = lb;
        }
      }
    }
    if (ca >= 0) throw CollisionError(ca, cb);
  } else {
    const HookeModel& h = sys.hooke();
#pragma omp parallel for schedule(static)
    for (int a = 0; a < n; ++a) acc[a] = hooke_acc_one(q, sys.masses, h, a);
  }
  return acc;
}

double kinetic_energy(const std::vector<Vec2>& v, const std::vector<double>& masses) {
  double k = 0.0;
  for (size_t a = 0; a < v.size(); ++a) k += masses[a] * norm_sq(v[a]);
  return 0.5 * k;
}

ConservedQuantities conserved_quantities(const PhaseState& s, const MassSystem& sys) {
  ConservedQuantities c;
  c.kinetic = kinetic_energy(s.velocities, sys.masses);
  c.potential = potential_energy(s.positions, sys);
  c.energy = c.kinetic + c.potential;
  for (int a = 0; a < s.size(); ++a) {
    c.linear_momentum += sys.masses[a] * s.velocities[a];
    c.angular_momentum += sys.masses[a] * wedge(s.positions[a], s.velocities[a]);
  }
  return c;
}

PlanarConfiguration center_configuration(const PlanarConfiguration& q,
                                         const std::vector<double>& masses) {
  Vec2 com;
  double m_total = 0.0;
  for (size_t a = 0; a < q.size(); ++a) {
    com += masses[a] * q[a];
    m_total += masses[a];
  }
  com /= m_total;
  PlanarConfiguration out(q.size());
  for (size_t a = 0; a < q.size(); ++a) out[a] = q[a] - com;
  return out;
}

PhaseState reduce_to_center_of_mass(const PhaseState& s, const MassSystem& sys) {
  PhaseState out;
  out.time = s.time;
  out.positions = center_configuration(s.positions, sys.masses);
  out.velocities = center_configuration(s.velocities, sys.masses);
  return out;
}

double min_pair_distance(const PlanarConfiguration& q, int* out_a, int* out_b) {
  const int n = static_cast<int>(q.size());
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double r2 = norm_sq(q[b] - q[a]);
      if (r2 < best) {
        best = r2;
        if (out_a) *out_a = a;
        if (out_b) *out_b = b;
      }
    }
  return std::sqrt(best);
}

double size_scale(const PlanarConfiguration& q) {
  const int n = static_cast<int>(q.size());
  double best = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) best = std::max(best, norm_sq(q[b] - q[a]));
  return std::sqrt(best);
}

double moment_of_inertia(const PlanarConfiguration& q, const std::vector<double>& masses) {
  double i = 0.0;
  for (size_t a = 0; a < q.size(); ++a) i += masses[a] * norm_sq(q[a]);
  return i;
}

double mass_metric_norm_sq(const std::vector<Vec2>& u, const std::vector<double>& masses) {
  double s = 0.0;
  for (size_t a = 0; a < u.size(); ++a) s += masses[a] * norm_sq(u[a]);
  return s;
}

double mass_metric_norm(const std::vector<Vec2>& u, const std::vector<double>& masses) {
  return std::sqrt(mass_metric_norm_sq(u, masses));
}

double mass_metric_distance(const PlanarConfiguration& a, const PlanarConfiguration& b,
                            const std::vector<double>& masses) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += masses[i] * norm_sq(b[i] - a[i]);
  return std::sqrt(s);
}

double signed_area(const PlanarConfiguration& q) {
  return wedge(q[1] - q[0], q[2] - q[0]);
}

bool is_braked(const PhaseState& s, double eps) {
  for (const Vec2& v : s.velocities)
    if (norm(v) > eps) return false;
  return true;
}

}  // namespace brakefall
