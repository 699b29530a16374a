#include "brakefall/central.hpp"

#include <cmath>
#include <stdexcept>

namespace brakefall {

CentralFit central_residual(const PlanarConfiguration& q_in, const MassSystem& sys) {
  const PlanarConfiguration q = center_configuration(q_in, sys.masses);
  const double inertia = moment_of_inertia(q, sys.masses);
  if (inertia <= 0.0) throw std::domain_error("central_residual: zero configuration");
  const std::vector<Vec2> acc = accelerations(q, sys);
  const double acc_norm = mass_metric_norm(acc, sys.masses);
  if (acc_norm <= 0.0) throw std::domain_error("central_residual: zero acceleration field");

  double inner = 0.0;
  for (size_t a = 0; a < q.size(); ++a) inner += sys.masses[a] * dot(acc[a], q[a]);
  CentralFit fit;
  fit.lambda = -inner / inertia;
  std::vector<Vec2> mis(q.size());
  for (size_t a = 0; a < q.size(); ++a) mis[a] = acc[a] + fit.lambda * q[a];
  fit.residual = mass_metric_norm(mis, sys.masses) / acc_norm;
  return fit;
}

namespace {

// Centrality misfit for the collinear spacing ratio x = r(mid,right)/r(left,mid):
// the cross of (position, acceleration) pairs of the two outer bodies, which
// vanishes exactly when the acceleration field is proportional to the
// position field (the middle body then follows from the momentum identities).
double collinear_misfit(double x, const std::vector<double>& masses,
                        const std::array<int, 3>& ordering, double G) {
  PlanarConfiguration q(3);
  q[ordering[0]] = {0.0, 0.0};
  q[ordering[1]] = {1.0, 0.0};
  q[ordering[2]] = {1.0 + x, 0.0};
  q = center_configuration(q, masses);
  const MassSystem sys = MassSystem::make_newtonian(masses, G);
  const std::vector<Vec2> acc = accelerations(q, sys);
  const int l = ordering[0], r = ordering[2];
  return acc[l].x * q[r].x - acc[r].x * q[l].x;
}

}  // namespace

PlanarConfiguration find_collinear_cc(const std::vector<double>& masses,
                                      const std::array<int, 3>& ordering, double G) {
  if (masses.size() != 3) throw std::invalid_argument("find_collinear_cc expects three masses");
  {
    std::array<bool, 3> seen{false, false, false};
    for (int i : ordering) {
      if (i < 0 || i > 2 || seen[i]) throw std::invalid_argument("ordering must list bodies 1..3");
      seen[i] = true;
    }
  }

  auto f = [&](double x) { return collinear_misfit(x, masses, ordering, G); };

  // Bracket the sign change on a log grid, then bisect.
  double lo = 0.0, hi = 0.0;
  double prev_x = 1e-4, prev_f = f(prev_x);
  const int grid = 161;
  for (int i = 1; i < grid; ++i) {
    const double x = 1e-4 * std::pow(1e8, static_cast<double>(i) / (grid - 1));
    const double fx = f(x);
    if (fx == 0.0) {
      lo = hi = x;
      break;
    }
    if ((prev_f < 0.0) != (fx < 0.0)) {
      lo = prev_x;
      hi = x;
      break;
    }
    prev_x = x;
    prev_f = fx;
  }
  if (hi == 0.0) throw std::runtime_error("find_collinear_cc: no sign change found");

  double x_root;
  if (lo == hi) {
    x_root = lo;
  } else {
    double fl = f(lo);
    for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (fl < 0.0)) {
        lo = mid;
        fl = fm;
      } else {
        hi = mid;
      }
    }
    x_root = 0.5 * (lo + hi);
  }

  PlanarConfiguration q(3);
  q[ordering[0]] = {0.0, 0.0};
  q[ordering[1]] = {1.0, 0.0};
  q[ordering[2]] = {1.0 + x_root, 0.0};
  q = center_configuration(q, masses);
  const double inertia = moment_of_inertia(q, masses);
  const double s = 1.0 / std::sqrt(inertia);
  for (Vec2& v : q) v *= s;

  const MassSystem sys = MassSystem::make_newtonian(masses, G);
  if (central_residual(q, sys).residual > kCentralCertified)
    throw std::runtime_error("find_collinear_cc: root failed certification");
  return q;
}

double homothetic_collapse_time(const PlanarConfiguration& q, const MassSystem& sys) {
  const CentralFit fit = central_residual(q, sys);
  if (fit.residual > kCentralCertified)
    throw std::invalid_argument("homothetic_collapse_time: configuration is not central");
  if (!(fit.lambda > 0.0))
    throw std::invalid_argument("homothetic_collapse_time: lambda must be positive");
  if (sys.newtonian()) return 0.5 * kPi * std::sqrt(1.0 / (2.0 * fit.lambda));
  return 0.5 * kPi / std::sqrt(fit.lambda);
}

}  // namespace brakefall
