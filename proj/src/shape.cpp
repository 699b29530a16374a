#include "brakefall/shape.hpp"

#include <cmath>
#include <stdexcept>

namespace brakefall {

std::pair<std::complex<double>, std::complex<double>> jacobi_coordinates(
    const PlanarConfiguration& q, const std::vector<double>& masses) {
  if (q.size() != 3) throw std::invalid_argument("jacobi_coordinates expects three bodies");
  const double m1 = masses[0], m2 = masses[1], m3 = masses[2];
  const double mu1 = std::sqrt(m1 * m2 / (m1 + m2));
  const double mu2 = std::sqrt(m3 * (m1 + m2) / (m1 + m2 + m3));
  const Vec2 d1 = q[1] - q[0];
  const Vec2 bc = (m1 * q[0] + m2 * q[1]) / (m1 + m2);
  const Vec2 d2 = q[2] - bc;
  return {mu1 * as_complex(d1), mu2 * as_complex(d2)};
}

ShapePoint hopf_project(std::complex<double> z1, std::complex<double> z2) {
  ShapePoint p;
  const double n1 = std::norm(z1), n2 = std::norm(z2);
  const std::complex<double> cross = std::conj(z1) * z2;
  p.w = {0.5 * (n1 - n2), cross.real(), cross.imag()};
  p.inertia = n1 + n2;
  return p;
}

ShapePoint shape_point(const PlanarConfiguration& q, const std::vector<double>& masses) {
  const PlanarConfiguration centered = center_configuration(q, masses);
  auto [z1, z2] = jacobi_coordinates(centered, masses);
  return hopf_project(z1, z2);
}

std::vector<TimedShapePoint> shape_trajectory(const Trajectory& traj, int samples) {
  const std::vector<double> times = uniform_times(traj.t_start(), traj.t_end(), samples);
  const std::vector<PhaseState> states = sample_states(traj, times);
  std::vector<TimedShapePoint> out(states.size());
#pragma omp parallel for schedule(static) if (states.size() >= 64)
  for (long i = 0; i < static_cast<long>(states.size()); ++i) {
    out[i].time = states[i].time;
    out[i].point = shape_point(states[i].positions, traj.sys.masses);
  }
  return out;
}

}  // namespace brakefall
