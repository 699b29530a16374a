#pragma once

#include <array>
#include <complex>
#include <vector>

#include "brakefall/taylor.hpp"

namespace brakefall {

/// Point on the shape cone: w lives in 3-space with |w| = I/2; w = 0 is
/// total collision.
struct ShapePoint {
  std::array<double, 3> w{0.0, 0.0, 0.0};
  double inertia = 0.0;

  double radius() const {
    return std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  }
};

struct TimedShapePoint {
  double time = 0.0;
  ShapePoint point;
};

/// Mass-weighted relative coordinates for the (12)–3 split:
/// z1 = μ1 (q2 − q1), z2 = μ2 (q3 − barycenter(q1,q2)); |z1|² + |z2|² = I.
/// Expects a centered configuration.
std::pair<std::complex<double>, std::complex<double>> jacobi_coordinates(
    const PlanarConfiguration& q, const std::vector<double>& masses);

/// w = ((|z1|² − |z2|²)/2, Re(z̄1 z2), Im(z̄1 z2)); invariant under the
/// simultaneous rotation of z1, z2.
ShapePoint hopf_project(std::complex<double> z1, std::complex<double> z2);

ShapePoint shape_point(const PlanarConfiguration& q, const std::vector<double>& masses);

/// Uniform-in-time projection of a trajectory to the shape cone.
std::vector<TimedShapePoint> shape_trajectory(const Trajectory& traj, int samples);

}  // namespace brakefall
