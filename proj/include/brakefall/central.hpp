#pragma once

#include <array>

#include "brakefall/dynamics.hpp"

namespace brakefall {

struct CentralFit {
  /// Scalar with acc(q) ≈ −λ q; positive for a Newtonian central configuration.
  double lambda = 0.0;
  /// Mass-metric norm of acc(q) + λ q, normalized by |acc(q)|.
  double residual = 0.0;
};

/// Least-squares proportionality test of the acceleration field against the
/// position field. Small residual certifies a central configuration.
CentralFit central_residual(const PlanarConfiguration& q, const MassSystem& sys);

inline constexpr double kCentralCertified = 1e-10;

/// Collinear central configuration for the given left-to-right body order,
/// found by root-finding the centrality condition on the spacing ratio.
/// Returns a centered configuration scaled to unit moment of inertia.
PlanarConfiguration find_collinear_cc(const std::vector<double>& masses,
                                      const std::array<int, 3>& ordering, double G = 1.0);

/// Free-fall time to total collision of a dropped central configuration:
/// (π/2)·√(1/(2λ)) for gravity, π/(2√λ) for springs.
double homothetic_collapse_time(const PlanarConfiguration& q, const MassSystem& sys);

}  // namespace brakefall
