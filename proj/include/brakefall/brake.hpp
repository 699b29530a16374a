#pragma once

#include <optional>

#include "brakefall/symmetry.hpp"
#include "brakefall/taylor.hpp"

namespace brakefall {

/// Release the triangle from rest (centered first) and integrate with brake,
/// syzygy, close-approach and escape detection enabled.
Trajectory drop(const PlanarConfiguration& triangle, const MassSystem& sys, double t_max,
                double tol, const IntegrationOptions& opts = IntegrationOptions{},
                const EventSpec& events = EventSpec::all());

enum class Distinctness { Distinct, SameLabelledShape };

/// SameLabelledShape when an orientation-preserving isometry maps a to b
/// label by label (identity permutation, det +1 fit below the congruence
/// threshold).
Distinctness distinctness_check(const PlanarConfiguration& a, const PlanarConfiguration& b,
                                const std::vector<double>& masses);

struct BrakePair {
  PhaseState first;   // the brake state the run was dropped from
  PhaseState second;  // the first brake instant after the start
  double half_period = 0.0;
  double period = 0.0;
  /// The two brake triangles are congruent label-by-label (the documented
  /// harmonic-oscillator exception when total collision lies between them).
  bool same_labelled_shape = false;
  /// The trajectory passes a total-collision proximity event between the two
  /// brake instants.
  bool total_collision_between = false;
};

/// First post-start brake instant of a dropped run; the orbit, when periodic,
/// has period twice that time. When the located brake state coincides with
/// the start as an exact labelled configuration the search recurses to an
/// earlier brake event (period halving).
std::optional<BrakePair> detect_brake_pair(const Trajectory& traj);

/// Re-integrates the trajectory's initial state over one candidate period and
/// returns max_a (|q_a(T) − q_a(0)| + |q̇_a(T) − q̇_a(0)|).
double verify_periodicity(const PhaseState& initial, const MassSystem& sys, double period,
                          double tol, const IntegrationOptions& opts = IntegrationOptions{});
double verify_periodicity(const Trajectory& traj, double period, double tol,
                          const IntegrationOptions& opts = IntegrationOptions{});

}  // namespace brakefall
