#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "brakefall/taylor.hpp"

namespace brakefall {

/// Body-label permutation; perm[a] = σ(a).
struct Permutation {
  std::vector<int> map;

  int size() const { return static_cast<int>(map.size()); }
  bool is_identity() const;
  Permutation inverse() const;
  static Permutation identity(int n);
  /// All n! permutations, identity first.
  static std::vector<Permutation> all(int n);
  /// Cycle notation with 1-based labels, "id" for the identity.
  std::string cycle_notation() const;
  bool operator==(const Permutation&) const = default;
};

/// An orthogonal map composed with a label permutation, acting on centered
/// configurations as (F q)_a = O · q_{σ⁻¹(a)}.
struct SymmetryElement {
  Mat2 ortho;
  Permutation perm;

  PlanarConfiguration apply(const PlanarConfiguration& q) const;
  std::vector<Vec2> apply_vectors(const std::vector<Vec2>& v) const;
  PhaseState apply(const PhaseState& s) const;
  SymmetryElement composed_with_self() const;
};

enum class SymmetryKind { Identity, Rotation, Reflection, RotationWithSwap, ReflectionWithSwap };

struct SymmetryClass {
  SymmetryKind kind = SymmetryKind::Identity;
  /// Rotation angle or reflection-axis angle, degrees in (−180, 180].
  double angle_deg = 0.0;
  Permutation perm;

  std::string to_string() const;
};

/// `true` when the permutation only exchanges bodies of equal mass.
bool permutation_admissible(const Permutation& p, const std::vector<double>& masses,
                            double rel_tol = 1e-12);

struct IsometryFit {
  SymmetryElement element;
  /// Mass-weighted squared misfit Σ m_a |O q_{σ⁻¹(a)} − b_a|².
  double residual = 0.0;
};

/// Global minimizer of the mass-weighted misfit over all admissible
/// permutations and both determinant signs; the orthogonal part per candidate
/// comes from the closed-form planar Procrustes solution.
/// Ties are broken toward the identity: σ = id first, then det +1, then
/// smaller rotation angle.
IsometryFit fit_isometry(const PlanarConfiguration& a, const PlanarConfiguration& b,
                         const std::vector<double>& masses);

SymmetryClass classify(const SymmetryElement& f);

/// Max over sampled t in [0, T/2] of the mass-metric distance between
/// q(t + T/2) and F(q(t)).
double verify_halfperiod_relation(const Trajectory& traj, double period, const SymmetryElement& f,
                                  int samples);

enum class FixedSetKind {
  AllCentered,          // identity element
  SyzygyOnAxis,         // reflection, no swap: all bodies on the axis
  EulerConfiguration,   // half-turn with a swap: fixed body at the weighted midpoint
  MirrorPair,           // reflection with a swap: pair mirrored, fixed body on the axis
  CyclicEquilateral,    // ±120° rotation with a 3-cycle
  CoincidentPair,       // pure swap: the swapped bodies coincide
  TotalCollisionOnly,   // only the zero configuration is fixed
};

struct FixedSetPrediction {
  FixedSetKind kind = FixedSetKind::TotalCollisionOnly;
  double axis_angle_deg = 0.0;  // reflection kinds
  int fixed_body = -1;          // Euler / MirrorPair
  std::array<int, 2> swapped{-1, -1};
  /// Set when the fixed set forces a collision, which the gravitational
  /// model cannot reach.
  bool impossible_for_gravity = false;

  std::string to_string() const;
};

/// Fixed-point set of F among centered configurations (n = 3).
FixedSetPrediction predict_fixed_set(const SymmetryElement& f);

/// Does the configuration lie in the predicted fixed set, to tolerance
/// tol × size?
bool matches_fixed_set(const FixedSetPrediction& p, const PlanarConfiguration& q,
                       const std::vector<double>& masses, double tol);

/// Label for the fixed-set family a configuration belongs to, used when
/// comparing a predicted quarter-period class with the observed one.
std::string observed_configuration_class(const PlanarConfiguration& q,
                                         const std::vector<double>& masses, double tol);

struct InvolutionReport {
  bool holds = false;
  /// Rotation angle of O when O² = I (0 or 180), or the reflection axis angle.
  double angle_deg = 0.0;
  /// Mass-metric deviation of F²(q0) from q0.
  double deviation = 0.0;

  std::string to_string() const;
};

/// Checks F²(q0) = q0 within tol·size and, when it holds, that O² = I.
/// A failure is reported, not raised.
InvolutionReport involution_check(const SymmetryElement& f, const PlanarConfiguration& q0,
                                  double tol);

}  // namespace brakefall
