#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "brakefall/geometry.hpp"

namespace brakefall {

/// Labelled planar positions, one per body.
using PlanarConfiguration = std::vector<Vec2>;

struct NewtonianModel {
  double G = 1.0;
};

/// Pairwise springs; `k` is a full n×n symmetric matrix (diagonal unused).
struct HookeModel {
  int n = 0;
  std::vector<double> k;

  HookeModel() = default;
  HookeModel(int n_, double uniform) : n(n_), k(static_cast<size_t>(n_) * n_, uniform) {}
  HookeModel(int n_, std::vector<double> matrix) : n(n_), k(std::move(matrix)) {}

  double at(int a, int b) const { return k[static_cast<size_t>(a) * n + b]; }
};

struct MassSystem {
  std::vector<double> masses;
  std::variant<NewtonianModel, HookeModel> model;

  int size() const { return static_cast<int>(masses.size()); }
  bool newtonian() const { return std::holds_alternative<NewtonianModel>(model); }
  double gravity() const { return std::get<NewtonianModel>(model).G; }
  const HookeModel& hooke() const { return std::get<HookeModel>(model); }
  double total_mass() const;

  /// Throws std::invalid_argument when an invariant is broken
  /// (non-positive mass, G ≤ 0, asymmetric or non-positive springs).
  void validate() const;

  static MassSystem make_newtonian(std::vector<double> masses, double G = 1.0);
  static MassSystem make_hooke(std::vector<double> masses, double uniform_k);
  static MassSystem make_hooke(std::vector<double> masses, std::vector<double> k_matrix);
};

struct PhaseState {
  PlanarConfiguration positions;
  std::vector<Vec2> velocities;
  double time = 0.0;

  int size() const { return static_cast<int>(positions.size()); }
};

struct ConservedQuantities {
  double energy = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  Vec2 linear_momentum;
  double angular_momentum = 0.0;
};

/// Raised when a Newtonian quantity is evaluated on (numerically) coincident bodies.
class CollisionError : public std::domain_error {
 public:
  CollisionError(int a, int b)
      : std::domain_error("collision between bodies " + std::to_string(a + 1) + " and " +
                          std::to_string(b + 1)),
        body_a(a),
        body_b(b) {}
  int body_a;
  int body_b;
};

/// Newtonian: −G Σ_{a<b} m_a m_b / r_ab.  Hooke: Σ_{a<b} k_ab r_ab².
double potential_energy(const PlanarConfiguration& q, const MassSystem& sys);
double potential_energy_serial(const PlanarConfiguration& q, const MassSystem& sys);

/// Per-body acceleration −∇V in the mass metric.
/// Newtonian body a: Σ_{b≠a} G m_b (q_b − q_a) / r_ab³.
std::vector<Vec2> accelerations(const PlanarConfiguration& q, const MassSystem& sys);
std::vector<Vec2> accelerations_serial(const PlanarConfiguration& q, const MassSystem& sys);

double kinetic_energy(const std::vector<Vec2>& v, const std::vector<double>& masses);

ConservedQuantities conserved_quantities(const PhaseState& s, const MassSystem& sys);

/// Shifts positions and velocities so that Σ m_a q_a = 0 and Σ m_a q̇_a = 0.
PhaseState reduce_to_center_of_mass(const PhaseState& s, const MassSystem& sys);
PlanarConfiguration center_configuration(const PlanarConfiguration& q,
                                         const std::vector<double>& masses);

double min_pair_distance(const PlanarConfiguration& q, int* out_a = nullptr, int* out_b = nullptr);

/// Largest pairwise distance; the length scale used for relative thresholds.
double size_scale(const PlanarConfiguration& q);

/// Σ m_a |q_a|² about the origin (callers center first).
double moment_of_inertia(const PlanarConfiguration& q, const std::vector<double>& masses);

double mass_metric_norm_sq(const std::vector<Vec2>& u, const std::vector<double>& masses);
double mass_metric_norm(const std::vector<Vec2>& u, const std::vector<double>& masses);
double mass_metric_distance(const PlanarConfiguration& a, const PlanarConfiguration& b,
                            const std::vector<double>& masses);

/// Signed doubled triangle area (q2−q1) ∧ (q3−q1); zero iff the bodies are collinear.
double signed_area(const PlanarConfiguration& q);

bool is_braked(const PhaseState& s, double eps);

}  // namespace brakefall
