#include "brakefall/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace brakefall {

namespace {

constexpr double kAngleTolDeg = 1e-6;

double normalize_deg(double rad) {
  double deg = rad_to_deg(rad);
  if (deg <= -180.0 + 1e-12) deg += 360.0;
  return deg;
}

std::string format_angle(double deg) {
  // Snap to 1e-9 degree so exact elements print as integers.
  const double snapped = std::round(deg * 1e9) / 1e9;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", snapped);
  return buf;
}

}  // namespace

bool Permutation::is_identity() const {
  for (int a = 0; a < size(); ++a)
    if (map[a] != a) return false;
  return true;
}

Permutation Permutation::inverse() const {
  Permutation inv;
  inv.map.resize(map.size());
  for (int a = 0; a < size(); ++a) inv.map[map[a]] = a;
  return inv;
}

Permutation Permutation::identity(int n) {
  Permutation p;
  p.map.resize(n);
  std::iota(p.map.begin(), p.map.end(), 0);
  return p;
}

std::vector<Permutation> Permutation::all(int n) {
  std::vector<int> base(n);
  std::iota(base.begin(), base.end(), 0);
  std::vector<Permutation> out;
  do {
    out.push_back(Permutation{base});
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

std::string Permutation::cycle_notation() const {
  const int n = size();
  std::vector<bool> seen(n, false);
  std::string s;
  for (int a = 0; a < n; ++a) {
    if (seen[a] || map[a] == a) continue;
    s += '(';
    int cur = a;
    while (!seen[cur]) {
      seen[cur] = true;
      s += std::to_string(cur + 1);
      cur = map[cur];
    }
    s += ')';
  }
  return s.empty() ? "id" : s;
}

PlanarConfiguration SymmetryElement::apply(const PlanarConfiguration& q) const {
  const Permutation inv = perm.inverse();
  PlanarConfiguration out(q.size());
  for (size_t a = 0; a < q.size(); ++a) out[a] = ortho * q[inv.map[a]];
  return out;
}

std::vector<Vec2> SymmetryElement::apply_vectors(const std::vector<Vec2>& v) const {
  return apply(v);
}

PhaseState SymmetryElement::apply(const PhaseState& s) const {
  PhaseState out;
  out.time = s.time;
  out.positions = apply(s.positions);
  out.velocities = apply(s.velocities);
  return out;
}

SymmetryElement SymmetryElement::composed_with_self() const {
  SymmetryElement f2;
  f2.ortho = ortho * ortho;
  f2.perm.map.resize(perm.map.size());
  for (int a = 0; a < perm.size(); ++a) f2.perm.map[a] = perm.map[perm.map[a]];
  return f2;
}

bool permutation_admissible(const Permutation& p, const std::vector<double>& masses,
                            double rel_tol) {
  for (int a = 0; a < p.size(); ++a) {
    const double ma = masses[a], mb = masses[p.map[a]];
    if (std::fabs(ma - mb) > rel_tol * std::max(ma, mb)) return false;
  }
  return true;
}

std::string SymmetryClass::to_string() const {
  switch (kind) {
    case SymmetryKind::Identity:
      return "Identity";
    case SymmetryKind::Rotation:
      return "Rotation(" + format_angle(angle_deg) + ")";
    case SymmetryKind::Reflection:
      return "Reflection(" + format_angle(angle_deg) + ")";
    case SymmetryKind::RotationWithSwap:
      return "RotationWithSwap(" + format_angle(angle_deg) + ", " + perm.cycle_notation() + ")";
    case SymmetryKind::ReflectionWithSwap:
      return "ReflectionWithSwap(" + format_angle(angle_deg) + ", " + perm.cycle_notation() + ")";
  }
  return "?";
}

IsometryFit fit_isometry(const PlanarConfiguration& a, const PlanarConfiguration& b,
                         const std::vector<double>& masses) {
  const int n = static_cast<int>(a.size());
  if (b.size() != a.size() || masses.size() != a.size())
    throw std::invalid_argument("fit_isometry: size mismatch");

  const double scale = moment_of_inertia(a, masses) + moment_of_inertia(b, masses);
  const double tie_eps = 1e-12 * std::max(scale, 1e-30);

  struct Candidate {
    SymmetryElement element;
    double residual;
    bool swapped;
    bool reflected;
    double abs_angle;
  };
  std::optional<Candidate> best;

  auto consider = [&](Candidate c) {
    if (!best) {
      best = std::move(c);
      return;
    }
    if (c.residual < best->residual - tie_eps) {
      best = std::move(c);
      return;
    }
    if (c.residual > best->residual + tie_eps) return;
    // Tie: prefer no swap, then a rotation, then the smaller angle.
    auto key = [](const Candidate& x) {
      return std::make_tuple(x.swapped, x.reflected, x.abs_angle);
    };
    if (key(c) < key(*best)) best = std::move(c);
  };

  PlanarConfiguration permuted(n);
  for (const Permutation& sigma : Permutation::all(n)) {
    if (!permutation_admissible(sigma, masses)) continue;
    const Permutation inv = sigma.inverse();
    for (int i = 0; i < n; ++i) permuted[i] = a[inv.map[i]];

    // Mass-weighted cross covariance of b against the permuted a.
    double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
    for (int i = 0; i < n; ++i) {
      m00 += masses[i] * b[i].x * permuted[i].x;
      m01 += masses[i] * b[i].x * permuted[i].y;
      m10 += masses[i] * b[i].y * permuted[i].x;
      m11 += masses[i] * b[i].y * permuted[i].y;
    }

    for (int det_sign = 0; det_sign < 2; ++det_sign) {
      Mat2 o;
      double angle_deg;
      if (det_sign == 0) {
        const double theta = std::atan2(m10 - m01, m00 + m11);
        o = Mat2::rotation(theta);
        angle_deg = normalize_deg(theta);
      } else {
        const double axis = 0.5 * std::atan2(m01 + m10, m00 - m11);
        o = Mat2::reflection(axis);
        angle_deg = rad_to_deg(axis);
      }
      double res = 0.0;
      for (int i = 0; i < n; ++i) res += masses[i] * norm_sq(o * permuted[i] - b[i]);
      consider(Candidate{SymmetryElement{o, sigma}, res, !sigma.is_identity(), det_sign == 1,
                         std::fabs(angle_deg)});
    }
  }
  return IsometryFit{best->element, best->residual};
}

SymmetryClass classify(const SymmetryElement& f) {
  SymmetryClass c;
  c.perm = f.perm;
  const bool swap = !f.perm.is_identity();
  if (f.ortho.det() > 0.0) {
    const double theta = std::atan2(f.ortho.m10, f.ortho.m00);
    c.angle_deg = normalize_deg(theta);
    if (!swap && std::fabs(c.angle_deg) < kAngleTolDeg) {
      c.kind = SymmetryKind::Identity;
      c.angle_deg = 0.0;
    } else {
      c.kind = swap ? SymmetryKind::RotationWithSwap : SymmetryKind::Rotation;
    }
  } else {
    double axis = 0.5 * std::atan2(f.ortho.m01, f.ortho.m00);
    double deg = rad_to_deg(axis);
    if (deg <= -90.0 + 1e-12) deg += 180.0;
    c.angle_deg = deg;
    c.kind = swap ? SymmetryKind::ReflectionWithSwap : SymmetryKind::Reflection;
  }
  return c;
}

double verify_halfperiod_relation(const Trajectory& traj, double period, const SymmetryElement& f,
                                  int samples) {
  if (traj.empty() || traj.t_end() - traj.t_start() < period - 1e-9 * std::max(1.0, period))
    throw std::out_of_range("trajectory shorter than the candidate period");
  const double t0 = traj.t_start();
  const double half = 0.5 * period;
  double worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = t0 + half * i / samples;
    const PhaseState s = dense_eval(traj, t);
    const PhaseState s_half = dense_eval(traj, std::min(t + half, traj.t_end()));
    const PlanarConfiguration mapped = f.apply(s.positions);
    worst = std::max(worst, mass_metric_distance(mapped, s_half.positions, traj.sys.masses));
  }
  return worst;
}

std::string FixedSetPrediction::to_string() const {
  switch (kind) {
    case FixedSetKind::AllCentered:
      return "all_centered";
    case FixedSetKind::SyzygyOnAxis:
      return "syzygy_on_axis(" + format_angle(axis_angle_deg) + ")";
    case FixedSetKind::EulerConfiguration:
      return "euler(" + std::to_string(fixed_body + 1) + ")";
    case FixedSetKind::MirrorPair:
      return "mirror_pair(" + std::to_string(swapped[0] + 1) + std::to_string(swapped[1] + 1) +
             " across " + format_angle(axis_angle_deg) + ")";
    case FixedSetKind::CyclicEquilateral:
      return "cyclic_equilateral";
    case FixedSetKind::CoincidentPair:
      return "coincident_pair(" + std::to_string(swapped[0] + 1) + std::to_string(swapped[1] + 1) +
             ")";
    case FixedSetKind::TotalCollisionOnly:
      return "total_collision_only";
  }
  return "?";
}

FixedSetPrediction predict_fixed_set(const SymmetryElement& f) {
  if (f.perm.size() != 3) throw std::invalid_argument("predict_fixed_set expects three bodies");
  FixedSetPrediction p;
  const SymmetryClass cls = classify(f);

  int n_fixed = 0;
  int fixed_body = -1;
  std::array<int, 2> swapped{-1, -1};
  for (int a = 0; a < 3; ++a) {
    if (f.perm.map[a] == a) {
      ++n_fixed;
      fixed_body = a;
    }
  }
  if (n_fixed == 1) {
    int j = 0;
    for (int a = 0; a < 3; ++a)
      if (a != fixed_body) swapped[j++] = a;
  }

  const bool reflection = cls.kind == SymmetryKind::Reflection ||
                          cls.kind == SymmetryKind::ReflectionWithSwap;
  if (reflection) {
    if (n_fixed == 3) {
      p.kind = FixedSetKind::SyzygyOnAxis;
      p.axis_angle_deg = cls.angle_deg;
    } else if (n_fixed == 1) {
      p.kind = FixedSetKind::MirrorPair;
      p.axis_angle_deg = cls.angle_deg;
      p.fixed_body = fixed_body;
      p.swapped = swapped;
    } else {
      p.kind = FixedSetKind::TotalCollisionOnly;
      p.impossible_for_gravity = true;
    }
    return p;
  }

  const double ang = std::fabs(cls.angle_deg);
  if (n_fixed == 3) {
    if (ang < kAngleTolDeg) {
      p.kind = FixedSetKind::AllCentered;
    } else {
      p.kind = FixedSetKind::TotalCollisionOnly;
      p.impossible_for_gravity = true;
    }
  } else if (n_fixed == 1) {
    if (std::fabs(ang - 180.0) < kAngleTolDeg) {
      p.kind = FixedSetKind::EulerConfiguration;
      p.fixed_body = fixed_body;
      p.swapped = swapped;
    } else if (ang < kAngleTolDeg) {
      p.kind = FixedSetKind::CoincidentPair;
      p.swapped = swapped;
      p.impossible_for_gravity = true;
    } else {
      p.kind = FixedSetKind::TotalCollisionOnly;
      p.impossible_for_gravity = true;
    }
  } else {
    if (std::fabs(ang - 120.0) < kAngleTolDeg) {
      p.kind = FixedSetKind::CyclicEquilateral;
    } else {
      p.kind = FixedSetKind::TotalCollisionOnly;
      p.impossible_for_gravity = true;
    }
  }
  return p;
}

bool matches_fixed_set(const FixedSetPrediction& p, const PlanarConfiguration& q,
                       const std::vector<double>& masses, double tol) {
  const double scale = size_scale(q);
  const double eps = tol * std::max(scale, 1e-300);
  switch (p.kind) {
    case FixedSetKind::AllCentered:
      return true;
    case FixedSetKind::TotalCollisionOnly: {
      for (const Vec2& v : q)
        if (norm(v) > eps) return false;
      return true;
    }
    case FixedSetKind::SyzygyOnAxis: {
      const Vec2 dir{std::cos(deg_to_rad(p.axis_angle_deg)), std::sin(deg_to_rad(p.axis_angle_deg))};
      for (const Vec2& v : q)
        if (std::fabs(wedge(dir, v)) > eps) return false;
      return true;
    }
    case FixedSetKind::EulerConfiguration: {
      if (norm(q[p.fixed_body]) > eps) return false;
      return std::fabs(signed_area(q)) <= eps * scale;
    }
    case FixedSetKind::MirrorPair: {
      const Mat2 ref = Mat2::reflection(deg_to_rad(p.axis_angle_deg));
      const Vec2 dir{std::cos(deg_to_rad(p.axis_angle_deg)), std::sin(deg_to_rad(p.axis_angle_deg))};
      if (std::fabs(wedge(dir, q[p.fixed_body])) > eps) return false;
      return norm(ref * q[p.swapped[0]] - q[p.swapped[1]]) <= eps;
    }
    case FixedSetKind::CyclicEquilateral: {
      const double r01 = norm(q[1] - q[0]);
      const double r12 = norm(q[2] - q[1]);
      const double r02 = norm(q[2] - q[0]);
      return std::fabs(r01 - r12) <= eps && std::fabs(r12 - r02) <= eps;
    }
    case FixedSetKind::CoincidentPair:
      return norm(q[p.swapped[0]] - q[p.swapped[1]]) <= eps;
  }
  (void)masses;
  return false;
}

std::string observed_configuration_class(const PlanarConfiguration& q,
                                         const std::vector<double>& masses, double tol) {
  const double scale = size_scale(q);
  (void)masses;
  bool total = true;
  double extent = 0.0;
  for (const Vec2& v : q) extent = std::max(extent, norm(v));
  if (scale <= 0.0 || extent <= tol * std::max(scale, extent)) return "total_collision";
  total = false;
  (void)total;

  const double eps = tol * scale;
  if (std::fabs(signed_area(q)) <= eps * scale) {
    for (int a = 0; a < static_cast<int>(q.size()); ++a)
      if (norm(q[a]) <= eps) return "euler(" + std::to_string(a + 1) + ")";
    return "collinear";
  }
  // Mirror-symmetric pair: the axis runs through one body and the origin.
  for (int a = 0; a < 3; ++a) {
    if (norm(q[a]) <= eps) continue;
    const double axis = std::atan2(q[a].y, q[a].x);
    const Mat2 ref = Mat2::reflection(axis);
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    if (norm(ref * q[b] - q[c]) <= eps)
      return "mirror_pair(" + std::to_string(std::min(b, c) + 1) +
             std::to_string(std::max(b, c) + 1) + ")";
  }
  return "generic";
}

std::string InvolutionReport::to_string() const {
  if (!holds) return "Violation";
  return "InvolutionHolds(" + format_angle(angle_deg) + ")";
}

InvolutionReport involution_check(const SymmetryElement& f, const PlanarConfiguration& q0,
                                  double tol) {
  InvolutionReport r;
  const SymmetryElement f2 = f.composed_with_self();
  const PlanarConfiguration q2 = f2.apply(q0);
  double dev = 0.0;
  for (size_t a = 0; a < q0.size(); ++a) dev = std::max(dev, norm(q2[a] - q0[a]));
  r.deviation = dev;
  const double scale = std::max(size_scale(q0), 1e-300);
  if (dev > tol * scale) {
    r.holds = false;
    return r;
  }
  const Mat2 o2 = f.ortho * f.ortho;
  if (max_abs_entry_diff(o2, Mat2::identity()) > 1e-9) {
    r.holds = false;
    return r;
  }
  r.holds = true;
  r.angle_deg = classify(f).angle_deg;
  return r;
}

}  // namespace brakefall
