#include "brakefall/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace brakefall {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, p);
}

std::optional<double> global_tol_override() {
  const char* env = std::getenv("BRAKEFALL_TOL");
  if (!env || !*env) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0))
    throw std::runtime_error("BRAKEFALL_TOL must be a positive number");
  return v;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("parse error at " + path + ": " + what);
}

void check_fields(const ordered_json& obj, const std::string& path,
                  const std::set<std::string>& known) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) parse_fail(path + "." + it.key(), "unknown field");
}

const ordered_json& require(const ordered_json& obj, const std::string& path,
                            const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path + "." + key, "missing field");
  return *it;
}

double as_number(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) parse_fail(path, "expected an integer");
  return j.get<int>();
}

bool as_bool(const ordered_json& j, const std::string& path) {
  if (!j.is_boolean()) parse_fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) parse_fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_number_list(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Vec2> as_point_list(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of [x,y] pairs");
  std::vector<Vec2> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2) parse_fail(p, "expected [x,y]");
    out.push_back({as_number(j[i][0], p + "[0]"), as_number(j[i][1], p + "[1]")});
  }
  return out;
}

}  // namespace

std::string serialize_spec(const ScenarioSpec& s) {
  ordered_json j;
  j["name"] = s.name;
  j["description"] = s.description;
  j["masses"] = s.masses;

  ordered_json fm;
  if (s.force_model.newtonian) {
    fm["type"] = "newtonian";
    fm["G"] = s.force_model.G;
  } else {
    fm["type"] = "hooke";
    if (s.force_model.hooke_matrix) {
      const int n = static_cast<int>(s.masses.size());
      ordered_json rows = ordered_json::array();
      for (int a = 0; a < n; ++a) {
        ordered_json row = ordered_json::array();
        for (int b = 0; b < n; ++b) row.push_back((*s.force_model.hooke_matrix)[a * n + b]);
        rows.push_back(row);
      }
      fm["k_matrix"] = rows;
    } else {
      fm["k"] = s.force_model.hooke_k;
    }
  }
  j["force_model"] = fm;

  ordered_json init;
  switch (s.initial.kind) {
    case TriangleKind::Explicit: {
      init["kind"] = "explicit";
      ordered_json pts = ordered_json::array();
      for (const Vec2& p : s.initial.positions) pts.push_back({p.x, p.y});
      init["positions"] = pts;
      break;
    }
    case TriangleKind::Equilateral:
      init["kind"] = "equilateral";
      init["side"] = s.initial.side;
      break;
    case TriangleKind::Collinear:
      init["kind"] = "collinear";
      init["ratios"] = s.initial.ratios;
      break;
    case TriangleKind::Pythagorean345:
      init["kind"] = "pythagorean345";
      break;
  }
  j["initial"] = init;

  j["integrator"] = {{"order", s.integrator.order}, {"tol", s.integrator.tol}, {"t_max", s.integrator.t_max}};
  j["events"] = {{"close_approach_rel", s.events.close_approach_rel},
                 {"brake_rel", s.events.brake_rel},
                 {"total_collision_rel", s.events.total_collision_rel},
                 {"escape_horizon", s.events.escape_horizon}};
  j["analyses"] = {{"symmetry", s.analyses.symmetry},
                   {"shape", s.analyses.shape},
                   {"central_config", s.analyses.central_config}};
  j["outputs"] = {{"directory", s.outputs.directory},
                  {"trajectory_csv", s.outputs.trajectory_csv},
                  {"events_jsonl", s.outputs.events_jsonl},
                  {"shape_csv", s.outputs.shape_csv},
                  {"svg", s.outputs.svg},
                  {"summary_json", s.outputs.summary_json},
                  {"csv_samples", s.outputs.csv_samples}};
  return j.dump(2) + "\n";
}

ScenarioSpec parse_spec(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("parse error at $: ") + e.what());
  }
  const std::string root = "$";
  check_fields(j, root,
               {"name", "description", "masses", "force_model", "initial", "integrator", "events",
                "analyses", "outputs"});

  ScenarioSpec s;
  s.name = as_string(require(j, root, "name"), root + ".name");
  if (j.contains("description")) s.description = as_string(j["description"], root + ".description");
  s.masses = as_number_list(require(j, root, "masses"), root + ".masses");
  if (s.masses.size() < 2) parse_fail(root + ".masses", "need at least two masses");
  for (size_t i = 0; i < s.masses.size(); ++i)
    if (!(s.masses[i] > 0.0))
      parse_fail(root + ".masses[" + std::to_string(i) + "]", "mass must be positive");

  {
    const std::string p = root + ".force_model";
    const ordered_json& fm = require(j, root, "force_model");
    check_fields(fm, p, {"type", "G", "k", "k_matrix"});
    const std::string type = as_string(require(fm, p, "type"), p + ".type");
    if (type == "newtonian") {
      s.force_model.newtonian = true;
      if (fm.contains("k") || fm.contains("k_matrix"))
        parse_fail(p, "newtonian model takes no spring constants");
      if (fm.contains("G")) s.force_model.G = as_number(fm["G"], p + ".G");
      if (!(s.force_model.G > 0.0)) parse_fail(p + ".G", "G must be positive");
    } else if (type == "hooke") {
      s.force_model.newtonian = false;
      if (fm.contains("G")) parse_fail(p + ".G", "hooke model takes no G");
      if (fm.contains("k_matrix")) {
        const ordered_json& km = fm["k_matrix"];
        const size_t n = s.masses.size();
        if (!km.is_array() || km.size() != n) parse_fail(p + ".k_matrix", "expected an n×n matrix");
        std::vector<double> mat(n * n, 0.0);
        for (size_t a = 0; a < n; ++a) {
          const std::string pr = p + ".k_matrix[" + std::to_string(a) + "]";
          std::vector<double> row = as_number_list(km[a], pr);
          if (row.size() != n) parse_fail(pr, "expected an n×n matrix");
          for (size_t b = 0; b < n; ++b) mat[a * n + b] = row[b];
        }
        s.force_model.hooke_matrix = std::move(mat);
      } else if (fm.contains("k")) {
        s.force_model.hooke_k = as_number(fm["k"], p + ".k");
        if (!(s.force_model.hooke_k > 0.0)) parse_fail(p + ".k", "k must be positive");
      }
    } else {
      parse_fail(p + ".type", "expected \"newtonian\" or \"hooke\"");
    }
  }

  {
    const std::string p = root + ".initial";
    const ordered_json& init = require(j, root, "initial");
    check_fields(init, p, {"kind", "positions", "side", "ratios"});
    const std::string kind = as_string(require(init, p, "kind"), p + ".kind");
    if (kind == "explicit") {
      s.initial.kind = TriangleKind::Explicit;
      s.initial.positions = as_point_list(require(init, p, "positions"), p + ".positions");
      if (s.initial.positions.size() != s.masses.size())
        parse_fail(p + ".positions", "positions must match the mass count");
    } else if (kind == "equilateral") {
      s.initial.kind = TriangleKind::Equilateral;
      s.initial.side = as_number(require(init, p, "side"), p + ".side");
      if (!(s.initial.side > 0.0)) parse_fail(p + ".side", "side must be positive");
    } else if (kind == "collinear") {
      s.initial.kind = TriangleKind::Collinear;
      s.initial.ratios = as_number_list(require(init, p, "ratios"), p + ".ratios");
      if (s.initial.ratios.size() != s.masses.size() - 1)
        parse_fail(p + ".ratios", "need n-1 gap lengths");
      for (double g : s.initial.ratios)
        if (!(g > 0.0)) parse_fail(p + ".ratios", "gaps must be positive");
    } else if (kind == "pythagorean345") {
      s.initial.kind = TriangleKind::Pythagorean345;
      if (s.masses.size() != 3) parse_fail(p, "pythagorean345 needs three bodies");
    } else {
      parse_fail(p + ".kind", "unknown constructor");
    }
  }

  {
    const std::string p = root + ".integrator";
    const ordered_json& ig = require(j, root, "integrator");
    check_fields(ig, p, {"order", "tol", "t_max"});
    if (ig.contains("order")) s.integrator.order = as_int(ig["order"], p + ".order");
    if (s.integrator.order < 2) parse_fail(p + ".order", "order must be at least 2");
    if (ig.contains("tol")) s.integrator.tol = as_number(ig["tol"], p + ".tol");
    if (!(s.integrator.tol > 0.0)) parse_fail(p + ".tol", "tol must be positive");
    s.integrator.t_max = as_number(require(ig, p, "t_max"), p + ".t_max");
    if (!(s.integrator.t_max > 0.0)) parse_fail(p + ".t_max", "t_max must be positive");
  }

  if (j.contains("events")) {
    const std::string p = root + ".events";
    const ordered_json& ev = j["events"];
    check_fields(ev, p, {"close_approach_rel", "brake_rel", "total_collision_rel", "escape_horizon"});
    if (ev.contains("close_approach_rel"))
      s.events.close_approach_rel = as_number(ev["close_approach_rel"], p + ".close_approach_rel");
    if (ev.contains("brake_rel")) s.events.brake_rel = as_number(ev["brake_rel"], p + ".brake_rel");
    if (ev.contains("total_collision_rel"))
      s.events.total_collision_rel = as_number(ev["total_collision_rel"], p + ".total_collision_rel");
    if (ev.contains("escape_horizon"))
      s.events.escape_horizon = as_number(ev["escape_horizon"], p + ".escape_horizon");
  }

  if (j.contains("analyses")) {
    const std::string p = root + ".analyses";
    const ordered_json& an = j["analyses"];
    check_fields(an, p, {"symmetry", "shape", "central_config"});
    if (an.contains("symmetry")) s.analyses.symmetry = as_bool(an["symmetry"], p + ".symmetry");
    if (an.contains("shape")) s.analyses.shape = as_bool(an["shape"], p + ".shape");
    if (an.contains("central_config"))
      s.analyses.central_config = as_bool(an["central_config"], p + ".central_config");
  }

  if (j.contains("outputs")) {
    const std::string p = root + ".outputs";
    const ordered_json& o = j["outputs"];
    check_fields(o, p,
                 {"directory", "trajectory_csv", "events_jsonl", "shape_csv", "svg", "summary_json",
                  "csv_samples"});
    if (o.contains("directory")) s.outputs.directory = as_string(o["directory"], p + ".directory");
    if (o.contains("trajectory_csv"))
      s.outputs.trajectory_csv = as_string(o["trajectory_csv"], p + ".trajectory_csv");
    if (o.contains("events_jsonl"))
      s.outputs.events_jsonl = as_string(o["events_jsonl"], p + ".events_jsonl");
    if (o.contains("shape_csv")) s.outputs.shape_csv = as_string(o["shape_csv"], p + ".shape_csv");
    if (o.contains("svg")) s.outputs.svg = as_string(o["svg"], p + ".svg");
    if (o.contains("summary_json"))
      s.outputs.summary_json = as_string(o["summary_json"], p + ".summary_json");
    if (o.contains("csv_samples")) s.outputs.csv_samples = as_int(o["csv_samples"], p + ".csv_samples");
    if (s.outputs.csv_samples < 2) parse_fail(p + ".csv_samples", "need at least two samples");
  }

  return s;
}

// ---------------------------------------------------------------------------
// Built-in scenarios (G = 1, unit masses and lengths unless stated).

namespace {

ScenarioSpec make_lagrange(std::vector<double> masses, const std::string& name) {
  ScenarioSpec s;
  s.name = name;
  s.description = "Equilateral drop (G=1, unit side): homothetic collapse to triple collision";
  s.masses = std::move(masses);
  s.initial.kind = TriangleKind::Equilateral;
  s.initial.side = 1.0;
  s.integrator.t_max = 2.0;
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"lagrange", "lagrange-123", "euler", "euler-345", "pythagorean", "hooke-mode"};
}

bool is_builtin_scenario(const std::string& name) {
  const auto names = builtin_scenario_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ScenarioSpec builtin_scenario(const std::string& name) {
  if (name == "lagrange") return make_lagrange({1.0, 1.0, 1.0}, "lagrange");
  if (name == "lagrange-123") return make_lagrange({1.0, 2.0, 3.0}, "lagrange-123");
  if (name == "euler") {
    ScenarioSpec s;
    s.name = "euler";
    s.description = "Equal masses on a line, one at the midpoint (G=1): collinear collapse";
    s.masses = {1.0, 1.0, 1.0};
    s.initial.kind = TriangleKind::Collinear;
    s.initial.ratios = {1.0, 1.0};
    s.integrator.t_max = 2.0;
    return s;
  }
  if (name == "euler-345") {
    ScenarioSpec s;
    s.name = "euler-345";
    s.description = "Masses 3:4:5 at their collinear central configuration (G=1)";
    s.masses = {3.0, 4.0, 5.0};
    const PlanarConfiguration cc = find_collinear_cc(s.masses, {0, 1, 2});
    const double g1 = norm(cc[1] - cc[0]);
    const double g2 = norm(cc[2] - cc[1]);
    s.initial.kind = TriangleKind::Collinear;
    s.initial.ratios = {1.0, g2 / g1};
    s.integrator.t_max = 4.0;
    return s;
  }
  if (name == "pythagorean") {
    ScenarioSpec s;
    s.name = "pythagorean";
    s.description =
        "Masses 3:4:5 dropped from the 3-4-5 right triangle (G=1), each mass opposite "
        "the side of matching length; ends with a binary ejecting the lightest body";
    s.masses = {3.0, 4.0, 5.0};
    s.initial.kind = TriangleKind::Pythagorean345;
    s.integrator.t_max = 100.0;
    return s;
  }
  if (name == "hooke-mode") {
    ScenarioSpec s;
    s.name = "hooke-mode";
    s.description =
        "Equal masses, unit springs (k=1): every centered triangle is an eigenvector; "
        "the drop shuttles between E and -E through total collision";
    s.masses = {1.0, 1.0, 1.0};
    s.force_model.newtonian = false;
    s.force_model.hooke_k = 1.0;
    s.initial.kind = TriangleKind::Explicit;
    s.initial.positions = {{1.0, 0.0}, {-0.4, 0.3}, {-0.6, -0.3}};
    s.integrator.t_max = 6.0;
    return s;
  }
  throw std::invalid_argument("unknown scenario: " + name);
}

std::string builtin_scenario_blurb(const std::string& name) {
  return builtin_scenario(name).description;
}

MassSystem build_system(const ScenarioSpec& spec) {
  if (spec.force_model.newtonian) return MassSystem::make_newtonian(spec.masses, spec.force_model.G);
  if (spec.force_model.hooke_matrix)
    return MassSystem::make_hooke(spec.masses, *spec.force_model.hooke_matrix);
  return MassSystem::make_hooke(spec.masses, spec.force_model.hooke_k);
}

PlanarConfiguration build_initial(const ScenarioSpec& spec) {
  switch (spec.initial.kind) {
    case TriangleKind::Explicit:
      return spec.initial.positions;
    case TriangleKind::Equilateral: {
      const double s = spec.initial.side;
      return {{0.0, 0.0}, {s, 0.0}, {0.5 * s, 0.5 * std::sqrt(3.0) * s}};
    }
    case TriangleKind::Collinear: {
      PlanarConfiguration q;
      double x = 0.0;
      q.push_back({0.0, 0.0});
      for (double gap : spec.initial.ratios) {
        x += gap;
        q.push_back({x, 0.0});
      }
      return q;
    }
    case TriangleKind::Pythagorean345:
      // Masses (3,4,5) at the vertices opposite the sides of length 3, 4, 5.
      return {{1.0, 3.0}, {-2.0, -1.0}, {1.0, -1.0}};
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Running and analysis

int status_exit_code(const RunStatus& status) {
  if (std::holds_alternative<Completed>(status)) return 0;
  if (std::holds_alternative<CollisionStop>(status)) return 2;
  return 3;
}

namespace {

ConservationReport conservation_report(const Trajectory& traj) {
  ConservationReport rep;
  rep.initial_energy = traj.initial_energy;
  const double m_total = traj.sys.total_mass();
  const double momentum_scale = std::max(m_total * std::max(traj.initial_size, 1e-300), 1e-300);
  const double e_scale = std::max(std::fabs(traj.initial_energy), 1e-300);
  for (const TaylorStep& step : traj.steps) {
    const PhaseState s = step.state_at(step.dt);
    const ConservedQuantities c = conserved_quantities(s, traj.sys);
    rep.max_energy_drift_rel =
        std::max(rep.max_energy_drift_rel, std::fabs(c.energy - traj.initial_energy) / e_scale);
    rep.max_linear_momentum_scaled =
        std::max(rep.max_linear_momentum_scaled, norm(c.linear_momentum) / momentum_scale);
    rep.max_angular_momentum_scaled =
        std::max(rep.max_angular_momentum_scaled, std::fabs(c.angular_momentum) / momentum_scale);
  }
  return rep;
}

double shape_direction_drift(const std::vector<TimedShapePoint>& pts) {
  // Max angular deviation of w/|w| from its initial direction while
  // I >= 1e-6 I(0).
  if (pts.empty()) return 0.0;
  const double i0 = pts.front().point.inertia;
  const double r0 = pts.front().point.radius();
  if (r0 <= 0.0) return 0.0;
  const std::array<double, 3> w0 = {pts.front().point.w[0] / r0, pts.front().point.w[1] / r0,
                                    pts.front().point.w[2] / r0};
  double worst = 0.0;
  for (const TimedShapePoint& p : pts) {
    if (p.point.inertia < 1e-6 * i0) continue;
    const double r = p.point.radius();
    if (r <= 0.0) continue;
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double diff = p.point.w[i] / r - w0[i];
      d += diff * diff;
    }
    worst = std::max(worst, std::sqrt(d));
  }
  return worst;
}

}  // namespace

ReportBundle run_scenario(const ScenarioSpec& spec_in) {
  ScenarioSpec spec = spec_in;
  if (auto tol = global_tol_override()) spec.integrator.tol = *tol;

  const MassSystem sys = build_system(spec);
  const PlanarConfiguration q0 = build_initial(spec);

  IntegrationOptions opts;
  opts.order = spec.integrator.order;
  opts.tol = spec.integrator.tol;
  EventSpec events = EventSpec::all();
  events.close_approach_rel = spec.events.close_approach_rel;
  events.brake_rel = spec.events.brake_rel;
  events.total_collision_rel = spec.events.total_collision_rel;
  events.escape_horizon = spec.events.escape_horizon;

  ReportBundle bundle;
  bundle.spec = spec;
  bundle.traj = drop(q0, sys, spec.integrator.t_max, spec.integrator.tol, opts, events);
  bundle.conservation = conservation_report(bundle.traj);

  const PhaseState start = bundle.traj.initial_state();
  const double size0 = size_scale(start.positions);

  std::optional<BrakePair> pair;
  if (std::holds_alternative<Completed>(bundle.traj.status) ||
      std::holds_alternative<EscapeStop>(bundle.traj.status)) {
    pair = detect_brake_pair(bundle.traj);
  }

  if (pair) {
    BrakeReport br;
    br.found = true;
    br.half_period = pair->half_period;
    br.period = pair->period;
    br.same_labelled_shape = pair->same_labelled_shape;
    br.total_collision_between = pair->total_collision_between;
    br.first = pair->first;
    br.second = pair->second;
    try {
      br.periodicity_residual = verify_periodicity(bundle.traj, br.period, spec.integrator.tol, opts);
      br.periodic = br.periodicity_residual < 1e-6 * (1.0 + size0);
    } catch (const std::exception&) {
      br.periodicity_residual = std::numeric_limits<double>::infinity();
      br.periodic = false;
    }
    bundle.brake = br;
  }

  if (spec.analyses.symmetry && bundle.brake && bundle.brake->periodic) {
    SymmetryAnalysis sa;
    const PlanarConfiguration& a = bundle.brake->first.positions;
    const PlanarConfiguration& b = bundle.brake->second.positions;
    const IsometryFit fit = fit_isometry(a, b, sys.masses);
    sa.element = fit.element;
    sa.cls = classify(fit.element);
    sa.fit_residual = fit.residual;
    const double i_scale =
        0.5 * (moment_of_inertia(a, sys.masses) + moment_of_inertia(b, sys.masses));
    sa.congruent = fit.residual < 1e-6 * std::max(i_scale, 1e-300);

    const double period = bundle.brake->period;
    const Trajectory* cover = &bundle.traj;
    Trajectory extended;
    if (bundle.traj.t_end() - bundle.traj.t_start() < period) {
      extended = integrate(start, sys, start.time + 1.0001 * period, spec.integrator.tol,
                           EventSpec::none(), opts);
      cover = &extended;
    }
    if (sa.congruent && cover->t_end() - cover->t_start() >= period) {
      sa.halfperiod_deviation = verify_halfperiod_relation(*cover, period, sa.element, 128);
      const PhaseState quarter = dense_eval(*cover, cover->t_start() + 0.25 * period);
      const PlanarConfiguration qq = center_configuration(quarter.positions, sys.masses);
      const PlanarConfiguration mapped = sa.element.apply(qq);
      sa.quarter_fixed_deviation = mass_metric_distance(mapped, qq, sys.masses);
      sa.predicted_quarter = predict_fixed_set(sa.element);
      sa.observed_quarter = observed_configuration_class(qq, sys.masses, 1e-6);
      sa.quarter_matches = matches_fixed_set(sa.predicted_quarter, qq, sys.masses, 1e-6);
      sa.involution = involution_check(sa.element, a, 1e-8);
    }
    bundle.symmetry = sa;
  }

  if (spec.analyses.shape && !bundle.traj.empty()) {
    bundle.shape = shape_trajectory(bundle.traj, spec.outputs.csv_samples);
  }

  if (spec.analyses.central_config) {
    CentralConfigReport cc;
    const PlanarConfiguration cq = center_configuration(q0, sys.masses);
    const CentralFit fit = central_residual(cq, sys);
    cc.lambda = fit.lambda;
    cc.residual = fit.residual;
    cc.certified = fit.residual < kCentralCertified;
    if (cc.certified) {
      cc.collapse_time = homothetic_collapse_time(cq, sys);
      if (const CollisionStop* stop = std::get_if<CollisionStop>(&bundle.traj.status))
        cc.stop_time = stop->time;
    }
    cc.shape_direction_drift = shape_direction_drift(bundle.shape);
    bundle.central = cc;
  }

  return bundle;
}

// ---------------------------------------------------------------------------
// Output files

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

ordered_json state_json(const PhaseState& s) {
  ordered_json pos = ordered_json::array();
  ordered_json vel = ordered_json::array();
  for (const Vec2& p : s.positions) pos.push_back({p.x, p.y});
  for (const Vec2& v : s.velocities) vel.push_back({v.x, v.y});
  return {{"time", s.time}, {"positions", pos}, {"velocities", vel}};
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int samples) {
  std::ofstream f = open_out(path);
  const int n = traj.sys.size();
  f << "t";
  for (int a = 1; a <= n; ++a)
    f << ",x" << a << ",y" << a << ",vx" << a << ",vy" << a;
  f << ",E,L\n";
  const std::vector<double> times = uniform_times(traj.t_start(), traj.t_end(), samples);
  const std::vector<PhaseState> states = sample_states(traj, times);
  for (const PhaseState& s : states) {
    const ConservedQuantities c = conserved_quantities(s, traj.sys);
    f << format_double(s.time);
    for (int a = 0; a < n; ++a) {
      f << ',' << format_double(s.positions[a].x) << ',' << format_double(s.positions[a].y) << ','
        << format_double(s.velocities[a].x) << ',' << format_double(s.velocities[a].y);
    }
    f << ',' << format_double(c.energy) << ',' << format_double(c.angular_momentum) << '\n';
  }
}

void write_events_jsonl(const std::string& path, const Trajectory& traj) {
  std::ofstream f = open_out(path);
  for (const EventRecord& ev : traj.events) {
    ordered_json j;
    j["kind"] = event_kind_name(ev.kind);
    j["time"] = ev.time;
    j["state"] = state_json(ev.state);
    ordered_json detail;
    switch (ev.kind) {
      case EventKind::Brake:
        detail["kinetic_energy"] = ev.value;
        break;
      case EventKind::Syzygy:
        detail["signed_area"] = ev.value;
        detail["collinear"] = ev.collinear;
        break;
      case EventKind::CloseApproach:
        detail["pair"] = {ev.pair[0] + 1, ev.pair[1] + 1};
        detail["distance"] = ev.value;
        break;
      case EventKind::Escape:
        detail["binary"] = {ev.pair[0] + 1, ev.pair[1] + 1};
        detail["single"] = ev.single + 1;
        detail["relative_energy"] = ev.value;
        break;
      case EventKind::TotalCollisionProximity:
        detail["inertia"] = ev.value;
        break;
    }
    j["detail"] = detail;
    f << j.dump() << '\n';
  }
}

void write_shape_csv(const std::string& path, const std::vector<TimedShapePoint>& points) {
  std::ofstream f = open_out(path);
  f << "t,w1,w2,w3,I\n";
  for (const TimedShapePoint& p : points) {
    f << format_double(p.time) << ',' << format_double(p.point.w[0]) << ','
      << format_double(p.point.w[1]) << ',' << format_double(p.point.w[2]) << ','
      << format_double(p.point.inertia) << '\n';
  }
}

std::string summary_json_text(const ReportBundle& bundle) {
  const Trajectory& traj = bundle.traj;
  ordered_json j;
  j["scenario"] = bundle.spec.name;
  j["description"] = bundle.spec.description;
  j["status"] = status_name(traj.status);
  if (const CollisionStop* cs = std::get_if<CollisionStop>(&traj.status)) {
    j["stop"] = {{"pair", {cs->pair[0] + 1, cs->pair[1] + 1}}, {"time", cs->time}};
  } else if (const EscapeStop* es = std::get_if<EscapeStop>(&traj.status)) {
    j["stop"] = {{"time", es->time}};
  }
  j["t_span"] = {traj.t_start(), traj.t_end()};
  j["tolerance"] = bundle.spec.integrator.tol;
  j["order"] = bundle.spec.integrator.order;
  j["conservation"] = {{"initial_energy", bundle.conservation.initial_energy},
                       {"max_energy_drift_rel", bundle.conservation.max_energy_drift_rel},
                       {"max_linear_momentum", bundle.conservation.max_linear_momentum_scaled},
                       {"max_angular_momentum", bundle.conservation.max_angular_momentum_scaled}};
  j["event_counts"] = [&] {
    ordered_json c;
    for (const EventRecord& ev : traj.events) {
      const std::string k = event_kind_name(ev.kind);
      c[k] = (c.contains(k) ? c[k].get<int>() : 0) + 1;
    }
    return c;
  }();

  if (bundle.brake) {
    const BrakeReport& br = *bundle.brake;
    ordered_json bj;
    bj["found"] = br.found;
    bj["half_period"] = br.half_period;
    bj["period"] = br.period;
    bj["periodicity_residual"] = br.periodicity_residual;
    bj["periodic"] = br.periodic;
    bj["same_labelled_shape"] = br.same_labelled_shape;
    bj["total_collision_between"] = br.total_collision_between;
    bj["first"] = state_json(br.first);
    bj["second"] = state_json(br.second);
    j["brake_pair"] = bj;
  } else {
    j["brake_pair"] = {{"found", false}};
  }

  if (bundle.symmetry) {
    const SymmetryAnalysis& sa = *bundle.symmetry;
    ordered_json sj;
    sj["symmetry_class"] = sa.cls.to_string();
    sj["angle_deg"] = sa.cls.angle_deg;
    sj["permutation"] = sa.cls.perm.cycle_notation();
    sj["fit_residual"] = sa.fit_residual;
    sj["congruent"] = sa.congruent;
    sj["halfperiod_deviation"] = sa.halfperiod_deviation;
    sj["quarter"] = {{"predicted", sa.predicted_quarter.to_string()},
                     {"observed", sa.observed_quarter},
                     {"fixed_deviation", sa.quarter_fixed_deviation},
                     {"matches", sa.quarter_matches}};
    sj["involution"] = sa.involution.to_string();
    j["symmetry"] = sj;
  }

  if (bundle.central) {
    const CentralConfigReport& cc = *bundle.central;
    ordered_json cj;
    cj["lambda"] = cc.lambda;
    cj["residual"] = cc.residual;
    cj["certified"] = cc.certified;
    if (cc.certified) {
      cj["collapse_time"] = cc.collapse_time;
      if (cc.stop_time >= 0.0) cj["stop_time"] = cc.stop_time;
    }
    cj["shape_direction_drift"] = cc.shape_direction_drift;
    j["central_config"] = cj;
  }

  if (!bundle.shape.empty()) {
    j["shape"] = {{"samples", bundle.shape.size()},
                  {"initial_inertia", bundle.shape.front().point.inertia},
                  {"final_inertia", bundle.shape.back().point.inertia}};
  }

  return j.dump(2) + "\n";
}

void write_summary_json(const std::string& path, const ReportBundle& bundle) {
  open_out(path) << summary_json_text(bundle);
}

void emit_outputs(const ReportBundle& bundle, const ScenarioSpec& spec) {
  namespace fs = std::filesystem;
  const fs::path dir = spec.outputs.directory.empty() ? fs::path(".") : fs::path(spec.outputs.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::exists(dir)) throw std::runtime_error("cannot create " + dir.string());

  if (!spec.outputs.trajectory_csv.empty())
    write_trajectory_csv((dir / spec.outputs.trajectory_csv).string(), bundle.traj,
                         spec.outputs.csv_samples);
  if (!spec.outputs.events_jsonl.empty())
    write_events_jsonl((dir / spec.outputs.events_jsonl).string(), bundle.traj);
  if (!spec.outputs.shape_csv.empty() && !bundle.shape.empty())
    write_shape_csv((dir / spec.outputs.shape_csv).string(), bundle.shape);
  if (!spec.outputs.svg.empty())
    write_orbit_svg((dir / spec.outputs.svg).string(), bundle);
  if (!spec.outputs.summary_json.empty())
    write_summary_json((dir / spec.outputs.summary_json).string(), bundle);
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (std::string& s : out) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  return out;
}

bool parse_number(const std::string& s, double* out) {
  char* end = nullptr;
  *out = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0' && std::isfinite(*out);
}

}  // namespace

std::vector<ScenarioSpec> ingest_orbit_table(const std::string& path, IngestDiagnostics* diag) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<ScenarioSpec> specs;
  std::string line;
  int line_no = 0;
  auto warn = [&](const std::string& msg) {
    if (diag) diag->warnings.push_back(path + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (!fields.empty() && fields[0] == "name") continue;  // header
    if (fields.size() < 10 || fields.size() > 12) {
      warn("expected 10-12 fields, got " + std::to_string(fields.size()) + "; row skipped");
      continue;
    }
    double nums[9];
    bool ok = true;
    for (int i = 0; i < 9; ++i)
      if (!parse_number(fields[1 + i], &nums[i])) {
        warn("field " + std::to_string(i + 2) + " is not a number; row skipped");
        ok = false;
        break;
      }
    if (!ok) continue;
    if (!(nums[0] > 0.0 && nums[1] > 0.0 && nums[2] > 0.0)) {
      warn("masses must be positive; row skipped");
      continue;
    }

    ScenarioSpec s;
    s.name = fields[0].empty() ? ("row" + std::to_string(line_no)) : fields[0];
    s.masses = {nums[0], nums[1], nums[2]};
    s.initial.kind = TriangleKind::Explicit;
    s.initial.positions = {{nums[3], nums[4]}, {nums[5], nums[6]}, {nums[7], nums[8]}};

    double expected_period = 0.0;
    bool has_period = false;
    if (fields.size() >= 11 && !fields[10].empty()) {
      if (!parse_number(fields[10], &expected_period) || !(expected_period > 0.0)) {
        warn("expected_period is not a positive number; row skipped");
        continue;
      }
      has_period = true;
    }
    if (fields.size() == 12 && !fields[11].empty()) {
      if (fields[11] == "hooke") {
        s.force_model.newtonian = false;
        s.force_model.hooke_k = 1.0;
      } else if (fields[11] != "newtonian") {
        warn("model must be \"newtonian\" or \"hooke\"; row skipped");
        continue;
      }
    }
    s.integrator.t_max = has_period ? 1.3 * expected_period : 20.0;
    s.analyses.symmetry = true;
    s.analyses.shape = false;
    s.analyses.central_config = false;
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<IngestSummaryRow> run_ingested(const std::vector<ScenarioSpec>& specs) {
  std::vector<IngestSummaryRow> rows(specs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(specs.size()); ++i) {
    IngestSummaryRow& row = rows[i];
    row.name = specs[i].name;
    try {
      const ReportBundle bundle = run_scenario(specs[i]);
      row.status = status_name(bundle.traj.status);
      if (bundle.brake) {
        row.second_brake_found = true;
        row.half_period = bundle.brake->half_period;
        row.period = bundle.brake->period;
        row.periodicity_residual = bundle.brake->periodicity_residual;
        row.periodic = bundle.brake->periodic;
      }
      if (bundle.symmetry) {
        row.symmetry_class = bundle.symmetry->cls.to_string();
        row.fit_residual = bundle.symmetry->fit_residual;
        row.congruent = bundle.symmetry->congruent;
        row.predicted_quarter = bundle.symmetry->predicted_quarter.to_string();
        row.observed_quarter = bundle.symmetry->observed_quarter;
        row.quarter_matches = bundle.symmetry->quarter_matches;
        row.halfperiod_deviation = bundle.symmetry->halfperiod_deviation;
        row.involution = bundle.symmetry->involution.to_string();
      }
    } catch (const std::exception& e) {
      row.error = e.what();
      row.status = "Error";
    }
  }
  return rows;
}

std::string ingest_summary_csv(const std::vector<IngestSummaryRow>& rows) {
  std::ostringstream out;
  out << "name,status,second_brake_found,half_period,period,periodicity_residual,periodic,"
         "symmetry_class,fit_residual,congruent,predicted_quarter,observed_quarter,"
         "quarter_matches,halfperiod_deviation,involution,error\n";
  for (const IngestSummaryRow& r : rows) {
    out << r.name << ',' << r.status << ',' << (r.second_brake_found ? "true" : "false") << ','
        << format_double(r.half_period) << ',' << format_double(r.period) << ','
        << format_double(r.periodicity_residual) << ',' << (r.periodic ? "true" : "false") << ','
        << '"' << r.symmetry_class << '"' << ',' << format_double(r.fit_residual) << ','
        << (r.congruent ? "true" : "false") << ',' << '"' << r.predicted_quarter << '"' << ','
        << '"' << r.observed_quarter << '"' << ',' << (r.quarter_matches ? "true" : "false") << ','
        << format_double(r.halfperiod_deviation) << ',' << '"' << r.involution << '"' << ','
        << '"' << r.error << '"' << '\n';
  }
  return out.str();
}

}  // namespace brakefall
