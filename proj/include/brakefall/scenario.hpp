#pragma once

#include <optional>
#include <string>
#include <vector>

#include "brakefall/brake.hpp"
#include "brakefall/central.hpp"
#include "brakefall/shape.hpp"
#include "brakefall/symmetry.hpp"
#include "brakefall/taylor.hpp"

namespace brakefall {

enum class TriangleKind { Explicit, Equilateral, Collinear, Pythagorean345 };

struct InitialTriangle {
  TriangleKind kind = TriangleKind::Explicit;
  std::vector<Vec2> positions;  // Explicit
  double side = 1.0;            // Equilateral
  std::vector<double> ratios;   // Collinear gap lengths, n-1 entries

  bool operator==(const InitialTriangle&) const = default;
};

struct ForceModelSpec {
  bool newtonian = true;
  double G = 1.0;
  double hooke_k = 1.0;
  std::optional<std::vector<double>> hooke_matrix;  // row-major n×n

  bool operator==(const ForceModelSpec&) const = default;
};

struct IntegratorSpec {
  int order = 25;
  double tol = 1e-14;
  double t_max = 10.0;

  bool operator==(const IntegratorSpec&) const = default;
};

struct EventThresholds {
  double close_approach_rel = 1e-2;
  double brake_rel = 1e-12;
  double total_collision_rel = 1e-10;
  double escape_horizon = 10.0;

  bool operator==(const EventThresholds&) const = default;
};

struct AnalysisToggles {
  bool symmetry = true;
  bool shape = true;
  bool central_config = true;

  bool operator==(const AnalysisToggles&) const = default;
};

struct OutputSpec {
  std::string directory;
  std::string trajectory_csv = "trajectory.csv";
  std::string events_jsonl = "events.jsonl";
  std::string shape_csv = "shape.csv";
  std::string svg = "orbit.svg";
  std::string summary_json = "summary.json";
  int csv_samples = 1000;

  bool operator==(const OutputSpec&) const = default;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::string description;
  std::vector<double> masses{1.0, 1.0, 1.0};
  ForceModelSpec force_model;
  InitialTriangle initial;
  IntegratorSpec integrator;
  EventThresholds events;
  AnalysisToggles analyses;
  OutputSpec outputs;

  bool operator==(const ScenarioSpec&) const = default;
};

std::string serialize_spec(const ScenarioSpec& spec);
/// Strict parse; unknown or ill-typed fields raise std::runtime_error naming
/// the JSON path.
ScenarioSpec parse_spec(const std::string& json_text);

std::vector<std::string> builtin_scenario_names();
bool is_builtin_scenario(const std::string& name);
ScenarioSpec builtin_scenario(const std::string& name);
std::string builtin_scenario_blurb(const std::string& name);

MassSystem build_system(const ScenarioSpec& spec);
PlanarConfiguration build_initial(const ScenarioSpec& spec);

/// BRAKEFALL_TOL, when set, overrides every spec tolerance.
std::optional<double> global_tol_override();

// ---------------------------------------------------------------------------
// Reports

struct ConservationReport {
  double initial_energy = 0.0;
  double max_energy_drift_rel = 0.0;
  double max_linear_momentum_scaled = 0.0;
  double max_angular_momentum_scaled = 0.0;
};

struct BrakeReport {
  bool found = false;
  double half_period = 0.0;
  double period = 0.0;
  double periodicity_residual = 0.0;
  bool periodic = false;
  bool same_labelled_shape = false;
  bool total_collision_between = false;
  PhaseState first, second;
};

struct SymmetryAnalysis {
  SymmetryElement element;
  SymmetryClass cls;
  double fit_residual = 0.0;
  bool congruent = false;
  double halfperiod_deviation = 0.0;
  double quarter_fixed_deviation = 0.0;
  FixedSetPrediction predicted_quarter;
  std::string observed_quarter;
  bool quarter_matches = false;
  InvolutionReport involution;
};

struct CentralConfigReport {
  double lambda = 0.0;
  double residual = 0.0;
  bool certified = false;
  double collapse_time = 0.0;     // valid when certified
  double stop_time = -1.0;        // CollisionStop time when the run collapsed
  double shape_direction_drift = 0.0;
};

struct ReportBundle {
  ScenarioSpec spec;
  Trajectory traj;
  ConservationReport conservation;
  std::optional<BrakeReport> brake;
  std::optional<SymmetryAnalysis> symmetry;
  std::vector<TimedShapePoint> shape;
  std::optional<CentralConfigReport> central;
};

ReportBundle run_scenario(const ScenarioSpec& spec);

/// Process exit code for a run: 0 Completed, 2 CollisionStop, 3 EscapeStop.
int status_exit_code(const RunStatus& status);

// ---------------------------------------------------------------------------
// Output files

std::string format_double(double v);  // 17 significant digits, round-trip safe

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int samples);
void write_events_jsonl(const std::string& path, const Trajectory& traj);
void write_shape_csv(const std::string& path, const std::vector<TimedShapePoint>& points);
void write_orbit_svg(const std::string& path, const ReportBundle& bundle);
std::string summary_json_text(const ReportBundle& bundle);
void write_summary_json(const std::string& path, const ReportBundle& bundle);

/// Writes every file named in spec.outputs into spec.outputs.directory.
void emit_outputs(const ReportBundle& bundle, const ScenarioSpec& spec);

// ---------------------------------------------------------------------------
// Orbit-table ingestion

struct IngestDiagnostics {
  std::vector<std::string> warnings;
};

/// CSV rows "name,m1,m2,m3,x1,y1,x2,y2,x3,y3[,expected_period[,model]]" become
/// drop scenarios with symmetry analysis enabled. Malformed rows are skipped
/// with a diagnostic.
std::vector<ScenarioSpec> ingest_orbit_table(const std::string& path,
                                             IngestDiagnostics* diag = nullptr);

struct IngestSummaryRow {
  std::string name;
  std::string status;
  bool second_brake_found = false;
  double half_period = 0.0;
  double period = 0.0;
  double periodicity_residual = 0.0;
  bool periodic = false;
  std::string symmetry_class;
  double fit_residual = 0.0;
  bool congruent = false;
  std::string predicted_quarter;
  std::string observed_quarter;
  bool quarter_matches = false;
  double halfperiod_deviation = 0.0;
  std::string involution;
  std::string error;
};

/// Runs every ingested scenario (rows are independent and execute in
/// parallel) and collects the per-orbit summary table.
std::vector<IngestSummaryRow> run_ingested(const std::vector<ScenarioSpec>& specs);

std::string ingest_summary_csv(const std::vector<IngestSummaryRow>& rows);

}  // namespace brakefall
