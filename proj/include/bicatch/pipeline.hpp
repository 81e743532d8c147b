#pragma once

// Scenario runner: estimation -> prediction -> catch-pose selection ->
// contact selection -> multi-mode planning -> set-point generation, with all
// stage outputs written as CSV plus a reproducibility manifest. This is the
// library behind the CLI; the binary in tools/ is a thin wrapper.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "bicatch/contact_select.hpp"
#include "bicatch/estimate.hpp"
#include "bicatch/mmto.hpp"

namespace bicatch::cli {

struct RunConfig {
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<uint64_t> seed_override;  // synthetic measurement noise only
  bool compare_agnostic = false;          // also solve the agnostic variant
  bool quiet = false;
};

struct PipelineResult {
  int exit_code = 0;  // 0 ok, 2 config error, 3 stage failure
  std::string error_stage;
  std::string error_message;
  Real aware_peak_force = 0.0;
  Real agnostic_peak_force = 0.0;
};

// Parsed scenario document (schema 1). Field names match the JSON keys.
struct ScenarioDoc {
  std::string name = "scenario";
  ObjectModel object;
  Vec3 object_dims = Vec3(0.55, 0.40, 0.42);
  std::string mesh_source = "box";  // "box", fixture name, or a mesh path
  est::Environment environment;
  Vec3 gravity = Vec3(0, 0, -9.81);

  // Measurement feed: an external CSV or a synthesized stream.
  std::string measurements_csv;  // empty -> synthesize
  RigidBodyState truth_initial;
  Real meas_rate_hz = 250.0;
  Real meas_sigma_pos = 1e-3;       // [m]
  Real meas_sigma_ang = 3.490658503988659e-3;  // 0.2 deg [rad]
  Real meas_duration = 1.0;         // [s]
  uint64_t seed = 7;

  Real go_time = 0.5;
  int prediction_knots = 60;
  Real prediction_dt = 0.03;

  std::vector<Vec3> workspace_centers;
  Real workspace_radius = 0.9;
  std::vector<Vec3> contact_seeds;  // world frame, per arm
  contact::SelectWeights select_weights;

  std::vector<Vec3> ee_start_pos;
  std::vector<Vec3> ee_start_vel;
  int mmto_lead_knots = 8;  // prediction knots of ballistic lead before contact
  mmto::MmtoConfig mmto_config;
  std::vector<Real> free_dt_bounds = {0.05, 0.4};
  std::vector<Real> contact_dt_bounds = {0.01, 0.1};

  std::string canonical_json() const;  // resolved config, deterministic bytes
};

ScenarioDoc load_scenario(const std::string& path);

// Writes the default swinging-box fixture next to nothing; used by tests and
// `bicatch init-fixture`.
ScenarioDoc swing_box_fixture();
std::string scenario_to_json(const ScenarioDoc& doc);

PipelineResult run_pipeline(const RunConfig& cfg);

// Synthesize a noisy pose-measurement CSV from the scenario ground truth.
// Returns the written path.
std::string synthesize_measurements(const ScenarioDoc& doc, uint64_t seed,
                                    const std::string& out_path);

uint64_t fnv1a_hash(const std::string& bytes);

}  // namespace bicatch::cli
