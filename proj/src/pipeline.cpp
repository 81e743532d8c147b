#include "bicatch/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "bicatch/csv.hpp"
#include "bicatch/errors.hpp"
#include "bicatch/force_model.hpp"
#include "bicatch/mesh_fixtures.hpp"

namespace bicatch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector");
  return Vec3(j[0].get<Real>(), j[1].get<Real>(), j[2].get<Real>());
}

std::vector<Vec3> json_vec3_list(const json& j) {
  std::vector<Vec3> out;
  for (const auto& item : j) out.push_back(json_vec3(item));
  return out;
}

RigidBodyState json_state(const json& j) {
  RigidBodyState s;
  if (j.contains("position")) s.position = json_vec3(j["position"]);
  if (j.contains("orientation_zyx")) s.orientation_zyx = json_vec3(j["orientation_zyx"]);
  if (j.contains("lin_vel")) s.lin_vel = json_vec3(j["lin_vel"]);
  if (j.contains("ang_vel")) s.ang_vel = json_vec3(j["ang_vel"]);
  return s;
}

json state_json(const RigidBodyState& s) {
  return json{{"position", vec3_json(s.position)},
              {"orientation_zyx", vec3_json(s.orientation_zyx)},
              {"lin_vel", vec3_json(s.lin_vel)},
              {"ang_vel", vec3_json(s.ang_vel)}};
}

json resolved_json(const ScenarioDoc& d) {
  json j;
  j["schema"] = 1;
  j["name"] = d.name;
  j["object"] = {{"mass", d.object.mass},
                 {"dimensions", vec3_json(d.object_dims)},
                 {"friction_mu", d.object.friction_mu},
                 {"mesh", d.mesh_source}};
  if (d.environment.kind == est::EnvironmentKind::Tethered) {
    j["environment"] = {{"kind", "tethered"},
                        {"anchor", vec3_json(d.environment.tether.anchor)},
                        {"length", d.environment.tether.length}};
  } else {
    j["environment"] = {{"kind", "free_flight"}};
  }
  j["gravity"] = vec3_json(d.gravity);
  j["measurements_csv"] = d.measurements_csv;
  j["truth_initial"] = state_json(d.truth_initial);
  j["measurement"] = {{"rate_hz", d.meas_rate_hz},
                      {"sigma_pos", d.meas_sigma_pos},
                      {"sigma_ang", d.meas_sigma_ang},
                      {"duration", d.meas_duration},
                      {"seed", d.seed}};
  j["go_time"] = d.go_time;
  j["prediction"] = {{"knots", d.prediction_knots}, {"dt", d.prediction_dt}};
  json centers = json::array();
  for (const auto& c : d.workspace_centers) centers.push_back(vec3_json(c));
  j["workspace"] = {{"centers", centers}, {"radius", d.workspace_radius}};
  json seeds = json::array();
  for (const auto& s : d.contact_seeds) seeds.push_back(vec3_json(s));
  j["contact_select"] = {{"seeds", seeds},
                         {"w1", d.select_weights.w1},
                         {"w2", d.select_weights.w2},
                         {"w3", d.select_weights.w3},
                         {"tau", d.select_weights.tau},
                         {"max_iter", d.select_weights.max_iter},
                         {"delta", d.select_weights.delta},
                         {"dp_max", d.select_weights.dp_max(0)}};
  json ee_pos = json::array(), ee_vel = json::array();
  for (const auto& p : d.ee_start_pos) ee_pos.push_back(vec3_json(p));
  for (const auto& v : d.ee_start_vel) ee_vel.push_back(vec3_json(v));
  j["ee_start"] = {{"pos", ee_pos}, {"vel", ee_vel}};
  j["mmto"] = {{"lead_knots", d.mmto_lead_knots},
               {"weight_force", d.mmto_config.weight_force},
               {"weight_alpha_sq", d.mmto_config.weight_alpha_sq},
               {"weight_ee_vel", d.mmto_config.weight_ee_vel},
               {"alpha_min", d.mmto_config.alpha_min},
               {"alpha_max", d.mmto_config.alpha_max},
               {"f_normal_max", d.mmto_config.f_normal_max},
               {"desired_mass", d.mmto_config.desired_mass},
               {"free_dt_bounds", d.free_dt_bounds},
               {"contact_dt_bounds", d.contact_dt_bounds}};
  return j;
}

}  // namespace

std::string ScenarioDoc::canonical_json() const { return resolved_json(*this).dump(); }

std::string scenario_to_json(const ScenarioDoc& doc) {
  return resolved_json(doc).dump(2) + "\n";
}

ScenarioDoc load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario JSON parse failure: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"].get<int>() != 1) {
    throw ConfigError("scenario schema must be 1");
  }

  ScenarioDoc d = swing_box_fixture();  // defaults, overridden below
  try {
    if (j.contains("name")) d.name = j["name"].get<std::string>();
    if (j.contains("object")) {
      const auto& o = j["object"];
      if (o.contains("mass")) d.object.mass = o["mass"].get<Real>();
      if (o.contains("dimensions")) d.object_dims = json_vec3(o["dimensions"]);
      if (o.contains("friction_mu")) d.object.friction_mu = o["friction_mu"].get<Real>();
      if (o.contains("mesh")) d.mesh_source = o["mesh"].get<std::string>();
      d.object = ObjectModel::box(d.object.mass, d.object_dims, d.object.friction_mu);
    }
    if (j.contains("environment")) {
      const auto& e = j["environment"];
      const std::string kind = e.value("kind", "free_flight");
      if (kind == "tethered") {
        d.environment = est::Environment::tethered(json_vec3(e["anchor"]),
                                                   e["length"].get<Real>());
      } else if (kind == "free_flight") {
        d.environment = est::Environment::free_flight();
      } else {
        throw ConfigError("unknown environment kind '" + kind + "'");
      }
    }
    if (j.contains("gravity")) d.gravity = json_vec3(j["gravity"]);
    if (j.contains("measurements_csv")) {
      d.measurements_csv = j["measurements_csv"].get<std::string>();
    }
    if (j.contains("truth_initial")) d.truth_initial = json_state(j["truth_initial"]);
    if (j.contains("measurement")) {
      const auto& m = j["measurement"];
      d.meas_rate_hz = m.value("rate_hz", d.meas_rate_hz);
      d.meas_sigma_pos = m.value("sigma_pos", d.meas_sigma_pos);
      d.meas_sigma_ang = m.value("sigma_ang", d.meas_sigma_ang);
      d.meas_duration = m.value("duration", d.meas_duration);
      d.seed = m.value("seed", d.seed);
    }
    if (j.contains("go_time")) d.go_time = j["go_time"].get<Real>();
    if (j.contains("prediction")) {
      d.prediction_knots = j["prediction"].value("knots", d.prediction_knots);
      d.prediction_dt = j["prediction"].value("dt", d.prediction_dt);
    }
    if (j.contains("workspace")) {
      d.workspace_centers = json_vec3_list(j["workspace"]["centers"]);
      d.workspace_radius = j["workspace"].value("radius", d.workspace_radius);
    }
    if (j.contains("contact_select")) {
      const auto& c = j["contact_select"];
      if (c.contains("seeds")) d.contact_seeds = json_vec3_list(c["seeds"]);
      d.select_weights.w1 = c.value("w1", d.select_weights.w1);
      d.select_weights.w2 = c.value("w2", d.select_weights.w2);
      d.select_weights.w3 = c.value("w3", d.select_weights.w3);
      d.select_weights.tau = c.value("tau", d.select_weights.tau);
      d.select_weights.max_iter = c.value("max_iter", d.select_weights.max_iter);
    }
    if (j.contains("ee_start")) {
      d.ee_start_pos = json_vec3_list(j["ee_start"]["pos"]);
      if (j["ee_start"].contains("vel")) {
        d.ee_start_vel = json_vec3_list(j["ee_start"]["vel"]);
      } else {
        d.ee_start_vel.assign(d.ee_start_pos.size(), Vec3::Zero());
      }
    }
    if (j.contains("mmto")) {
      const auto& m = j["mmto"];
      d.mmto_lead_knots = m.value("lead_knots", d.mmto_lead_knots);
      d.mmto_config.weight_force = m.value("weight_force", d.mmto_config.weight_force);
      d.mmto_config.weight_alpha_sq =
          m.value("weight_alpha_sq", d.mmto_config.weight_alpha_sq);
      d.mmto_config.weight_ee_vel =
          m.value("weight_ee_vel", d.mmto_config.weight_ee_vel);
      d.mmto_config.alpha_min = m.value("alpha_min", d.mmto_config.alpha_min);
      d.mmto_config.alpha_max = m.value("alpha_max", d.mmto_config.alpha_max);
      d.mmto_config.f_normal_max =
          m.value("f_normal_max", d.mmto_config.f_normal_max);
      d.mmto_config.desired_mass =
          m.value("desired_mass", d.mmto_config.desired_mass);
      if (m.contains("free_dt_bounds")) {
        d.free_dt_bounds = m["free_dt_bounds"].get<std::vector<Real>>();
      }
      if (m.contains("contact_dt_bounds")) {
        d.contact_dt_bounds = m["contact_dt_bounds"].get<std::vector<Real>>();
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario field error: ") + e.what());
  }

  if (d.ee_start_pos.size() != d.contact_seeds.size() ||
      d.ee_start_pos.size() != d.workspace_centers.size()) {
    throw ConfigError("ee_start, contact seeds and workspace centers must agree");
  }
  if (d.free_dt_bounds.size() != 2 || d.contact_dt_bounds.size() != 2) {
    throw ConfigError("dT bounds must be [lower, upper]");
  }
  return d;
}

ScenarioDoc swing_box_fixture() {
  ScenarioDoc d;
  d.name = "swing_box";
  d.object_dims = Vec3(0.55, 0.40, 0.42);
  d.object = ObjectModel::box(4.2, d.object_dims, 0.5);
  d.mesh_source = "box";
  d.environment = est::Environment::tethered(Vec3(0.0, 1.0, 4.2), 3.0);
  // Released near 20 degrees off vertical; swings toward the robots (-y).
  d.truth_initial.position = Vec3(0.0, 2.026, 1.381);
  d.truth_initial.lin_vel = Vec3::Zero();
  d.truth_initial.ang_vel = Vec3(0.0, 0.0, 0.5);
  d.meas_duration = 1.0;
  d.go_time = 0.5;
  d.workspace_centers = {Vec3(-0.65, 0.6, 1.05), Vec3(0.65, 0.6, 1.05)};
  d.workspace_radius = 0.95;
  d.contact_seeds = {Vec3(-0.8, 0.6, 1.1), Vec3(0.8, 0.6, 1.1)};
  d.ee_start_pos = {Vec3(-0.55, 0.35, 1.0), Vec3(0.55, 0.35, 1.0)};
  d.ee_start_vel = {Vec3::Zero(), Vec3::Zero()};
  d.mmto_config.desired_mass = 4.0;
  return d;
}

uint64_t fnv1a_hash(const std::string& bytes) {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string synthesize_measurements(const ScenarioDoc& doc, uint64_t seed,
                                    const std::string& out_path) {
  const Real dt = 1.0 / doc.meas_rate_hz;
  const int n = static_cast<int>(std::llround(doc.meas_duration * doc.meas_rate_hz));
  const auto traj = est::predict_trajectory(doc.truth_initial, doc.object,
                                            doc.environment, n, dt, doc.gravity, 4);
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> gauss(0.0, 1.0);

  io::CsvWriter csv(out_path, "t,px,py,pz,rz,ry,rx");
  for (size_t i = 0; i < traj.states.size(); ++i) {
    const auto& s = traj.states[i];
    csv.row({traj.times[i],
             s.position.x() + doc.meas_sigma_pos * gauss(rng),
             s.position.y() + doc.meas_sigma_pos * gauss(rng),
             s.position.z() + doc.meas_sigma_pos * gauss(rng),
             s.orientation_zyx(0) + doc.meas_sigma_ang * gauss(rng),
             s.orientation_zyx(1) + doc.meas_sigma_ang * gauss(rng),
             s.orientation_zyx(2) + doc.meas_sigma_ang * gauss(rng)});
  }
  return out_path;
}

namespace {

struct StageTimer {
  std::map<std::string, Real>& sink;
  std::string stage;
  std::chrono::steady_clock::time_point start;
  StageTimer(std::map<std::string, Real>& s, std::string name)
      : sink(s), stage(std::move(name)), start(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto end = std::chrono::steady_clock::now();
    sink[stage] =
        std::chrono::duration_cast<std::chrono::microseconds>(end - start).count() /
        1000.0;
  }
};

geom::TriangleMesh mesh_for(const ScenarioDoc& doc) {
  if (doc.mesh_source == "box") return geom::make_box(doc.object_dims);
  if (doc.mesh_source == "cube" || doc.mesh_source == "sphere" ||
      doc.mesh_source == "dodecahedron" || doc.mesh_source == "torus") {
    return geom::make_fixture(doc.mesh_source);
  }
  return geom::load_mesh(doc.mesh_source);
}

void write_state_csv_row(io::CsvWriter& csv, Real t, const RigidBodyState& s) {
  csv.row({t, s.position.x(), s.position.y(), s.position.z(),
           s.orientation_zyx(0), s.orientation_zyx(1), s.orientation_zyx(2),
           s.lin_vel.x(), s.lin_vel.y(), s.lin_vel.z(), s.ang_vel.x(),
           s.ang_vel.y(), s.ang_vel.z()});
}

constexpr const char* kStateHeader = "t,px,py,pz,rz,ry,rx,vx,vy,vz,wx,wy,wz";

Real peak_normal_force(const mmto::Plan& plan) {
  Real peak = 0.0;
  for (const auto& k : plan.knots) {
    for (Real f : k.f_normal) peak = std::max(peak, f);
  }
  return peak;
}

void write_plan_csv(const mmto::Plan& plan, const std::string& path) {
  io::CsvWriter csv(path, "t,arm,ee_x,ee_y,ee_z,f_n,K,B");
  for (const auto& k : plan.knots) {
    for (size_t a = 0; a < k.ee_pos.size(); ++a) {
      csv.row({k.t, static_cast<Real>(a), k.ee_pos[a].x(), k.ee_pos[a].y(),
               k.ee_pos[a].z(), k.f_normal[a], k.stiffness[a], k.damping[a]});
    }
  }
}

void write_object_csv(const mmto::Plan& plan, const std::string& path) {
  io::CsvWriter csv(path, kStateHeader);
  for (const auto& k : plan.knots) {
    csv.row({k.t, k.obj_pose(0), k.obj_pose(1), k.obj_pose(2), k.obj_pose(3),
             k.obj_pose(4), k.obj_pose(5), k.obj_twist(0), k.obj_twist(1),
             k.obj_twist(2), k.obj_twist(3), k.obj_twist(4), k.obj_twist(5)});
  }
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
  PipelineResult result;
  std::map<std::string, Real> timings;

  ScenarioDoc doc;
  try {
    doc = load_scenario(cfg.scenario_path);
    if (cfg.seed_override) doc.seed = *cfg.seed_override;
    fs::create_directories(cfg.out_dir);
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.error_stage = "config";
    result.error_message = e.what();
    if (!cfg.quiet) std::fprintf(stderr, "config error: %s\n", e.what());
    return result;
  }

  const auto out = [&](const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
  };

  std::string stage = "measurements";
  try {
    // -- Measurements ------------------------------------------------------
    std::string meas_path;
    {
      StageTimer t(timings, stage);
      if (doc.measurements_csv.empty()) {
        meas_path = synthesize_measurements(doc, doc.seed, out("measurements.csv"));
      } else {
        meas_path =
            (fs::path(cfg.scenario_path).parent_path() / doc.measurements_csv).string();
      }
    }

    // -- EKF ---------------------------------------------------------------
    stage = "estimate";
    est::EkfState ekf;
    Real ekf_time = 0.0;
    {
      StageTimer t(timings, stage);
      const auto table = io::read_csv(meas_path);
      if (table.rows.empty()) throw ConfigError("measurement CSV is empty");
      Mat6 r_meas = Mat6::Zero();
      r_meas.diagonal().segment<3>(0).setConstant(doc.meas_sigma_pos *
                                                  doc.meas_sigma_pos);
      r_meas.diagonal().segment<3>(3).setConstant(doc.meas_sigma_ang *
                                                  doc.meas_sigma_ang);
      est::EkfNoise noise;

      Vec6 first;
      for (int i = 0; i < 6; ++i) first(i) = table.rows[0][i + 1];
      ekf = est::EkfState::from_pose(first, 1e-4, 1e-4, 4.0, 4.0);
      ekf_time = table.rows[0][0];

      io::CsvWriter log(out("estimate_log.csv"), kStateHeader);
      write_state_csv_row(log, ekf_time, ekf.to_rigid_body());
      for (size_t i = 1; i < table.rows.size(); ++i) {
        const Real ti = table.rows[i][0];
        if (ti > doc.go_time) break;
        Vec6 pose;
        for (int c = 0; c < 6; ++c) pose(c) = table.rows[i][c + 1];
        ekf = est::ekf_predict(ekf, doc.object, doc.gravity, ti - ekf_time, noise,
                               doc.environment);
        ekf = est::ekf_update(ekf, pose, r_meas);
        ekf_time = ti;
        write_state_csv_row(log, ti, ekf.to_rigid_body());
      }
    }

    // -- Prediction ---------------------------------------------------------
    stage = "predict";
    est::PredictedTrajectory traj;
    {
      StageTimer t(timings, stage);
      traj = est::predict_trajectory(ekf.to_rigid_body(), doc.object,
                                     doc.environment, doc.prediction_knots,
                                     doc.prediction_dt, doc.gravity);
      io::CsvWriter csv(out("prediction.csv"), kStateHeader);
      for (size_t i = 0; i < traj.states.size(); ++i) {
        write_state_csv_row(csv, ekf_time + traj.times[i], traj.states[i]);
      }
    }

    // -- Catch pose ----------------------------------------------------------
    stage = "select_catch_pose";
    int catch_idx = 0;
    RigidBodyState catch_state;
    {
      StageTimer t(timings, stage);
      Vec3 center = Vec3::Zero();
      for (const auto& c : doc.workspace_centers) center += c;
      center /= static_cast<Real>(doc.workspace_centers.size());
      std::tie(catch_idx, catch_state) =
          est::select_catch_pose(traj, center, doc.workspace_radius);
    }

    // -- Contact selection ----------------------------------------------------
    stage = "contact_select";
    contact::ContactSet contacts;
    {
      StageTimer t(timings, stage);
      const Mat3 r_catch = euler_zyx_to_rotation(catch_state.orientation_zyx);
      const auto mesh_world =
          geom::transform_mesh(mesh_for(doc), r_catch, catch_state.position);
      std::vector<contact::TraceRow> trace;
      contacts = contact::cd_sqp(mesh_world, catch_state.position,
                                 catch_state.lin_vel, doc.contact_seeds,
                                 doc.select_weights, &trace);
      io::CsvWriter iters(out("contact_iterations.csv"),
                          "iter,contact_id,px,py,pz,nx,ny,nz,cost");
      for (const auto& row : trace) {
        iters.row({static_cast<Real>(row.iter), static_cast<Real>(row.contact_id),
                   row.position.x(), row.position.y(), row.position.z(),
                   row.normal.x(), row.normal.y(), row.normal.z(), row.cost});
      }
      io::CsvWriter finals(out("contacts.csv"), "arm,px,py,pz,nx,ny,nz");
      for (size_t a = 0; a < contacts.points.size(); ++a) {
        const auto& p = contacts.points[a];
        finals.row({static_cast<Real>(a), p.position.x(), p.position.y(),
                    p.position.z(), p.smooth_normal.x(), p.smooth_normal.y(),
                    p.smooth_normal.z()});
      }
      if (!contacts.converged) throw std::runtime_error("NotConverged");
    }

    // -- MMTO ------------------------------------------------------------------
    stage = "plan";
    mmto::Plan aware_plan;
    mmto::Plan agnostic_plan;
    {
      StageTimer t(timings, stage);
      mmto::Scenario sc;
      sc.object = doc.object;
      const int lead = std::max(catch_idx - doc.mmto_lead_knots, 0);
      sc.object_initial = traj.states[lead];
      sc.ee_initial_pos = doc.ee_start_pos;
      sc.ee_initial_vel = doc.ee_start_vel;
      const Mat3 r_catch = euler_zyx_to_rotation(catch_state.orientation_zyx);
      for (const auto& p : contacts.points) {
        sc.contacts.push_back(mmto::ContactSpec::from_normal(
            r_catch.transpose() * (p.position - catch_state.position),
            r_catch.transpose() * p.smooth_normal));
      }
      sc.modes = mmto::Scenario::standard_mode_sequence();
      for (int i = 0; i + 1 < static_cast<int>(sc.modes.size()); ++i) {
        const bool free_phase = sc.modes[i].dyn == mmto::DynMode::FreeMotion;
        sc.dt_lower.push_back(free_phase ? doc.free_dt_bounds[0]
                                         : doc.contact_dt_bounds[0]);
        sc.dt_upper.push_back(free_phase ? doc.free_dt_bounds[1]
                                         : doc.contact_dt_bounds[1]);
      }
      sc.workspace_centers = doc.workspace_centers;
      sc.workspace_radius = doc.workspace_radius;
      sc.friction_mu = doc.object.friction_mu;
      sc.gravity = doc.gravity;

      mmto::MmtoConfig aware_cfg = doc.mmto_config;
      aware_cfg.impact_aware = true;
      const auto aware_problem = mmto::build_problem(sc, aware_cfg);
      const auto aware_result =
          mmto::solve(aware_problem, mmto::initial_guess(aware_problem));
      aware_plan = mmto::extract_plan(aware_problem, aware_result);
      if (aware_plan.status != mmto::SolveStatus::Solved) {
        throw std::runtime_error(aware_plan.status == mmto::SolveStatus::Stalled
                                     ? "Stalled"
                                     : "MaxIter");
      }
      write_plan_csv(aware_plan, out("plan.csv"));
      write_object_csv(aware_plan, out("plan_object.csv"));

      if (cfg.compare_agnostic) {
        mmto::MmtoConfig ag_cfg = doc.mmto_config;
        ag_cfg.impact_aware = false;
        const auto ag_problem = mmto::build_problem(sc, ag_cfg);
        const auto ag_result =
            mmto::solve(ag_problem, mmto::initial_guess(ag_problem));
        agnostic_plan = mmto::extract_plan(ag_problem, ag_result);
        if (agnostic_plan.status != mmto::SolveStatus::Solved) {
          throw std::runtime_error("agnostic variant failed to solve");
        }
        write_plan_csv(agnostic_plan, out("plan_agnostic.csv"));
      }
    }

    // -- Set-points --------------------------------------------------------------
    stage = "setpoints";
    {
      StageTimer t(timings, stage);
      io::CsvWriter csv(out("setpoints.csv"), "t,arm,xd_x,xd_y,xd_z");
      for (const auto& knot : aware_plan.knots) {
        if (!knot.in_contact) continue;
        for (size_t a = 0; a < knot.ee_pos.size(); ++a) {
          const Real k_stiff = std::max(knot.stiffness[a], force::kStiffnessFloor);
          const Vec3 x_d = force::setpoint(knot.ee_pos[a], knot.f_world[a],
                                           Vec3::Constant(k_stiff));
          csv.row({knot.t, static_cast<Real>(a), x_d.x(), x_d.y(), x_d.z()});
        }
      }
    }

    result.aware_peak_force = peak_normal_force(aware_plan);
    if (cfg.compare_agnostic) {
      result.agnostic_peak_force = peak_normal_force(agnostic_plan);
    }

    // -- Manifest -----------------------------------------------------------------
    stage = "manifest";
    {
      json manifest;
      manifest["schema"] = 1;
      manifest["name"] = doc.name;
      manifest["config"] = resolved_json(doc);
      manifest["config_hash"] = fnv1a_hash(doc.canonical_json());
      manifest["catch_knot"] = catch_idx;
      manifest["contact_converged"] = contacts.converged;
      manifest["contact_iterations"] = contacts.iterations;
      manifest["aware"] = {{"status", "Solved"},
                           {"objective", aware_plan.objective},
                           {"max_violation", aware_plan.max_violation},
                           {"peak_normal_force", result.aware_peak_force}};
      if (cfg.compare_agnostic) {
        manifest["agnostic"] = {{"status", "Solved"},
                                {"objective", agnostic_plan.objective},
                                {"max_violation", agnostic_plan.max_violation},
                                {"peak_normal_force", result.agnostic_peak_force}};
      }
      json artifacts = json::array();
      for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
        const auto name = entry.path().filename().string();
        if (name != "timings.json" && name != "manifest.json" && name != "error.json") {
          artifacts.push_back(name);
        }
      }
      std::sort(artifacts.begin(), artifacts.end());
      manifest["artifacts"] = artifacts;
      std::ofstream mf(out("manifest.json"));
      mf << manifest.dump(2) << "\n";
    }
    {
      // Wall-clock timings live outside the manifest so reruns stay
      // byte-identical; see README on determinism.
      json tj;
      for (const auto& [k, v] : timings) tj[k] = v;
      std::ofstream tf(out("timings.json"));
      tf << tj.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    result.exit_code = 3;
    result.error_stage = stage;
    result.error_message = e.what();
    json err;
    err["stage"] = stage;
    err["error"] = e.what();
    std::ofstream ef(out("error.json"));
    ef << err.dump(2) << "\n";
    if (!cfg.quiet) {
      std::fprintf(stderr, "stage '%s' failed: %s\n", stage.c_str(), e.what());
    }
    return result;
  }
  return result;
}

}  // namespace bicatch::cli
