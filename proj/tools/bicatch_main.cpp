// bicatch: impact-aware bimanual catching toolbox.
//
// Subcommands wrap the library modules: `run` drives the full pipeline,
// the others expose single stages for experiments and data export.

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bicatch/contact_select.hpp"
#include "bicatch/csv.hpp"
#include "bicatch/estimate.hpp"
#include "bicatch/impact.hpp"
#include "bicatch/mesh_fixtures.hpp"
#include "bicatch/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bicatch;

namespace {

std::vector<Real> parse_number_list(const std::string& text) {
  std::vector<Real> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

// "180:91:10" -> 10 evenly spaced angles from 180 to 91; otherwise a comma list.
std::vector<Real> parse_angles(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string a, b, c;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, c, ':');
    const Real start = std::stod(a), stop = std::stod(b);
    const int count = std::stoi(c);
    std::vector<Real> out;
    for (int i = 0; i < count; ++i) {
      out.push_back(count == 1 ? start
                               : start + (stop - start) * i / (count - 1));
    }
    return out;
  }
  return parse_number_list(text);
}

Vec3 parse_vec3(const std::string& text) {
  const auto v = parse_number_list(text);
  if (v.size() != 3) throw CLI::ValidationError("expected x,y,z");
  return Vec3(v[0], v[1], v[2]);
}

std::vector<Vec3> parse_vec3_list(const std::string& text) {
  std::vector<Vec3> out;
  std::stringstream ss(text);
  std::string group;
  while (std::getline(ss, group, ';')) {
    if (!group.empty()) out.push_back(parse_vec3(group));
  }
  return out;
}

int cmd_impact_sweep(const std::string& angles_text, Real speed, Real mu,
                     Real e_rest, Real omega_y, Real offset_x,
                     const std::string& out_path) {
  const auto angles = parse_angles(angles_text);
  const ObjectModel model = ObjectModel::box(4.2, Vec3(0.55, 0.40, 0.42), mu);
  impact::ImpactParams params;
  params.mu = mu;
  params.e_rest = e_rest;

  impact::ContactFrame frame;
  frame.origin = Vec3(offset_x, 0.0, 0.0);
  const Vec3 com(0.0, 0.0, 0.21);  // contact on the box's bottom face
  const auto rows = impact::impulse_sweep(model, frame, com, speed, params,
                                          angles, Vec3(0.0, omega_y, 0.0));
  io::CsvWriter csv(out_path, "angle_deg,lambda_n,lambda_t,lambda_total");
  for (const auto& r : rows) {
    csv.row({r.angle_deg, r.lambda_n, r.lambda_t, r.lambda_total});
  }
  std::printf("wrote %s (%zu rows)\n", out_path.c_str(), rows.size());
  return 0;
}

int cmd_contact_select(const std::string& mesh_arg, const std::string& vel_text,
                       const std::string& seeds_text, const std::string& out_dir) {
  geom::TriangleMesh mesh;
  if (mesh_arg == "cube" || mesh_arg == "sphere" || mesh_arg == "dodecahedron" ||
      mesh_arg == "torus") {
    mesh = geom::make_fixture(mesh_arg);
  } else {
    mesh = geom::load_mesh(mesh_arg);
  }
  const Vec3 vel = parse_vec3(vel_text);
  const auto seeds = parse_vec3_list(seeds_text);
  if (seeds.empty()) throw CLI::ValidationError("need at least one seed");

  fs::create_directories(out_dir);
  contact::SelectWeights weights;
  std::vector<contact::TraceRow> trace;
  const auto set =
      contact::cd_sqp(mesh, Vec3::Zero(), vel, seeds, weights, &trace);

  io::CsvWriter iters((fs::path(out_dir) / "contact_iterations.csv").string(),
                      "iter,contact_id,px,py,pz,nx,ny,nz,cost");
  for (const auto& row : trace) {
    iters.row({static_cast<Real>(row.iter), static_cast<Real>(row.contact_id),
               row.position.x(), row.position.y(), row.position.z(),
               row.normal.x(), row.normal.y(), row.normal.z(), row.cost});
  }
  io::CsvWriter finals((fs::path(out_dir) / "contacts.csv").string(),
                       "arm,px,py,pz,nx,ny,nz");
  for (size_t a = 0; a < set.points.size(); ++a) {
    const auto& p = set.points[a];
    finals.row({static_cast<Real>(a), p.position.x(), p.position.y(),
                p.position.z(), p.smooth_normal.x(), p.smooth_normal.y(),
                p.smooth_normal.z()});
  }
  std::printf("%s after %d iterations, cost %.6g\n",
              set.converged ? "converged" : "NOT converged", set.iterations,
              set.cost_history.back());
  return set.converged ? 0 : 3;
}

int cmd_predict(const std::string& state_text, const std::string& tether_text,
                int knots, Real dt, const std::string& out_path) {
  const auto vals = parse_number_list(state_text);
  if (vals.size() != 12) {
    throw CLI::ValidationError("state needs 12 numbers: px,py,pz,rz,ry,rx,vx,vy,vz,wx,wy,wz");
  }
  RigidBodyState s;
  s.position = Vec3(vals[0], vals[1], vals[2]);
  s.orientation_zyx = Vec3(vals[3], vals[4], vals[5]);
  s.lin_vel = Vec3(vals[6], vals[7], vals[8]);
  s.ang_vel = Vec3(vals[9], vals[10], vals[11]);

  est::Environment env = est::Environment::free_flight();
  if (!tether_text.empty()) {
    const auto tv = parse_number_list(tether_text);
    if (tv.size() != 4) throw CLI::ValidationError("tether needs ax,ay,az,length");
    env = est::Environment::tethered(Vec3(tv[0], tv[1], tv[2]), tv[3]);
  }
  const ObjectModel model = ObjectModel::box(4.2, Vec3(0.55, 0.40, 0.42));
  const auto traj = est::predict_trajectory(s, model, env, knots, dt);
  io::CsvWriter csv(out_path, "t,px,py,pz,rz,ry,rx,vx,vy,vz,wx,wy,wz");
  for (size_t i = 0; i < traj.states.size(); ++i) {
    const auto& st = traj.states[i];
    csv.row({traj.times[i], st.position.x(), st.position.y(), st.position.z(),
             st.orientation_zyx(0), st.orientation_zyx(1), st.orientation_zyx(2),
             st.lin_vel.x(), st.lin_vel.y(), st.lin_vel.z(), st.ang_vel.x(),
             st.ang_vel.y(), st.ang_vel.z()});
  }
  std::printf("wrote %s (%zu knots)\n", out_path.c_str(), traj.states.size());
  return 0;
}

int cmd_estimate(const std::string& meas_path, Real sigma_pos, Real sigma_ang_deg,
                 const std::string& out_path) {
  const auto table = io::read_csv(meas_path);
  if (table.rows.empty()) {
    std::fprintf(stderr, "measurement CSV is empty\n");
    return 2;
  }
  const Real sigma_ang = deg2rad(sigma_ang_deg);
  Mat6 r_meas = Mat6::Zero();
  r_meas.diagonal().segment<3>(0).setConstant(sigma_pos * sigma_pos);
  r_meas.diagonal().segment<3>(3).setConstant(sigma_ang * sigma_ang);
  est::EkfNoise noise;
  const ObjectModel model = ObjectModel::box(4.2, Vec3(0.55, 0.40, 0.42));
  const Vec3 gravity(0, 0, -9.81);

  Vec6 first;
  for (int i = 0; i < 6; ++i) first(i) = table.rows[0][i + 1];
  est::EkfState ekf = est::EkfState::from_pose(first, 1e-4, 1e-4, 4.0, 4.0);
  Real t_prev = table.rows[0][0];

  io::CsvWriter csv(out_path, "t,px,py,pz,rz,ry,rx,vx,vy,vz,wx,wy,wz");
  const auto log_row = [&](Real t) {
    const auto s = ekf.to_rigid_body();
    csv.row({t, s.position.x(), s.position.y(), s.position.z(),
             s.orientation_zyx(0), s.orientation_zyx(1), s.orientation_zyx(2),
             s.lin_vel.x(), s.lin_vel.y(), s.lin_vel.z(), s.ang_vel.x(),
             s.ang_vel.y(), s.ang_vel.z()});
  };
  log_row(t_prev);
  for (size_t i = 1; i < table.rows.size(); ++i) {
    Vec6 pose;
    for (int c = 0; c < 6; ++c) pose(c) = table.rows[i][c + 1];
    const Real t = table.rows[i][0];
    ekf = est::ekf_predict(ekf, model, gravity, t - t_prev, noise);
    ekf = est::ekf_update(ekf, pose, r_meas);
    t_prev = t;
    log_row(t);
  }
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int cmd_fixtures(const std::string& name, const std::string& out_path) {
  const auto mesh = geom::make_fixture(name);
  geom::write_obj(mesh, out_path);
  std::printf("wrote %s (%d vertices, %d faces)\n", out_path.c_str(),
              mesh.num_vertices(), mesh.num_faces());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"impact-aware bimanual catching planner"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "full pipeline on a scenario JSON");
  std::string scenario_path, out_dir = "out";
  bool agnostic = false;
  uint64_t seed = 0;
  bool seed_set = false;
  run->add_option("--scenario", scenario_path, "scenario JSON")->required();
  run->add_option("--out-dir", out_dir, "output directory");
  run->add_flag("--agnostic", agnostic, "also solve the impact-agnostic variant");
  run->add_option("--seed", seed, "override the synthetic-noise seed")
      ->each([&](const std::string&) { seed_set = true; });

  // plan
  auto* plan = app.add_subcommand("plan", "estimation through planning, plan outputs only");
  std::string plan_scenario, plan_out = "out";
  bool plan_agnostic = false;
  plan->add_option("--scenario", plan_scenario, "scenario JSON")->required();
  plan->add_option("--out-dir", plan_out, "output directory");
  plan->add_flag("--agnostic", plan_agnostic, "solve the impact-agnostic variant too");

  // impact-sweep
  auto* sweep = app.add_subcommand("impact-sweep", "impulse vs inclination table");
  std::string angles = "180,175,160,150,140,130,120,100,95,91";
  Real speed = 2.0, mu = 0.5, e_rest = 0.4, omega_y = 0.0, offset_x = 0.0;
  std::string sweep_out = "impulse_sweep.csv";
  sweep->add_option("--angles", angles, "comma list or start:stop:count");
  sweep->add_option("--speed", speed, "object speed [m/s]");
  sweep->add_option("--mu", mu, "friction coefficient");
  sweep->add_option("--e-rest", e_rest, "energetic restitution");
  sweep->add_option("--omega-y", omega_y, "object spin about y [rad/s]");
  sweep->add_option("--offset-x", offset_x, "contact offset from CoM [m]");
  sweep->add_option("--out", sweep_out, "output CSV");

  // contact-select
  auto* select = app.add_subcommand("contact-select", "CD-SQP on a mesh");
  std::string mesh_arg = "cube", vel_text = "2,0,0";
  std::string seeds_text = "-0.7,0.11,0.04;0.7,0.13,-0.06";
  std::string select_out = "out";
  select->add_option("--mesh", mesh_arg, "fixture name or OBJ/OFF path");
  select->add_option("--velocity", vel_text, "object CoM velocity vx,vy,vz");
  select->add_option("--seeds", seeds_text, "seed points x,y,z;x,y,z;...");
  select->add_option("--out-dir", select_out, "output directory");

  // predict
  auto* predict = app.add_subcommand("predict", "IVP trajectory prediction");
  std::string state_text = "0,0,1, 0,0,0, 1,0,0, 0,0,0";
  std::string tether_text;
  int knots = 60;
  Real pdt = 0.03;
  std::string predict_out = "prediction.csv";
  predict->add_option("--state", state_text,
                      "px,py,pz,rz,ry,rx,vx,vy,vz,wx,wy,wz");
  predict->add_option("--tether", tether_text, "ax,ay,az,length (empty = free)");
  predict->add_option("--knots", knots, "number of knots");
  predict->add_option("--dt", pdt, "knot spacing [s]");
  predict->add_option("--out", predict_out, "output CSV");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "EKF over a measurement CSV");
  std::string meas_path, est_out = "estimate_log.csv";
  Real sigma_pos = 1e-3, sigma_ang_deg = 0.2;
  estimate->add_option("--measurements", meas_path, "CSV t,px,py,pz,rz,ry,rx")
      ->required();
  estimate->add_option("--sigma-pos", sigma_pos, "measurement sigma [m]");
  estimate->add_option("--sigma-ang-deg", sigma_ang_deg, "measurement sigma [deg]");
  estimate->add_option("--out", est_out, "output CSV");

  // fixtures
  auto* fixtures = app.add_subcommand("fixtures", "write a fixture mesh as OBJ");
  std::string fixture_name = "cube", fixture_out = "cube.obj";
  fixtures->add_option("--name", fixture_name, "cube|sphere|dodecahedron|torus");
  fixtures->add_option("--out", fixture_out, "output OBJ path");

  // init-scenario
  auto* init = app.add_subcommand("init-scenario", "write the swing-box fixture JSON");
  std::string init_out = "swing_box.json";
  init->add_option("--out", init_out, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || plan->parsed()) {
      cli::RunConfig cfg;
      cfg.scenario_path = run->parsed() ? scenario_path : plan_scenario;
      cfg.out_dir = run->parsed() ? out_dir : plan_out;
      cfg.compare_agnostic = run->parsed() ? agnostic : plan_agnostic;
      if (seed_set) cfg.seed_override = seed;
      const auto result = cli::run_pipeline(cfg);
      if (result.exit_code == 0) {
        std::printf("ok: peak normal force %.2f N%s\n", result.aware_peak_force,
                    cfg.compare_agnostic ? " (see manifest for the comparison)" : "");
      }
      return result.exit_code;
    }
    if (sweep->parsed()) {
      return cmd_impact_sweep(angles, speed, mu, e_rest, omega_y, offset_x,
                              sweep_out);
    }
    if (select->parsed()) {
      return cmd_contact_select(mesh_arg, vel_text, seeds_text, select_out);
    }
    if (predict->parsed()) {
      return cmd_predict(state_text, tether_text, knots, pdt, predict_out);
    }
    if (estimate->parsed()) {
      return cmd_estimate(meas_path, sigma_pos, sigma_ang_deg, est_out);
    }
    if (fixtures->parsed()) {
      return cmd_fixtures(fixture_name, fixture_out);
    }
    if (init->parsed()) {
      std::ofstream out(init_out);
      out << cli::scenario_to_json(cli::swing_box_fixture());
      std::printf("wrote %s\n", init_out.c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
