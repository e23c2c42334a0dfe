#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <csignal>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "vine/bending.hpp"
#include "vine/calibration.hpp"
#include "vine/errors.hpp"
#include "vine/hash.hpp"
#include "vine/planner.hpp"
#include "vine/scenario_io.hpp"
#include "vine/server.hpp"
#include "vine/workspace.hpp"

namespace vine::cli {
namespace {

constexpr double kDeg = kPi / 180.0;

struct Common {
  std::uint64_t seed = 1;
  bool force = false;
};

struct CalibrateArgs {
  std::string anchors, out = "params.json";
  int jobs = 1, max_iterations = 500;
};
struct BendArgs {
  std::string params, out = "bend_test.csv";
  std::vector<double> pressures_kpa{6.9, 13.8, 20.7};
  double max_displacement_mm = 40.0, step_mm = 1.0, length_mm = 250.0;
};
struct TwoSegmentArgs {
  std::string params, out = "two_segment.csv";
  double pressure_kpa = 6.9, max_force_n = 3.0, section_length_mm = 250.0;
  int steps = 30;
};
struct SimulateArgs {
  std::string scenario, script, params, targets, log = "session.log";
};
struct PlanArgs {
  std::string scenario, targets, params, out = "plan.json";
  int max_retries = 5;
  bool simultaneous = false;
};
struct WorkspaceArgs {
  std::string scenario, params, points = "workspace_points.csv", metrics = "workspace_metrics.json";
  std::vector<double> tensions_n;
  double max_angle_deg = 30.0, angle_step_deg = 5.0, azimuth_step_deg = 30.0, pressure_kpa = 6.9;
  bool spatial = false;
  int jobs = 1;
  std::size_t budget = 2000000;
};
struct ServeArgs {
  std::string scenario, params, host = "127.0.0.1", static_dir;
  int port = 8080;
};

struct Args {
  Common common;
  CalibrateArgs calibrate;
  BendArgs bend;
  TwoSegmentArgs two;
  SimulateArgs simulate;
  PlanArgs plan;
  WorkspaceArgs workspace;
  ServeArgs serve;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "random seed; only calibration start jitter draws from it")->capture_default_str();
  sub->add_flag("--force", c.force, "overwrite existing output files");
}

std::unique_ptr<CLI::App> build_app(Args& a) {
  auto app = std::make_unique<CLI::App>("Vine robot simulator, calibration suite and planner", "vine");
  app->require_subcommand(1);

  auto* cal = app->add_subcommand("calibrate", "fit material parameters to the stiffness anchors");
  cal->add_option("--anchors", a.calibrate.anchors, "anchor file (JSON); default: reference anchors");
  cal->add_option("--out", a.calibrate.out, "parameter file to write")->capture_default_str();
  cal->add_option("--jobs", a.calibrate.jobs, "parallel multi-start workers")->capture_default_str()->check(CLI::PositiveNumber);
  cal->add_option("--max-iterations", a.calibrate.max_iterations, "iteration cap per start")->capture_default_str()->check(CLI::PositiveNumber);
  add_common(cal, a.common);

  auto* bend = app->add_subcommand("bend-test", "transverse tip-force sweeps of a single beam section to CSV");
  bend->add_option("--params", a.bend.params, "parameter file; default: calibrated defaults");
  bend->add_option("--out", a.bend.out, "CSV file to write")->capture_default_str();
  bend->add_option("--pressures-kpa", a.bend.pressures_kpa, "internal gauge pressures, comma separated")->delimiter(',')->capture_default_str();
  bend->add_option("--max-displacement-mm", a.bend.max_displacement_mm, "largest tip displacement")->capture_default_str()->check(CLI::PositiveNumber);
  bend->add_option("--step-mm", a.bend.step_mm, "displacement increment")->capture_default_str()->check(CLI::PositiveNumber);
  bend->add_option("--length-mm", a.bend.length_mm, "beam length")->capture_default_str()->check(CLI::PositiveNumber);
  add_common(bend, a.common);

  auto* two = app->add_subcommand("two-segment", "two-section pivot test under a ramped tip load");
  two->add_option("--params", a.two.params, "parameter file; default: calibrated defaults");
  two->add_option("--out", a.two.out, "CSV trace to write")->capture_default_str();
  two->add_option("--pressure-kpa", a.two.pressure_kpa, "internal gauge pressure")->capture_default_str()->check(CLI::PositiveNumber);
  two->add_option("--max-force-n", a.two.max_force_n, "peak transverse tip load")->capture_default_str()->check(CLI::PositiveNumber);
  two->add_option("--steps", a.two.steps, "load increments")->capture_default_str()->check(CLI::PositiveNumber);
  two->add_option("--section-length-mm", a.two.section_length_mm, "length of each section")->capture_default_str()->check(CLI::PositiveNumber);
  add_common(two, a.common);

  auto* sim = app->add_subcommand("simulate", "execute a command script and write the event log");
  sim->add_option("--scenario", a.simulate.scenario, "scenario file (JSON)")->required();
  sim->add_option("--script", a.simulate.script, "script file replacing the scenario's own script");
  sim->add_option("--params", a.simulate.params, "parameter file replacing the scenario's parameters");
  sim->add_option("--targets", a.simulate.targets, "target file; fail unless the final state meets it");
  sim->add_option("--log", a.simulate.log, "event log to write (NDJSON)")->capture_default_str();
  add_common(sim, a.common);

  auto* plan = app->add_subcommand("plan", "plan a stiffen-bend-lock command script for target joint angles");
  plan->add_option("--scenario", a.plan.scenario, "scenario file (JSON)")->required();
  plan->add_option("--targets", a.plan.targets, "target file (JSON)")->required();
  plan->add_option("--params", a.plan.params, "parameter file replacing the scenario's parameters");
  plan->add_option("--out", a.plan.out, "script file to write")->capture_default_str();
  plan->add_option("--max-retries", a.plan.max_retries, "tension corrections per stage")->capture_default_str()->check(CLI::NonNegativeNumber);
  plan->add_flag("--simultaneous", a.plan.simultaneous, "bend joints sharing a bend plane in one stage");
  add_common(plan, a.common);

  auto* ws = app->add_subcommand("workspace", "tip workspace of the multi-joint and base-only robots");
  ws->add_option("--scenario", a.workspace.scenario, "scenario file for the robot description");
  ws->add_option("--params", a.workspace.params, "parameter file replacing the scenario's parameters");
  ws->add_option("--points", a.workspace.points, "point cloud CSV to write")->capture_default_str();
  ws->add_option("--metrics", a.workspace.metrics, "metrics JSON to write")->capture_default_str();
  ws->add_option("--tensions-n", a.workspace.tensions_n, "stage tension grid, comma separated; replaces angle levels")->delimiter(',');
  ws->add_option("--max-angle-deg", a.workspace.max_angle_deg, "largest joint angle level")->capture_default_str()->check(CLI::Range(0.0, 90.0));
  ws->add_option("--angle-step-deg", a.workspace.angle_step_deg, "angle level spacing")->capture_default_str()->check(CLI::PositiveNumber);
  ws->add_flag("--spatial", a.workspace.spatial, "bend in all azimuths and report hull volume");
  ws->add_option("--azimuth-step-deg", a.workspace.azimuth_step_deg, "azimuth spacing in spatial mode")->capture_default_str()->check(CLI::PositiveNumber);
  ws->add_option("--pressure-kpa", a.workspace.pressure_kpa, "internal gauge pressure")->capture_default_str()->check(CLI::PositiveNumber);
  ws->add_option("--jobs", a.workspace.jobs, "parallel enumeration workers")->capture_default_str()->check(CLI::PositiveNumber);
  ws->add_option("--budget", a.workspace.budget, "cap on tip evaluations per robot")->capture_default_str()->check(CLI::PositiveNumber);
  add_common(ws, a.common);

  auto* srv = app->add_subcommand("serve", "serve a live session over HTTP for the operator console");
  srv->add_option("--scenario", a.serve.scenario, "scenario file; default: paper robot");
  srv->add_option("--params", a.serve.params, "parameter file replacing the scenario's parameters");
  srv->add_option("--host", a.serve.host, "bind address")->capture_default_str();
  srv->add_option("--port", a.serve.port, "TCP port")->capture_default_str()->check(CLI::Range(1, 65535));
  srv->add_option("--static-dir", a.serve.static_dir, "directory of console assets served at /");
  add_common(srv, a.common);
  return app;
}

ModelParameters params_or_default(const std::string& path) {
  return path.empty() ? ModelParameters{} : load_parameters(read_text_file(path));
}

Scenario scenario_with(const std::string& path, const std::string& params) {
  Scenario s = path.empty() ? Scenario{} : load_scenario(read_text_file(path));
  if (!params.empty()) s.params = load_parameters(read_text_file(params));
  s.validate();
  return s;
}

int calibrate(const Args& a, std::ostream& out) {
  const CalibrationAnchors anchors =
      a.calibrate.anchors.empty() ? CalibrationAnchors::reference() : load_anchors(read_text_file(a.calibrate.anchors));
  FitOptions fo;
  fo.seed = a.common.seed;
  fo.jobs = a.calibrate.jobs;
  fo.max_iterations = a.calibrate.max_iterations;
  const CalibrationReport rep = fit_parameters(anchors, RobotDescription{}, ModelParameters{}, fo);
  write_text_file(a.calibrate.out, save_parameters(rep.parameters, &rep), a.common.force);

  const auto& m = rep.parameters.material;
  out << std::setprecision(10);
  out << "base_rigidity_Nm2 " << rep.parameters.pressure.base_rigidity << "\n"
      << "rigidity_per_kPa " << rep.parameters.pressure.rigidity_per_pascal * 1e3 << "\n"
      << "skin_gain " << m.skin_gain << "\n"
      << "deltaP_sat_kPa " << m.deltaP_sat / 1e3 << "\n";
  out << std::setprecision(6);
  for (const auto& r : rep.residuals)
    out << to_string(r.anchor.observable) << " " << to_string(r.anchor.condition) << " @ "
        << r.anchor.internal_gauge / 1e3 << " kPa: target " << r.anchor.value << ", model " << r.model_value
        << ", relative residual " << r.residual << "\n";
  out << "jam ratio @ 6.9 kPa (held out): " << 100.0 * jam_force_ratio(rep.parameters, 6900.0) << " %\n"
      << "objective " << rep.objective << ", iterations " << rep.iterations << ", best start " << rep.best_start
      << " of " << rep.starts << (rep.converged ? "" : " (not converged)") << "\n"
      << "wrote " << a.calibrate.out << "\n";
  return 0;
}

int bend_test(const Args& a, std::ostream& out) {
  const ModelParameters params = params_or_default(a.bend.params);
  const RobotDescription beam = test_beam(a.bend.length_mm / 1e3);
  std::vector<double> disps;
  const int n = static_cast<int>(std::floor(a.bend.max_displacement_mm / a.bend.step_mm + 1e-9));
  for (int k = 0; k <= n; ++k) disps.push_back(k * a.bend.step_mm / 1e3);

  std::ostringstream csv;
  csv << std::setprecision(10) << "displacement_mm,force_N,internal_kPa,deltaP_kPa\n";
  bool beyond = false;
  for (double kpa : a.bend.pressures_kpa) {
    if (!(kpa > 0.0)) throw DomainError("pressures_kpa", "must be positive");
    for (auto cond : {PouchCondition::Unjammed, PouchCondition::JammedAtmospheric, PouchCondition::JammedVacuum}) {
      const ForceCurve fc = transverse_tip_force_sweep(beam, params, {section_state(cond, kpa * 1e3)}, disps);
      beyond = beyond || fc.beyond_small_deflection;
      for (const auto& s : fc.samples)
        csv << s.displacement * 1e3 << "," << s.force << "," << s.internal_gauge / 1e3 << "," << s.delta_p / 1e3 << "\n";
    }
  }
  write_text_file(a.bend.out, csv.str(), a.common.force);
  if (beyond) out << "note: sweep exceeds the small-deflection range (10% of beam length)\n";
  out << "wrote " << a.bend.out << "\n";
  return 0;
}

int two_segment(const Args& a, std::ostream& out) {
  const ModelParameters params = params_or_default(a.two.params);
  RobotDescription geo;
  geo.section_lengths = {a.two.section_length_mm / 1e3, a.two.section_length_mm / 1e3};
  TwoSegmentOptions o;
  o.internal_gauge = a.two.pressure_kpa * 1e3;
  o.max_force = a.two.max_force_n;
  o.steps = a.two.steps;

  std::ostringstream csv;
  csv << std::setprecision(10) << "case,force_N,theta_distal_deg,theta_proximal_deg\n";
  out << std::setprecision(4);
  const std::pair<const char*, bool> cases[] = {{"proximal_jammed", false}, {"both_jammed", true}};
  for (const auto& [name, distal_jammed] : cases) {
    const TwoSegmentResult r = virtual_two_segment_test(geo, params, true, distal_jammed, o);
    for (const auto& s : r.trace)
      csv << name << "," << s.force << "," << s.theta1 / kDeg << "," << s.theta2 / kDeg << "\n";
    out << name << ": " << to_string(r.behaviour) << " (peak ratio " << r.peak_ratio << ", max spread "
        << r.max_relative_spread << ")\n";
  }
  write_text_file(a.two.out, csv.str(), a.common.force);
  out << "wrote " << a.two.out << "\n";
  return 0;
}

int simulate(const Args& a, std::ostream& out, std::ostream& err) {
  Scenario sc = scenario_with(a.simulate.scenario, a.simulate.params);
  if (!a.simulate.script.empty()) sc.script = load_script(read_text_file(a.simulate.script));
  std::optional<TargetConfiguration> target;
  if (!a.simulate.targets.empty())
    target = load_targets(read_text_file(a.simulate.targets), sc.robot.section_count());

  Session session(sc);
  std::size_t rejected = 0;
  std::string first_reason;
  for (const auto& c : sc.script) {
    const EventRecord rec = session.execute(c);
    if (!rec.accepted) {
      ++rejected;
      if (first_reason.empty()) first_reason = rec.reason;
      err << "event " << rec.index << " " << command_name(c) << " rejected: " << rec.reason << " " << rec.detail << "\n";
    }
  }
  write_text_file(a.simulate.log, save_log(session), a.common.force);

  const SessionState& s = session.state();
  out << std::fixed << std::setprecision(3) << "events " << session.log().size() << ", everted "
      << s.everted_length * 1e3 << " mm, joints deg:";
  for (const auto& th : s.configuration.joint_angles) out << " " << th.norm() / kDeg;
  out << "\nstate_hash " << hash_hex(session.state_hash()) << "\nwrote " << a.simulate.log << "\n";

  if (rejected > 0) {
    err << "error: " << first_reason << ": " << rejected << " command(s) rejected\n";
    return 1;
  }
  if (target) {
    if (s.configuration.joint_count() != target->joint_count()) {
      err << "error: target_missed: robot not fully grown\n";
      return 1;
    }
    for (std::size_t j = 0; j < target->joint_count(); ++j) {
      const double d = (s.configuration.joint_angles[j] - target->angles[j]).norm();
      if (d > target->tolerances[j]) {
        err << "error: target_missed: joint " << j << " off by " << d / kDeg << " deg\n";
        return 1;
      }
    }
    out << "target met\n";
  }
  return 0;
}

int plan(const Args& a, std::ostream& out) {
  const Scenario sc = scenario_with(a.plan.scenario, a.plan.params);
  const TargetConfiguration t = load_targets(read_text_file(a.plan.targets), sc.robot.section_count());
  PlannerOptions po;
  po.max_retries = a.plan.max_retries;
  po.simultaneous = a.plan.simultaneous;
  const PlanResult r = plan_stiffen_bend_lock(sc, t, po);
  write_text_file(a.plan.out, save_script(r.script), a.common.force);
  out << format_stage_report(r) << "final_hash " << hash_hex(r.final_hash) << "\nwrote " << a.plan.out << " ("
      << r.script.size() << " commands)\n";
  return 0;
}

int workspace(const Args& a, std::ostream& out) {
  const Scenario sc = scenario_with(a.workspace.scenario, a.workspace.params);
  const auto& w = a.workspace;
  WorkspaceOptions o;
  o.spatial = w.spatial;
  o.azimuth_step = w.azimuth_step_deg * kDeg;
  o.internal_gauge = w.pressure_kpa * 1e3;
  o.jobs = w.jobs;
  o.budget = w.budget;
  if (!w.tensions_n.empty()) {
    o.tensions = w.tensions_n;
  } else {
    const int n = static_cast<int>(std::floor(w.max_angle_deg / w.angle_step_deg + 1e-9));
    for (int k = -n; k <= n; ++k) o.angle_levels.push_back(k * w.angle_step_deg * kDeg);
  }
  const WorkspaceComparison c = compare_workspaces(sc.robot, sc.params, o);

  std::ostringstream csv;
  csv << std::setprecision(10) << "x_mm,y_mm,z_mm,pattern_id\n";
  for (const auto& p : c.multi.points)
    csv << p.tip.x() * 1e3 << "," << p.tip.y() * 1e3 << "," << p.tip.z() * 1e3 << "," << p.pattern_id << "\n";

  const double unit = w.spatial ? 1e9 : 1e6;  // m^3 -> mm^3, m^2 -> mm^2
  const char* measure = w.spatial ? "hull_volume_mm3" : "hull_area_mm2";
  Json metrics = {{"mode", w.spatial ? "spatial" : "planar"},
                  {"inputs", w.tensions_n.empty() ? "angle_levels" : "tensions"},
                  {"seed", a.common.seed},
                  {"multi_joint", {{measure, c.multi.hull_measure * unit}, {"points", c.multi.points.size()}, {"partial", c.multi.partial}}},
                  {"base_only", {{measure, c.base.hull_measure * unit}, {"points", c.base.points.size()}, {"partial", c.base.partial}}},
                  {"expansion_ratio", c.expansion_ratio}};
  Json sens = Json::array();
  for (double s : c.multi.sensitivity) sens.push_back(s * 1e3);
  metrics["tip_sensitivity_mm_per_N"] = sens;

  write_text_file(w.points, csv.str(), a.common.force);
  write_text_file(w.metrics, metrics.dump(2) + "\n", a.common.force);
  out << std::setprecision(8) << measure << ": multi-joint " << c.multi.hull_measure * unit << ", base-only "
      << c.base.hull_measure * unit << ", expansion ratio " << c.expansion_ratio
      << (c.multi.partial ? " (partial: budget reached)" : "") << "\nwrote " << w.points << ", " << w.metrics << "\n";
  return 0;
}

SessionServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int serve(const Args& a, std::ostream& out, std::ostream& err) {
  const Scenario sc = scenario_with(a.serve.scenario, a.serve.params);
  SessionServer server(sc, a.serve.static_dir);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  out << "serving protocol " << kProtocolVersion << " on http://" << a.serve.host << ":" << a.serve.port << std::endl;
  const bool ok = server.listen(a.serve.host, a.serve.port);
  g_server = nullptr;
  if (!ok) {
    err << "error: bind_failed: cannot listen on " << a.serve.host << ":" << a.serve.port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Args a;
  auto app = build_app(a);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app->parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n\n" << app->help();
    return 2;
  }

  try {
    const std::string sub = app->get_subcommands().front()->get_name();
    if (sub == "calibrate") return calibrate(a, out);
    if (sub == "bend-test") return bend_test(a, out);
    if (sub == "two-segment") return two_segment(a, out);
    if (sub == "simulate") return simulate(a, out, err);
    if (sub == "plan") return plan(a, out);
    if (sub == "workspace") return workspace(a, out);
    if (sub == "serve") return serve(a, out, err);
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal_error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

std::vector<FlagListing> list_flags() {
  Args a;
  auto app = build_app(a);
  std::vector<FlagListing> out;
  for (const CLI::App* sub : app->get_subcommands({})) {
    FlagListing f{sub->get_name(), {}};
    for (const CLI::Option* o : sub->get_options())
      for (const auto& l : o->get_lnames()) f.flags.push_back("--" + l);
    out.push_back(f);
  }
  return out;
}

}  // namespace vine::cli
