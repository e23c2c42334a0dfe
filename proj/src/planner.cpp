#include "vine/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vine/errors.hpp"

namespace vine {

namespace {
constexpr double kRad2Deg = 180.0 / kPi;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
}  // namespace

TargetConfiguration TargetConfiguration::zeros(std::size_t joints, double tolerance) {
  TargetConfiguration t;
  t.angles.assign(joints, Vec2::Zero());
  t.tolerances.assign(joints, tolerance);
  return t;
}

void TargetConfiguration::validate() const {
  if (tolerances.size() != angles.size()) throw StructuralError("one tolerance per joint required");
  if (!drift_tolerances.empty() && drift_tolerances.size() != angles.size())
    throw StructuralError("one drift tolerance per joint required");
  for (std::size_t j = 0; j < angles.size(); ++j) {
    const std::string f = "joints[" + std::to_string(j) + "]";
    if (!angles[j].allFinite()) throw DomainError(f, "non-finite target");
    if (std::fabs(angles[j].x()) > kJointLimit || std::fabs(angles[j].y()) > kJointLimit ||
        angles[j].norm() > kJointLimit)
      throw DomainError(f, "target beyond the joint limit");
    if (!(tolerances[j] > 0.0)) throw DomainError(f + ".tolerance", "must be positive");
    if (!drift_tolerances.empty() && !(drift_tolerances[j] > 0.0))
      throw DomainError(f + ".drift_tolerance", "must be positive");
  }
}

InverseMoment inverse_single_joint(const JointLaw& law, double angle) {
  const double a = std::fabs(angle);
  if (!std::isfinite(a) || a > kJointLimit) throw DomainError("angle", "beyond the joint limit");
  InverseMoment r;
  if (a <= law.wrinkle_angle()) {
    r.moment = law.stiffness * a;
  } else {
    r.moment = law.plateau_moment + law.plateau_slope * (a - law.wrinkle_angle());
    r.reduced_accuracy = true;
  }
  return r;
}

std::vector<double> allocate_tensions(const std::vector<Vec2>& arms, const Vec2& moment) {
  const std::size_t n = arms.size();
  std::vector<double> best(n, 0.0);
  if (moment.norm() == 0.0) return best;
  double best_sum = INFINITY;
  const double mm = moment.norm();
  for (std::size_t i = 0; i < n; ++i) {
    const double an = arms[i].norm();
    if (an == 0.0) continue;
    if (std::fabs(cross2(arms[i], moment)) <= 1e-12 * an * mm && arms[i].dot(moment) > 0.0) {
      const double t = mm / an;
      if (t < best_sum) {
        best_sum = t;
        std::fill(best.begin(), best.end(), 0.0);
        best[i] = t;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double det = cross2(arms[i], arms[j]);
      if (std::fabs(det) <= 1e-12 * arms[i].norm() * arms[j].norm()) continue;
      double ti = cross2(moment, arms[j]) / det;
      double tj = cross2(arms[i], moment) / det;
      const double eps = 1e-12 * mm / std::max(arms[i].norm(), arms[j].norm());
      if (ti < -eps || tj < -eps) continue;
      ti = std::max(ti, 0.0);
      tj = std::max(tj, 0.0);
      if (ti + tj < best_sum * (1.0 - 1e-12)) {
        best_sum = ti + tj;
        std::fill(best.begin(), best.end(), 0.0);
        best[i] = ti;
        best[j] = tj;
      }
    }
  if (!std::isfinite(best_sum))
    throw PlanningError("infeasible_direction", "no nonnegative tension vector produces the requested moment");
  return best;
}

std::vector<double> allocate_tensions(const RobotDescription& desc, double direction, double moment) {
  if (desc.tendon_count() < 2) throw DomainError("tendon_angles", "allocation needs at least two tendons");
  if (!(moment >= 0.0)) throw DomainError("moment", "must be >= 0");
  std::vector<Vec2> arms;
  for (double a : desc.tendon_angles)
    arms.push_back(desc.tendon_radial_offset * Vec2(std::cos(a), std::sin(a)));
  return allocate_tensions(arms, moment * Vec2(std::cos(direction), std::sin(direction)));
}

std::vector<Vec2> tendon_moment_arms(const RobotDescription& desc, const Configuration& config,
                                     std::size_t joint) {
  const ChainKinematics ck = chain_kinematics(desc, config);
  if (joint >= ck.joint_count()) throw StructuralError("joint out of range");
  std::vector<Vec2> arms;
  Eigen::VectorXd g;
  for (std::size_t t = 0; t < desc.tendon_count(); ++t) {
    tendon_path_length(ck, tendon_anchors(desc, config.everted_length, t), &g);
    arms.push_back(-g.segment<2>(2 * joint));
  }
  return arms;
}

namespace {

struct Planner {
  const Scenario& scenario;
  const TargetConfiguration& target;
  const PlannerOptions& options;
  Session session;
  PlanResult result;

  Planner(const Scenario& sc, const TargetConfiguration& t, const PlannerOptions& o)
      : scenario(sc), target(t), options(o), session(strip(sc)) {}

  static Scenario strip(Scenario s) {
    s.script.clear();
    return s;
  }

  double unjammed_pouch() const { return kAtmosphericPressure + scenario.internal_gauge; }

  void emit(const Command& c) {
    const EventRecord ev = session.execute(c);
    if (!ev.accepted)
      throw PlanningError("invalid_script", "planned " + command_name(c) + " rejected: " + ev.reason + " " + ev.detail);
    result.script.push_back(c);
  }

  // Pouch commands to reach `pouches`; jams first, then unjams.
  void set_pouches(const std::vector<double>& pouches) {
    const auto& sec = session.state().sections;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < pouches.size(); ++i) {
        if (sec[i].pouch_pressure == pouches[i]) continue;
        const bool unjam = pouches[i] > sec[i].pouch_pressure;
        if ((pass == 0) == !unjam) emit(SetPouch{i, pouches[i]});
      }
  }

  static void pull(Session& s, const std::vector<double>& tensions, CommandScript* out) {
    for (std::size_t t = 0; t < tensions.size(); ++t) {
      if (tensions[t] <= 0.0) continue;
      const Command c = PullTendon{t, tensions[t], std::nullopt};
      s.execute(c);
      if (out) out->push_back(c);
    }
    s.execute(WaitEquilibrium{});
    if (out) out->push_back(WaitEquilibrium{});
  }

  static double along(const Vec2& theta, const Vec2& unit) { return theta.dot(unit); }

  // Tension scaling by safeguarded Newton on the active joint's angle.
  std::pair<std::vector<double>, int> tune(std::size_t j, const Vec2& goal, const JointLaw& law,
                                           const std::vector<double>& base, bool& reduced) {
    const double beta = goal.norm();
    const Vec2 unit = goal / beta;
    const double limit = scenario.robot.tendon_tension_limit;
    const double m0 = inverse_single_joint(law, beta).moment;
    double tmax = *std::max_element(base.begin(), base.end());
    double s = 1.0, s_lo = 0.0, s_hi = limit / tmax;
    std::vector<double> T;
    int tries = 0;
    for (;; ++tries) {
      T = base;
      for (double& t : T) t *= s;
      Session trial = session;
      pull(trial, T, nullptr);
      const double a = along(trial.state().configuration.joint_angles[j], unit);
      const double e = a - beta;
      if (std::fabs(e) <= options.aim_fraction * target.tolerances[j] || tries >= options.max_retries) {
        if (std::fabs(e) > target.tolerances[j]) {
          std::ostringstream os;
          os << "joint " << j << " reached " << a * kRad2Deg << " deg for target " << beta * kRad2Deg
             << " deg after " << tries << " corrections (max tension " << s * tmax << " N)";
          throw PlanningError("unreachable", os.str());
        }
        break;
      }
      if (e < 0.0) s_lo = std::max(s_lo, s);
      else s_hi = std::min(s_hi, s);
      const double slope = a < law.wrinkle_angle() ? law.stiffness : law.plateau_slope;
      double next = s - e * slope / m0;
      if (!(next > s_lo && next < s_hi)) next = 0.5 * (s_lo + s_hi);
      if (s_hi - s_lo <= 1e-12) break;
      s = next;
    }
    reduced = inverse_single_joint(law, beta).reduced_accuracy;
    return {T, tries};
  }

  void check_drift(const std::vector<Vec2>& start, const std::vector<std::size_t>& active,
                   std::vector<double>& drift, const char* phase) {
    const auto& now = session.state().configuration.joint_angles;
    drift.assign(now.size(), 0.0);
    std::ostringstream bad;
    for (std::size_t k = 0; k < now.size(); ++k) {
      if (std::find(active.begin(), active.end(), k) != active.end()) continue;
      drift[k] = (now[k] - start[k]).norm();
      if (drift[k] > target.drift_tolerance(k))
        bad << " joint " << k << " drifted " << drift[k] * kRad2Deg << " deg " << phase << ";";
    }
    if (!bad.str().empty()) throw PlanningError("drift_violation", "drift report:" + bad.str());
  }

  void sequential_stage(std::size_t j) {
    const Vec2 goal = target.angles[j];
    const std::size_t n = session.state().exposed_sections();
    std::vector<double> pouches(n, 0.0);
    pouches[j] = unjammed_pouch();
    set_pouches(pouches);

    StageReport rep;
    rep.joints = {j};
    const std::vector<Vec2> start = session.state().configuration.joint_angles;
    const JointLaw law = session.joint_laws()[j];
    const InverseMoment inv = inverse_single_joint(law, goal.norm());

    Configuration at_goal = session.state().configuration;
    at_goal.joint_angles[j] = goal;
    const std::vector<Vec2> arms = tendon_moment_arms(scenario.robot, at_goal, j);
    const std::vector<double> base = allocate_tensions(arms, inv.moment * goal.normalized());
    for (std::size_t t = 0; t < base.size(); ++t)
      if (base[t] > scenario.robot.tendon_tension_limit) {
        std::ostringstream os;
        os << "joint " << j << " needs " << base[t] << " N on tendon " << t << " (limit "
           << scenario.robot.tendon_tension_limit << " N)";
        throw PlanningError("unreachable", os.str());
      }

    auto [tensions, tries] = tune(j, goal, law, base, rep.reduced_accuracy);
    rep.tensions = tensions;
    rep.retries = tries;

    CommandScript cmds;
    pull(session, tensions, &cmds);
    result.script.insert(result.script.end(), cmds.begin(), cmds.end());
    check_drift(start, rep.joints, rep.drift_under_tension, "under tension");

    emit(SetPouch{j, 0.0});
    for (std::size_t t = 0; t < tensions.size(); ++t)
      if (tensions[t] > 0.0) emit(ReleaseTendon{t});
    emit(WaitEquilibrium{});
    check_drift(start, rep.joints, rep.drift_after_release, "after release");
    const double err = (session.state().configuration.joint_angles[j] - goal).norm();
    rep.angle_error = {err};
    if (err > target.tolerances[j]) {
      std::ostringstream os;
      os << "joint " << j << " settled " << err * kRad2Deg << " deg from target after locking";
      throw PlanningError("drift_violation", os.str());
    }
    result.stages.push_back(rep);
  }

  // Best effort: all targets at once, stiffness graded by target size.
  void simultaneous_stage(const std::vector<std::size_t>& active) {
    const std::size_t n = session.state().exposed_sections();
    std::size_t lead = active.front();
    for (std::size_t j : active)
      if (target.angles[j].norm() > target.angles[lead].norm()) lead = j;
    const Vec2 goal = target.angles[lead];
    const Vec2 unit = goal.normalized();

    std::vector<SectionState> probe = session.state().sections;
    std::vector<double> pouches(n, 0.0);
    for (std::size_t j : active) pouches[j] = unjammed_pouch();
    for (std::size_t i = 0; i < n; ++i) probe[i].pouch_pressure = pouches[i];
    const JointLaw lead_law =
        compose_joint_law(scenario.robot, scenario.params, probe, session.state().everted_length, lead);
    const double m = inverse_single_joint(lead_law, goal.norm()).moment;
    for (std::size_t j : active) {
      if (j == lead) continue;
      const double th = std::max(0.0, along(target.angles[j], unit));
      double lo = 0.0, hi = unjammed_pouch();  // jam pressure bracket
      for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        probe[j].pouch_pressure = unjammed_pouch() - mid;
        const JointLaw l =
            compose_joint_law(scenario.robot, scenario.params, probe, session.state().everted_length, j);
        if (regularized_moment(l, th) < m) lo = mid;
        else hi = mid;
      }
      pouches[j] = unjammed_pouch() - 0.5 * (lo + hi);
      probe[j].pouch_pressure = pouches[j];
    }
    set_pouches(pouches);

    StageReport rep;
    rep.joints = active;
    const std::vector<Vec2> start = session.state().configuration.joint_angles;
    Configuration at_goal = session.state().configuration;
    for (std::size_t j : active) at_goal.joint_angles[j] = target.angles[j];
    const std::vector<double> base =
        allocate_tensions(tendon_moment_arms(scenario.robot, at_goal, lead), m * unit);
    const JointLaw law = session.joint_laws()[lead];
    auto [tensions, tries] = tune(lead, goal, law, base, rep.reduced_accuracy);
    rep.tensions = tensions;
    rep.retries = tries;
    CommandScript cmds;
    pull(session, tensions, &cmds);
    result.script.insert(result.script.end(), cmds.begin(), cmds.end());
    for (std::size_t j : active) emit(SetPouch{j, 0.0});
    for (std::size_t t = 0; t < tensions.size(); ++t)
      if (tensions[t] > 0.0) emit(ReleaseTendon{t});
    emit(WaitEquilibrium{});
    for (std::size_t j : active)
      rep.angle_error.push_back((session.state().configuration.joint_angles[j] - target.angles[j]).norm());
    std::vector<double> drift;
    const auto& now = session.state().configuration.joint_angles;
    for (std::size_t k = 0; k < now.size(); ++k) drift.push_back((now[k] - start[k]).norm());
    rep.drift_after_release = drift;
    result.stages.push_back(rep);
  }

  void run() {
    target.validate();
    const RobotDescription& robot = scenario.robot;
    if (target.joint_count() != robot.section_count())
      throw StructuralError("target has " + std::to_string(target.joint_count()) + " joints; robot has " +
                            std::to_string(robot.section_count()));
    std::vector<std::size_t> active;
    for (std::size_t j = robot.section_count(); j-- > 0;)
      if (target.angles[j].norm() > 0.0) active.push_back(j);
    if (!active.empty()) {
      const double missing = robot.total_length() - session.state().everted_length;
      if (missing > 1e-12) emit(Grow{missing});
      if (options.simultaneous) simultaneous_stage(active);
      else
        for (std::size_t j : active) sequential_stage(j);
    }
    result.final_configuration = session.state().configuration;
    result.final_hash = session.state_hash();
  }
};

}  // namespace

PlanResult plan_stiffen_bend_lock(const Scenario& scenario, const TargetConfiguration& target,
                                  const PlannerOptions& options) {
  Planner p(scenario, target, options);
  p.run();
  return p.result;
}

std::string format_stage_report(const PlanResult& plan) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto& s = plan.stages[i];
    os << "stage " << i << ": joints";
    for (auto j : s.joints) os << ' ' << j;
    os << " | tensions N";
    for (double t : s.tensions) os << ' ' << t;
    os << " | corrections " << s.retries;
    if (s.reduced_accuracy) os << " | plateau (reduced accuracy)";
    os << " | error deg";
    for (double e : s.angle_error) os << ' ' << e * kRad2Deg;
    double worst = 0.0;
    for (double d : s.drift_under_tension) worst = std::max(worst, d);
    for (double d : s.drift_after_release) worst = std::max(worst, d);
    os << " | max drift deg " << worst * kRad2Deg << '\n';
  }
  os << "final joint angles deg:";
  for (const auto& a : plan.final_configuration.joint_angles) os << ' ' << a.norm() * kRad2Deg;
  os << '\n';
  return os.str();
}

}  // namespace vine
