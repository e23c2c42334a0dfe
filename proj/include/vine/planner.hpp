#pragma once

// Stiffen-bend-lock planning: target joint angles to a validated command
// script, bending one joint at a time from the tip towards the base.

#include <string>
#include <vector>

#include "vine/joint_law.hpp"
#include "vine/session.hpp"

namespace vine {

struct TargetConfiguration {
  std::vector<Vec2> angles;             // rotation vector per joint, rad
  std::vector<double> tolerances;       // rad, > 0
  std::vector<double> drift_tolerances; // rad; empty: same as tolerances

  static TargetConfiguration zeros(std::size_t joints, double tolerance);
  std::size_t joint_count() const noexcept { return angles.size(); }
  double drift_tolerance(std::size_t j) const {
    return drift_tolerances.empty() ? tolerances.at(j) : drift_tolerances.at(j);
  }
  void validate() const;
  bool operator==(const TargetConfiguration&) const = default;
};

struct InverseMoment {
  double moment = 0.0;
  bool reduced_accuracy = false;  // target lies on the regularised plateau
};

// Moment that holds `law` at `angle`. Throws DomainError beyond pi/2.
InverseMoment inverse_single_joint(const JointLaw& law, double angle);

// Minimum-sum nonnegative tensions with sum_t T_t * arms[t] = moment.
// Throws PlanningError("infeasible_direction") if no such vector exists.
std::vector<double> allocate_tensions(const std::vector<Vec2>& arms, const Vec2& moment);

// Straight-configuration arms: tendon t bends towards its station with
// moment T * r_t. `direction` is the bend azimuth.
std::vector<double> allocate_tensions(const RobotDescription& desc, double direction, double moment);

// Generalised force per unit tension of every tendon at joint `joint`.
std::vector<Vec2> tendon_moment_arms(const RobotDescription& desc, const Configuration& config,
                                     std::size_t joint);

struct PlannerOptions {
  int max_retries = 5;
  double aim_fraction = 0.25;  // Newton iterates until within this share of the tolerance
  bool simultaneous = false;
};

struct StageReport {
  std::vector<std::size_t> joints;  // active joint(s)
  std::vector<double> tensions;
  int retries = 0;
  bool reduced_accuracy = false;
  std::vector<double> angle_error;          // per active joint after release, rad
  std::vector<double> drift_under_tension;  // per joint, rad, vs stage start
  std::vector<double> drift_after_release;  // per joint, rad, vs stage start
};

struct PlanResult {
  CommandScript script;
  std::vector<StageReport> stages;
  Configuration final_configuration;
  std::uint64_t final_hash = 0;
};

// Plans from the scenario's initial state (growing to full length first if
// needed). Throws PlanningError with code "unreachable" or "drift_violation".
PlanResult plan_stiffen_bend_lock(const Scenario& scenario, const TargetConfiguration& target,
                                  const PlannerOptions& options = {});

std::string format_stage_report(const PlanResult& plan);

}  // namespace vine
