#pragma once

// Potential-energy equilibrium of the joint chain under tendon tension or held
// tendon length, tip load and optional gravity. Projected Newton with |theta_j| <= pi/2 per joint.

#include <optional>
#include <vector>

#include "vine/joint_law.hpp"
#include "vine/kinematics.hpp"
#include "vine/model.hpp"

namespace vine {

inline constexpr double kJointLimit = kPi / 2.0;

struct TendonState {
  enum class Mode { Tension, PathLength };
  Mode mode = Mode::Tension;
  std::vector<double> values;  // N per tendon, or target path length in m

  static TendonState tensions(std::vector<double> t) { return {Mode::Tension, std::move(t)}; }
  static TendonState path_lengths(std::vector<double> l) { return {Mode::PathLength, std::move(l)}; }
  static TendonState slack(std::size_t n) { return tensions(std::vector<double>(n, 0.0)); }

  void validate(std::size_t tendon_count) const;
  bool operator==(const TendonState&) const = default;
};

struct SolverOptions {
  double tolerance = 1e-8;  // projected gradient / smallest free plateau moment
  int max_iterations = 10000;
  std::optional<Configuration> initial;
  std::vector<bool> free_joints;  // empty: all free
  Vec3 tip_force = Vec3::Zero();
  Vec3 gravity = Vec3::Zero();  // m/s^2
  double hessian_step = 1e-6;
  double length_tolerance = 1e-9;  // m, path-length mode
  int max_outer_iterations = 200;
};

struct EquilibriumResult {
  Configuration configuration;
  std::vector<Vec2> joint_moments;  // law moment, restoring direction
  std::vector<bool> wrinkled;
  std::vector<double> tensions;
  double energy = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
};

// Total potential as a function of the flattened joint coordinates.
class EnergyModel {
 public:
  EnergyModel(const RobotDescription& desc, double everted_length, std::vector<JointLaw> laws,
              std::vector<Vec2> rest = {});

  void set_tensions(std::vector<double> tensions);
  // Augmented-Lagrangian term for path lengths held at or below `targets`:
  // (max(0, lambda + mu c)^2 - lambda^2) / 2 mu with c = length - target.
  void set_length_constraints(std::vector<double> targets, std::vector<double> multipliers, double mu);
  // max(0, lambda + mu c) per constrained tendon at q
  std::vector<double> constraint_tensions(const Eigen::VectorXd& q) const;
  void set_tip_force(const Vec3& f) { tip_force_ = f; }
  void set_gravity(const Vec3& g) { gravity_ = g; }

  std::size_t dimension() const noexcept { return 2 * laws_.size(); }
  const std::vector<JointLaw>& laws() const noexcept { return laws_; }
  const std::vector<Vec2>& rest() const noexcept { return rest_; }
  const std::vector<double>& tensions() const noexcept { return tensions_; }
  double everted_length() const noexcept { return everted_length_; }
  const RobotDescription& description() const noexcept { return desc_; }

  double energy(const Eigen::VectorXd& q) const { return evaluate(q, nullptr); }
  // Throws NumericError naming the joint if anything is non-finite.
  double evaluate(const Eigen::VectorXd& q, Eigen::VectorXd* gradient) const;
  double path_length(const Eigen::VectorXd& q, std::size_t tendon) const;
  Configuration configuration(const Eigen::VectorXd& q) const;

 private:
  RobotDescription desc_;
  double everted_length_;
  std::vector<JointLaw> laws_;
  std::vector<Vec2> rest_;
  std::vector<double> tensions_;
  std::vector<std::vector<TendonAnchor>> anchors_;
  std::vector<double> straight_lengths_;
  std::vector<double> segment_masses_;
  std::vector<double> targets_, multipliers_;
  double mu_ = 0.0;
  Vec3 tip_force_ = Vec3::Zero();
  Vec3 gravity_ = Vec3::Zero();
};

// Tension-controlled minimisation from options.initial (default straight).
EquilibriumResult minimize_energy(const EnergyModel& model, const SolverOptions& options);

// Full solve from laws and rest angles, either control mode.
EquilibriumResult solve_equilibrium(const RobotDescription& desc, double everted_length,
                                    const std::vector<JointLaw>& laws,
                                    const std::vector<Vec2>& rest, const TendonState& tendons,
                                    const SolverOptions& options = {});

// Laws composed from section states (no locks, zero rest angles).
EquilibriumResult solve_equilibrium(const RobotDescription& desc, const ModelParameters& params,
                                    const std::vector<SectionState>& sections,
                                    const TendonState& tendons, const SolverOptions& options = {});

}  // namespace vine
