#pragma once

// Bilinear joint moment law and its composition from section rigidities.

#include <vector>

#include "vine/kinematics.hpp"
#include "vine/model.hpp"

namespace vine {

struct JointLaw {
  double stiffness = 1.0;       // k, N m/rad
  double plateau_moment = 1.0;  // N m
  double plateau_slope = 0.0;   // post-wrinkle slope used by the solver, N m/rad

  double wrinkle_angle() const noexcept { return plateau_moment / stiffness; }
  bool operator==(const JointLaw&) const = default;
};

// min(k * angle, plateau_moment).
double joint_moment(const JointLaw& law, double angle);
// As above but rising with plateau_slope past the wrinkle angle.
double regularized_moment(const JointLaw& law, double angle);
// Exact integral of regularized_moment from 0 to angle.
double joint_energy(const JointLaw& law, double angle);

// Lock owner per joint: -1 for a free joint, else the section whose jam
// state sets its stiffness.
using LockOwners = std::vector<int>;

// Law of joint `joint` (0 = base) for the given section states. Unlocked
// joints take the weaker of the two neighbours; the clamp counts as rigid.
JointLaw compose_joint_law(const RobotDescription& desc, const ModelParameters& params,
                           const std::vector<SectionState>& sections, double everted_length,
                           std::size_t joint, int lock_owner = -1);

std::vector<JointLaw> compose_joint_laws(const RobotDescription& desc,
                                         const ModelParameters& params,
                                         const std::vector<SectionState>& sections,
                                         double everted_length, const LockOwners& owners = {});

}  // namespace vine
