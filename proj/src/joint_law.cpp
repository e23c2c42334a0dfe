#include "vine/joint_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vine/errors.hpp"

namespace vine {

double joint_moment(const JointLaw& law, double angle) {
  return std::min(law.stiffness * std::fabs(angle), law.plateau_moment);
}

double regularized_moment(const JointLaw& law, double angle) {
  const double a = std::fabs(angle);
  const double w = law.wrinkle_angle();
  if (a <= w) return law.stiffness * a;
  return law.plateau_moment + law.plateau_slope * (a - w);
}

double joint_energy(const JointLaw& law, double angle) {
  const double a = std::fabs(angle);
  const double w = law.wrinkle_angle();
  if (a <= w) return 0.5 * law.stiffness * a * a;
  const double e = a - w;
  return 0.5 * law.plateau_moment * w + law.plateau_moment * e + 0.5 * law.plateau_slope * e * e;
}

JointLaw compose_joint_law(const RobotDescription& desc, const ModelParameters& params,
                           const std::vector<SectionState>& sections, double everted_length,
                           std::size_t joint, int lock_owner) {
  const std::vector<double> lengths = segment_lengths(desc, everted_length);
  if (joint >= lengths.size())
    throw StructuralError("joint " + std::to_string(joint) + " is not exposed");
  if (sections.size() < lengths.size())
    throw StructuralError("section state list shorter than exposed section count");

  double dp;
  if (lock_owner >= 0) {
    if (static_cast<std::size_t>(lock_owner) >= sections.size())
      throw StructuralError("lock owner out of range");
    dp = sections[lock_owner].jam_pressure();
  } else {
    dp = sections[joint].jam_pressure();
    if (joint > 0) dp = std::min(dp, sections[joint - 1].jam_pressure());
  }
  const double p = std::max(0.0, sections[joint].internal_gauge());
  const double r = desc.beam_radius;
  const double ei = section_rigidity(params, desc, p, dp);
  const double ei0 = section_rigidity(params, desc, p, 0.0);

  JointLaw law;
  law.stiffness = params.joints.hinge_factor * ei / lengths[joint];
  if (joint > 0) law.stiffness *= params.joints.interface_gain;
  law.plateau_moment = collapse_moment(p, r) * ei / ei0;
  // floor for p = 0
  law.plateau_moment = std::max(law.plateau_moment, 1e-9 * law.stiffness);
  law.plateau_slope = params.joints.plateau_slope_ratio * law.stiffness;
  return law;
}

std::vector<JointLaw> compose_joint_laws(const RobotDescription& desc,
                                         const ModelParameters& params,
                                         const std::vector<SectionState>& sections,
                                         double everted_length, const LockOwners& owners) {
  const std::size_t n = exposed_section_count(desc, everted_length);
  std::vector<JointLaw> laws;
  laws.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    laws.push_back(compose_joint_law(desc, params, sections, everted_length, j,
                                     j < owners.size() ? owners[j] : -1));
  return laws;
}

}  // namespace vine
