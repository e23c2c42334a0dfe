#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vine/errors.hpp"
#include "vine/joint_law.hpp"

using namespace vine;

namespace {

constexpr double pi = 3.14159265358979323846;

JointLaw sample_law() { return {2.0, 0.3, 0.04}; }

// Simpson's rule on the regularized moment.
double integrate_moment(const JointLaw& law, double angle) {
  const int n = 20000;
  const double h = angle / n;
  double s = regularized_moment(law, 0.0) + regularized_moment(law, angle);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * regularized_moment(law, i * h);
  return s * h / 3.0;
}

double oracle_rigidity(const ModelParameters& m, const RobotDescription& d, double p, double dp) {
  const double t = m.material.stack_thickness * d.layers_per_stack / m.material.reference_layers;
  const double I = d.layer_stacks_per_section * d.layer_width * t * d.beam_radius * d.beam_radius / 2.0;
  const double E = m.material.E_unjammed +
                   (m.material.skin_gain * m.material.E_jammed_ref - m.material.E_unjammed) * (1.0 - std::exp(-dp / m.material.deltaP_sat));
  return m.pressure.base_rigidity + m.pressure.rigidity_per_pascal * p + E * I;
}

}  // namespace

TEST(JointMoment, Branches) {
  const JointLaw law = sample_law();
  const double w = law.wrinkle_angle();
  EXPECT_EQ(joint_moment(law, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(joint_moment(law, 0.5 * w), 0.5 * law.plateau_moment);
  EXPECT_EQ(joint_moment(law, 3.0 * w), law.plateau_moment);
  EXPECT_NEAR(joint_moment(law, w), law.plateau_moment, 1e-15);
}

TEST(JointMoment, RegularizedIsContinuousAndRising) {
  const JointLaw law = sample_law();
  const double w = law.wrinkle_angle();
  EXPECT_NEAR(regularized_moment(law, w * (1 - 1e-12)), regularized_moment(law, w * (1 + 1e-12)), 1e-10);
  EXPECT_DOUBLE_EQ(regularized_moment(law, 2.0 * w), law.plateau_moment + law.plateau_slope * w);
  double prev = -1.0;
  for (double a = 0.0; a < 1.5; a += 0.01) {
    const double m = regularized_moment(law, a);
    EXPECT_GT(m, prev);
    EXPECT_LE(joint_moment(law, a), law.plateau_moment);
    prev = m;
  }
}

TEST(JointEnergy, ExactIntegralOfMoment) {
  const JointLaw law = sample_law();
  for (double a : {0.01, 0.1, 0.15, 0.3, 1.0, 1.5})
    EXPECT_NEAR(joint_energy(law, a), integrate_moment(law, a), 1e-10) << a;
  EXPECT_EQ(joint_energy(law, -0.2), joint_energy(law, 0.2));
}

TEST(ComposeJointLaw, WeakerNeighbourAndClamp) {
  RobotDescription d;
  ModelParameters m;
  const double p = 6900.0;
  std::vector<SectionState> s{SectionState::jammed_vacuum(p), SectionState::unjammed(p),
                              SectionState::jammed_atmospheric(p), SectionState::jammed_vacuum(p)};
  const auto laws = compose_joint_laws(d, m, s, 1.0);
  ASSERT_EQ(laws.size(), 4u);

  const double ei0 = oracle_rigidity(m, d, p, 0.0);
  const double ei_vac = oracle_rigidity(m, d, p, p + kAtmosphericPressure);
  const double ei_atm = oracle_rigidity(m, d, p, p);
  const double mp0 = pi * p * std::pow(d.beam_radius, 3);

  // base joint: clamp is rigid, so section 0 governs
  EXPECT_NEAR(laws[0].stiffness, 3.0 * ei_vac / 0.25, 1e-9 * laws[0].stiffness);
  EXPECT_NEAR(laws[0].plateau_moment, mp0 * ei_vac / ei0, 1e-9);
  // joints 1 and 2 touch the unjammed section 1
  for (int j : {1, 2}) {
    EXPECT_NEAR(laws[j].stiffness, 8.0 * 3.0 * ei0 / 0.25, 1e-9 * laws[j].stiffness);
    EXPECT_NEAR(laws[j].plateau_moment, mp0, 1e-12);
  }
  // joint 3: weaker of atmospheric and vacuum
  EXPECT_NEAR(laws[3].stiffness, 8.0 * 3.0 * ei_atm / 0.25, 1e-9 * laws[3].stiffness);
  for (const auto& l : laws) EXPECT_DOUBLE_EQ(l.plateau_slope, 0.02 * l.stiffness);
}

TEST(ComposeJointLaw, LockOwnerOverridesNeighbours) {
  RobotDescription d;
  ModelParameters m;
  const double p = 6900.0;
  std::vector<SectionState> s(4, SectionState::jammed_vacuum(p));
  s[2] = SectionState::unjammed(p);
  const JointLaw free = compose_joint_law(d, m, s, 1.0, 3);
  const JointLaw locked = compose_joint_law(d, m, s, 1.0, 3, 3);
  EXPECT_LT(free.stiffness, locked.stiffness);
  EXPECT_EQ(locked, compose_joint_law(d, m, std::vector<SectionState>(4, SectionState::jammed_vacuum(p)), 1.0, 3));
}

TEST(ComposeJointLaw, StiffnessGrowsWithJamPressure) {
  RobotDescription d;
  ModelParameters m;
  double prev = 0.0;
  for (double pouch : {6.9e3, 4e3, 0.0, -50e3, -101.325e3}) {
    std::vector<SectionState> s(4, SectionState::with_pouch_gauge(6900.0, pouch));
    const JointLaw l = compose_joint_law(d, m, s, 1.0, 2);
    EXPECT_GE(l.stiffness, prev);
    prev = l.stiffness;
  }
}

TEST(ComposeJointLaw, UnexposedJointIsStructuralError) {
  RobotDescription d;
  ModelParameters m;
  std::vector<SectionState> s(4, SectionState::unjammed(6900.0));
  EXPECT_THROW(compose_joint_law(d, m, s, 0.5, 2), StructuralError);
  EXPECT_EQ(compose_joint_laws(d, m, s, 0.5).size(), 2u);
}
