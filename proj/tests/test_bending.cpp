#include <gtest/gtest.h>

#include <cmath>

#include "vine/bending.hpp"
#include "vine/errors.hpp"

using namespace vine;

namespace {

// cantilever hinge at the clamp, EI summed by hand from the default parameters
double hand_force(double internal_gauge, double delta_p, double delta, double L) {
  const ModelParameters p;
  const double I = 6 * 0.018 * 1.82e-3 * 0.0275 * 0.0275 / 2.0;
  double E = p.material.E_unjammed;
  if (delta_p > 0.0) {
    const double Es = p.material.saturated_modulus();
    E = Es - (Es - p.material.E_unjammed) * std::exp(-delta_p / p.material.deltaP_sat);
  }
  const double EI0 = p.pressure.base_rigidity + p.pressure.rigidity_per_pascal * internal_gauge;
  const double EI = EI0 + E * I;
  const double k = 3.0 * EI / L;
  // collapse moment grows with the skin like the rigidity
  const double Mp = 3.14159265358979 * internal_gauge * std::pow(0.0275, 3) * EI / (EI0 + p.material.E_unjammed * I);
  const double th = std::asin(delta / L);
  const double M = k * th <= Mp ? k * th : Mp + 0.02 * k * (th - Mp / k);
  return M / (L * std::cos(th));
}

}  // namespace

TEST(Bending, ReferenceForcesAtTenMillimetres) {
  const auto beam = test_beam();
  const ModelParameters p;
  const double fu = tip_force_at(beam, p, {SectionState::unjammed(6900)}, 0.010);
  const double fj = tip_force_at(beam, p, {SectionState::jammed_atmospheric(6900)}, 0.010);
  EXPECT_NEAR(fu, 1.07, 0.01 * 1.07);
  EXPECT_NEAR(fj, 6.68, 0.01 * 6.68);
  EXPECT_NEAR(fj / fu, 6.24, 0.01 * 6.24);
}

TEST(Bending, ClosedFormHingeMatchesHandComputation) {
  const auto beam = test_beam();
  const ModelParameters p;
  for (double d : {0.001, 0.005, 0.010, 0.02, 0.04}) {
    const double fu = tip_force_at(beam, p, {SectionState::unjammed(6900)}, d);
    EXPECT_NEAR(fu, hand_force(6900, 0.0, d, 0.25), 1e-9 * fu) << d;
    const auto atm = SectionState::jammed_atmospheric(13800);
    const double fa = tip_force_at(beam, p, {atm}, d);
    EXPECT_NEAR(fa, hand_force(13800, atm.jam_pressure(), d, 0.25), 1e-9 * fa) << d;
  }
}

TEST(Bending, ZeroDisplacementZeroForce) {
  const auto beam = test_beam();
  EXPECT_EQ(tip_force_at(beam, {}, {SectionState::jammed_vacuum(6900)}, 0.0), 0.0);
}

TEST(Bending, InvalidDisplacementRejected) {
  const auto beam = test_beam();
  EXPECT_THROW(tip_force_at(beam, {}, {SectionState::unjammed(6900)}, -0.001), DomainError);
  EXPECT_THROW(tip_force_at(beam, {}, {SectionState::unjammed(6900)}, 0.25), DomainError);
}

TEST(Bending, SmallDeflectionFlag) {
  const auto beam = test_beam();
  const ModelParameters p;
  const std::vector<SectionState> s{SectionState::unjammed(6900)};
  EXPECT_FALSE(transverse_tip_force_sweep(beam, p, s, {0.0, 0.01, 0.025}).beyond_small_deflection);
  EXPECT_TRUE(transverse_tip_force_sweep(beam, p, s, {0.01, 0.026}).beyond_small_deflection);
}

TEST(Bending, SweepMonotoneAndJammedStiffer) {
  const auto beam = test_beam();
  const ModelParameters p;
  std::vector<double> d;
  for (int i = 0; i <= 40; ++i) d.push_back(0.001 * i);
  for (double pg : {6900.0, 13800.0, 20700.0}) {
    const auto u = transverse_tip_force_sweep(beam, p, {SectionState::unjammed(pg)}, d);
    const auto a = transverse_tip_force_sweep(beam, p, {SectionState::jammed_atmospheric(pg)}, d);
    const auto v = transverse_tip_force_sweep(beam, p, {SectionState::jammed_vacuum(pg)}, d);
    for (std::size_t i = 1; i < d.size(); ++i) {
      EXPECT_GT(u.samples[i].force, u.samples[i - 1].force);
      EXPECT_GT(a.samples[i].force, u.samples[i].force);
      EXPECT_GT(v.samples[i].force, a.samples[i].force);
    }
    EXPECT_EQ(u.samples[5].delta_p, 0.0);
    EXPECT_DOUBLE_EQ(a.samples[5].internal_gauge, pg);
  }
}

TEST(Bending, ChainMatchesLinearComplianceAtSmallLoad) {
  RobotDescription d = test_beam();
  d.section_lengths = {0.125, 0.125};
  const ModelParameters p;
  const std::vector<SectionState> s(2, SectionState::unjammed(6900));
  const auto laws = compose_joint_laws(d, p, s, 0.25);
  const double c = 0.25 * 0.25 / laws[0].stiffness + 0.125 * 0.125 / laws[1].stiffness;
  const double delta = 1e-5;
  EXPECT_NEAR(tip_force_at(d, p, s, delta), delta / c, 1e-3 * delta / c);
}
