#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "vine/equilibrium.hpp"
#include "vine/errors.hpp"

using namespace vine;

namespace {

constexpr double pi = 3.14159265358979323846;

std::vector<JointLaw> paper_laws(double p = 6900.0) {
  RobotDescription d;
  std::vector<SectionState> s(4, SectionState::unjammed(p));
  return compose_joint_laws(d, ModelParameters{}, s, 1.0);
}

double potential(const RobotDescription& d, const std::vector<JointLaw>& laws, const Configuration& c,
                 const std::vector<double>& T) {
  double v = 0.0;
  for (std::size_t j = 0; j < laws.size(); ++j) v += joint_energy(laws[j], c.joint_angles[j].norm());
  const Configuration straight = Configuration::straight(d, c.everted_length);
  for (std::size_t t = 0; t < T.size(); ++t)
    v -= T[t] * (tendon_path_length(d, straight, t) - tendon_path_length(d, c, t));
  return v;
}

}  // namespace

TEST(Equilibrium, UnloadedChainStaysStraight) {
  RobotDescription d;
  const auto r = solve_equilibrium(d, 1.0, paper_laws(), {}, TendonState::slack(3));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.residual_norm, 0.0);
  for (const auto& th : r.configuration.joint_angles) EXPECT_EQ(th, Vec2::Zero());
}

TEST(Equilibrium, SingleJointClosedForm) {
  RobotDescription d;
  d.section_lengths = {0.25};
  std::vector<SectionState> s{SectionState::unjammed(6900.0)};
  const auto laws = compose_joint_laws(d, ModelParameters{}, s, 0.25);
  const double k = laws[0].stiffness, rt = d.tendon_radial_offset;
  const double T = 1e-7 * k / rt;
  SolverOptions o;
  o.tolerance = 1e-13;
  const auto r = solve_equilibrium(d, 0.25, laws, {}, TendonState::tensions({T, 0.0, 0.0}), o);
  ASSERT_TRUE(r.converged);
  const double theta = r.configuration.joint_angles[0].norm();
  EXPECT_NEAR(theta, T * rt / k, 1e-6 * T * rt / k);
}

TEST(Equilibrium, GradientMatchesFiniteDifferences) {
  RobotDescription d;
  const auto laws = paper_laws();
  EnergyModel model(d, 1.0, laws);
  model.set_tensions({12.0, 3.0, 0.5});
  model.set_tip_force(Vec3(0.3, -0.2, 0.1));
  std::mt19937_64 rng(21);
  double worst = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd q(8);
    for (std::size_t j = 0; j < 4; ++j) {
      // linear regime: inside the wrinkle angle
      std::uniform_real_distribution<double> mag(0.05, 0.95), az(-pi, pi);
      q.segment<2>(2 * j) = bend_toward(mag(rng) * laws[j].wrinkle_angle(), az(rng));
    }
    Eigen::VectorXd g;
    model.evaluate(q, &g);
    Eigen::VectorXd fd(8);
    for (int k = 0; k < 8; ++k) {
      Eigen::VectorXd qp = q, qm = q;
      qp(k) += h;
      qm(k) -= h;
      fd(k) = (model.energy(qp) - model.energy(qm)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Equilibrium, ConvergedPointIsLocalMinimum) {
  RobotDescription d;
  const auto laws = paper_laws();
  const std::vector<double> T{8.0, 2.0, 0.0};
  const auto r = solve_equilibrium(d, 1.0, laws, {}, TendonState::tensions(T));
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual_norm, 1e-8);
  const double v0 = potential(d, laws, r.configuration, T);
  for (std::size_t j = 0; j < 4; ++j)
    for (int c = 0; c < 2; ++c)
      for (double s : {-1e-3, 1e-3}) {
        Configuration p = r.configuration;
        p.joint_angles[j](c) += s;
        EXPECT_GE(potential(d, laws, p, T), v0 - 1e-12);
      }
}

TEST(Equilibrium, MomentsNeverExceedPlateau) {
  RobotDescription d;
  const auto laws = paper_laws();
  for (double t : {1.0, 5.0, 20.0, 60.0}) {
    const auto r = solve_equilibrium(d, 1.0, laws, {}, TendonState::tensions({t, 0.0, t / 3.0}));
    ASSERT_TRUE(r.converged) << t;
    for (std::size_t j = 0; j < laws.size(); ++j) {
      EXPECT_LE(r.joint_moments[j].norm(), laws[j].plateau_moment * (1 + 1e-12));
      const bool at_plateau = r.configuration.joint_angles[j].norm() >= laws[j].wrinkle_angle() * (1 - 1e-12);
      EXPECT_EQ(static_cast<bool>(r.wrinkled[j]), at_plateau);
    }
  }
}

TEST(Equilibrium, SingleTendonPlanarity) {
  RobotDescription d;
  const std::vector<JointLaw> laws(4, paper_laws()[1]);
  for (std::size_t tendon = 0; tendon < 3; ++tendon) {
    std::vector<double> T(3, 0.0);
    T[tendon] = 15.0;
    const auto r = solve_equilibrium(d, 1.0, laws, {}, TendonState::tensions(T));
    ASSERT_TRUE(r.converged);
    const double a = d.tendon_angles[tendon];
    const Vec2 in_plane = bend_toward(1.0, a);
    for (const auto& th : r.configuration.joint_angles) {
      EXPECT_GT(th.dot(in_plane), 0.0);
      EXPECT_LE(std::fabs(in_plane.x() * th.y() - in_plane.y() * th.x()), 1e-8);
    }
  }
}

TEST(Equilibrium, ShorteningMonotoneInTension) {
  RobotDescription d;
  const auto laws = paper_laws();
  const double straight = tendon_path_length(d, Configuration::straight(d, 1.0), 0);
  double prev = -1.0;
  for (double t = 0.0; t <= 60.0; t += 2.5) {
    const auto r = solve_equilibrium(d, 1.0, laws, {}, TendonState::tensions({t, 0.0, 0.0}));
    ASSERT_TRUE(r.converged) << t;
    const double shortening = straight - tendon_path_length(d, r.configuration, 0);
    EXPECT_GE(shortening, prev - 1e-12) << t;
    prev = shortening;
  }
}

TEST(Equilibrium, JointLimitIsADisc) {
  RobotDescription d;
  const auto laws = paper_laws();
  for (double dir : {0.0, 0.5, 2.0, pi}) {
    const auto T = std::vector<double>{100.0, dir > 1.0 ? 100.0 : 0.0, 0.0};
    const auto r = solve_equilibrium(d, 1.0, laws, {}, TendonState::tensions(T));
    EXPECT_TRUE(r.converged);
    for (const auto& th : r.configuration.joint_angles) EXPECT_LE(th.norm(), kJointLimit * (1 + 1e-12));
  }
}

TEST(Equilibrium, Deterministic) {
  RobotDescription d;
  const auto laws = paper_laws();
  const auto a = solve_equilibrium(d, 1.0, laws, {}, TendonState::tensions({9.0, 4.0, 0.0}));
  const auto b = solve_equilibrium(d, 1.0, laws, {}, TendonState::tensions({9.0, 4.0, 0.0}));
  const Eigen::VectorXd qa = a.configuration.flatten(), qb = b.configuration.flatten();
  EXPECT_EQ(std::memcmp(qa.data(), qb.data(), sizeof(double) * qa.size()), 0);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Equilibrium, PathLengthModeHitsTarget) {
  RobotDescription d;
  const auto laws = paper_laws();
  const double straight = tendon_path_length(d, Configuration::straight(d, 1.0), 0);
  std::vector<double> target{straight - 0.01, straight + 1.0, straight + 1.0};
  const auto r = solve_equilibrium(d, 1.0, laws, {}, TendonState::path_lengths(target));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(tendon_path_length(d, r.configuration, 0), target[0], 1e-9);
  EXPECT_GT(r.tensions[0], 0.0);
  EXPECT_EQ(r.tensions[1], 0.0);
  EXPECT_EQ(r.tensions[2], 0.0);
}

TEST(Equilibrium, FreeJointMask) {
  RobotDescription d;
  SolverOptions o;
  o.free_joints = {false, false, true, false};
  const auto r = solve_equilibrium(d, 1.0, paper_laws(), {}, TendonState::tensions({10.0, 0.0, 0.0}), o);
  ASSERT_TRUE(r.converged);
  for (std::size_t j : {0u, 1u, 3u}) EXPECT_EQ(r.configuration.joint_angles[j], Vec2::Zero());
  EXPECT_GT(r.configuration.joint_angles[2].norm(), 0.0);
  o.free_joints = {true};
  EXPECT_THROW(solve_equilibrium(d, 1.0, paper_laws(), {}, TendonState::slack(3), o), StructuralError);
}

TEST(Equilibrium, TipLoadBendsAwayFromLoad) {
  RobotDescription d;
  SolverOptions o;
  o.tip_force = Vec3(0.5, 0.0, 0.0);
  const auto r = solve_equilibrium(d, 1.0, paper_laws(), {}, TendonState::slack(3), o);
  ASSERT_TRUE(r.converged);
  EXPECT_GT(tip_position(d, r.configuration).x(), 0.0);
}

TEST(Equilibrium, InvalidTendonInput) {
  RobotDescription d;
  EXPECT_THROW(solve_equilibrium(d, 1.0, paper_laws(), {}, TendonState::tensions({-1.0, 0.0, 0.0})), DomainError);
  EXPECT_THROW(solve_equilibrium(d, 1.0, paper_laws(), {}, TendonState::tensions({1.0})), StructuralError);
}
