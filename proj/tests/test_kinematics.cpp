#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vine/errors.hpp"
#include "vine/kinematics.hpp"

using namespace vine;

namespace {

constexpr double pi = 3.14159265358979323846;

Mat3 skew(const Vec3& w) {
  Mat3 k;
  k << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return k;
}

Mat3 rodrigues(const Vec3& w) {
  const double t = w.norm();
  if (t == 0.0) return Mat3::Identity();
  const Mat3 k = skew(w / t);
  return Mat3::Identity() + std::sin(t) * k + (1.0 - std::cos(t)) * k * k;
}

RobotDescription two_sections() {
  RobotDescription d;
  d.section_lengths = {0.25, 0.25};
  return d;
}

Configuration with_angles(const RobotDescription& d, std::vector<Vec2> angles) {
  Configuration c = Configuration::straight(d, d.total_length());
  c.joint_angles = std::move(angles);
  return c;
}

}  // namespace

TEST(Kinematics, StraightChainIsCollinear) {
  RobotDescription d;
  const Configuration c = Configuration::straight(d, 1.0);
  ASSERT_EQ(c.joint_count(), 4u);
  const auto poses = forward_kinematics(d, c);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_NEAR((poses[i].origin - Vec3(0, 0, 0.25 * i)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((poses[i].axis() - Vec3::UnitZ()).norm(), 0.0, 1e-15);
  }
  EXPECT_NEAR((tip_position(d, c) - Vec3(0, 0, 1.0)).norm(), 0.0, 1e-15);
}

TEST(Kinematics, RightAngleAtInterface) {
  const RobotDescription d = two_sections();
  const Configuration c = with_angles(d, {Vec2::Zero(), bend_toward(pi / 2.0, 0.0)});
  const Vec3 tip = tip_position(d, c);
  EXPECT_NEAR(tip.x(), 0.25, 1e-15);
  EXPECT_NEAR(tip.y(), 0.0, 1e-15);
  EXPECT_NEAR(tip.z(), 0.25, 1e-15);
}

TEST(Kinematics, FourPlanarBendsSumOfRotatedSegments) {
  RobotDescription d;
  const double a = 30.0 * pi / 180.0;
  const Configuration c = with_angles(d, std::vector<Vec2>(4, bend_toward(a, 0.0)));
  double x = 0.0, z = 0.0;
  for (int k = 1; k <= 4; ++k) {
    x += 0.25 * std::sin(k * a);
    z += 0.25 * std::cos(k * a);
  }
  const auto poses = forward_kinematics(d, c);
  const Vec3 tip = poses.back().end();
  EXPECT_NEAR(tip.x(), x, 1e-14);
  EXPECT_NEAR(tip.y(), 0.0, 1e-14);
  EXPECT_NEAR(tip.z(), z, 1e-14);
  EXPECT_NEAR(std::acos(poses.back().axis().z()), 4.0 * a, 1e-12);
}

TEST(Kinematics, JointCountMismatchIsStructuralError) {
  RobotDescription d;
  Configuration c = Configuration::straight(d, 1.0);
  c.joint_angles.pop_back();
  EXPECT_THROW(forward_kinematics(d, c), StructuralError);
}

TEST(Kinematics, RotationMatchesRodrigues) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const Vec2 th(u(rng), u(rng));
    EXPECT_LT((joint_rotation(th) - rodrigues(Vec3(th.x(), th.y(), 0.0))).norm(), 1e-14);
  }
  EXPECT_EQ(joint_rotation(Vec2::Zero()), Mat3::Identity());
}

TEST(Kinematics, LeftJacobianIsRotationDerivative) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const Vec2 th = i == 0 ? Vec2::Zero() : Vec2(u(rng), u(rng));
    const auto J = joint_left_jacobian(th);
    const Mat3 R = joint_rotation(th);
    for (int c = 0; c < 2; ++c) {
      Vec2 e = Vec2::Zero();
      e(c) = h;
      const Mat3 dR = (joint_rotation(th + e) - joint_rotation(th - e)) / (2.0 * h);
      const Mat3 W = dR * R.transpose();
      const Vec3 w(W(2, 1), W(0, 2), W(1, 0));
      EXPECT_LT((w - J.col(c)).norm(), 1e-8);
    }
  }
}

TEST(Kinematics, BendTowardAndBack) {
  for (double dir : {0.0, 0.5, 2.0, -2.5}) {
    const Vec2 th = bend_toward(0.4, dir);
    EXPECT_NEAR(bend_magnitude(th), 0.4, 1e-15);
    EXPECT_NEAR(bend_direction(th), dir, 1e-12);
    // the bent axis leans towards azimuth `dir`
    const Vec3 axis = joint_rotation(th).col(2);
    EXPECT_NEAR(std::atan2(axis.y(), axis.x()), dir, 1e-12);
  }
}

TEST(Exposure, WholeSectionsOnly) {
  RobotDescription d;
  EXPECT_EQ(exposed_section_count(d, 0.0), 0u);
  EXPECT_EQ(exposed_section_count(d, 0.5), 2u);
  EXPECT_EQ(exposed_section_count(d, 0.6), 2u);
  EXPECT_EQ(exposed_section_count(d, 1.0), 4u);
  const auto lengths = segment_lengths(d, 0.6);
  ASSERT_EQ(lengths.size(), 2u);
  EXPECT_NEAR(lengths[1], 0.35, 1e-15);
  // nothing exposed yet: the tip still sits at the everted length
  Configuration c = Configuration::straight(d, 0.1);
  EXPECT_EQ(c.joint_count(), 0u);
  EXPECT_NEAR((tip_position(d, c) - Vec3(0, 0, 0.1)).norm(), 0.0, 1e-15);
}

TEST(Exposure, MonotoneInEvertedLength) {
  RobotDescription d;
  d.section_lengths = {0.1, 0.3, 0.05, 0.2, 0.35};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, d.total_length());
  for (int i = 0; i < 500; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(exposed_section_count(d, a), exposed_section_count(d, b));
  }
}

TEST(Stoppers, CentredInSection) {
  const auto z = stopper_positions(0.25, 0.06);
  ASSERT_EQ(z.size(), 4u);
  EXPECT_NEAR(z.front(), 0.035, 1e-15);
  EXPECT_NEAR(z.back(), 0.215, 1e-15);
  EXPECT_EQ(stopper_positions(0.03, 0.06).size(), 1u);
}

TEST(TendonPath, StraightGapHalvesWithSpacing) {
  RobotDescription d;
  double prev = -1.0;
  for (double spacing : {0.08, 0.04, 0.02, 0.01, 0.005}) {
    d.stopper_spacing = spacing;
    const double gap = tendon_path_length(d, Configuration::straight(d, 1.0), 0) - 1.0;
    EXPECT_GE(gap, 0.0);
    EXPECT_LE(gap, spacing);
    if (prev > 0.0) {
      EXPECT_NEAR(gap / prev, 0.5, 1e-9);
    }
    prev = gap;
  }
}

TEST(TendonPath, SingleKinkChordGeometry) {
  RobotDescription d;
  const double theta = 30.0 * pi / 180.0;
  const double r = d.tendon_radial_offset;
  const double a = 0.035;  // stopper distance from the interface
  // anchors either side of the joint, in the joint frame
  const Vec3 before(r, 0.0, -a);
  const Vec3 after = rodrigues(Vec3(0.0, theta, 0.0)) * Vec3(r, 0.0, a);
  const double chord_shortening = 2.0 * a - (after - before).norm();
  EXPECT_NEAR(chord_shortening, 2.0 * a * (1.0 - std::cos(theta / 2.0)) + 2.0 * r * std::sin(theta / 2.0), 1e-15);

  Configuration c = Configuration::straight(d, 1.0);
  const double straight = tendon_path_length(d, c, 0);
  c.joint_angles[2] = bend_toward(theta, 0.0);
  const double shortening = straight - tendon_path_length(d, c, 0);
  EXPECT_NEAR(shortening, chord_shortening, 1e-12);
}

TEST(TendonPath, NeutralPlaneTendonOnlyChordShortens) {
  RobotDescription d;
  d.tendon_angles = {0.0, pi / 2.0, pi};
  Configuration c = Configuration::straight(d, 1.0);
  std::vector<double> straight;
  for (std::size_t t = 0; t < 3; ++t) straight.push_back(tendon_path_length(d, c, t));
  c.joint_angles[1] = bend_toward(10.0 * pi / 180.0, pi / 2.0);
  const double inside = straight[1] - tendon_path_length(d, c, 1);
  const double side = straight[0] - tendon_path_length(d, c, 0);
  const double half = 5.0 * pi / 180.0;
  EXPECT_NEAR(inside, 2.0 * 0.035 * (1.0 - std::cos(half)) + 2.0 * d.tendon_radial_offset * std::sin(half), 1e-12);
  EXPECT_NEAR(side, 2.0 * 0.035 * (1.0 - std::cos(half)), 1e-12);
  EXPECT_LT(side, 0.1 * inside);
}

TEST(TendonPath, GradientMatchesFiniteDifference) {
  RobotDescription d;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const double h = 1e-6;
  for (int i = 0; i < 30; ++i) {
    Configuration c = Configuration::straight(d, 1.0);
    for (auto& th : c.joint_angles) th = Vec2(u(rng), u(rng));
    for (std::size_t t = 0; t < d.tendon_count(); ++t) {
      const auto anchors = tendon_anchors(d, 1.0, t);
      Eigen::VectorXd g;
      tendon_path_length(chain_kinematics(d, c), anchors, &g);
      const Eigen::VectorXd q = c.flatten();
      for (int k = 0; k < q.size(); ++k) {
        Configuration cp = c, cm = c;
        Eigen::VectorXd qp = q, qm = q;
        qp(k) += h;
        qm(k) -= h;
        cp.assign(qp);
        cm.assign(qm);
        const double fd = (tendon_path_length(d, cp, t) - tendon_path_length(d, cm, t)) / (2.0 * h);
        EXPECT_NEAR(g(k), fd, 1e-8);
      }
    }
  }
}

TEST(TendonPath, BadIndexRejected) {
  RobotDescription d;
  EXPECT_THROW(tendon_anchors(d, 1.0, 3), DomainError);
}
