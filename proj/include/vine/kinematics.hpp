#pragma once

// Pseudo-rigid-body chain: one 2-DOF joint at the base and one at every
// section interface, rigid segments in between. Joint i sits at the start of
// exposed segment i. Each joint stores a rotation vector (theta_x, theta_y, 0)
// in the parent segment frame. The beam axis is local +z.

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "vine/model.hpp"

namespace vine {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Configuration {
  double everted_length = 0.0;
  std::vector<Vec2> joint_angles;

  static Configuration straight(const RobotDescription& desc, double everted_length);
  std::size_t joint_count() const noexcept { return joint_angles.size(); }
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& q);

  bool operator==(const Configuration& o) const {
    return everted_length == o.everted_length && joint_angles == o.joint_angles;
  }
};

struct SegmentPose {
  Vec3 origin = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  double length = 0.0;

  Vec3 axis() const { return rotation.col(2); }
  Vec3 end() const { return origin + rotation.col(2) * length; }
};

// Sections fully everted at `everted_length`.
std::size_t exposed_section_count(const RobotDescription& desc, double everted_length);

// Rigid segment lengths; a partially everted section lengthens the last one.
std::vector<double> segment_lengths(const RobotDescription& desc, double everted_length);

Mat3 joint_rotation(const Vec2& theta);
// Left Jacobian of SO(3) restricted to the two in-plane components.
Eigen::Matrix<double, 3, 2> joint_left_jacobian(const Vec2& theta);

// Rotation vector that bends by `angle` toward azimuth `direction`.
Vec2 bend_toward(double angle, double direction);
double bend_magnitude(const Vec2& theta);
double bend_direction(const Vec2& theta);

// Poses plus the world angular axis of every joint coordinate.
struct ChainKinematics {
  std::vector<SegmentPose> segments;
  std::vector<Eigen::Matrix<double, 3, 2>> axes;
  Vec3 tip = Vec3::Zero();

  std::size_t joint_count() const noexcept { return segments.size(); }
  // d(point)/d(q[2j+c]) for a point rigidly attached at or beyond segment j.
  Vec3 point_derivative(std::size_t j, int c, const Vec3& point) const {
    return axes[j].col(c).cross(point - segments[j].origin);
  }
};

ChainKinematics chain_kinematics(const RobotDescription& desc, const Configuration& config);

// Throws StructuralError on joint count mismatch.
std::vector<SegmentPose> forward_kinematics(const RobotDescription& desc, const Configuration& config);
Vec3 tip_position(const RobotDescription& desc, const Configuration& config);

// Stopper layout of one section: floor(l / spacing) stoppers, centred.
std::vector<double> stopper_positions(double section_length, double spacing);

// A tendon anchor point. segment < 0 means fixed in the world (base guide).
struct TendonAnchor {
  int segment = -1;
  Vec3 local = Vec3::Zero();
};

// Base guide, stoppers of every everted portion, then the tip termination.
std::vector<TendonAnchor> tendon_anchors(const RobotDescription& desc, double everted_length,
                                         std::size_t tendon);

// Sum of chord lengths between consecutive anchors. If `gradient` is given it
// receives d(length)/dq (size 2 * joints).
double tendon_path_length(const ChainKinematics& chain, const std::vector<TendonAnchor>& anchors,
                          Eigen::VectorXd* gradient = nullptr);
double tendon_path_length(const RobotDescription& desc, const Configuration& config,
                          std::size_t tendon);

}  // namespace vine
