#include "vine/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vine/errors.hpp"

namespace vine {

namespace {
constexpr double kLengthSlack = 1e-12;

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}
}  // namespace

Configuration Configuration::straight(const RobotDescription& desc, double everted_length) {
  Configuration c;
  c.everted_length = everted_length;
  c.joint_angles.assign(exposed_section_count(desc, everted_length), Vec2::Zero());
  return c;
}

Eigen::VectorXd Configuration::flatten() const {
  Eigen::VectorXd q(2 * joint_angles.size());
  for (std::size_t i = 0; i < joint_angles.size(); ++i) q.segment<2>(2 * i) = joint_angles[i];
  return q;
}

void Configuration::assign(const Eigen::VectorXd& q) {
  if (static_cast<std::size_t>(q.size()) != 2 * joint_angles.size())
    throw StructuralError("coordinate vector size does not match joint count");
  for (std::size_t i = 0; i < joint_angles.size(); ++i) joint_angles[i] = q.segment<2>(2 * i);
}

std::size_t exposed_section_count(const RobotDescription& desc, double everted_length) {
  std::size_t n = 0;
  double acc = 0.0;
  for (double l : desc.section_lengths) {
    acc += l;
    if (acc <= everted_length + kLengthSlack) ++n;
    else break;
  }
  return n;
}

std::vector<double> segment_lengths(const RobotDescription& desc, double everted_length) {
  const std::size_t n = exposed_section_count(desc, everted_length);
  std::vector<double> out(desc.section_lengths.begin(), desc.section_lengths.begin() + n);
  if (n > 0) {
    double used = 0.0;
    for (double l : out) used += l;
    const double extra = everted_length - used;
    if (extra > kLengthSlack) out.back() += extra;
  }
  return out;
}

Mat3 joint_rotation(const Vec2& theta) {
  const Vec3 w(theta.x(), theta.y(), 0.0);
  const double t = w.norm();
  if (t < 1e-12) return Mat3::Identity() + hat(w);
  return Eigen::AngleAxisd(t, w / t).toRotationMatrix();
}

Eigen::Matrix<double, 3, 2> joint_left_jacobian(const Vec2& theta) {
  const Vec3 w(theta.x(), theta.y(), 0.0);
  const double t2 = w.squaredNorm();
  const Mat3 W = hat(w);
  double a, b;
  if (t2 < 1e-10) {
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    const double t = std::sqrt(t2);
    a = (1.0 - std::cos(t)) / t2;
    b = (t - std::sin(t)) / (t2 * t);
  }
  const Mat3 J = Mat3::Identity() + a * W + b * W * W;
  return J.leftCols<2>();
}

Vec2 bend_toward(double angle, double direction) {
  return Vec2(-std::sin(direction), std::cos(direction)) * angle;
}

double bend_magnitude(const Vec2& theta) { return theta.norm(); }

double bend_direction(const Vec2& theta) { return std::atan2(-theta.x(), theta.y()); }

ChainKinematics chain_kinematics(const RobotDescription& desc, const Configuration& config) {
  const std::vector<double> lengths = segment_lengths(desc, config.everted_length);
  if (lengths.size() != config.joint_angles.size())
    throw StructuralError("configuration has " + std::to_string(config.joint_angles.size()) +
                          " joints but " + std::to_string(lengths.size()) +
                          " sections are exposed");
  ChainKinematics ck;
  ck.segments.reserve(lengths.size());
  ck.axes.reserve(lengths.size());
  Mat3 R = Mat3::Identity();
  Vec3 o = Vec3::Zero();
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const Vec2& th = config.joint_angles[i];
    ck.axes.push_back(R * joint_left_jacobian(th));
    R = R * joint_rotation(th);
    SegmentPose s;
    s.origin = o;
    s.rotation = R;
    s.length = lengths[i];
    ck.segments.push_back(s);
    o = s.end();
  }
  ck.tip = lengths.empty() ? Vec3(0.0, 0.0, config.everted_length) : o;
  return ck;
}

std::vector<SegmentPose> forward_kinematics(const RobotDescription& desc, const Configuration& config) {
  return chain_kinematics(desc, config).segments;
}

Vec3 tip_position(const RobotDescription& desc, const Configuration& config) {
  return chain_kinematics(desc, config).tip;
}

std::vector<double> stopper_positions(double section_length, double spacing) {
  const int n = std::max(1, static_cast<int>(std::floor(section_length / spacing + 1e-9)));
  const double margin = (section_length - (n - 1) * spacing) / 2.0;
  std::vector<double> z(n);
  for (int k = 0; k < n; ++k) z[k] = margin + k * spacing;
  return z;
}

std::vector<TendonAnchor> tendon_anchors(const RobotDescription& desc, double everted_length,
                                         std::size_t tendon) {
  if (tendon >= desc.tendon_count())
    throw DomainError("tendon", "index " + std::to_string(tendon) + " out of range");
  const double alpha = desc.tendon_angles[tendon];
  const double rt = desc.tendon_radial_offset;
  const double cx = rt * std::cos(alpha), cy = rt * std::sin(alpha);

  std::vector<TendonAnchor> out;
  out.push_back({-1, Vec3(cx, cy, -desc.stopper_spacing / 2.0)});

  const std::size_t exposed = exposed_section_count(desc, everted_length);
  double section_start = 0.0;
  double segment_start = 0.0;
  int seg = -1;
  for (std::size_t s = 0; s < desc.section_count(); ++s) {
    const double len = desc.section_lengths[s];
    if (section_start >= everted_length - kLengthSlack) break;
    if (s < exposed) {
      seg = static_cast<int>(s);
      segment_start = section_start;
    }
    for (double z : stopper_positions(len, desc.stopper_spacing)) {
      if (section_start + z > everted_length + kLengthSlack) break;
      if (seg < 0) out.push_back({-1, Vec3(cx, cy, section_start + z)});
      else out.push_back({seg, Vec3(cx, cy, section_start + z - segment_start)});
    }
    section_start += len;
  }
  if (seg < 0) out.push_back({-1, Vec3(cx, cy, everted_length)});
  else out.push_back({seg, Vec3(cx, cy, everted_length - segment_start)});
  return out;
}

double tendon_path_length(const ChainKinematics& chain, const std::vector<TendonAnchor>& anchors,
                          Eigen::VectorXd* gradient) {
  const std::size_t nj = chain.joint_count();
  std::vector<Vec3> world(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const auto& a = anchors[k];
    world[k] = a.segment < 0 ? a.local
                             : Vec3(chain.segments[a.segment].origin +
                                    chain.segments[a.segment].rotation * a.local);
  }
  if (gradient) gradient->setZero(2 * nj);
  double len = 0.0;
  for (std::size_t k = 1; k < anchors.size(); ++k) {
    const Vec3 d = world[k] - world[k - 1];
    const double c = d.norm();
    len += c;
    if (!gradient || c < 1e-15) continue;
    const Vec3 u = d / c;
    // Joints between the two anchors' segments move the distal point only.
    const int s0 = anchors[k - 1].segment, s1 = anchors[k].segment;
    for (int j = s0 + 1; j <= s1; ++j)
      for (int cc = 0; cc < 2; ++cc)
        (*gradient)(2 * j + cc) += u.dot(chain.point_derivative(j, cc, world[k]));
  }
  return len;
}

double tendon_path_length(const RobotDescription& desc, const Configuration& config,
                          std::size_t tendon) {
  const ChainKinematics ck = chain_kinematics(desc, config);
  return tendon_path_length(ck, tendon_anchors(desc, config.everted_length, tendon));
}

}  // namespace vine
