#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "vine/errors.hpp"
#include "vine/workspace.hpp"

using namespace vine;

namespace {

constexpr double deg = kPi / 180.0;

using P = std::pair<double, double>;

double cross(const P& o, const P& a, const P& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

// monotone chain plus shoelace
double monotone_hull_area(std::vector<P> p) {
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return 0.0;
  std::vector<P> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  double a = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& u = h[i];
    const auto& v = h[(i + 1) % h.size()];
    a += u.first * v.second - v.first * u.second;
  }
  return std::fabs(a) / 2.0;
}

// planar chain of equal links, every joint from the same angle set
double planar_chain_area(int joints, double link, const std::vector<double>& angles) {
  std::vector<P> tips;
  std::vector<int> idx(joints, 0);
  const int n = static_cast<int>(angles.size());
  while (true) {
    double phi = 0.0, x = 0.0, z = 0.0;
    for (int j = 0; j < joints; ++j) {
      phi += angles[idx[j]];
      x += link * std::sin(phi);
      z += link * std::cos(phi);
    }
    tips.push_back({x, z});
    int j = 0;
    while (j < joints && ++idx[j] == n) idx[j++] = 0;
    if (j == joints) break;
  }
  return monotone_hull_area(tips);
}

std::vector<double> levels(double max_deg, double step_deg) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround(max_deg / step_deg));
  for (int k = -n; k <= n; ++k)
    if (k != 0) out.push_back(k * step_deg * deg);
  return out;
}

// faces from every triple with all points on one side
double brute_hull_volume(const std::vector<Vec3>& p) {
  Vec3 c = Vec3::Zero();
  for (const auto& x : p) c += x;
  c /= static_cast<double>(p.size());
  double v = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      for (std::size_t k = j + 1; k < p.size(); ++k) {
        const Vec3 n = (p[j] - p[i]).cross(p[k] - p[i]);
        int pos = 0, neg = 0;
        for (std::size_t m = 0; m < p.size(); ++m) {
          const double s = n.dot(p[m] - p[i]);
          if (s > 1e-12) ++pos;
          if (s < -1e-12) ++neg;
        }
        if (pos == 0 || neg == 0) v += std::fabs(n.dot(c - p[i])) / 6.0;
      }
  return v;
}

}  // namespace

TEST(HullArea, KnownPolygons) {
  EXPECT_DOUBLE_EQ(hull_area({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.9}}), 1.0);
  EXPECT_DOUBLE_EQ(hull_area({{0, 0}, {2, 0}, {0, 3}}), 3.0);
  EXPECT_EQ(hull_area({{0, 0}, {1, 1}, {2, 2}}), 0.0);
  EXPECT_EQ(hull_area({}), 0.0);
  std::vector<Vec2> circle;
  for (int k = 0; k < 1000; ++k) circle.emplace_back(std::cos(2 * kPi * k / 1000), std::sin(2 * kPi * k / 1000));
  EXPECT_NEAR(hull_area(circle), 500.0 * std::sin(2 * kPi / 1000), 1e-12);
}

TEST(HullArea, MatchesMonotoneChainOnRandomSets) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    std::vector<Vec2> a;
    std::vector<P> b;
    for (int i = 0; i < 200; ++i) {
      a.emplace_back(g(rng), g(rng));
      b.push_back({a.back().x(), a.back().y()});
    }
    EXPECT_NEAR(hull_area(a), monotone_hull_area(b), 1e-12);
  }
}

TEST(HullVolume, KnownSolids) {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) cube.emplace_back(u(rng), u(rng), u(rng));
  EXPECT_NEAR(hull_volume(cube), 1.0, 1e-12);
  EXPECT_EQ(hull_volume({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}), 0.0);
  EXPECT_NEAR(hull_volume({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), 1.0 / 6.0, 1e-15);
}

TEST(HullVolume, MatchesBruteForceOnSmallSets) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 30; ++t) {
    std::vector<Vec3> p;
    for (int i = 0; i < 25; ++i) p.emplace_back(g(rng), g(rng), g(rng));
    EXPECT_NEAR(hull_volume(p), brute_hull_volume(p), 1e-10) << t;
  }
}

TEST(HullVolume, SphereSamplesApproachBall) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<Vec3> p;
  for (int i = 0; i < 20000; ++i) p.push_back(Vec3(g(rng), g(rng), g(rng)).normalized());
  const double v = hull_volume(p);
  EXPECT_LT(v, 4.0 / 3.0 * kPi);
  EXPECT_GT(v, 0.99 * 4.0 / 3.0 * kPi);
}

TEST(StageResponse, ZeroAtZeroAndGrowsWithTension) {
  const RobotDescription d;
  const ModelParameters p;
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(stage_response(d, p, 6900, j, 0.0, 0.0), Vec2::Zero());
    double prev = 0.0;
    for (double t : {5.0, 10.0, 20.0, 40.0}) {
      const Vec2 a = stage_response(d, p, 6900, j, 0.0, t);
      // the base joint runs to the limit
      EXPECT_TRUE(a.norm() > prev || a.norm() >= kJointLimit * (1.0 - 1e-12)) << j << " " << t;
      EXPECT_LE(a.norm(), kJointLimit * (1.0 + 1e-12));
      EXPECT_GT(a.dot(bend_toward(1.0, 0.0)), 0.999 * a.norm());
      prev = a.norm();
    }
  }
}

TEST(Workspace, PlanarAngleLevelsMatchChainOracle) {
  const RobotDescription d;
  WorkspaceOptions o;
  o.angle_levels = levels(30.0, 5.0);
  const auto c = compare_workspaces(d, {}, o);
  std::vector<double> all = o.angle_levels;
  all.push_back(0.0);
  const double multi = planar_chain_area(4, 0.25, all);
  const double base = planar_chain_area(1, 1.0, all);
  EXPECT_NEAR(c.multi.hull_measure, multi, 1e-12);
  EXPECT_NEAR(c.base.hull_measure, base, 1e-12);
  EXPECT_NEAR(c.expansion_ratio, multi / base, 1e-9);
  EXPECT_GT(c.expansion_ratio, 1.0);
  EXPECT_EQ(c.multi.points.size(), 28561u);
  EXPECT_FALSE(c.multi.partial);
}

TEST(Workspace, FinerLevelsMatchChainOracle) {
  const RobotDescription d;
  WorkspaceOptions o;
  o.angle_levels = levels(30.0, 2.5);
  const auto c = compare_workspaces(d, {}, o);
  std::vector<double> all = o.angle_levels;
  all.push_back(0.0);
  EXPECT_NEAR(c.expansion_ratio, planar_chain_area(4, 0.25, all) / planar_chain_area(1, 1.0, all), 1e-9);
}

TEST(Workspace, BaseOnlyPointsAreMultiJointPoints) {
  const RobotDescription d;
  WorkspaceOptions o;
  o.tensions = {5.0, 15.0, 30.0};
  const auto c = compare_workspaces(d, {}, o);
  std::set<std::array<double, 3>> multi;
  for (const auto& w : c.multi.points) multi.insert({w.tip.x(), w.tip.y(), w.tip.z()});
  for (const auto& w : c.base.points) {
    EXPECT_LE(w.pattern_id, 1u);
    EXPECT_TRUE(multi.count({w.tip.x(), w.tip.y(), w.tip.z()}));
  }
  EXPECT_GE(c.multi.hull_measure, c.base.hull_measure);
}

TEST(Workspace, TensionGridExpands) {
  const auto c = compare_workspaces(RobotDescription{}, {}, {});
  EXPECT_GT(c.expansion_ratio, 1.0);
  ASSERT_EQ(c.multi.sensitivity.size(), 4u);
  for (double s : c.multi.sensitivity) EXPECT_GE(s, 0.0);
}

TEST(Workspace, SpatialExpands) {
  WorkspaceOptions o;
  o.spatial = true;
  o.angle_levels = {15.0 * deg, 30.0 * deg};
  o.azimuth_step = 60.0 * deg;
  const auto c = compare_workspaces(RobotDescription{}, {}, o);
  EXPECT_GT(c.base.hull_measure, 0.0);
  EXPECT_GT(c.expansion_ratio, 1.0);
  EXPECT_EQ(c.multi.points.size(), 28561u);
}

TEST(Workspace, BudgetMarksPartial) {
  WorkspaceOptions o;
  o.angle_levels = levels(30.0, 5.0);
  o.budget = 1000;
  const auto r = sample_workspace(RobotDescription{}, {}, WorkspaceMode::MultiJoint, o);
  EXPECT_TRUE(r.partial);
  EXPECT_EQ(r.evaluations, 1000u);
  EXPECT_EQ(r.points.size(), 1000u);
}

TEST(Workspace, ThreadCountDoesNotChangeResult) {
  WorkspaceOptions o;
  o.angle_levels = levels(30.0, 10.0);
  const auto a = sample_workspace(RobotDescription{}, {}, WorkspaceMode::MultiJoint, o);
  o.jobs = 3;
  const auto b = sample_workspace(RobotDescription{}, {}, WorkspaceMode::MultiJoint, o);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.hull_measure, b.hull_measure);
}

TEST(Workspace, InvalidOptionsRejected) {
  WorkspaceOptions o;
  o.tensions = {-1.0};
  EXPECT_THROW(sample_workspace(RobotDescription{}, {}, WorkspaceMode::MultiJoint, o), DomainError);
  o = {};
  o.angle_levels = {100.0 * deg};
  EXPECT_THROW(sample_workspace(RobotDescription{}, {}, WorkspaceMode::MultiJoint, o), DomainError);
}
