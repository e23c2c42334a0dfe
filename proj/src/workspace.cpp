#include "vine/workspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <map>
#include <numeric>

#include "vine/errors.hpp"
#include "vine/planner.hpp"

namespace vine {

const char* to_string(WorkspaceMode m) { return m == WorkspaceMode::BaseOnly ? "base_only" : "multi_joint"; }

std::vector<double> WorkspaceOptions::default_tensions() {
  std::vector<double> t;
  for (int i = 0; i <= 16; ++i) t.push_back(2.5 * i);
  return t;
}

namespace {

std::vector<SectionState> stage_sections(const RobotDescription& desc, double p, std::size_t joint) {
  std::vector<SectionState> s(desc.section_count(), SectionState::jammed_vacuum(p));
  s[joint] = SectionState::unjammed(p);
  return s;
}

}  // namespace

Vec2 stage_response(const RobotDescription& desc, const ModelParameters& params, double p,
                    std::size_t joint, double direction, double tension) {
  if (tension == 0.0) return Vec2::Zero();
  const double L = desc.total_length();
  const std::vector<JointLaw> laws = compose_joint_laws(desc, params, stage_sections(desc, p, joint), L);
  SolverOptions opts;
  opts.free_joints.assign(laws.size(), false);
  opts.free_joints[joint] = true;
  const std::vector<double> T = allocate_tensions(desc, direction, tension * desc.tendon_radial_offset);
  const EquilibriumResult r = solve_equilibrium(desc, L, laws, {}, TendonState::tensions(T), opts);
  if (!r.converged) throw NumericError("stage response did not converge at joint " + std::to_string(joint));
  return r.configuration.joint_angles[joint];
}

Vec2 planar_coordinates(const RobotDescription& desc, const Vec3& p) {
  const double a = desc.tendon_angles.front();
  return Vec2(p.x() * std::cos(a) + p.y() * std::sin(a), p.z());
}

double hull_area(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  double area = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Vec2& a = h[i];
    const Vec2& b = h[(i + 1) % h.size()];
    area += a.x() * b.y() - a.y() * b.x();
  }
  return std::fabs(area) / 2.0;
}

double hull_volume(const std::vector<Vec3>& input) {
  std::vector<Vec3> pts = input;
  std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 4) return 0.0;

  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, (p - pts[0]).norm());
  const double eps = 1e-12 * std::max(scale, 1e-300);

  // initial tetrahedron
  const std::size_t i0 = 0;
  std::size_t i1 = i0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if ((pts[i] - pts[i0]).norm() > (pts[i1] - pts[i0]).norm()) i1 = i;
  std::size_t i2 = i0;
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = (pts[i1] - pts[i0]).cross(pts[i] - pts[i0]).norm();
    if (a > best) best = a, i2 = i;
  }
  if (best <= eps * scale) return 0.0;
  const Vec3 n0 = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  std::size_t i3 = i0;
  best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::fabs(n0.dot(pts[i] - pts[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) return 0.0;

  const Vec3 inside = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  // faces are counter-clockwise seen from outside; adj[e] lies across edge v[e] -> v[e+1]
  struct Face {
    std::array<std::size_t, 3> v;
    std::array<std::size_t, 3> adj;
    Vec3 n;
    double d;
    bool alive;
    std::vector<std::size_t> outside;
  };
  std::vector<Face> faces;
  std::vector<std::size_t> pending;
  auto add_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    const Vec3 n = (pts[b] - pts[a]).cross(pts[c] - pts[a]).normalized();
    faces.push_back({{a, b, c}, {0, 0, 0}, n, n.dot(pts[a]), true, {}});
    pending.push_back(faces.size() - 1);
    return faces.size() - 1;
  };
  auto height = [&](const Face& f, std::size_t p) { return f.n.dot(pts[p]) - f.d; };
  auto assign = [&](const std::vector<std::size_t>& cand, const std::vector<std::size_t>& targets) {
    for (std::size_t p : cand) {
      std::size_t best = targets.size();
      double hb = eps;
      for (std::size_t k = 0; k < targets.size(); ++k) {
        const double h = height(faces[targets[k]], p);
        if (h > hb) hb = h, best = k;
      }
      if (best < targets.size()) faces[targets[best]].outside.push_back(p);
    }
  };

  {
    const std::array<std::array<std::size_t, 3>, 4> tet = {{{i0, i1, i2}, {i0, i1, i3}, {i0, i2, i3}, {i1, i2, i3}}};
    for (auto t : tet) {
      const Vec3 n = (pts[t[1]] - pts[t[0]]).cross(pts[t[2]] - pts[t[0]]);
      if (n.dot(inside - pts[t[0]]) > 0.0) std::swap(t[1], t[2]);
      add_face(t[0], t[1], t[2]);
    }
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> owner;
    for (std::size_t f = 0; f < 4; ++f)
      for (int e = 0; e < 3; ++e) owner[{faces[f].v[e], faces[f].v[(e + 1) % 3]}] = f;
    for (std::size_t f = 0; f < 4; ++f)
      for (int e = 0; e < 3; ++e) faces[f].adj[e] = owner.at({faces[f].v[(e + 1) % 3], faces[f].v[e]});
    std::vector<std::size_t> all;
    for (std::size_t p = 0; p < pts.size(); ++p)
      if (p != i0 && p != i1 && p != i2 && p != i3) all.push_back(p);
    assign(all, {0, 1, 2, 3});
  }

  // quickhull: repeatedly lift the furthest outside point of some face
  std::vector<char> seen;
  while (!pending.empty()) {
    const std::size_t fi = pending.back();
    pending.pop_back();
    if (!faces[fi].alive || faces[fi].outside.empty()) continue;
    std::size_t apex = faces[fi].outside.front();
    for (std::size_t p : faces[fi].outside)
      if (height(faces[fi], p) > height(faces[fi], apex)) apex = p;

    // visible region by flood fill, horizon as (edge start, edge end, face beyond)
    seen.assign(faces.size(), 0);
    std::vector<std::size_t> visible{fi}, stack{fi};
    std::vector<std::array<std::size_t, 3>> horizon;
    seen[fi] = 1;
    while (!stack.empty()) {
      const std::size_t f = stack.back();
      stack.pop_back();
      for (int e = 0; e < 3; ++e) {
        const std::size_t g = faces[f].adj[e];
        if (seen[g] == 1) continue;
        if (seen[g] == 0 && height(faces[g], apex) > eps) {
          seen[g] = 1;
          visible.push_back(g);
          stack.push_back(g);
        } else {
          seen[g] = 2;
          horizon.push_back({faces[f].v[e], faces[f].v[(e + 1) % 3], g});
        }
      }
    }
    std::vector<std::size_t> orphans;
    for (std::size_t f : visible) {
      faces[f].alive = false;
      for (std::size_t p : faces[f].outside)
        if (p != apex) orphans.push_back(p);
      std::vector<std::size_t>().swap(faces[f].outside);
    }
    std::map<std::size_t, std::size_t> by_start, by_end;
    std::vector<std::size_t> created;
    for (const auto& [a, b, g] : horizon) {
      const std::size_t nf = add_face(a, b, apex);
      created.push_back(nf);
      faces[nf].adj[0] = g;
      Face& other = faces[g];
      for (int e = 0; e < 3; ++e)
        if (other.v[e] == b && other.v[(e + 1) % 3] == a) other.adj[e] = nf;
      by_start[a] = nf;
      by_end[b] = nf;
    }
    for (std::size_t nf : created) {
      faces[nf].adj[1] = by_start.at(faces[nf].v[1]);  // across b -> apex
      faces[nf].adj[2] = by_end.at(faces[nf].v[0]);    // across apex -> a
    }
    assign(orphans, created);
  }
  double vol = 0.0;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    vol += std::fabs((pts[f.v[0]] - inside).dot((pts[f.v[1]] - inside).cross(pts[f.v[2]] - inside))) / 6.0;
  }
  return vol;
}

namespace {

// Per-joint list of bend options; option 0 is always "straight".
std::vector<std::vector<Vec2>> joint_options(const RobotDescription& desc, const ModelParameters& params,
                                             std::size_t joints, const WorkspaceOptions& o) {
  const double a0 = desc.tendon_angles.front();
  std::vector<double> dirs;
  if (o.spatial) {
    const int n = std::max(1, static_cast<int>(std::lround(2.0 * kPi / o.azimuth_step)));
    for (int k = 0; k < n; ++k) dirs.push_back(a0 + k * 2.0 * kPi / n);
  } else {
    dirs = {a0, a0 + kPi};
  }
  std::vector<std::vector<Vec2>> out(joints);
  for (std::size_t j = 0; j < joints; ++j) {
    out[j].push_back(Vec2::Zero());
    if (!o.angle_levels.empty() && o.spatial) {
      for (double dir : dirs) {
        const double reach = stage_response(desc, params, o.internal_gauge, j, dir, desc.tendon_tension_limit).norm();
        for (double a : o.angle_levels)
          if (a > 0.0 && a <= reach) out[j].push_back(bend_toward(a, dir));
      }
    } else if (!o.angle_levels.empty()) {
      // signed levels; negative bends away from tendon 0
      const double reach_pos = stage_response(desc, params, o.internal_gauge, j, dirs[0], desc.tendon_tension_limit).norm();
      const double reach_neg = stage_response(desc, params, o.internal_gauge, j, dirs[1], desc.tendon_tension_limit).norm();
      for (double a : o.angle_levels) {
        if (a > 0.0 && a <= reach_pos) out[j].push_back(bend_toward(a, dirs[0]));
        if (a < 0.0 && -a <= reach_neg) out[j].push_back(bend_toward(-a, dirs[1]));
      }
    } else {
      for (double dir : dirs)
        for (double t : o.tensions)
          if (t > 0.0) out[j].push_back(stage_response(desc, params, o.internal_gauge, j, dir, t));
    }
  }
  return out;
}

}  // namespace

WorkspaceResult sample_workspace(const RobotDescription& desc, const ModelParameters& params,
                                 WorkspaceMode mode, const WorkspaceOptions& in) {
  desc.validate();
  WorkspaceOptions o = in;
  if (o.tensions.empty() && o.angle_levels.empty()) o.tensions = WorkspaceOptions::default_tensions();
  for (double t : o.tensions)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("tensions", "must be finite and >= 0");
  for (double a : o.angle_levels)
    if (!std::isfinite(a) || std::fabs(a) > kJointLimit) throw DomainError("angle_levels", "beyond the joint limit");

  const double L = desc.total_length();
  const std::size_t nj = desc.section_count();
  WorkspaceResult res;
  res.mode = mode;
  std::vector<std::vector<Vec2>> opts = joint_options(desc, params, mode == WorkspaceMode::BaseOnly ? 1 : nj, o);
  while (opts.size() < nj) opts.push_back({Vec2::Zero()});

  // mixed-radix enumeration, split on the base joint's option
  const std::size_t first = opts[0].size();
  std::size_t per_first = 1;
  for (std::size_t j = 1; j < nj; ++j) per_first *= opts[j].size();
  std::size_t total = first * per_first;
  std::size_t limit = std::min(total, o.budget);
  res.partial = limit < total;

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<WorkspacePoint> pts;
    pts.reserve(end - begin);
    Configuration c = Configuration::straight(desc, L);
    std::vector<std::size_t> idx(nj);
    for (std::size_t k = begin; k < end; ++k) {
      std::size_t r = k;
      std::uint32_t pid = 0;
      for (std::size_t j = nj; j-- > 0;) {
        idx[j] = r % opts[j].size();
        r /= opts[j].size();
        c.joint_angles[j] = opts[j][idx[j]];
        if (idx[j] != 0) pid |= 1u << j;
      }
      pts.push_back({tip_position(desc, c), pid});
    }
    return pts;
  };
  const int jobs = std::max(1, o.jobs);
  const std::size_t chunk = (limit + jobs - 1) / jobs;
  std::vector<std::future<std::vector<WorkspacePoint>>> futs;
  for (int t = 0; t < jobs; ++t) {
    const std::size_t b = std::min(limit, t * chunk), e = std::min(limit, (t + 1) * chunk);
    futs.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, work, b, e));
  }
  for (auto& f : futs) {
    auto part = f.get();
    res.points.insert(res.points.end(), part.begin(), part.end());
  }
  res.evaluations = limit;
  std::sort(res.points.begin(), res.points.end(), [](const WorkspacePoint& a, const WorkspacePoint& b) {
    if (a.pattern_id != b.pattern_id) return a.pattern_id < b.pattern_id;
    return std::lexicographical_compare(a.tip.data(), a.tip.data() + 3, b.tip.data(), b.tip.data() + 3);
  });

  if (o.spatial) {
    std::vector<Vec3> p;
    for (const auto& w : res.points) p.push_back(w.tip);
    res.hull_measure = hull_volume(p);
  } else {
    std::vector<Vec2> p;
    for (const auto& w : res.points) p.push_back(planar_coordinates(desc, w.tip));
    res.hull_measure = hull_area(p);
  }

  // tip displacement per unit tension error, per joint
  const std::vector<double> lengths = segment_lengths(desc, L);
  const std::size_t sj = mode == WorkspaceMode::BaseOnly ? 1 : nj;
  double lever = L;
  for (std::size_t j = 0; j < sj; ++j) {
    const double t = o.sensitivity_tension, h = 0.01 * t;
    const double a1 = stage_response(desc, params, o.internal_gauge, j, desc.tendon_angles.front(), t + h).norm();
    const double a0 = stage_response(desc, params, o.internal_gauge, j, desc.tendon_angles.front(), t - h).norm();
    res.sensitivity.push_back((a1 - a0) / (2.0 * h) * lever);
    lever -= lengths[j];
  }
  return res;
}

WorkspaceComparison compare_workspaces(const RobotDescription& desc, const ModelParameters& params,
                                       const WorkspaceOptions& options) {
  WorkspaceComparison c;
  c.base = sample_workspace(desc, params, WorkspaceMode::BaseOnly, options);
  c.multi = sample_workspace(desc, params, WorkspaceMode::MultiJoint, options);
  c.expansion_ratio = c.base.hull_measure > 0.0 ? c.multi.hull_measure / c.base.hull_measure : INFINITY;
  return c;
}

}  // namespace vine
