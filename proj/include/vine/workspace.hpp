#pragma once

// Reachable tip positions of the base-pivot-only robot versus the
// multi-joint stiffen-bend-lock robot, with convex hull metrics.

#include <cstdint>
#include <vector>

#include "vine/equilibrium.hpp"
#include "vine/model.hpp"

namespace vine {

enum class WorkspaceMode { BaseOnly, MultiJoint };
const char* to_string(WorkspaceMode m);

struct WorkspaceOptions {
  bool spatial = false;
  std::vector<double> tensions;      // N; grid of tendon inputs per stage
  std::vector<double> angle_levels;  // rad, signed; if set, replaces the tension grid
  double azimuth_step = kPi / 6.0;   // spatial mode
  double internal_gauge = 6900.0;
  double sensitivity_tension = 20.0;  // N
  std::size_t budget = 2000000;       // tip evaluations
  int jobs = 1;

  static std::vector<double> default_tensions();
};

struct WorkspacePoint {
  Vec3 tip = Vec3::Zero();
  std::uint32_t pattern_id = 0;  // bit j set when joint j is bent
  bool operator==(const WorkspacePoint&) const = default;
};

struct WorkspaceResult {
  WorkspaceMode mode = WorkspaceMode::MultiJoint;
  std::vector<WorkspacePoint> points;  // sorted
  double hull_measure = 0.0;           // area (planar) or volume (spatial)
  bool partial = false;
  std::size_t evaluations = 0;
  std::vector<double> sensitivity;  // per joint, tip m per N of tension error
};

// Bend of joint j alone (all other joints rigid and straight) under the
// stage law, for equivalent tension T towards azimuth `direction`.
Vec2 stage_response(const RobotDescription& desc, const ModelParameters& params, double internal_gauge,
                    std::size_t joint, double direction, double tension);

WorkspaceResult sample_workspace(const RobotDescription& desc, const ModelParameters& params,
                                 WorkspaceMode mode, const WorkspaceOptions& options = {});

struct WorkspaceComparison {
  WorkspaceResult base;
  WorkspaceResult multi;
  double expansion_ratio = 0.0;
};

WorkspaceComparison compare_workspaces(const RobotDescription& desc, const ModelParameters& params,
                                       const WorkspaceOptions& options = {});

// Coordinates in the plane of tendon 0 and the base axis.
Vec2 planar_coordinates(const RobotDescription& desc, const Vec3& p);

double hull_area(std::vector<Vec2> points);
double hull_volume(const std::vector<Vec3>& points);

}  // namespace vine
