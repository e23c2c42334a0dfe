#pragma once

// Cantilever bend test emulation: clamped base, transverse tip load.

#include <vector>

#include "vine/equilibrium.hpp"
#include "vine/model.hpp"

namespace vine {

struct ForceSample {
  double displacement = 0.0;  // m
  double force = 0.0;         // N
  double internal_gauge = 0.0;
  double delta_p = 0.0;
};

struct ForceCurve {
  std::vector<ForceSample> samples;
  bool beyond_small_deflection = false;  // some displacement > 10% of length
};

inline constexpr double kSmallDeflectionLimit = 0.10;

// Reaction force at prescribed transverse tip displacement. One section uses
// the closed-form hinge; longer chains root-find the tip load.
double tip_force_at(const RobotDescription& desc, const ModelParameters& params,
                    const std::vector<SectionState>& sections, double displacement);

ForceCurve transverse_tip_force_sweep(const RobotDescription& desc, const ModelParameters& params,
                                      const std::vector<SectionState>& sections,
                                      const std::vector<double>& displacements);

// Single-section test beam of the given length with the reference layup.
RobotDescription test_beam(double length = 0.25);

}  // namespace vine
