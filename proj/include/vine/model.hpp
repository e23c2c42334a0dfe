#pragma once

// Domain types and closed-form material/structural laws of the
// variable-stiffness inflated beam: flexural modulus from a three-point bend,
// saturating jammed-skin rigidity, and membrane wrinkling/collapse moments.
//
// All quantities are SI (m, N, Pa, rad). Pressures named *_gauge are relative
// to atmosphere; SectionState stores absolute pressures.

#include <cstddef>
#include <vector>

namespace vine {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kAtmosphericPressure = 101325.0;  // Pa

struct FabricModel {
  double areal_density = 0.17;  // kg/m^2, wall fabric plus layer stacks
  bool operator==(const FabricModel&) const = default;
};

// Immutable geometry of the robot.
struct RobotDescription {
  double beam_radius = 0.0275;
  std::vector<double> section_lengths{0.25, 0.25, 0.25, 0.25};
  int layer_stacks_per_section = 6;
  int layers_per_stack = 15;
  double layer_width = 0.018;
  std::vector<double> tendon_angles{0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0};
  double tendon_radial_offset = 0.0275;
  double stopper_spacing = 0.06;
  double tendon_tension_limit = 100.0;  // N, per tendon
  FabricModel fabric{};

  std::size_t section_count() const noexcept { return section_lengths.size(); }
  std::size_t tendon_count() const noexcept { return tendon_angles.size(); }
  double total_length() const noexcept;

  // Throws DomainError naming the first offending field.
  void validate() const;

  bool operator==(const RobotDescription&) const = default;
};

// Jamming layer material plus the saturating jam-pressure law.
struct MaterialModel {
  double E_unjammed = 263.2e3;
  double E_jammed_ref = 3038.6e3;
  double stack_thickness = 1.82e-3;  // d, for `reference_layers` layers
  double stack_width = 35e-3;        // b, of the flexural specimen
  int reference_layers = 15;
  double deltaP_sat = 4774.617773;  // Pa
  double skin_gain = 16.99609665;   // saturated skin modulus / E_jammed_ref

  double saturated_modulus() const noexcept { return skin_gain * E_jammed_ref; }
  void validate() const;

  bool operator==(const MaterialModel&) const = default;
};

// Rigidity of the inflated fabric beam without jamming: affine in gauge pressure.
struct PressureStiffness {
  double base_rigidity = 0.4807836826;          // N m^2
  double rigidity_per_pascal = 8.167804772e-6;  // N m^2 / Pa

  double at(double gauge_pressure) const noexcept {
    return base_rigidity + rigidity_per_pascal * gauge_pressure;
  }
  bool operator==(const PressureStiffness&) const = default;
};

// Composition of the lumped joint laws from section rigidities.
struct JointOptions {
  double interface_gain = 8.0;         // interface joints vs. clamp/base joint
  double plateau_slope_ratio = 0.02;   // post-wrinkle slope as fraction of k
  double hinge_factor = 3.0;           // k = hinge_factor * EI / l_distal

  bool operator==(const JointOptions&) const = default;
};

// Everything the statics needs beyond geometry. Defaults are the calibrated
// values for the reference beam.
struct ModelParameters {
  MaterialModel material{};
  PressureStiffness pressure{};
  JointOptions joints{};

  void validate() const;
  bool operator==(const ModelParameters&) const = default;
};

struct FlexuralTest {
  double span = 0.0;       // L
  double width = 0.0;      // b
  double thickness = 0.0;  // d
  double slope = 0.0;      // m, initial force/displacement slope (N/m)
};

// Pouch and body pressures of one section, absolute.
struct SectionState {
  double pouch_pressure = kAtmosphericPressure;
  double internal_pressure = kAtmosphericPressure;

  // Jamming pressure difference, clamped at zero.
  double jam_pressure() const noexcept {
    const double d = internal_pressure - pouch_pressure;
    return d > 0.0 ? d : 0.0;
  }
  double internal_gauge() const noexcept { return internal_pressure - kAtmosphericPressure; }
  bool jammed() const noexcept { return jam_pressure() > 0.0; }

  static SectionState unjammed(double internal_gauge);
  static SectionState jammed_atmospheric(double internal_gauge);
  static SectionState jammed_vacuum(double internal_gauge);
  static SectionState with_pouch_gauge(double internal_gauge, double pouch_gauge);

  bool operator==(const SectionState&) const = default;
};

// E = L^3 m / (4 b d^3).
double flexural_modulus(const FlexuralTest& test);

// Second moment of area of the layer stacks about a transverse axis. Evenly
// spaced stacks of width w and thickness t on radius r give N w t r^2 / 2.
double skin_second_moment(const RobotDescription& geometry, const MaterialModel& material);

// Effective modulus of the jamming skin at jam pressure `delta_p`.
double skin_modulus(const MaterialModel& material, double delta_p);

double skin_flexural_rigidity(const MaterialModel& material, double delta_p,
                              const RobotDescription& geometry);

// Pressure term plus skin term.
double section_rigidity(const ModelParameters& params, const RobotDescription& geometry,
                        double internal_gauge, double delta_p);

// Membrane wrinkling onset pi p r^3 / 2, scaled by skin_factor.
double wrinkling_moment(double gauge_pressure, double radius, double skin_factor);

// pi p r^3, twice the unscaled onset.
double collapse_moment(double gauge_pressure, double radius);

}  // namespace vine
