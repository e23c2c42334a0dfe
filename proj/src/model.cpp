#include "vine/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vine/errors.hpp"

namespace vine {

namespace {

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(field, "must be positive and finite");
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

}  // namespace

double RobotDescription::total_length() const noexcept {
  double s = 0.0;
  for (double l : section_lengths) s += l;
  return s;
}

void RobotDescription::validate() const {
  require_positive(beam_radius, "beam_radius");
  if (section_lengths.empty()) throw DomainError("section_lengths", "at least one section required");
  for (std::size_t i = 0; i < section_lengths.size(); ++i)
    require_positive(section_lengths[i], ("section_lengths[" + std::to_string(i) + "]").c_str());
  if (layer_stacks_per_section < 1) throw DomainError("layer_stacks_per_section", "must be >= 1");
  if (layers_per_stack < 1) throw DomainError("layers_per_stack", "must be >= 1");
  require_positive(layer_width, "layer_width");
  if (tendon_angles.empty()) throw DomainError("tendon_angles", "at least one tendon required");
  require_positive(tendon_radial_offset, "tendon_radial_offset");
  if (tendon_radial_offset > beam_radius)
    throw DomainError("tendon_radial_offset", "must not exceed beam_radius");
  for (std::size_t i = 0; i < tendon_angles.size(); ++i) {
    if (!std::isfinite(tendon_angles[i])) throw DomainError("tendon_angles", "non-finite angle");
    for (std::size_t j = 0; j < i; ++j) {
      double d = std::fabs(wrap_angle(tendon_angles[i]) - wrap_angle(tendon_angles[j]));
      d = std::min(d, 2.0 * kPi - d);
      if (d < 1e-9)
        throw DomainError("tendon_angles", "tendons " + std::to_string(j) + " and " +
                                               std::to_string(i) + " coincide");
    }
  }
  require_positive(stopper_spacing, "stopper_spacing");
  require_positive(tendon_tension_limit, "tendon_tension_limit");
  if (!(fabric.areal_density >= 0.0)) throw DomainError("fabric.areal_density", "must be >= 0");
}

void MaterialModel::validate() const {
  require_positive(E_unjammed, "E_unjammed");
  if (!(E_jammed_ref > E_unjammed)) throw DomainError("E_jammed_ref", "must exceed E_unjammed");
  require_positive(stack_thickness, "stack_thickness");
  require_positive(stack_width, "stack_width");
  if (reference_layers < 1) throw DomainError("reference_layers", "must be >= 1");
  require_positive(deltaP_sat, "deltaP_sat");
  require_positive(skin_gain, "skin_gain");
}

void ModelParameters::validate() const {
  material.validate();
  if (!(pressure.base_rigidity >= 0.0) || !std::isfinite(pressure.base_rigidity))
    throw DomainError("base_rigidity", "must be >= 0");
  if (!(pressure.rigidity_per_pascal >= 0.0) || !std::isfinite(pressure.rigidity_per_pascal))
    throw DomainError("rigidity_per_pascal", "must be >= 0");
  require_positive(joints.interface_gain, "interface_gain");
  require_positive(joints.plateau_slope_ratio, "plateau_slope_ratio");
  require_positive(joints.hinge_factor, "hinge_factor");
}

SectionState SectionState::unjammed(double internal_gauge) {
  const double p = kAtmosphericPressure + internal_gauge;
  return {p, p};
}
SectionState SectionState::jammed_atmospheric(double internal_gauge) {
  return {kAtmosphericPressure, kAtmosphericPressure + internal_gauge};
}
SectionState SectionState::jammed_vacuum(double internal_gauge) {
  return {0.0, kAtmosphericPressure + internal_gauge};
}
SectionState SectionState::with_pouch_gauge(double internal_gauge, double pouch_gauge) {
  return {kAtmosphericPressure + pouch_gauge, kAtmosphericPressure + internal_gauge};
}

double flexural_modulus(const FlexuralTest& t) {
  if (!(t.span > 0.0)) throw DomainError("span", "must be positive");
  if (!(t.width > 0.0)) throw DomainError("width", "must be positive");
  if (!(t.thickness > 0.0)) throw DomainError("thickness", "must be positive");
  if (!(t.slope >= 0.0)) throw DomainError("slope", "must be >= 0");
  return t.span * t.span * t.span * t.slope / (4.0 * t.width * t.thickness * t.thickness * t.thickness);
}

double skin_second_moment(const RobotDescription& g, const MaterialModel& m) {
  const double t = m.stack_thickness * g.layers_per_stack / m.reference_layers;
  const double r = g.beam_radius;
  return g.layer_stacks_per_section * g.layer_width * t * r * r / 2.0;
}

double skin_modulus(const MaterialModel& m, double delta_p) {
  const double dp = delta_p > 0.0 ? delta_p : 0.0;
  const double sat = m.saturated_modulus();
  return m.E_unjammed + (sat - m.E_unjammed) * (-std::expm1(-dp / m.deltaP_sat));
}

double skin_flexural_rigidity(const MaterialModel& m, double delta_p, const RobotDescription& g) {
  return skin_modulus(m, delta_p) * skin_second_moment(g, m);
}

double section_rigidity(const ModelParameters& params, const RobotDescription& g,
                        double internal_gauge, double delta_p) {
  return params.pressure.at(internal_gauge) + skin_flexural_rigidity(params.material, delta_p, g);
}

double wrinkling_moment(double p, double r, double skin_factor) {
  if (!(p >= 0.0)) throw DomainError("pressure", "gauge pressure must be >= 0");
  if (!(r > 0.0)) throw DomainError("radius", "must be positive");
  if (!(skin_factor >= 1.0)) throw DomainError("skin_factor", "must be >= 1");
  return kPi * p * r * r * r / 2.0 * skin_factor;
}

double collapse_moment(double p, double r) { return 2.0 * wrinkling_moment(p, r, 1.0); }

}  // namespace vine
