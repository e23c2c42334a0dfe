#include "vine/bending.hpp"

#include <cmath>

#include "vine/errors.hpp"

namespace vine {

RobotDescription test_beam(double length) {
  RobotDescription d;
  d.section_lengths = {length};
  return d;
}

namespace {

double chain_tip_force(const RobotDescription& desc, const ModelParameters& params,
                       const std::vector<SectionState>& sections, double delta) {
  const double L = desc.total_length();
  const std::vector<JointLaw> laws = compose_joint_laws(desc, params, sections, L);
  SolverOptions opts;
  auto tip_x = [&](double F) {
    opts.tip_force = Vec3(F, 0.0, 0.0);
    EquilibriumResult r = solve_equilibrium(desc, L, laws, {}, TendonState::slack(desc.tendon_count()), opts);
    opts.initial = r.configuration;
    return tip_position(desc, r.configuration).x();
  };
  // stiffness estimate from the linear chain for the first bracket
  double compliance = 0.0, z = 0.0;
  const std::vector<double> lengths = segment_lengths(desc, L);
  for (std::size_t j = 0; j < laws.size(); ++j) {
    const double arm = L - z;
    compliance += arm * arm / laws[j].stiffness;
    z += lengths[j];
  }
  double lo = 0.0, flo = -delta;
  double hi = delta / compliance, fhi = tip_x(hi) - delta;
  while (fhi < 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = tip_x(hi) - delta;
    if (hi > 1e6) throw NumericError("tip displacement not reachable");
  }
  int side = 0;
  double x = hi;
  for (int k = 0; k < 200; ++k) {
    x = (lo * fhi - hi * flo) / (fhi - flo);
    const double fx = tip_x(x) - delta;
    if (std::fabs(fx) <= 1e-12 * L || hi - lo <= 1e-13 * hi) break;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
      if (side == 1) fhi *= 0.5;
      side = 1;
    } else {
      hi = x;
      fhi = fx;
      if (side == -1) flo *= 0.5;
      side = -1;
    }
  }
  return x;
}

}  // namespace

double tip_force_at(const RobotDescription& desc, const ModelParameters& params,
                    const std::vector<SectionState>& sections, double displacement) {
  const double L = desc.total_length();
  if (!(displacement >= 0.0)) throw DomainError("displacement", "must be >= 0");
  if (displacement >= L) throw DomainError("displacement", "must be below the beam length");
  if (displacement == 0.0) return 0.0;
  if (desc.section_count() == 1) {
    const JointLaw law = compose_joint_law(desc, params, sections, L, 0);
    const double theta = std::asin(displacement / L);
    return regularized_moment(law, theta) / (L * std::cos(theta));
  }
  return chain_tip_force(desc, params, sections, displacement);
}

ForceCurve transverse_tip_force_sweep(const RobotDescription& desc, const ModelParameters& params,
                                      const std::vector<SectionState>& sections,
                                      const std::vector<double>& displacements) {
  ForceCurve curve;
  const double L = desc.total_length();
  for (double d : displacements) {
    ForceSample s;
    s.displacement = d;
    s.force = tip_force_at(desc, params, sections, d);
    s.internal_gauge = sections.at(0).internal_gauge();
    s.delta_p = sections.at(0).jam_pressure();
    if (d > kSmallDeflectionLimit * L) curve.beyond_small_deflection = true;
    curve.samples.push_back(s);
  }
  return curve;
}

}  // namespace vine
