#include "vine/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <set>

#include "vine/errors.hpp"

namespace vine {

const char* to_string(PouchCondition c) {
  switch (c) {
    case PouchCondition::Unjammed: return "unjammed";
    case PouchCondition::JammedAtmospheric: return "jammed_atmospheric";
    case PouchCondition::JammedVacuum: return "jammed_vacuum";
  }
  return "?";
}

const char* to_string(Observable o) {
  switch (o) {
    case Observable::TipForce: return "force_N";
    case Observable::JamRatioPercent: return "jam_ratio_percent";
    case Observable::VacuumGapPercent: return "vacuum_gap_percent";
  }
  return "?";
}

PouchCondition pouch_condition_from_string(const std::string& s) {
  for (auto c : {PouchCondition::Unjammed, PouchCondition::JammedAtmospheric, PouchCondition::JammedVacuum})
    if (s == to_string(c)) return c;
  throw DomainError("condition", "unknown pouch condition '" + s + "'");
}

Observable observable_from_string(const std::string& s) {
  for (auto o : {Observable::TipForce, Observable::JamRatioPercent, Observable::VacuumGapPercent})
    if (s == to_string(o)) return o;
  throw DomainError("observable", "unknown observable '" + s + "'");
}

const char* to_string(TwoSegmentBehaviour b) {
  switch (b) {
    case TwoSegmentBehaviour::Pivot: return "pivot";
    case TwoSegmentBehaviour::SingleUnit: return "single_unit";
    case TwoSegmentBehaviour::Mixed: return "mixed";
    case TwoSegmentBehaviour::Unloaded: return "unloaded";
  }
  return "?";
}

SectionState section_state(PouchCondition c, double p) {
  switch (c) {
    case PouchCondition::Unjammed: return SectionState::unjammed(p);
    case PouchCondition::JammedAtmospheric: return SectionState::jammed_atmospheric(p);
    case PouchCondition::JammedVacuum: return SectionState::jammed_vacuum(p);
  }
  return SectionState::unjammed(p);
}

CalibrationAnchors CalibrationAnchors::reference() {
  CalibrationAnchors a;
  a.anchors = {
      {6900.0, PouchCondition::Unjammed, Observable::TipForce, 1.07},
      {6900.0, PouchCondition::JammedAtmospheric, Observable::TipForce, 6.68},
      {20700.0, PouchCondition::JammedAtmospheric, Observable::JamRatioPercent, 663.0},
      {13800.0, PouchCondition::JammedVacuum, Observable::VacuumGapPercent, 4.7},
      {20700.0, PouchCondition::JammedVacuum, Observable::VacuumGapPercent, 2.1},
  };
  return a;
}

namespace {

double force(const CalibrationAnchor& a, PouchCondition c, const ModelParameters& params,
             const RobotDescription& geometry) {
  RobotDescription beam = geometry;
  beam.section_lengths = {a.beam_length};
  return tip_force_at(beam, params, {section_state(c, a.internal_gauge)}, a.displacement);
}

// Observable in the form the residual is taken in.
double model_ratio_form(const CalibrationAnchor& a, const ModelParameters& params,
                        const RobotDescription& g) {
  switch (a.observable) {
    case Observable::TipForce: return force(a, a.condition, params, g);
    case Observable::JamRatioPercent:
      return force(a, a.condition, params, g) / force(a, PouchCondition::Unjammed, params, g);
    case Observable::VacuumGapPercent:
      return force(a, PouchCondition::JammedVacuum, params, g) /
             force(a, PouchCondition::JammedAtmospheric, params, g);
  }
  return 0.0;
}

double target_ratio_form(const CalibrationAnchor& a) {
  switch (a.observable) {
    case Observable::TipForce: return a.value;
    case Observable::JamRatioPercent: return a.value / 100.0;
    case Observable::VacuumGapPercent: return 1.0 + a.value / 100.0;
  }
  return 0.0;
}

double from_ratio_form(Observable o, double v) {
  switch (o) {
    case Observable::TipForce: return v;
    case Observable::JamRatioPercent: return 100.0 * v;
    case Observable::VacuumGapPercent: return 100.0 * (v - 1.0);
  }
  return v;
}

using Vec4 = Eigen::Vector4d;

ModelParameters with_log_params(ModelParameters p, const Vec4& x) {
  p.pressure.base_rigidity = std::exp(x(0));
  p.pressure.rigidity_per_pascal = std::exp(x(1));
  p.material.skin_gain = std::exp(x(2));
  p.material.deltaP_sat = std::exp(x(3));
  return p;
}

struct StartResult {
  Vec4 x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

StartResult levenberg_marquardt(const CalibrationAnchors& anchors, const RobotDescription& g,
                                const ModelParameters& base, Vec4 x, int max_iterations) {
  const int m = static_cast<int>(anchors.anchors.size());
  auto residuals = [&](const Vec4& xx) {
    const ModelParameters p = with_log_params(base, xx);
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) r(i) = relative_residual(anchors.anchors[i], p, g);
    return r;
  };
  StartResult out;
  Eigen::VectorXd r = residuals(x);
  double obj = 0.5 * r.squaredNorm();
  out.trace.push_back(obj);
  double mu = 1e-3;
  int it = 0;
  for (; it < max_iterations; ++it) {
    Eigen::MatrixXd J(m, 4);
    for (int k = 0; k < 4; ++k) {
      const double h = 1e-6;
      Vec4 xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      J.col(k) = (residuals(xp) - residuals(xm)) / (2.0 * h);
    }
    const Eigen::Vector4d grad = J.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-15 || obj < 1e-30) {
      out.converged = true;
      break;
    }
    const Eigen::Matrix4d A = J.transpose() * J;
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      Eigen::Matrix4d M = A;
      M.diagonal() += mu * (A.diagonal().array() + 1e-12).matrix();
      const Vec4 step = M.ldlt().solve(-grad);
      const Vec4 xn = x + step;
      Eigen::VectorXd rn;
      try {
        rn = residuals(xn);
      } catch (const Error&) {
        mu *= 4.0;
        continue;
      }
      const double on = 0.5 * rn.squaredNorm();
      if (std::isfinite(on) && on < obj) {
        const bool small = step.lpNorm<Eigen::Infinity>() < 1e-13 || obj - on < 1e-16 * obj;
        x = xn;
        r = rn;
        obj = on;
        out.trace.push_back(obj);
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (small) out.converged = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) out.converged = true;  // no descent left at this precision
    if (out.converged) {
      ++it;
      break;
    }
  }
  out.x = x;
  out.objective = obj;
  out.iterations = it;
  return out;
}

}  // namespace

double predict(const CalibrationAnchor& a, const ModelParameters& params, const RobotDescription& g) {
  return from_ratio_form(a.observable, model_ratio_form(a, params, g));
}

double relative_residual(const CalibrationAnchor& a, const ModelParameters& params,
                         const RobotDescription& g) {
  const double t = target_ratio_form(a);
  return (model_ratio_form(a, params, g) - t) / t;
}

std::vector<std::string> deficient_parameters(const CalibrationAnchors& anchors) {
  std::set<double> pressures, jammed_dp;
  for (const auto& a : anchors.anchors) {
    pressures.insert(a.internal_gauge);
    const double p = a.internal_gauge;
    switch (a.observable) {
      case Observable::TipForce:
        if (a.condition != PouchCondition::Unjammed)
          jammed_dp.insert(section_state(a.condition, p).jam_pressure());
        break;
      case Observable::JamRatioPercent:
        jammed_dp.insert(section_state(a.condition == PouchCondition::Unjammed
                                           ? PouchCondition::JammedAtmospheric
                                           : a.condition, p).jam_pressure());
        break;
      case Observable::VacuumGapPercent:
        jammed_dp.insert(SectionState::jammed_atmospheric(p).jam_pressure());
        jammed_dp.insert(SectionState::jammed_vacuum(p).jam_pressure());
        break;
    }
  }
  std::vector<std::string> out;
  if (pressures.size() < 2) {
    out.push_back("base_rigidity");
    out.push_back("rigidity_per_pascal");
  }
  if (jammed_dp.empty()) out.push_back("skin_gain");
  if (jammed_dp.size() < 2) out.push_back("deltaP_sat");
  return out;
}

CalibrationReport fit_parameters(const CalibrationAnchors& anchors, const RobotDescription& geometry,
                                 const ModelParameters& initial, const FitOptions& options) {
  const std::vector<std::string> missing = deficient_parameters(anchors);
  if (anchors.anchors.size() < 4 || !missing.empty()) {
    std::string msg = "underdetermined anchor set (" + std::to_string(anchors.anchors.size()) +
                      " anchors, 4 parameters)";
    if (!missing.empty()) {
      msg += "; unidentifiable:";
      for (const auto& m : missing) msg += " " + m;
    }
    throw CalibrationError(msg);
  }
  for (const auto& a : anchors.anchors)
    if (!(a.value > 0.0) && a.observable != Observable::VacuumGapPercent)
      throw DomainError("anchor.value", "must be positive");

  // 3^4 log-space grid, jittered from the seed.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jit(-options.jitter, options.jitter);
  const double grid[4][3] = {{std::log(0.05), std::log(0.25), std::log(1.0)},
                             {std::log(1e-6), std::log(5e-6), std::log(3e-5)},
                             {std::log(3.0), std::log(12.0), std::log(40.0)},
                             {std::log(1e3), std::log(5e3), std::log(3e4)}};
  std::vector<Vec4> starts;
  for (int idx = 0; idx < 81; ++idx) {
    Vec4 x;
    for (int k = 0, rest = idx; k < 4; ++k, rest /= 3) x(k) = grid[k][rest % 3] + jit(rng);
    starts.push_back(x);
  }

  std::vector<StartResult> results(starts.size());
  const int jobs = std::max(1, options.jobs);
  for (std::size_t begin = 0; begin < starts.size(); begin += jobs) {
    std::vector<std::future<StartResult>> batch;
    for (std::size_t i = begin; i < std::min(starts.size(), begin + jobs); ++i)
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                 levenberg_marquardt, std::cref(anchors), std::cref(geometry),
                                 std::cref(initial), starts[i], options.max_iterations));
    for (std::size_t i = 0; i < batch.size(); ++i) results[begin + i] = batch[i].get();
  }

  int best = 0;
  for (int i = 1; i < static_cast<int>(results.size()); ++i)
    if (results[i].objective < results[best].objective) best = i;

  CalibrationReport rep;
  rep.parameters = with_log_params(initial, results[best].x);
  rep.objective = results[best].objective;
  rep.iterations = results[best].iterations;
  rep.converged = results[best].converged;
  rep.objective_trace = results[best].trace;
  rep.starts = static_cast<int>(results.size());
  rep.best_start = best;
  for (const auto& a : anchors.anchors)
    rep.residuals.push_back({a, predict(a, rep.parameters, geometry),
                             relative_residual(a, rep.parameters, geometry)});
  return rep;
}

double jam_force_ratio(const ModelParameters& params, double p, const RobotDescription& g) {
  CalibrationAnchor a{p, PouchCondition::JammedAtmospheric, Observable::JamRatioPercent, 100.0};
  return model_ratio_form(a, params, g);
}

TwoSegmentResult virtual_two_segment_test(const RobotDescription& geometry,
                                          const ModelParameters& params, bool proximal_jammed,
                                          bool distal_jammed, const TwoSegmentOptions& o) {
  if (geometry.section_count() != 2) throw StructuralError("two-segment test needs exactly two sections");
  const double p = o.internal_gauge;
  const std::vector<SectionState> sections{
      proximal_jammed ? SectionState::jammed_atmospheric(p) : SectionState::unjammed(p),
      distal_jammed ? SectionState::jammed_atmospheric(p) : SectionState::unjammed(p)};
  const double L = geometry.total_length();
  const std::vector<JointLaw> laws = compose_joint_laws(geometry, params, sections, L);

  TwoSegmentResult out;
  SolverOptions opts;
  const int steps = std::max(1, o.steps);
  for (int i = 0; i <= steps; ++i) {
    const double F = o.max_force * i / steps;
    opts.tip_force = Vec3(F, 0.0, 0.0);
    const EquilibriumResult r =
        solve_equilibrium(geometry, L, laws, {}, TendonState::slack(geometry.tendon_count()), opts);
    opts.initial = r.configuration;
    const auto poses = forward_kinematics(geometry, r.configuration);
    TwoSegmentSample s;
    s.force = F;
    s.theta2 = std::atan2(poses[0].axis().x(), poses[0].axis().z());
    s.theta1 = std::atan2(poses[1].axis().x(), poses[1].axis().z());
    out.trace.push_back(s);
  }

  const auto& peak = out.trace.back();
  if (peak.theta1 == 0.0 && peak.theta2 == 0.0) {
    out.behaviour = TwoSegmentBehaviour::Unloaded;
    return out;
  }
  out.peak_ratio = peak.theta2 != 0.0 ? peak.theta1 / peak.theta2 : INFINITY;
  for (const auto& s : out.trace)
    if (s.theta2 != 0.0)
      out.max_relative_spread = std::max(out.max_relative_spread, std::fabs(s.theta1 - s.theta2) / std::fabs(s.theta2));
  if (out.peak_ratio >= 5.0) out.behaviour = TwoSegmentBehaviour::Pivot;
  else if (out.max_relative_spread <= 0.1) out.behaviour = TwoSegmentBehaviour::SingleUnit;
  else out.behaviour = TwoSegmentBehaviour::Mixed;
  return out;
}

}  // namespace vine
