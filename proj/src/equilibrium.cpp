#include "vine/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vine/errors.hpp"

namespace vine {

void TendonState::validate(std::size_t tendon_count) const {
  if (values.size() != tendon_count)
    throw StructuralError("tendon state has " + std::to_string(values.size()) +
                          " entries for " + std::to_string(tendon_count) + " tendons");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0)
      throw DomainError("tendon[" + std::to_string(i) + "]",
                        mode == Mode::Tension ? "tension must be finite and >= 0"
                                              : "path length must be finite and >= 0");
  }
}

EnergyModel::EnergyModel(const RobotDescription& desc, double everted_length,
                         std::vector<JointLaw> laws, std::vector<Vec2> rest)
    : desc_(desc), everted_length_(everted_length), laws_(std::move(laws)), rest_(std::move(rest)) {
  const std::vector<double> lengths = segment_lengths(desc_, everted_length_);
  if (lengths.size() != laws_.size())
    throw StructuralError(std::to_string(laws_.size()) + " joint laws for " +
                          std::to_string(lengths.size()) + " exposed sections");
  if (rest_.empty()) rest_.assign(laws_.size(), Vec2::Zero());
  if (rest_.size() != laws_.size()) throw StructuralError("rest angle count mismatch");
  for (std::size_t j = 0; j < laws_.size(); ++j) {
    if (!(laws_[j].stiffness > 0.0) || !(laws_[j].plateau_moment > 0.0))
      throw DomainError("joint " + std::to_string(j), "law needs k > 0 and plateau > 0");
  }
  tensions_.assign(desc_.tendon_count(), 0.0);
  const Configuration straight = Configuration::straight(desc_, everted_length_);
  const ChainKinematics ck = chain_kinematics(desc_, straight);
  for (std::size_t t = 0; t < desc_.tendon_count(); ++t) {
    anchors_.push_back(tendon_anchors(desc_, everted_length_, t));
    straight_lengths_.push_back(tendon_path_length(ck, anchors_.back()));
  }
  const double ring = 2.0 * kPi * desc_.beam_radius * desc_.fabric.areal_density;
  for (double l : lengths) segment_masses_.push_back(ring * l);
}

void EnergyModel::set_tensions(std::vector<double> tensions) {
  TendonState::tensions(tensions).validate(desc_.tendon_count());
  tensions_ = std::move(tensions);
}

void EnergyModel::set_length_constraints(std::vector<double> targets, std::vector<double> multipliers,
                                         double mu) {
  if (targets.size() != desc_.tendon_count() || multipliers.size() != targets.size())
    throw StructuralError("length constraint size mismatch");
  if (!(mu > 0.0)) throw DomainError("mu", "penalty must be > 0");
  targets_ = std::move(targets);
  multipliers_ = std::move(multipliers);
  mu_ = mu;
}

std::vector<double> EnergyModel::constraint_tensions(const Eigen::VectorXd& q) const {
  std::vector<double> s(targets_.size(), 0.0);
  if (targets_.empty()) return s;
  const ChainKinematics ck = chain_kinematics(desc_, configuration(q));
  for (std::size_t t = 0; t < targets_.size(); ++t)
    s[t] = std::max(0.0, multipliers_[t] + mu_ * (tendon_path_length(ck, anchors_[t]) - targets_[t]));
  return s;
}

Configuration EnergyModel::configuration(const Eigen::VectorXd& q) const {
  Configuration c = Configuration::straight(desc_, everted_length_);
  c.assign(q);
  return c;
}

double EnergyModel::path_length(const Eigen::VectorXd& q, std::size_t tendon) const {
  const ChainKinematics ck = chain_kinematics(desc_, configuration(q));
  return tendon_path_length(ck, anchors_.at(tendon));
}

double EnergyModel::evaluate(const Eigen::VectorXd& q, Eigen::VectorXd* gradient) const {
  const std::size_t nj = laws_.size();
  for (std::size_t j = 0; j < nj; ++j) {
    if (!std::isfinite(q(2 * j)) || !std::isfinite(q(2 * j + 1)))
      throw NumericError("non-finite angle at joint " + std::to_string(j));
  }
  const ChainKinematics ck = chain_kinematics(desc_, configuration(q));
  if (gradient) gradient->setZero(2 * nj);

  double v = 0.0;
  for (std::size_t j = 0; j < nj; ++j) {
    const Vec2 d = q.segment<2>(2 * j) - rest_[j];
    const double a = d.norm();
    const double u = joint_energy(laws_[j], a);
    if (!std::isfinite(u)) throw NumericError("non-finite energy at joint " + std::to_string(j));
    v += u;
    if (gradient && a > 0.0) gradient->segment<2>(2 * j) += regularized_moment(laws_[j], a) / a * d;
  }

  Eigen::VectorXd gt;
  for (std::size_t t = 0; t < tensions_.size(); ++t) {
    if (tensions_[t] == 0.0) continue;
    const double len = tendon_path_length(ck, anchors_[t], gradient ? &gt : nullptr);
    v += tensions_[t] * (len - straight_lengths_[t]);
    if (gradient) *gradient += tensions_[t] * gt;
  }

  for (std::size_t t = 0; t < targets_.size(); ++t) {
    const double len = tendon_path_length(ck, anchors_[t], gradient ? &gt : nullptr);
    const double lam = multipliers_[t];
    const double s = std::max(0.0, lam + mu_ * (len - targets_[t]));
    v += (s * s - lam * lam) / (2.0 * mu_);
    if (gradient && s > 0.0) *gradient += s * gt;
  }

  if (tip_force_.squaredNorm() > 0.0) {
    v -= tip_force_.dot(ck.tip);
    if (gradient)
      for (std::size_t j = 0; j < nj; ++j)
        for (int c = 0; c < 2; ++c)
          (*gradient)(2 * j + c) -= tip_force_.dot(ck.point_derivative(j, c, ck.tip));
  }

  if (gravity_.squaredNorm() > 0.0) {
    for (std::size_t i = 0; i < nj; ++i) {
      const Vec3 com = ck.segments[i].origin + ck.segments[i].axis() * (ck.segments[i].length / 2.0);
      const Vec3 w = segment_masses_[i] * gravity_;
      v -= w.dot(com);
      if (gradient)
        for (std::size_t j = 0; j <= i; ++j)
          for (int c = 0; c < 2; ++c) (*gradient)(2 * j + c) -= w.dot(ck.point_derivative(j, c, com));
    }
  }

  if (!std::isfinite(v)) throw NumericError("non-finite potential energy");
  if (gradient) {
    for (std::size_t j = 0; j < nj; ++j)
      if (!std::isfinite((*gradient)(2 * j)) || !std::isfinite((*gradient)(2 * j + 1)))
        throw NumericError("non-finite gradient at joint " + std::to_string(j));
  }
  return v;
}

namespace {

// Per-joint disc |theta| <= pi/2; fixed joints never move.
struct Disc {
  std::vector<bool> free;  // per joint

  static bool on_rim(const Vec2& t) { return t.norm() >= kJointLimit * (1.0 - 1e-12); }

  void project(Eigen::VectorXd& q) const {
    for (std::size_t j = 0; j < free.size(); ++j) {
      if (!free[j]) continue;
      const double a = q.segment<2>(2 * j).norm();
      if (a > kJointLimit) q.segment<2>(2 * j) *= kJointLimit / a;
    }
  }

  // Working directions: full plane for interior joints, the tangent for
  // joints held on the rim by an outward push.
  // curvature[k] is the arc correction g.theta'' for rim tangents
  Eigen::MatrixXd basis(const Eigen::VectorXd& q, const Eigen::VectorXd& g, std::vector<double>& curvature) const {
    std::vector<Eigen::VectorXd> cols;
    curvature.clear();
    const int n = static_cast<int>(q.size());
    for (std::size_t j = 0; j < free.size(); ++j) {
      if (!free[j]) continue;
      const Vec2 t = q.segment<2>(2 * j);
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      if (on_rim(t) && g.segment<2>(2 * j).dot(t) < 0.0) {
        e.segment<2>(2 * j) = Vec2(-t.y(), t.x()) / t.norm();
        cols.push_back(e);
        curvature.push_back(-g.segment<2>(2 * j).dot(t) / t.squaredNorm());
      } else {
        e(2 * j) = 1.0;
        cols.push_back(e);
        e.setZero();
        e(2 * j + 1) = 1.0;
        cols.push_back(e);
        curvature.push_back(0.0);
        curvature.push_back(0.0);
      }
    }
    Eigen::MatrixXd B(n, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) B.col(k) = cols[k];
    return B;
  }
};

void fill_result(const EnergyModel& model, const Eigen::VectorXd& q, EquilibriumResult& r) {
  r.configuration = model.configuration(q);
  r.tensions = model.tensions();
  const auto& laws = model.laws();
  r.joint_moments.assign(laws.size(), Vec2::Zero());
  r.wrinkled.assign(laws.size(), false);
  for (std::size_t j = 0; j < laws.size(); ++j) {
    const Vec2 d = q.segment<2>(2 * j) - model.rest()[j];
    const double a = d.norm();
    if (a > 0.0) r.joint_moments[j] = -joint_moment(laws[j], a) / a * d;
    r.wrinkled[j] = a >= laws[j].wrinkle_angle() * (1.0 - 1e-12) && a > 0.0;
  }
}

}  // namespace

EquilibriumResult minimize_energy(const EnergyModel& model, const SolverOptions& options) {
  const int n = static_cast<int>(model.dimension());
  const std::size_t nj = model.laws().size();
  Disc disc;
  disc.free.assign(nj, true);
  if (!options.free_joints.empty()) {
    if (options.free_joints.size() != nj) throw StructuralError("free-joint mask size mismatch");
    disc.free = options.free_joints;
  }

  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  if (options.initial) {
    if (options.initial->joint_count() != nj) throw StructuralError("initial configuration joint count mismatch");
    q = options.initial->flatten();
  }
  disc.project(q);

  double scale = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nj; ++j)
    if (disc.free[j]) scale = std::min(scale, model.laws()[j].plateau_moment);

  EquilibriumResult result;
  if (!std::isfinite(scale)) {
    result.energy = model.energy(q);
    result.converged = true;
    fill_result(model, q, result);
    return result;
  }

  Eigen::VectorXd g(n), gp(n), gm(n);
  double f = model.evaluate(q, &g);
  int it = 0;
  for (;; ++it) {
    std::vector<double> curv;
    const Eigen::MatrixXd B = disc.basis(q, g, curv);
    const Eigen::VectorXd gr = B.transpose() * g;
    result.residual_norm = gr.norm() / scale;
    if (result.residual_norm <= options.tolerance) {
      result.converged = true;
      break;
    }
    if (it >= options.max_iterations) break;

    const int m = static_cast<int>(B.cols());
    Eigen::MatrixXd HB(n, m);
    for (int k = 0; k < m; ++k) {
      model.evaluate(q + options.hessian_step * B.col(k), &gp);
      model.evaluate(q - options.hessian_step * B.col(k), &gm);
      HB.col(k) = (gp - gm) / (2.0 * options.hessian_step);
    }
    Eigen::MatrixXd H = B.transpose() * HB;
    H = 0.5 * (H + H.transpose()).eval();
    for (int k = 0; k < m; ++k) H(k, k) += curv[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    Eigen::VectorXd lam = eig.eigenvalues();
    const double lmax = std::max(lam.cwiseAbs().maxCoeff(), 1e-12);
    for (int a = 0; a < m; ++a) lam(a) = std::max(lam(a), 1e-8 * lmax);
    const Eigen::VectorXd newton =
        -(B * (eig.eigenvectors() * (eig.eigenvectors().transpose() * gr).cwiseQuotient(lam)));

    auto try_direction = [&](const Eigen::VectorXd& d) {
      double alpha = 1.0;
      for (int k = 0; k < 60; ++k, alpha *= 0.5) {
        Eigen::VectorXd qn = q + alpha * d;
        disc.project(qn);
        const Eigen::VectorXd step = qn - q;
        if (step.lpNorm<Eigen::Infinity>() == 0.0) return false;
        Eigen::VectorXd gn(n);
        const double fn = model.evaluate(qn, &gn);
        // near the optimum energy differences drown in roundoff; fall back on the gradient
        const bool flat = fn <= f + 1e-13 * (1.0 + std::fabs(f)) &&
                          (B.transpose() * gn).norm() < 0.5 * gr.norm();
        if (fn <= f + 1e-4 * g.dot(step) || flat) {
          q = qn;
          f = fn;
          g = gn;
          return true;
        }
      }
      return false;
    };
    if (!try_direction(newton) && !try_direction(-(B * gr) / lmax)) break;
  }
  result.iterations = it;
  result.energy = f;
  fill_result(model, q, result);
  return result;
}

EquilibriumResult solve_equilibrium(const RobotDescription& desc, double everted_length,
                                    const std::vector<JointLaw>& laws,
                                    const std::vector<Vec2>& rest, const TendonState& tendons,
                                    const SolverOptions& options) {
  tendons.validate(desc.tendon_count());
  EnergyModel model(desc, everted_length, laws, rest);
  model.set_tip_force(options.tip_force);
  model.set_gravity(options.gravity);
  if (tendons.mode == TendonState::Mode::Tension) {
    model.set_tensions(tendons.values);
    return minimize_energy(model, options);
  }

  // Held lengths: augmented Lagrangian, the multipliers are the tendon tensions.
  SolverOptions opts = options;
  const std::size_t nt = desc.tendon_count();
  const double cap = 64.0 * desc.tendon_tension_limit;
  std::vector<double> lambda(nt, 0.0);
  double mu = 1e4;
  double worst_prev = std::numeric_limits<double>::infinity();
  EquilibriumResult r;
  int outer = 0;
  for (; outer < options.max_outer_iterations; ++outer) {
    model.set_length_constraints(tendons.values, lambda, mu);
    r = minimize_energy(model, opts);
    opts.initial = r.configuration;
    const Eigen::VectorXd q = r.configuration.flatten();
    const std::vector<double> s = model.constraint_tensions(q);
    double worst = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      const double c = model.path_length(q, t) - tendons.values[t];
      // slack tendon with no tension is satisfied
      if (!(s[t] == 0.0 && c <= 0.0)) worst = std::max(worst, std::fabs(c));
    }
    r.tensions = s;
    lambda = s;
    if (worst <= options.length_tolerance && r.converged) break;
    if (worst > 0.25 * worst_prev) mu = std::min(10.0 * mu, 1e12);
    worst_prev = worst;
  }
  r.outer_iterations = outer + 1;
  bool lengths_ok = outer < options.max_outer_iterations;
  for (double t : r.tensions) lengths_ok = lengths_ok && t <= cap;
  r.converged = r.converged && lengths_ok;
  return r;
}

EquilibriumResult solve_equilibrium(const RobotDescription& desc, const ModelParameters& params,
                                    const std::vector<SectionState>& sections,
                                    const TendonState& tendons, const SolverOptions& options) {
  const double everted = options.initial ? options.initial->everted_length : desc.total_length();
  const std::vector<JointLaw> laws = compose_joint_laws(desc, params, sections, everted);
  return solve_equilibrium(desc, everted, laws, {}, tendons, options);
}

}  // namespace vine
