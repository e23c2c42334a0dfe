#include "vine/session.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vine/errors.hpp"
#include "vine/hash.hpp"

namespace vine {

std::string command_name(const Command& c) {
  struct V {
    std::string operator()(const Grow&) const { return "grow"; }
    std::string operator()(const Retract&) const { return "retract"; }
    std::string operator()(const SetPouch&) const { return "set_pouch"; }
    std::string operator()(const PullTendon&) const { return "pull_tendon"; }
    std::string operator()(const ReleaseTendon&) const { return "release_tendon"; }
    std::string operator()(const WaitEquilibrium&) const { return "wait_equilibrium"; }
  };
  return std::visit(V{}, c);
}

void Scenario::validate() const {
  robot.validate();
  params.validate();
  if (!(internal_gauge > 0.0) || !std::isfinite(internal_gauge))
    throw DomainError("internal_kPa", "internal gauge pressure must be positive");
  if (!(initial_length >= 0.0) || initial_length > robot.total_length() + 1e-12)
    throw DomainError("initial_length_mm", "must lie within [0, total length]");
  if (!(pouch_margin >= 0.0) || !std::isfinite(pouch_margin))
    throw DomainError("pouch_margin_kPa", "must be >= 0");
  if (!gravity.allFinite()) throw DomainError("gravity_m_s2", "must be finite");
}

std::uint64_t hash_state(const SessionState& s) {
  Fnv1a h;
  h.add(s.everted_length);
  h.add(static_cast<std::uint64_t>(s.sections.size()));
  for (const auto& sec : s.sections) {
    h.add(sec.pouch_pressure);
    h.add(sec.internal_pressure);
  }
  h.add(static_cast<std::uint64_t>(s.tendons.size()));
  for (const auto& t : s.tendons) {
    h.add(static_cast<int>(t.mode));
    h.add(t.value);
  }
  h.add(static_cast<std::uint64_t>(s.configuration.joint_count()));
  for (std::size_t j = 0; j < s.configuration.joint_count(); ++j) {
    h.add(s.configuration.joint_angles[j].x());
    h.add(s.configuration.joint_angles[j].y());
    h.add(s.rest[j].x());
    h.add(s.rest[j].y());
    h.add(s.owners[j]);
  }
  for (const auto& m : s.joint_moments) {
    h.add(m.x());
    h.add(m.y());
  }
  for (bool w : s.wrinkled) h.add(w);
  for (double t : s.applied_tensions) h.add(t);
  h.add(s.converged);
  h.add(s.residual_norm);
  return h.value();
}

Session::Session(Scenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  state_.everted_length = scenario_.initial_length;
  state_.sections.assign(scenario_.robot.section_count(), SectionState::unjammed(scenario_.internal_gauge));
  state_.tendons.assign(scenario_.robot.tendon_count(), TendonControl{});
  state_.applied_tensions.assign(scenario_.robot.tendon_count(), 0.0);
  resize_joints(state_, state_.everted_length);
}

std::vector<JointLaw> Session::joint_laws() const {
  return compose_joint_laws(scenario_.robot, scenario_.params, state_.sections, state_.everted_length,
                            state_.owners);
}

void Session::resize_joints(SessionState& s, double new_length) const {
  s.everted_length = new_length;
  const std::size_t n = exposed_section_count(scenario_.robot, new_length);
  s.configuration.everted_length = new_length;
  s.configuration.joint_angles.resize(n, Vec2::Zero());
  s.rest.resize(n, Vec2::Zero());
  s.owners.resize(n, -1);
  s.joint_moments.resize(n, Vec2::Zero());
  s.wrinkled.resize(n, false);
}

void Session::update_locks(SessionState& s) const {
  for (std::size_t j = 0; j < s.configuration.joint_count(); ++j) {
    if (s.owners[j] >= 0 && !s.sections[s.owners[j]].jammed()) {
      s.owners[j] = -1;
      s.rest[j] = Vec2::Zero();
    }
    const bool proximal = j == 0 || s.sections[j - 1].jammed();
    if (s.owners[j] < 0 && proximal && s.sections[j].jammed()) {
      s.owners[j] = static_cast<int>(j);
      s.rest[j] = s.configuration.joint_angles[j];
    }
  }
}

void Session::solve(SessionState& s) const {
  const RobotDescription& robot = scenario_.robot;
  const std::vector<JointLaw> laws =
      compose_joint_laws(robot, scenario_.params, s.sections, s.everted_length, s.owners);
  bool by_length = false;
  for (const auto& t : s.tendons) by_length = by_length || t.mode == TendonState::Mode::PathLength;
  TendonState ts;
  if (by_length) {
    ts.mode = TendonState::Mode::PathLength;
    for (std::size_t t = 0; t < s.tendons.size(); ++t) {
      if (s.tendons[t].mode == TendonState::Mode::PathLength) ts.values.push_back(s.tendons[t].value);
      else ts.values.push_back(robot.total_length() + 10.0);  // slack
    }
  } else {
    for (const auto& t : s.tendons) ts.values.push_back(t.value);
  }
  SolverOptions opts;
  opts.initial = s.configuration;
  opts.gravity = scenario_.gravity;
  const EquilibriumResult r = solve_equilibrium(robot, s.everted_length, laws, s.rest, ts, opts);
  s.configuration = r.configuration;
  s.joint_moments = r.joint_moments;
  s.wrinkled = r.wrinkled;
  s.applied_tensions = r.tensions;
  s.converged = r.converged;
  s.residual_norm = r.residual_norm;
}

std::optional<std::pair<std::string, std::string>> Session::apply(const Command& c,
                                                                  SessionState& s) const {
  using Rejection = std::optional<std::pair<std::string, std::string>>;
  const RobotDescription& robot = scenario_.robot;
  auto reject = [](const char* code, std::string detail) -> Rejection {
    return std::make_pair(std::string(code), std::move(detail));
  };
  auto jammed_sections = [&]() {
    std::string list;
    for (std::size_t i = 0; i < s.exposed_sections(); ++i)
      if (s.sections[i].jammed()) list += (list.empty() ? "" : ",") + std::to_string(i);
    return list;
  };

  if (const auto* g = std::get_if<Grow>(&c)) {
    if (!std::isfinite(g->length) || !(g->length > 0.0)) return reject(reason::kInvalidValue, "grow length must be positive");
    if (const std::string j = jammed_sections(); !j.empty())
      return reject(reason::kSectionJammed, "jammed sections: " + j);
    const double target = s.everted_length + g->length;
    if (target > robot.total_length() + 1e-12) return reject(reason::kLengthOutOfRange, "exceeds total length");
    resize_joints(s, std::min(target, robot.total_length()));
    update_locks(s);
    return std::nullopt;
  }
  if (const auto* r = std::get_if<Retract>(&c)) {
    if (!std::isfinite(r->length) || !(r->length > 0.0)) return reject(reason::kInvalidValue, "retract length must be positive");
    if (const std::string j = jammed_sections(); !j.empty())
      return reject(reason::kSectionJammed, "jammed sections: " + j);
    for (std::size_t j = 0; j < s.configuration.joint_count(); ++j)
      if (s.configuration.joint_angles[j].norm() > 1e-12)
        return reject(reason::kJointsBent, "joint " + std::to_string(j) + " is bent");
    const double target = s.everted_length - r->length;
    if (target < -1e-12) return reject(reason::kLengthOutOfRange, "retracts past the base");
    resize_joints(s, std::max(target, 0.0));
    // sections drawn back in return to the unjammed supply state
    for (std::size_t i = s.exposed_sections(); i < s.sections.size(); ++i)
      s.sections[i] = SectionState::unjammed(scenario_.internal_gauge);
    return std::nullopt;
  }
  if (const auto* p = std::get_if<SetPouch>(&c)) {
    if (p->section >= s.exposed_sections())
      return reject(reason::kSectionNotExposed, "section " + std::to_string(p->section) + " is not exposed");
    if (!std::isfinite(p->pressure)) return reject(reason::kInvalidValue, "pouch pressure must be finite");
    const double hi = kAtmosphericPressure + scenario_.internal_gauge + scenario_.pouch_margin;
    s.sections[p->section].pouch_pressure = std::clamp(p->pressure, 0.0, hi);
    update_locks(s);
    return std::nullopt;
  }
  if (const auto* t = std::get_if<PullTendon>(&c)) {
    if (t->tendon >= robot.tendon_count())
      return reject(reason::kTendonOutOfRange, "tendon " + std::to_string(t->tendon) + " does not exist");
    if (t->tension.has_value() == t->target_length.has_value())
      return reject(reason::kInvalidValue, "give exactly one of tension or target length");
    const double v = t->tension ? *t->tension : *t->target_length;
    if (!std::isfinite(v) || v < 0.0) return reject(reason::kInvalidValue, "value must be finite and >= 0");
    const auto mode = t->tension ? TendonState::Mode::Tension : TendonState::Mode::PathLength;
    for (std::size_t k = 0; k < s.tendons.size(); ++k) {
      if (k == t->tendon) continue;
      const auto& o = s.tendons[k];
      const bool active = o.mode == TendonState::Mode::PathLength || o.value > 0.0;
      if (active && o.mode != mode)
        return reject(reason::kMixedTendonModes, "tendon " + std::to_string(k) + " uses the other control mode");
    }
    s.tendons[t->tendon] = {mode, v};
    return std::nullopt;
  }
  if (const auto* t = std::get_if<ReleaseTendon>(&c)) {
    if (t->tendon >= robot.tendon_count())
      return reject(reason::kTendonOutOfRange, "tendon " + std::to_string(t->tendon) + " does not exist");
    s.tendons[t->tendon] = TendonControl{};
    return std::nullopt;
  }
  try {
    solve(s);
  } catch (const NumericError& e) {
    return reject(reason::kNumericError, e.what());
  }
  return std::nullopt;
}

EventRecord Session::execute(const Command& command) {
  SessionState next = state_;
  const auto rejection = apply(command, next);
  EventRecord ev;
  ev.index = log_.size();
  ev.timestamp = ev.index;
  ev.command = command;
  ev.accepted = !rejection.has_value();
  if (rejection) {
    ev.reason = rejection->first;
    ev.detail = rejection->second;
  } else {
    state_ = std::move(next);
    if (!state_.converged) ev.detail = "equilibrium not converged";
  }
  ev.state_hash = state_hash();
  log_.push_back(ev);
  return ev;
}

std::vector<EventRecord> Session::run(const CommandScript& script) {
  std::vector<EventRecord> out;
  for (const auto& c : script) out.push_back(execute(c));
  return out;
}

}  // namespace vine
