#pragma once

// Stateful robot session: growth state machine, pouch and tendon commands,
// equilibrium updates and the append-only event log.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vine/equilibrium.hpp"
#include "vine/joint_law.hpp"
#include "vine/model.hpp"

namespace vine {

struct Grow {
  double length = 0.0;  // m, increment
  bool operator==(const Grow&) const = default;
};
struct Retract {
  double length = 0.0;
  bool operator==(const Retract&) const = default;
};
struct SetPouch {
  std::size_t section = 0;
  double pressure = 0.0;  // Pa absolute
  bool operator==(const SetPouch&) const = default;
};
struct PullTendon {
  std::size_t tendon = 0;
  std::optional<double> tension;        // N
  std::optional<double> target_length;  // m
  bool operator==(const PullTendon&) const = default;
};
struct ReleaseTendon {
  std::size_t tendon = 0;
  bool operator==(const ReleaseTendon&) const = default;
};
struct WaitEquilibrium {
  bool operator==(const WaitEquilibrium&) const = default;
};

using Command = std::variant<Grow, Retract, SetPouch, PullTendon, ReleaseTendon, WaitEquilibrium>;
using CommandScript = std::vector<Command>;

std::string command_name(const Command& c);

namespace reason {
inline constexpr const char* kSectionJammed = "section_jammed";
inline constexpr const char* kJointsBent = "joints_bent";
inline constexpr const char* kLengthOutOfRange = "length_out_of_range";
inline constexpr const char* kSectionNotExposed = "section_not_exposed";
inline constexpr const char* kTendonOutOfRange = "tendon_out_of_range";
inline constexpr const char* kInvalidValue = "invalid_value";
inline constexpr const char* kMixedTendonModes = "mixed_tendon_modes";
inline constexpr const char* kNumericError = "numeric_error";
}  // namespace reason

// Everything needed to start a session.
struct Scenario {
  RobotDescription robot{};
  ModelParameters params{};
  double internal_gauge = 6900.0;  // Pa
  double initial_length = 0.0;     // m
  double pouch_margin = 5000.0;    // Pa above internal pressure
  Vec3 gravity = Vec3::Zero();
  CommandScript script;

  void validate() const;
  bool operator==(const Scenario&) const = default;
};

struct TendonControl {
  TendonState::Mode mode = TendonState::Mode::Tension;
  double value = 0.0;  // N or m
  bool operator==(const TendonControl&) const = default;
};

struct SessionState {
  double everted_length = 0.0;
  std::vector<SectionState> sections;  // every section, exposed or not
  std::vector<TendonControl> tendons;
  Configuration configuration;
  std::vector<Vec2> rest;  // per joint
  LockOwners owners;       // per joint
  std::vector<Vec2> joint_moments;
  std::vector<bool> wrinkled;
  std::vector<double> applied_tensions;
  bool converged = true;
  double residual_norm = 0.0;

  std::size_t exposed_sections() const noexcept { return configuration.joint_count(); }
  bool operator==(const SessionState&) const = default;
};

struct EventRecord {
  std::size_t index = 0;
  std::uint64_t timestamp = 0;  // logical
  Command command;
  bool accepted = false;
  std::string reason;  // empty when accepted
  std::string detail;
  std::uint64_t state_hash = 0;
};

std::uint64_t hash_state(const SessionState& s);

class Session {
 public:
  explicit Session(Scenario scenario);

  // Validates and applies one command. Rejections leave the state untouched
  // but are still logged.
  EventRecord execute(const Command& command);
  std::vector<EventRecord> run(const CommandScript& script);

  const SessionState& state() const noexcept { return state_; }
  const Scenario& scenario() const noexcept { return scenario_; }
  const std::vector<EventRecord>& log() const noexcept { return log_; }
  std::uint64_t state_hash() const { return hash_state(state_); }
  std::vector<JointLaw> joint_laws() const;

 private:
  std::optional<std::pair<std::string, std::string>> apply(const Command& c, SessionState& s) const;
  void resize_joints(SessionState& s, double new_length) const;
  void update_locks(SessionState& s) const;
  void solve(SessionState& s) const;

  Scenario scenario_;
  SessionState state_;
  std::vector<EventRecord> log_;
};

}  // namespace vine
