#pragma once

// File formats. Scenario, script, target, anchor and parameter files use
// mm / kPa (gauge) / deg; event logs use SI so replay is exact.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "vine/calibration.hpp"
#include "vine/planner.hpp"
#include "vine/session.hpp"

namespace vine {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kProtocolVersion = 1;

enum class UnitSystem { Interface, SI };

using Json = nlohmann::json;

// JSON pointer -> line of the value, built by a small lexer so semantic
// errors can name a line.
class LineMap {
 public:
  LineMap() = default;
  explicit LineMap(const std::string& text);
  // Line of `pointer` or of its nearest recorded ancestor; 0 if unknown.
  int line_of(const std::string& pointer) const;

 private:
  std::map<std::string, int> lines_;
};

// Parses text, turning syntax errors into ParseError with a line number.
Json parse_json_text(const std::string& text);

Json command_to_json(const Command& c, UnitSystem units);
Command command_from_json(const Json& j, UnitSystem units, const LineMap* lines = nullptr,
                          const std::string& pointer = "");

Json scenario_to_json(const Scenario& s, UnitSystem units);
Scenario scenario_from_json(const Json& j, UnitSystem units, const LineMap* lines = nullptr);

Scenario load_scenario(const std::string& text);
std::string save_scenario(const Scenario& s);

CommandScript load_script(const std::string& text);
std::string save_script(const CommandScript& script);

ModelParameters load_parameters(const std::string& text);
std::string save_parameters(const ModelParameters& p, const CalibrationReport* report = nullptr);

CalibrationAnchors load_anchors(const std::string& text);
std::string save_anchors(const CalibrationAnchors& a);

TargetConfiguration load_targets(const std::string& text, std::size_t joint_count);
std::string save_targets(const TargetConfiguration& t);

// Event log, one JSON record per line: a header with the scenario, then one
// record per command.
std::string log_header_line(const Scenario& s);
std::string event_line(const EventRecord& e);
std::string save_log(const Session& session);

struct LoadedLog {
  Scenario scenario;
  std::vector<EventRecord> events;
};
LoadedLog load_log(const std::string& text);

// Re-executes every logged command and checks each state hash. Throws Error
// with code "replay_mismatch" on divergence.
Session replay_log(const std::string& text);

// Session protocol payloads.
Json handshake_message();
Json state_message(const Session& s);
Json error_message(const std::string& reason, const std::string& detail, std::size_t log_index);

std::string read_text_file(const std::string& path);
// Refuses to overwrite an existing file unless `force`.
void write_text_file(const std::string& path, const std::string& text, bool force);

}  // namespace vine
