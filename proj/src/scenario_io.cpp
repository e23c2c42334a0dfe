#include "vine/scenario_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "vine/errors.hpp"
#include "vine/hash.hpp"

namespace vine {

// ---------------------------------------------------------------- line map

LineMap::LineMap(const std::string& text) {
  struct Frame {
    bool object;
    std::string key;
    int index;
    bool expect_key;
  };
  std::vector<Frame> stack;
  int line = 1;
  auto pointer = [&]() {
    std::string p;
    for (const auto& f : stack) p += "/" + (f.object ? f.key : std::to_string(f.index));
    return p;
  };
  auto value_start = [&]() { lines_.emplace(pointer(), line); };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '{' || c == '[') {
      value_start();
      stack.push_back({c == '{', "", 0, c == '{'});
      ++i;
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
      ++i;
    } else if (c == ':') {
      if (!stack.empty()) stack.back().expect_key = false;
      ++i;
    } else if (c == ',') {
      if (!stack.empty()) {
        if (stack.back().object) stack.back().expect_key = true;
        else ++stack.back().index;
      }
      ++i;
    } else if (c == '"') {
      std::string s;
      ++i;
      while (i < n && text[i] != '"') {
        if (text[i] == '\\' && i + 1 < n) ++i;
        if (text[i] == '\n') ++line;
        s += text[i++];
      }
      ++i;
      if (!stack.empty() && stack.back().object && stack.back().expect_key) stack.back().key = s;
      else value_start();
    } else {
      value_start();
      while (i < n && std::string_view(",]}\n \t\r").find(text[i]) == std::string_view::npos) ++i;
    }
  }
}

int LineMap::line_of(const std::string& pointer) const {
  std::string p = pointer;
  for (;;) {
    const auto it = lines_.find(p);
    if (it != lines_.end()) return it->second;
    if (p.empty()) return 0;
    p = p.substr(0, p.rfind('/'));
  }
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    int line = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k)
      if (text[k] == '\n') ++line;
    throw ParseError("<document>", line, "malformed JSON");
  }
}

// ---------------------------------------------------------------- units

namespace {

enum class Q { Length, Pressure, Angle, Absolute, PerPressure };

struct Unit {
  const char* suffix;
  double scale;
  double offset;
  bool divide = false;  // si = y / scale, exact for decimal prefixes
};

Unit unit_of(Q q, UnitSystem u) {
  if (u == UnitSystem::Interface) {
    switch (q) {
      case Q::Length: return {"_mm", 1e3, 0.0, true};
      case Q::Pressure: return {"_kPa", 1e3, 0.0};
      case Q::Angle: return {"_deg", kPi / 180.0, 0.0};
      case Q::Absolute: return {"_kPa", 1e3, kAtmosphericPressure};
      case Q::PerPressure: return {"_per_kPa", 1e3, 0.0, true};
    }
  }
  switch (q) {
    case Q::Length: return {"_m", 1.0, 0.0};
    case Q::Pressure: return {"_Pa", 1.0, 0.0};
    case Q::Angle: return {"_rad", 1.0, 0.0};
    case Q::Absolute: return {"_Pa_abs", 1.0, 0.0};
    case Q::PerPressure: return {"_per_Pa", 1.0, 0.0};
  }
  return {"", 1.0, 0.0};
}

double decode(double y, const Unit& u) { return (u.divide ? y / u.scale : y * u.scale) + u.offset; }

// File value whose decoding reproduces `si` exactly when one exists nearby.
double encode(double si, const Unit& u) {
  const double y = u.divide ? (si - u.offset) * u.scale : (si - u.offset) / u.scale;
  if (!std::isfinite(y) || decode(y, u) == si) return y;
  double up = y, dn = y;
  for (int k = 0; k < 64; ++k) {
    up = std::nextafter(up, INFINITY);
    if (decode(up, u) == si) return up;
    dn = std::nextafter(dn, -INFINITY);
    if (decode(dn, u) == si) return dn;
  }
  return y;
}

std::string key(const char* base, Q q, UnitSystem u) { return std::string(base) + unit_of(q, u).suffix; }

std::string field_name(const std::string& pointer) {
  std::string f = pointer.empty() ? "<root>" : pointer.substr(1);
  for (char& c : f)
    if (c == '/') c = '.';
  return f;
}

class Reader {
 public:
  Reader(const Json& j, std::string pointer, const LineMap* lines, UnitSystem units)
      : j_(j), ptr_(std::move(pointer)), lines_(lines), units_(units) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& k, const std::string& what) const {
    const std::string p = k.empty() ? ptr_ : ptr_ + "/" + k;
    throw ParseError(field_name(p), lines_ ? lines_->line_of(p) : 0, what);
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }

  const Json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  double number(const std::string& k, double def, bool required = false) {
    if (!has(k)) {
      if (required) fail(k, "missing required field");
      return def;
    }
    const Json& v = j_.at(k);
    if (!v.is_number()) fail(k, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(k, "expected a finite number");
    return d;
  }

  double quantity(const char* base, Q q, double def_si, bool required = false) {
    const Unit u = unit_of(q, units_);
    const std::string k = key(base, q, units_);
    if (!has(k)) {
      if (required) fail(k, "missing required field");
      return def_si;
    }
    return decode(number(k, 0.0), u);
  }

  std::vector<double> quantity_list(const char* base, Q q, const std::vector<double>& def_si) {
    const Unit u = unit_of(q, units_);
    const std::string k = key(base, q, units_);
    if (!has(k)) return def_si;
    const Json& v = j_.at(k);
    if (!v.is_array()) fail(k, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(k + "/" + std::to_string(i), "expected a number");
      out.push_back(decode(v[i].get<double>(), u));
    }
    return out;
  }

  long long integer(const std::string& k, long long def, bool required = false) {
    if (!has(k)) {
      if (required) fail(k, "missing required field");
      return def;
    }
    const Json& v = j_.at(k);
    if (!v.is_number_integer()) fail(k, "expected an integer");
    return v.get<long long>();
  }

  std::size_t index(const std::string& k) {
    const long long v = integer(k, 0, true);
    if (v < 0) fail(k, "expected a nonnegative index");
    return static_cast<std::size_t>(v);
  }

  std::string string(const std::string& k, const std::string& def, bool required = false) {
    if (!has(k)) {
      if (required) fail(k, "missing required field");
      return def;
    }
    const Json& v = j_.at(k);
    if (!v.is_string()) fail(k, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const Json& v = j_.at(k);
    if (!v.is_boolean()) fail(k, "expected true or false");
    return v.get<bool>();
  }

  Reader child(const std::string& k) {
    seen_.insert(k);
    return Reader(j_.at(k), ptr_ + "/" + k, lines_, units_);
  }

  std::string pointer(const std::string& k) const { return ptr_ + "/" + k; }

  // Rejects keys nobody asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
  }

 private:
  const Json& j_;
  std::string ptr_;
  const LineMap* lines_;
  UnitSystem units_;
  std::set<std::string> seen_;
};

Json units_block(UnitSystem u) {
  if (u == UnitSystem::SI) return {{"length", "m"}, {"pressure", "Pa"}, {"angle", "rad"}};
  return {{"length", "mm"}, {"pressure", "kPa gauge"}, {"angle", "deg"}};
}

void check_header(Reader& r, UnitSystem u) {
  const long long v = r.integer("schema_version", -1, true);
  if (v != kSchemaVersion) throw VersionError(static_cast<int>(v), kSchemaVersion);
  if (r.has("units") && r.raw("units") != units_block(u))
    r.fail("units", "unsupported unit block, expected " + units_block(u).dump());
}

Json header(UnitSystem u) { return {{"schema_version", kSchemaVersion}, {"units", units_block(u)}}; }

// Validation errors re-raised with the line of the offending field.
template <class F>
void with_field_lines(const LineMap* lines, const std::string& prefix, F&& validate) {
  try {
    validate();
  } catch (const DomainError& e) {
    std::string f = e.field();
    const auto b = f.find('[');
    if (b != std::string::npos) f = f.substr(0, b);
    int line = 0;
    if (lines)
      for (const char* suf : {"_mm", "_kPa", "_deg", "_m", "_Pa", "_rad", "_N", "_kg_m2", "_Nm2", "_Nm2_per_kPa", "_Nm2_per_Pa", ""}) {
        line = lines->line_of(prefix + "/" + f + suf);
        if (line > 0 && line != lines->line_of(prefix)) break;
        line = 0;
      }
    throw ParseError(e.field(), line, e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------- commands

Json command_to_json(const Command& c, UnitSystem u) {
  Json j;
  j["command"] = command_name(c);
  if (const auto* g = std::get_if<Grow>(&c)) j[key("length", Q::Length, u)] = encode(g->length, unit_of(Q::Length, u));
  else if (const auto* r = std::get_if<Retract>(&c)) j[key("length", Q::Length, u)] = encode(r->length, unit_of(Q::Length, u));
  else if (const auto* p = std::get_if<SetPouch>(&c)) {
    j["section"] = p->section;
    j[key("pouch", Q::Absolute, u)] = encode(p->pressure, unit_of(Q::Absolute, u));
  } else if (const auto* t = std::get_if<PullTendon>(&c)) {
    j["tendon"] = t->tendon;
    if (t->tension) j["tension_N"] = *t->tension;
    if (t->target_length) j[key("target_length", Q::Length, u)] = encode(*t->target_length, unit_of(Q::Length, u));
  } else if (const auto* rt = std::get_if<ReleaseTendon>(&c)) {
    j["tendon"] = rt->tendon;
  }
  return j;
}

Command command_from_json(const Json& j, UnitSystem u, const LineMap* lines, const std::string& ptr) {
  Reader r(j, ptr, lines, u);
  const std::string name = r.string("command", "", true);
  Command c;
  if (name == "grow") c = Grow{r.quantity("length", Q::Length, 0.0, true)};
  else if (name == "retract") c = Retract{r.quantity("length", Q::Length, 0.0, true)};
  else if (name == "set_pouch") c = SetPouch{r.index("section"), r.quantity("pouch", Q::Absolute, 0.0, true)};
  else if (name == "pull_tendon") {
    PullTendon p;
    p.tendon = r.index("tendon");
    if (r.has("tension_N")) p.tension = r.number("tension_N", 0.0);
    if (r.has(key("target_length", Q::Length, u))) p.target_length = r.quantity("target_length", Q::Length, 0.0);
    if (p.tension.has_value() == p.target_length.has_value())
      r.fail("", "pull_tendon needs exactly one of tension_N or " + key("target_length", Q::Length, u));
    c = p;
  } else if (name == "release_tendon") c = ReleaseTendon{r.index("tendon")};
  else if (name == "wait_equilibrium") c = WaitEquilibrium{};
  else r.fail("command", "unknown command '" + name + "'");
  r.finish();
  return c;
}

namespace {

Json script_to_json(const CommandScript& s, UnitSystem u) {
  Json a = Json::array();
  for (const auto& c : s) a.push_back(command_to_json(c, u));
  return a;
}

CommandScript script_from_json(Reader& r, const std::string& k, UnitSystem u, const LineMap* lines) {
  CommandScript out;
  if (!r.has(k)) return out;
  const Json& a = r.raw(k);
  if (!a.is_array()) r.fail(k, "expected an array of commands");
  for (std::size_t i = 0; i < a.size(); ++i)
    out.push_back(command_from_json(a[i], u, lines, r.pointer(k) + "/" + std::to_string(i)));
  return out;
}

Json params_to_json(const ModelParameters& p, UnitSystem u, Json& j) {
  const auto& m = p.material;
  j["material"] = {
      {key("E_unjammed", Q::Pressure, u), encode(m.E_unjammed, unit_of(Q::Pressure, u))},
      {key("E_jammed_ref", Q::Pressure, u), encode(m.E_jammed_ref, unit_of(Q::Pressure, u))},
      {key("stack_thickness", Q::Length, u), encode(m.stack_thickness, unit_of(Q::Length, u))},
      {key("stack_width", Q::Length, u), encode(m.stack_width, unit_of(Q::Length, u))},
      {"reference_layers", m.reference_layers},
      {key("deltaP_sat", Q::Pressure, u), encode(m.deltaP_sat, unit_of(Q::Pressure, u))},
      {"skin_gain", m.skin_gain}};
  j["pressure_stiffness"] = {
      {"base_rigidity_Nm2", p.pressure.base_rigidity},
      {key("rigidity_Nm2", Q::PerPressure, u), encode(p.pressure.rigidity_per_pascal, unit_of(Q::PerPressure, u))}};
  j["joints"] = {{"interface_gain", p.joints.interface_gain},
                 {"plateau_slope_ratio", p.joints.plateau_slope_ratio},
                 {"hinge_factor", p.joints.hinge_factor}};
  return j;
}

void params_from_json(Reader& r, ModelParameters& p) {
  if (r.has("material")) {
    Reader m = r.child("material");
    auto& mm = p.material;
    mm.E_unjammed = m.quantity("E_unjammed", Q::Pressure, mm.E_unjammed);
    mm.E_jammed_ref = m.quantity("E_jammed_ref", Q::Pressure, mm.E_jammed_ref);
    mm.stack_thickness = m.quantity("stack_thickness", Q::Length, mm.stack_thickness);
    mm.stack_width = m.quantity("stack_width", Q::Length, mm.stack_width);
    mm.reference_layers = static_cast<int>(m.integer("reference_layers", mm.reference_layers));
    mm.deltaP_sat = m.quantity("deltaP_sat", Q::Pressure, mm.deltaP_sat);
    mm.skin_gain = m.number("skin_gain", mm.skin_gain);
    m.finish();
  }
  if (r.has("pressure_stiffness")) {
    Reader s = r.child("pressure_stiffness");
    p.pressure.base_rigidity = s.number("base_rigidity_Nm2", p.pressure.base_rigidity);
    p.pressure.rigidity_per_pascal = s.quantity("rigidity_Nm2", Q::PerPressure, p.pressure.rigidity_per_pascal);
    s.finish();
  }
  if (r.has("joints")) {
    Reader s = r.child("joints");
    p.joints.interface_gain = s.number("interface_gain", p.joints.interface_gain);
    p.joints.plateau_slope_ratio = s.number("plateau_slope_ratio", p.joints.plateau_slope_ratio);
    p.joints.hinge_factor = s.number("hinge_factor", p.joints.hinge_factor);
    s.finish();
  }
}

}  // namespace

// ---------------------------------------------------------------- scenario

Json scenario_to_json(const Scenario& s, UnitSystem u) {
  Json j = header(u);
  const auto& d = s.robot;
  Json angles = Json::array(), lengths = Json::array();
  for (double a : d.tendon_angles) angles.push_back(encode(a, unit_of(Q::Angle, u)));
  for (double l : d.section_lengths) lengths.push_back(encode(l, unit_of(Q::Length, u)));
  j["robot"] = {
      {key("beam_radius", Q::Length, u), encode(d.beam_radius, unit_of(Q::Length, u))},
      {key("section_lengths", Q::Length, u), lengths},
      {"layer_stacks_per_section", d.layer_stacks_per_section},
      {"layers_per_stack", d.layers_per_stack},
      {key("layer_width", Q::Length, u), encode(d.layer_width, unit_of(Q::Length, u))},
      {"tendon_count", d.tendon_count()},
      {key("tendon_angles", Q::Angle, u), angles},
      {key("tendon_radial_offset", Q::Length, u), encode(d.tendon_radial_offset, unit_of(Q::Length, u))},
      {key("stopper_spacing", Q::Length, u), encode(d.stopper_spacing, unit_of(Q::Length, u))},
      {"tendon_tension_limit_N", d.tendon_tension_limit},
      {"fabric_areal_density_kg_m2", d.fabric.areal_density}};
  params_to_json(s.params, u, j);
  j["session"] = {
      {key("internal", Q::Pressure, u), encode(s.internal_gauge, unit_of(Q::Pressure, u))},
      {key("initial_length", Q::Length, u), encode(s.initial_length, unit_of(Q::Length, u))},
      {key("pouch_margin", Q::Pressure, u), encode(s.pouch_margin, unit_of(Q::Pressure, u))},
      {"gravity_m_s2", {s.gravity.x(), s.gravity.y(), s.gravity.z()}}};
  j["script"] = script_to_json(s.script, u);
  return j;
}

Scenario scenario_from_json(const Json& j, UnitSystem u, const LineMap* lines) {
  Reader r(j, "", lines, u);
  check_header(r, u);
  Scenario s;
  if (r.has("robot")) {
    Reader g = r.child("robot");
    auto& d = s.robot;
    d.beam_radius = g.quantity("beam_radius", Q::Length, d.beam_radius);
    d.section_lengths = g.quantity_list("section_lengths", Q::Length, d.section_lengths);
    d.layer_stacks_per_section = static_cast<int>(g.integer("layer_stacks_per_section", d.layer_stacks_per_section));
    d.layers_per_stack = static_cast<int>(g.integer("layers_per_stack", d.layers_per_stack));
    d.layer_width = g.quantity("layer_width", Q::Length, d.layer_width);
    const bool has_angles = g.has(key("tendon_angles", Q::Angle, u));
    d.tendon_angles = g.quantity_list("tendon_angles", Q::Angle, d.tendon_angles);
    if (g.has("tendon_count")) {
      const long long n = g.integer("tendon_count", 0);
      if (n < 1) g.fail("tendon_count", "must be >= 1");
      if (has_angles && static_cast<std::size_t>(n) != d.tendon_angles.size())
        g.fail("tendon_count", "does not match the number of tendon angles");
      if (!has_angles) {
        d.tendon_angles.clear();
        for (long long i = 0; i < n; ++i) d.tendon_angles.push_back(2.0 * kPi * i / n);
      }
    }
    d.tendon_radial_offset = g.quantity("tendon_radial_offset", Q::Length, d.tendon_radial_offset);
    d.stopper_spacing = g.quantity("stopper_spacing", Q::Length, d.stopper_spacing);
    d.tendon_tension_limit = g.number("tendon_tension_limit_N", d.tendon_tension_limit);
    d.fabric.areal_density = g.number("fabric_areal_density_kg_m2", d.fabric.areal_density);
    g.finish();
  }
  params_from_json(r, s.params);
  if (r.has("session")) {
    Reader g = r.child("session");
    s.internal_gauge = g.quantity("internal", Q::Pressure, s.internal_gauge);
    s.initial_length = g.quantity("initial_length", Q::Length, s.initial_length);
    s.pouch_margin = g.quantity("pouch_margin", Q::Pressure, s.pouch_margin);
    if (g.has("gravity_m_s2")) {
      const Json& v = g.raw("gravity_m_s2");
      if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
        g.fail("gravity_m_s2", "expected three numbers");
      s.gravity = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    g.finish();
  }
  s.script = script_from_json(r, "script", u, lines);
  r.finish();
  with_field_lines(lines, "/robot", [&] { s.robot.validate(); });
  with_field_lines(lines, "/material", [&] { s.params.validate(); });
  with_field_lines(lines, "/session", [&] { s.validate(); });
  return s;
}

Scenario load_scenario(const std::string& text) {
  const Json j = parse_json_text(text);
  const LineMap lines(text);
  return scenario_from_json(j, UnitSystem::Interface, &lines);
}

std::string save_scenario(const Scenario& s) { return scenario_to_json(s, UnitSystem::Interface).dump(2) + "\n"; }

CommandScript load_script(const std::string& text) {
  const Json j = parse_json_text(text);
  const LineMap lines(text);
  Reader r(j, "", &lines, UnitSystem::Interface);
  check_header(r, UnitSystem::Interface);
  CommandScript s = script_from_json(r, "script", UnitSystem::Interface, &lines);
  r.finish();
  return s;
}

std::string save_script(const CommandScript& script) {
  Json j = header(UnitSystem::Interface);
  j["script"] = script_to_json(script, UnitSystem::Interface);
  return j.dump(2) + "\n";
}

ModelParameters load_parameters(const std::string& text) {
  const Json j = parse_json_text(text);
  const LineMap lines(text);
  Reader r(j, "", &lines, UnitSystem::Interface);
  check_header(r, UnitSystem::Interface);
  ModelParameters p;
  params_from_json(r, p);
  if (r.has("calibration")) (void)r.raw("calibration");
  r.finish();
  with_field_lines(&lines, "/material", [&] { p.validate(); });
  return p;
}

std::string save_parameters(const ModelParameters& p, const CalibrationReport* rep) {
  Json j = header(UnitSystem::Interface);
  params_to_json(p, UnitSystem::Interface, j);
  if (rep) {
    Json res = Json::array();
    for (const auto& a : rep->residuals)
      res.push_back({{"observable", to_string(a.anchor.observable)},
                     {"condition", to_string(a.anchor.condition)},
                     {"internal_kPa", a.anchor.internal_gauge / 1e3},
                     {"target", a.anchor.value},
                     {"model", a.model_value},
                     {"relative_residual", a.residual}});
    j["calibration"] = {{"objective", rep->objective},
                        {"iterations", rep->iterations},
                        {"starts", rep->starts},
                        {"best_start", rep->best_start},
                        {"converged", rep->converged},
                        {"weighting", rep->weighting},
                        {"residuals", res}};
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- anchors

CalibrationAnchors load_anchors(const std::string& text) {
  const Json j = parse_json_text(text);
  const LineMap lines(text);
  const UnitSystem u = UnitSystem::Interface;
  Reader r(j, "", &lines, u);
  check_header(r, u);
  CalibrationAnchors out;
  const Json& a = r.raw("anchors");
  if (!a.is_array()) r.fail("anchors", "expected an array");
  for (std::size_t i = 0; i < a.size(); ++i) {
    Reader e(a[i], "/anchors/" + std::to_string(i), &lines, u);
    CalibrationAnchor x;
    x.internal_gauge = e.quantity("internal", Q::Pressure, 0.0, true);
    try {
      x.condition = pouch_condition_from_string(e.string("condition", "unjammed"));
      x.observable = observable_from_string(e.string("observable", "", true));
    } catch (const DomainError& err) {
      e.fail(err.field(), err.what());
    }
    x.value = e.number("value", 0.0, true);
    x.displacement = e.quantity("displacement", Q::Length, x.displacement);
    x.beam_length = e.quantity("beam_length", Q::Length, x.beam_length);
    if (!(x.internal_gauge > 0.0)) e.fail("internal_kPa", "must be positive");
    if (!(x.displacement > 0.0) || !(x.beam_length > x.displacement))
      e.fail("displacement_mm", "must be positive and below the beam length");
    e.finish();
    out.anchors.push_back(x);
  }
  r.finish();
  return out;
}

std::string save_anchors(const CalibrationAnchors& a) {
  const UnitSystem u = UnitSystem::Interface;
  Json j = header(u);
  Json arr = Json::array();
  for (const auto& x : a.anchors)
    arr.push_back({{"internal_kPa", encode(x.internal_gauge, unit_of(Q::Pressure, u))},
                   {"condition", to_string(x.condition)},
                   {"observable", to_string(x.observable)},
                   {"value", x.value},
                   {"displacement_mm", encode(x.displacement, unit_of(Q::Length, u))},
                   {"beam_length_mm", encode(x.beam_length, unit_of(Q::Length, u))}});
  j["anchors"] = arr;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- targets

TargetConfiguration load_targets(const std::string& text, std::size_t joint_count) {
  const Json j = parse_json_text(text);
  const LineMap lines(text);
  const UnitSystem u = UnitSystem::Interface;
  Reader r(j, "", &lines, u);
  check_header(r, u);
  const double tol = r.quantity("default_tolerance", Q::Angle, 2.0 * kPi / 180.0);
  TargetConfiguration t = TargetConfiguration::zeros(joint_count, tol);
  const bool drift = r.has(key("drift_tolerance", Q::Angle, u));
  if (drift) t.drift_tolerances.assign(joint_count, r.quantity("drift_tolerance", Q::Angle, tol));
  if (r.has("joints")) {
    const Json& a = r.raw("joints");
    if (!a.is_array()) r.fail("joints", "expected an array");
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < a.size(); ++i) {
      Reader e(a[i], "/joints/" + std::to_string(i), &lines, u);
      const std::size_t jj = e.index("joint");
      if (jj >= joint_count) e.fail("joint", "index beyond the robot's " + std::to_string(joint_count) + " joints");
      if (!seen.insert(jj).second) e.fail("joint", "duplicate joint");
      const bool polar = e.has(key("angle", Q::Angle, u));
      const bool cart = e.has(key("theta_x", Q::Angle, u)) || e.has(key("theta_y", Q::Angle, u));
      if (polar == cart) e.fail("", "give either angle_deg/direction_deg or theta_x_deg/theta_y_deg");
      if (polar) {
        t.angles[jj] = bend_toward(e.quantity("angle", Q::Angle, 0.0), e.quantity("direction", Q::Angle, 0.0));
      } else {
        t.angles[jj] = Vec2(e.quantity("theta_x", Q::Angle, 0.0), e.quantity("theta_y", Q::Angle, 0.0));
      }
      t.tolerances[jj] = e.quantity("tolerance", Q::Angle, tol);
      if (e.has(key("drift_tolerance", Q::Angle, u))) {
        if (t.drift_tolerances.empty()) t.drift_tolerances = t.tolerances;
        t.drift_tolerances[jj] = e.quantity("drift_tolerance", Q::Angle, tol);
      }
      e.finish();
    }
  }
  r.finish();
  try {
    t.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.field(), lines.line_of("/joints"), e.what());
  }
  return t;
}

std::string save_targets(const TargetConfiguration& t) {
  const UnitSystem u = UnitSystem::Interface;
  const Unit a = unit_of(Q::Angle, u);
  Json j = header(u);
  Json arr = Json::array();
  for (std::size_t i = 0; i < t.joint_count(); ++i) {
    Json e = {{"joint", i},
              {"theta_x_deg", encode(t.angles[i].x(), a)},
              {"theta_y_deg", encode(t.angles[i].y(), a)},
              {"tolerance_deg", encode(t.tolerances[i], a)}};
    if (!t.drift_tolerances.empty()) e["drift_tolerance_deg"] = encode(t.drift_tolerances[i], a);
    arr.push_back(e);
  }
  j["joints"] = arr;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- log

std::string log_header_line(const Scenario& s) {
  Scenario bare = s;
  bare.script.clear();
  Json sj = scenario_to_json(bare, UnitSystem::SI);
  sj.erase("script");
  Json j = {{"type", "header"}, {"schema_version", kSchemaVersion}, {"timestamps", "logical"}, {"scenario", sj}};
  return j.dump() + "\n";
}

std::string event_line(const EventRecord& e) {
  Json j = {{"type", "event"},
            {"index", e.index},
            {"timestamp", e.timestamp},
            {"command", command_to_json(e.command, UnitSystem::SI)},
            {"accepted", e.accepted},
            {"reason", e.reason},
            {"detail", e.detail},
            {"state_hash", hash_hex(e.state_hash)}};
  return j.dump() + "\n";
}

std::string save_log(const Session& session) {
  std::string out = log_header_line(session.scenario());
  for (const auto& e : session.log()) out += event_line(e);
  return out;
}

LoadedLog load_log(const std::string& text) {
  LoadedLog out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw ParseError("<record>", n, "malformed JSON record");
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
      throw ParseError("type", n, "record without a type");
    const std::string type = j["type"];
    try {
      if (type == "header") {
        if (have_header) throw ParseError("type", n, "second header");
        Reader r(j, "", nullptr, UnitSystem::SI);
        r.string("type", "");
        const long long v = r.integer("schema_version", -1, true);
        if (v != kSchemaVersion) throw VersionError(static_cast<int>(v), kSchemaVersion);
        r.string("timestamps", "logical");
        Json sj = r.raw("scenario");
        out.scenario = scenario_from_json(sj, UnitSystem::SI, nullptr);
        r.finish();
        have_header = true;
      } else if (type == "event") {
        if (!have_header) throw ParseError("type", n, "event before header");
        Reader r(j, "", nullptr, UnitSystem::SI);
        r.string("type", "");
        EventRecord e;
        e.index = static_cast<std::size_t>(r.integer("index", 0, true));
        e.timestamp = static_cast<std::uint64_t>(r.integer("timestamp", 0, true));
        e.command = command_from_json(r.raw("command"), UnitSystem::SI, nullptr, "/command");
        e.accepted = r.boolean("accepted", false);
        e.reason = r.string("reason", "");
        e.detail = r.string("detail", "");
        e.state_hash = parse_hash_hex(r.string("state_hash", "", true));
        r.finish();
        out.events.push_back(e);
      } else {
        throw ParseError("type", n, "unknown record type '" + type + "'");
      }
    } catch (const ParseError& e) {
      if (e.line() > 0) throw;
      throw ParseError(e.field(), n, e.what());
    } catch (const DomainError& e) {
      throw ParseError(e.field(), n, e.what());
    }
  }
  if (!have_header) throw ParseError("<document>", 1, "log has no header record");
  return out;
}

Session replay_log(const std::string& text) {
  const LoadedLog log = load_log(text);
  Session s(log.scenario);
  for (const auto& e : log.events) {
    const EventRecord r = s.execute(e.command);
    if (r.accepted != e.accepted || r.state_hash != e.state_hash)
      throw Error("replay_mismatch", "event " + std::to_string(e.index) + " diverged on replay (expected " +
                                         hash_hex(e.state_hash) + ", got " + hash_hex(r.state_hash) + ")");
  }
  return s;
}

// ---------------------------------------------------------------- protocol

Json handshake_message() {
  return {{"type", "handshake"},
          {"protocol_version", kProtocolVersion},
          {"schema_version", kSchemaVersion},
          {"message_types", {"command", "state", "error"}},
          {"units", units_block(UnitSystem::Interface)}};
}

Json state_message(const Session& session) {
  const SessionState& s = session.state();
  const Scenario& sc = session.scenario();
  constexpr double deg = 180.0 / kPi;
  Json sections = Json::array();
  for (std::size_t i = 0; i < s.sections.size(); ++i) {
    const auto& x = s.sections[i];
    sections.push_back({{"index", i},
                        {"exposed", i < s.exposed_sections()},
                        {"pouch_kPa", (x.pouch_pressure - kAtmosphericPressure) / 1e3},
                        {"internal_kPa", x.internal_gauge() / 1e3},
                        {"deltaP_kPa", x.jam_pressure() / 1e3},
                        {"jammed", x.jammed()}});
  }
  Json tendons = Json::array();
  for (std::size_t t = 0; t < s.tendons.size(); ++t) {
    Json e = {{"index", t},
              {"mode", s.tendons[t].mode == TendonState::Mode::Tension ? "tension" : "path_length"},
              {"applied_tension_N", t < s.applied_tensions.size() ? s.applied_tensions[t] : 0.0}};
    if (s.tendons[t].mode == TendonState::Mode::Tension) e["tension_N"] = s.tendons[t].value;
    else e["target_length_mm"] = s.tendons[t].value * 1e3;
    tendons.push_back(e);
  }
  Json joints = Json::array();
  for (std::size_t j = 0; j < s.configuration.joint_count(); ++j) {
    const Vec2& th = s.configuration.joint_angles[j];
    joints.push_back({{"index", j},
                      {"theta_x_deg", th.x() * deg},
                      {"theta_y_deg", th.y() * deg},
                      {"angle_deg", th.norm() * deg},
                      {"direction_deg", th.norm() > 0.0 ? bend_direction(th) * deg : 0.0},
                      {"moment_Nm", s.joint_moments[j].norm()},
                      {"wrinkled", static_cast<bool>(s.wrinkled[j])},
                      {"locked", s.owners[j] >= 0}});
  }
  const ChainKinematics ck = chain_kinematics(sc.robot, s.configuration);
  Json segments = Json::array();
  for (const auto& p : ck.segments) {
    Json rot = Json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rot.push_back(p.rotation(r, c));
    segments.push_back({{"origin_mm", {p.origin.x() * 1e3, p.origin.y() * 1e3, p.origin.z() * 1e3}},
                        {"rotation", rot},
                        {"length_mm", p.length * 1e3}});
  }
  return {{"type", "state"},
          {"protocol_version", kProtocolVersion},
          {"log_index", session.log().size()},
          {"state_hash", hash_hex(session.state_hash())},
          {"everted_length_mm", s.everted_length * 1e3},
          {"total_length_mm", sc.robot.total_length() * 1e3},
          {"exposed_sections", s.exposed_sections()},
          {"internal_kPa", sc.internal_gauge / 1e3},
          {"sections", sections},
          {"tendons", tendons},
          {"joints", joints},
          {"segments", segments},
          {"tip_mm", {ck.tip.x() * 1e3, ck.tip.y() * 1e3, ck.tip.z() * 1e3}},
          {"converged", s.converged}};
}

Json error_message(const std::string& reason, const std::string& detail, std::size_t log_index) {
  return {{"type", "error"}, {"protocol_version", kProtocolVersion}, {"reason", reason}, {"detail", detail}, {"log_index", log_index}};
}

// ---------------------------------------------------------------- files

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text, bool force) {
  if (!force && std::filesystem::exists(path))
    throw Error("output_exists", path + " exists (use --force to overwrite)");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot write " + path);
  out << text;
  if (!out) throw Error("io_error", "write failed for " + path);
}

}  // namespace vine
