#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "flowforge/units.hpp"

namespace flowforge {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnresolvedVariable : std::runtime_error {
  explicit UnresolvedVariable(const std::string& name)
      : std::runtime_error("unresolved variable $" + name), variable(name) {}
  std::string variable;
};

// ---------------------------------------------------------------------------
// Variable substitution ($VAR templates)
// ---------------------------------------------------------------------------

namespace scenariodetail {
inline bool ident_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         c == '_';
}
}  // namespace scenariodetail

// Variable names in a template are maximal $IDENT runs. Taking the whole run
// means $TARGET_IP_1 is never mangled by a $TARGET_IP binding.
inline std::vector<std::string> find_variables(const std::string& tmpl) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '$') continue;
    std::size_t j = i + 1;
    while (j < tmpl.size() && scenariodetail::ident_char(tmpl[j])) ++j;
    if (j > i + 1) out.push_back(tmpl.substr(i + 1, j - i - 1));
    i = j - 1;
  }
  return out;
}

inline std::string substitute_variables(const std::string& tmpl,
                                        const std::map<std::string, std::string>& bindings) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '$') {
      out += tmpl[i];
      continue;
    }
    std::size_t j = i + 1;
    while (j < tmpl.size() && scenariodetail::ident_char(tmpl[j])) ++j;
    if (j == i + 1) {
      out += '$';
      continue;
    }
    const std::string name = tmpl.substr(i + 1, j - i - 1);
    auto it = bindings.find(name);
    if (it == bindings.end()) throw UnresolvedVariable(name);
    out += it->second;
    i = j - 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct ProbeSpec {
  enum class Kind { TcpPort, ExecCommand, FixedDelay };
  Kind kind = Kind::FixedDelay;
  std::uint16_t port = 0;       // tcp-port
  std::string command;          // exec-command
  Micros delay = 0;             // fixed-delay
  Micros timeout = 30 * kMicrosPerSecond;
  Micros interval = 1 * kMicrosPerSecond;

  bool operator==(const ProbeSpec&) const = default;
};

// Fallback when a target declares no probe: a short fixed settle delay.
inline ProbeSpec default_probe() {
  ProbeSpec p;
  p.kind = ProbeSpec::Kind::FixedDelay;
  p.delay = 2 * kMicrosPerSecond;
  return p;
}

struct HostSpec {
  std::string name;
  std::string image;
  std::string command;  // atkCommand, attacker only
  std::optional<Micros> atkTime;
  std::optional<std::string> filter;  // target only
  std::optional<ProbeSpec> startupProbe;
  bool privileged = false;
  std::optional<std::int64_t> cpuRequest, cpuLimit;  // millicores
  std::optional<std::int64_t> memRequest, memLimit;  // bytes

  bool operator==(const HostSpec&) const = default;
};

inline constexpr const char* kDefaultFilter =
    "host $ATTACKER_IP and host $TARGET_IP and not arp";

struct NetworkConditions {
  std::optional<std::uint64_t> bandwidth;  // bits/s
  std::optional<Micros> queueSize;
  std::optional<std::int64_t> limit;  // packets
  std::optional<Micros> delay;
  std::optional<Micros> jitter;
  std::optional<std::string> distribution;
  std::optional<double> loss, corrupt, duplicate;  // percent
  std::optional<std::uint64_t> seed;

  bool operator==(const NetworkConditions&) const = default;

  // Documented defaults for every absent field.
  std::uint64_t effective_bandwidth() const { return bandwidth.value_or(0); }  // 0 = unlimited
  Micros effective_queue_size() const { return queueSize.value_or(100'000); }
  std::int64_t effective_limit() const { return limit.value_or(10'000); }
  Micros effective_delay() const { return delay.value_or(0); }
  Micros effective_jitter() const { return jitter.value_or(0); }
  std::string effective_distribution() const { return distribution.value_or("normal"); }
  double effective_loss() const { return loss.value_or(0); }
  double effective_corrupt() const { return corrupt.value_or(0); }
  double effective_duplicate() const { return duplicate.value_or(0); }
  std::uint64_t effective_seed() const { return seed.value_or(0); }

  bool is_all_default() const {
    return effective_bandwidth() == 0 && effective_delay() == 0 &&
           effective_jitter() == 0 && effective_loss() == 0 &&
           effective_corrupt() == 0 && effective_duplicate() == 0;
  }
};

// Per-target values win field-wise over the global block.
inline NetworkConditions merge_network(const NetworkConditions& global,
                                       const std::optional<NetworkConditions>& per_target) {
  if (!per_target) return global;
  NetworkConditions out = global;
  const NetworkConditions& t = *per_target;
  if (t.bandwidth) out.bandwidth = t.bandwidth;
  if (t.queueSize) out.queueSize = t.queueSize;
  if (t.limit) out.limit = t.limit;
  if (t.delay) out.delay = t.delay;
  if (t.jitter) out.jitter = t.jitter;
  if (t.distribution) out.distribution = t.distribution;
  if (t.loss) out.loss = t.loss;
  if (t.corrupt) out.corrupt = t.corrupt;
  if (t.duplicate) out.duplicate = t.duplicate;
  if (t.seed) out.seed = t.seed;
  return out;
}

struct LabelSet {
  std::optional<std::int64_t> label;
  std::optional<std::string> category, subcategory, scenario;
  std::map<std::string, std::string> extra;

  bool operator==(const LabelSet&) const = default;
};

struct TargetSpec {
  HostSpec host;
  std::optional<NetworkConditions> network;
  std::optional<LabelSet> labels;

  bool operator==(const TargetSpec&) const = default;
};

struct Scenario {
  enum class Type { SingleTarget, MultiTarget };
  Type type = Type::SingleTarget;
  std::string name;
  HostSpec attacker;
  std::vector<TargetSpec> targets;
  NetworkConditions network;
  LabelSet labels;

  bool operator==(const Scenario&) const = default;
};

struct ProcessingDefinition {
  std::string name;
  std::string containerImage;
  std::string command;  // must contain $INPUT_FILE and $OUTPUT_FILE exactly once

  bool operator==(const ProcessingDefinition&) const = default;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace scenariodetail {

inline std::string at(const YAML::Node& n) {
  if (n.Mark().line < 0) return "";
  return " (line " + std::to_string(n.Mark().line + 1) + ")";
}

inline void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                       const std::string& path) {
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ScenarioError("unknown field '" + path + key + "'" + at(kv.first));
  }
}

inline std::string scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar())
    throw ScenarioError("expected a scalar at '" + path + "'" + at(n));
  return n.as<std::string>();
}

inline std::int64_t as_int(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<std::int64_t>();
  } catch (const YAML::Exception&) {
    throw ScenarioError("expected an integer at '" + path + "'" + at(n));
  }
}

inline bool as_bool(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw ScenarioError("expected a boolean at '" + path + "'" + at(n));
  }
}

template <typename Fn>
auto parsed(Fn&& fn, const YAML::Node& n, const std::string& path)
    -> decltype(fn(std::string{})) {
  try {
    return fn(scalar(n, path));
  } catch (const ParseError& e) {
    throw ScenarioError(std::string(e.what()) + " at '" + path + "'" + at(n));
  }
}

inline ProbeSpec parse_probe(const YAML::Node& node, const std::string& path) {
  check_keys(node, {"kind", "port", "command", "delay", "timeout", "interval"}, path + ".");
  ProbeSpec p;
  const std::string kind = scalar(node["kind"], path + ".kind");
  if (kind == "tcp-port") {
    p.kind = ProbeSpec::Kind::TcpPort;
    if (!node["port"]) throw ScenarioError("missing field '" + path + ".port'");
    p.port = static_cast<std::uint16_t>(as_int(node["port"], path + ".port"));
  } else if (kind == "exec-command") {
    p.kind = ProbeSpec::Kind::ExecCommand;
    if (!node["command"]) throw ScenarioError("missing field '" + path + ".command'");
    p.command = scalar(node["command"], path + ".command");
  } else if (kind == "fixed-delay") {
    p.kind = ProbeSpec::Kind::FixedDelay;
    if (!node["delay"]) throw ScenarioError("missing field '" + path + ".delay'");
    p.delay = parsed(parse_duration, node["delay"], path + ".delay");
  } else {
    throw ScenarioError("unknown probe kind '" + kind + "' at '" + path + "'");
  }
  if (node["timeout"]) p.timeout = parsed(parse_duration, node["timeout"], path + ".timeout");
  if (node["interval"])
    p.interval = parsed(parse_duration, node["interval"], path + ".interval");
  return p;
}

inline void parse_host_common(const YAML::Node& node, HostSpec& h, const std::string& path) {
  if (!node["name"]) throw ScenarioError("missing required field '" + path + ".name'");
  if (!node["image"]) throw ScenarioError("missing required field '" + path + ".image'");
  h.name = scalar(node["name"], path + ".name");
  h.image = scalar(node["image"], path + ".image");
  if (node["privileged"]) h.privileged = as_bool(node["privileged"], path + ".privileged");
  if (node["cpuRequest"]) h.cpuRequest = parsed(parse_cpu, node["cpuRequest"], path + ".cpuRequest");
  if (node["cpuLimit"]) h.cpuLimit = parsed(parse_cpu, node["cpuLimit"], path + ".cpuLimit");
  if (node["memRequest"]) h.memRequest = parsed(parse_memory, node["memRequest"], path + ".memRequest");
  if (node["memLimit"]) h.memLimit = parsed(parse_memory, node["memLimit"], path + ".memLimit");
}

inline HostSpec parse_attacker(const YAML::Node& node) {
  check_keys(node,
             {"name", "image", "atkCommand", "atkTime", "privileged", "cpuRequest",
              "cpuLimit", "memRequest", "memLimit"},
             "attacker.");
  HostSpec h;
  parse_host_common(node, h, "attacker");
  if (node["atkCommand"]) h.command = scalar(node["atkCommand"], "attacker.atkCommand");
  if (node["atkTime"]) h.atkTime = parsed(parse_duration, node["atkTime"], "attacker.atkTime");
  return h;
}

inline NetworkConditions parse_network(const YAML::Node& node, const std::string& path);
inline LabelSet parse_labels(const YAML::Node& node, const std::string& path);

inline TargetSpec parse_target(const YAML::Node& node, const std::string& path) {
  check_keys(node,
             {"name", "image", "filter", "startupProbe", "privileged", "cpuRequest",
              "cpuLimit", "memRequest", "memLimit", "network", "labels"},
             path + ".");
  TargetSpec t;
  parse_host_common(node, t.host, path);
  if (node["filter"]) t.host.filter = scalar(node["filter"], path + ".filter");
  if (node["startupProbe"])
    t.host.startupProbe = parse_probe(node["startupProbe"], path + ".startupProbe");
  if (node["network"]) t.network = parse_network(node["network"], path + ".network");
  if (node["labels"]) t.labels = parse_labels(node["labels"], path + ".labels");
  return t;
}

inline NetworkConditions parse_network(const YAML::Node& node, const std::string& path) {
  check_keys(node,
             {"bandwidth", "queueSize", "limit", "delay", "jitter", "distribution",
              "loss", "corrupt", "duplicate", "seed"},
             path + ".");
  NetworkConditions c;
  if (node["bandwidth"]) c.bandwidth = parsed(parse_rate, node["bandwidth"], path + ".bandwidth");
  if (node["queueSize"]) c.queueSize = parsed(parse_duration, node["queueSize"], path + ".queueSize");
  if (node["limit"]) c.limit = as_int(node["limit"], path + ".limit");
  if (node["delay"]) c.delay = parsed(parse_duration, node["delay"], path + ".delay");
  if (node["jitter"]) c.jitter = parsed(parse_duration, node["jitter"], path + ".jitter");
  if (node["distribution"]) c.distribution = scalar(node["distribution"], path + ".distribution");
  if (node["loss"]) c.loss = parsed(parse_percent, node["loss"], path + ".loss");
  if (node["corrupt"]) c.corrupt = parsed(parse_percent, node["corrupt"], path + ".corrupt");
  if (node["duplicate"]) c.duplicate = parsed(parse_percent, node["duplicate"], path + ".duplicate");
  if (node["seed"]) c.seed = static_cast<std::uint64_t>(as_int(node["seed"], path + ".seed"));
  return c;
}

inline LabelSet parse_labels(const YAML::Node& node, const std::string& path) {
  LabelSet l;
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const std::string p = path + "." + key;
    if (key == "label") l.label = as_int(kv.second, p);
    else if (key == "category") l.category = scalar(kv.second, p);
    else if (key == "subcategory") l.subcategory = scalar(kv.second, p);
    else if (key == "scenario") l.scenario = scalar(kv.second, p);
    else l.extra[key] = scalar(kv.second, p);
  }
  return l;
}

}  // namespace scenariodetail

inline Scenario parse_scenario(const std::string& text) {
  using namespace scenariodetail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(std::string("scenario syntax error: ") + e.what());
  }
  if (!root.IsMap()) throw ScenarioError("scenario document must be a mapping");
  check_keys(root, {"type", "name", "attacker", "target", "targets", "network", "labels"},
             "");

  Scenario s;
  if (root["type"]) {
    const std::string type = scalar(root["type"], "type");
    if (type == "single-target") s.type = Scenario::Type::SingleTarget;
    else if (type == "multi-target") s.type = Scenario::Type::MultiTarget;
    else throw ScenarioError("unknown scenario type '" + type + "'");
  }
  if (!root["attacker"]) throw ScenarioError("missing required field 'attacker'");
  s.attacker = parse_attacker(root["attacker"]);

  if (root["target"] && root["targets"])
    throw ScenarioError("'target' and 'targets' are mutually exclusive");
  if (root["target"]) {
    s.targets.push_back(parse_target(root["target"], "target"));
  } else if (root["targets"]) {
    const YAML::Node list = root["targets"];
    if (!list.IsSequence()) throw ScenarioError("'targets' must be a sequence");
    for (std::size_t i = 0; i < list.size(); ++i)
      s.targets.push_back(parse_target(list[i], "targets[" + std::to_string(i) + "]"));
  } else {
    throw ScenarioError("missing required field 'target'");
  }

  if (root["network"]) s.network = parse_network(root["network"], "network");
  if (root["labels"]) s.labels = parse_labels(root["labels"], "labels");
  // A scenario without an explicit name is named after its attacker.
  s.name = root["name"] ? scalar(root["name"], "name") : s.attacker.name;
  return s;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string path;
  std::string rule;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

namespace scenariodetail {

inline bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
  return true;
}

inline void check_percent(ValidationReport& r, const std::string& path,
                          std::optional<double> v) {
  if (v && (*v < 0 || *v > 100))
    r.push_back({path, "percentage-range",
                 "value " + std::to_string(*v) + " outside [0,100]"});
}

inline void validate_network(ValidationReport& r, const NetworkConditions& c,
                             const std::string& path) {
  check_percent(r, path + ".loss", c.loss);
  check_percent(r, path + ".corrupt", c.corrupt);
  check_percent(r, path + ".duplicate", c.duplicate);
  if (c.effective_delay() == 0 && c.effective_jitter() != 0)
    r.push_back({path + ".jitter", "jitter-needs-delay", "jitter set while delay is 0"});
  if (c.limit && *c.limit < 0)
    r.push_back({path + ".limit", "limit-nonnegative", "limit must be >= 0"});
  if (c.distribution) {
    static const std::set<std::string> kinds = {"uniform", "normal", "pareto",
                                                "paretonormal"};
    if (!kinds.count(*c.distribution))
      r.push_back({path + ".distribution", "known-distribution",
                   "unknown distribution '" + *c.distribution + "'"});
  }
}

inline void validate_host(ValidationReport& r, const HostSpec& h, const std::string& path) {
  if (!valid_identifier(h.name))
    r.push_back({path + ".name", "identifier", "name must match [a-z0-9-]+"});
  if (h.image.empty())
    r.push_back({path + ".image", "non-empty", "image must be non-empty"});
  if (h.cpuRequest && h.cpuLimit && *h.cpuRequest > *h.cpuLimit)
    r.push_back({path + ".cpuRequest", "request-le-limit", "cpuRequest exceeds cpuLimit"});
  if (h.memRequest && h.memLimit && *h.memRequest > *h.memLimit)
    r.push_back({path + ".memRequest", "request-le-limit", "memRequest exceeds memLimit"});
  if (h.atkTime && *h.atkTime <= 0)
    r.push_back({path + ".atkTime", "positive-duration", "atkTime must be positive"});
  if (h.startupProbe) {
    if (h.startupProbe->timeout <= 0)
      r.push_back({path + ".startupProbe.timeout", "positive-duration",
                   "probe timeout must be positive"});
    if (h.startupProbe->interval <= 0)
      r.push_back({path + ".startupProbe.interval", "positive-duration",
                   "probe interval must be positive"});
  }
}

}  // namespace scenariodetail

inline ValidationReport validate_scenario(const Scenario& s) {
  using namespace scenariodetail;
  ValidationReport r;

  validate_host(r, s.attacker, "attacker");
  if (s.type == Scenario::Type::SingleTarget && s.targets.size() != 1)
    r.push_back({"targets", "single-target-count",
                 "single-target scenarios need exactly one target"});
  if (s.targets.empty())
    r.push_back({"targets", "target-count", "at least one target required"});

  std::set<std::string> names;
  for (std::size_t i = 0; i < s.targets.size(); ++i) {
    const std::string path = "targets[" + std::to_string(i) + "]";
    validate_host(r, s.targets[i].host, path);
    if (!names.insert(s.targets[i].host.name).second)
      r.push_back({path + ".name", "unique-target-name",
                   "duplicate target name '" + s.targets[i].host.name + "'"});
    if (s.targets[i].network) {
      validate_network(r, *s.targets[i].network, path + ".network");
      validate_network(r, merge_network(s.network, s.targets[i].network),
                       path + ".network(effective)");
    }
  }
  validate_network(r, s.network, "network");

  // Every $VAR in the attack command must be resolvable from this scenario.
  std::set<std::string> resolvable = {"ATTACKER_IP"};
  if (s.type == Scenario::Type::SingleTarget) {
    resolvable.insert("TARGET_IP");
    resolvable.insert("TARGET_IP_0");
  } else {
    for (std::size_t i = 0; i < s.targets.size(); ++i)
      resolvable.insert("TARGET_IP_" + std::to_string(i));
  }
  for (const std::string& var : find_variables(s.attacker.command)) {
    if (!resolvable.count(var))
      r.push_back({"attacker.atkCommand", "resolvable-variable",
                   "unresolvable variable $" + var});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialization (round-trip stable)
// ---------------------------------------------------------------------------

namespace scenariodetail {

inline void emit_host_common(YAML::Emitter& out, const HostSpec& h) {
  out << YAML::Key << "name" << YAML::Value << h.name;
  out << YAML::Key << "image" << YAML::Value << h.image;
}

inline void emit_resources(YAML::Emitter& out, const HostSpec& h) {
  if (h.privileged) out << YAML::Key << "privileged" << YAML::Value << true;
  if (h.cpuRequest) out << YAML::Key << "cpuRequest" << YAML::Value << format_cpu(*h.cpuRequest);
  if (h.memRequest) out << YAML::Key << "memRequest" << YAML::Value << format_memory(*h.memRequest);
  if (h.cpuLimit) out << YAML::Key << "cpuLimit" << YAML::Value << format_cpu(*h.cpuLimit);
  if (h.memLimit) out << YAML::Key << "memLimit" << YAML::Value << format_memory(*h.memLimit);
}

inline void emit_probe(YAML::Emitter& out, const ProbeSpec& p) {
  out << YAML::BeginMap;
  switch (p.kind) {
    case ProbeSpec::Kind::TcpPort:
      out << YAML::Key << "kind" << YAML::Value << "tcp-port";
      out << YAML::Key << "port" << YAML::Value << p.port;
      break;
    case ProbeSpec::Kind::ExecCommand:
      out << YAML::Key << "kind" << YAML::Value << "exec-command";
      out << YAML::Key << "command" << YAML::Value << p.command;
      break;
    case ProbeSpec::Kind::FixedDelay:
      out << YAML::Key << "kind" << YAML::Value << "fixed-delay";
      out << YAML::Key << "delay" << YAML::Value << format_duration(p.delay);
      break;
  }
  out << YAML::Key << "timeout" << YAML::Value << format_duration(p.timeout);
  out << YAML::Key << "interval" << YAML::Value << format_duration(p.interval);
  out << YAML::EndMap;
}

inline void emit_network(YAML::Emitter& out, const NetworkConditions& c) {
  out << YAML::BeginMap;
  if (c.bandwidth) out << YAML::Key << "bandwidth" << YAML::Value << format_rate(*c.bandwidth);
  if (c.queueSize) out << YAML::Key << "queueSize" << YAML::Value << format_duration(*c.queueSize);
  if (c.limit) out << YAML::Key << "limit" << YAML::Value << *c.limit;
  if (c.delay) out << YAML::Key << "delay" << YAML::Value << format_duration(*c.delay);
  if (c.jitter) out << YAML::Key << "jitter" << YAML::Value << format_duration(*c.jitter);
  if (c.distribution) out << YAML::Key << "distribution" << YAML::Value << *c.distribution;
  if (c.loss) out << YAML::Key << "loss" << YAML::Value << format_percent(*c.loss);
  if (c.corrupt) out << YAML::Key << "corrupt" << YAML::Value << format_percent(*c.corrupt);
  if (c.duplicate) out << YAML::Key << "duplicate" << YAML::Value << format_percent(*c.duplicate);
  if (c.seed) out << YAML::Key << "seed" << YAML::Value << *c.seed;
  out << YAML::EndMap;
}

inline void emit_labels(YAML::Emitter& out, const LabelSet& l) {
  out << YAML::BeginMap;
  if (l.label) out << YAML::Key << "label" << YAML::Value << *l.label;
  if (l.category) out << YAML::Key << "category" << YAML::Value << *l.category;
  if (l.subcategory) out << YAML::Key << "subcategory" << YAML::Value << *l.subcategory;
  if (l.scenario) out << YAML::Key << "scenario" << YAML::Value << *l.scenario;
  for (const auto& [k, v] : l.extra) out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap;
}

inline void emit_target(YAML::Emitter& out, const TargetSpec& t) {
  out << YAML::BeginMap;
  emit_host_common(out, t.host);
  if (t.host.filter) out << YAML::Key << "filter" << YAML::Value << *t.host.filter;
  if (t.host.startupProbe) {
    out << YAML::Key << "startupProbe" << YAML::Value;
    emit_probe(out, *t.host.startupProbe);
  }
  emit_resources(out, t.host);
  if (t.network) {
    out << YAML::Key << "network" << YAML::Value;
    emit_network(out, *t.network);
  }
  if (t.labels) {
    out << YAML::Key << "labels" << YAML::Value;
    emit_labels(out, *t.labels);
  }
  out << YAML::EndMap;
}

}  // namespace scenariodetail

inline std::string serialize_scenario(const Scenario& s) {
  using namespace scenariodetail;
  YAML::Emitter out;
  out << YAML::BeginMap;
  if (s.type == Scenario::Type::MultiTarget)
    out << YAML::Key << "type" << YAML::Value << "multi-target";
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "attacker" << YAML::Value << YAML::BeginMap;
  emit_host_common(out, s.attacker);
  if (!s.attacker.command.empty())
    out << YAML::Key << "atkCommand" << YAML::Value << s.attacker.command;
  if (s.attacker.atkTime)
    out << YAML::Key << "atkTime" << YAML::Value << format_duration(*s.attacker.atkTime);
  emit_resources(out, s.attacker);
  out << YAML::EndMap;

  if (s.type == Scenario::Type::SingleTarget && s.targets.size() == 1) {
    out << YAML::Key << "target" << YAML::Value;
    emit_target(out, s.targets[0]);
  } else {
    out << YAML::Key << "targets" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : s.targets) emit_target(out, t);
    out << YAML::EndSeq;
  }

  out << YAML::Key << "network" << YAML::Value;
  emit_network(out, s.network);
  out << YAML::Key << "labels" << YAML::Value;
  emit_labels(out, s.labels);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Processing definitions
// ---------------------------------------------------------------------------

inline ProcessingDefinition parse_processing_definition(const std::string& text) {
  using namespace scenariodetail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(std::string("processing definition syntax error: ") + e.what());
  }
  if (!root.IsMap()) throw ScenarioError("processing definition must be a mapping");
  check_keys(root, {"name", "containerImage", "command"}, "");
  ProcessingDefinition d;
  if (!root["name"]) throw ScenarioError("missing required field 'name'");
  if (!root["containerImage"]) throw ScenarioError("missing required field 'containerImage'");
  if (!root["command"]) throw ScenarioError("missing required field 'command'");
  d.name = scalar(root["name"], "name");
  d.containerImage = scalar(root["containerImage"], "containerImage");
  d.command = scalar(root["command"], "command");

  auto count_of = [&](const std::string& var) {
    std::size_t n = 0;
    for (const auto& v : find_variables(d.command))
      if (v == var) ++n;
    return n;
  };
  if (count_of("INPUT_FILE") != 1)
    throw ScenarioError("command must contain $INPUT_FILE exactly once");
  if (count_of("OUTPUT_FILE") != 1)
    throw ScenarioError("command must contain $OUTPUT_FILE exactly once");
  return d;
}

inline std::string serialize_processing_definition(const ProcessingDefinition& d) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << d.name;
  out << YAML::Key << "containerImage" << YAML::Value << d.containerImage;
  out << YAML::Key << "command" << YAML::Value << d.command;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace flowforge
