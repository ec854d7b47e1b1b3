#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "flowforge/executor.hpp"
#include "flowforge/flow.hpp"
#include "flowforge/labeler.hpp"
#include "flowforge/mock_backend.hpp"
#include "flowforge/netshape.hpp"
#include "flowforge/pcap.hpp"
#include "flowforge/scenario.hpp"

namespace flowforge {

namespace fs = std::filesystem;

struct OrchestratorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flow extractors implemented in-process; a processing definition whose name
// matches one of these bypasses the container path entirely.
enum class BuiltinMode { Session, Interval };

inline std::optional<BuiltinMode> builtin_extractor(const std::string& name) {
  if (name == "cicflowmeter") return BuiltinMode::Session;
  if (name == "argus") return BuiltinMode::Interval;
  return std::nullopt;
}

// The default extractor set when no processing definitions are supplied.
inline std::vector<ProcessingDefinition> default_processing_definitions() {
  return {
      {"cicflowmeter", "builtin", "cicflowmeter $INPUT_FILE $OUTPUT_FILE"},
      {"argus", "builtin", "argus $INPUT_FILE $OUTPUT_FILE"},
  };
}

struct ExecuteOptions {
  std::string runId = "run-0";
  // Replaces the scenario's shaping seed, for per-repetition variation.
  std::optional<std::uint64_t> seedOverride;
  FlowConfig flowConfig;
};

namespace orchdetail {

inline Micros wall_now() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OrchestratorError("cannot write " + path.string());
  out << content;
}

inline void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OrchestratorError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OrchestratorError("cannot read " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace orchdetail

// Runs an externally-defined flow extractor against a capture. Builtin names
// run flowkit directly; anything else is dispatched through the executor as a
// processing workload.
inline ExecResult run_external_extractor(const ProcessingDefinition& def,
                                         ExecutorContract& exec, const fs::path& pcapPath,
                                         const fs::path& outPath,
                                         const FlowConfig& cfg = {}) {
  if (auto mode = builtin_extractor(def.name)) {
    const auto bytes = orchdetail::read_file(pcapPath);
    const auto packets = read_packets(bytes).packets;
    const auto flows = *mode == BuiltinMode::Session
                           ? assemble_flows_session(packets, cfg)
                           : assemble_flows_interval(packets, cfg);
    orchdetail::write_file(outPath, write_flow_csv(flows));
    return ExecResult{0, "builtin extractor " + def.name, ""};
  }

  HostSpec host;
  host.name = def.name;
  host.image = def.containerImage;
  WorkloadHandle h = exec.createWorkload(host, WorkloadRole::Processing);
  ExecResult result;
  try {
    const std::string command = substitute_variables(
        def.command,
        {{"INPUT_FILE", pcapPath.string()}, {"OUTPUT_FILE", outPath.string()}});
    result = exec.execCommand(h, command, std::nullopt);
    if (result.exitCode == 0 && !fs::exists(outPath)) {
      result.exitCode = 1;
      result.stderrLog += "\nextractor produced no output file";
    }
  } catch (...) {
    exec.teardown(h);
    throw;
  }
  exec.teardown(h);
  return result;
}

// Drives one scenario through its full lifecycle: deploy, readiness, shaping,
// capture, attack, collect, process, label, report. Teardown runs on every
// path.
inline ExecutionReport execute_scenario(const Scenario& s,
                                        const std::vector<ProcessingDefinition>& defs,
                                        ExecutorContract& exec, const fs::path& outDir,
                                        const ExecuteOptions& opts = {}) {
  using orchdetail::wall_now;
  using orchdetail::write_file;

  ExecutionReport report;
  report.scenario = s.name;
  report.runId = opts.runId;
  const auto run_start = std::chrono::steady_clock::now();

  // Phase stamps must be strictly ordered even when the backend completes
  // phases within the same microsecond.
  Micros last_phase = 0;
  auto mark_phase = [&](const char* name) {
    last_phase = std::max(wall_now(), last_phase + 1);
    report.phases[name] = last_phase;
  };

  fs::create_directories(outDir);
  write_file(outDir / "scenario.yaml", serialize_scenario(s));

  std::vector<WorkloadHandle> created;
  auto teardown_all = [&] {
    for (const auto& h : created) exec.teardown(h);
  };

  auto fail = [&](const std::string& cause) {
    report.success = false;
    report.failureCause = cause;
    teardown_all();
    write_file(outDir / "report.json", report.to_json().dump(2) + "\n");
    return report;
  };

  try {
    // Deploy: all workloads exist before anything runs, so every address is
    // resolvable when capture filters and the attack command are bound.
    std::vector<WorkloadHandle> targetHandles;
    for (const auto& t : s.targets) {
      targetHandles.push_back(exec.createWorkload(t.host, WorkloadRole::Target));
      created.push_back(targetHandles.back());
    }
    const WorkloadHandle attackerHandle =
        exec.createWorkload(s.attacker, WorkloadRole::Attacker);
    created.push_back(attackerHandle);
    mark_phase("deploy");

    for (std::size_t i = 0; i < s.targets.size(); ++i) {
      const ProbeSpec probe = s.targets[i].host.startupProbe.value_or(default_probe());
      if (!exec.waitReady(targetHandles[i], probe))
        return fail("readiness timeout for target '" + s.targets[i].host.name + "'");
    }
    mark_phase("ready");

    // Addresses are stable from here on (readiness gates substitution).
    const std::string attackerIp = exec.resolveAddress(attackerHandle);
    std::vector<std::string> targetIps;
    for (const auto& h : targetHandles) targetIps.push_back(exec.resolveAddress(h));

    std::vector<NetworkConditions> shaped;
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
      NetworkConditions merged = merge_network(s.network, s.targets[i].network);
      if (opts.seedOverride) merged.seed = *opts.seedOverride;
      shaped.push_back(merged);
      exec.applyShaping(targetHandles[i], render_tc_plan(merged, "eth0"));
    }

    std::vector<CaptureHandle> captureHandles;
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
      std::map<std::string, std::string> bindings = {{"ATTACKER_IP", attackerIp},
                                                     {"TARGET_IP", targetIps[i]}};
      const std::string filter = substitute_variables(
          s.targets[i].host.filter.value_or(kDefaultFilter), bindings);
      captureHandles.push_back(exec.startCapture(targetHandles[i], filter));
    }
    mark_phase("capture-start");

    std::map<std::string, std::string> bindings = {{"ATTACKER_IP", attackerIp}};
    if (s.type == Scenario::Type::SingleTarget) {
      bindings["TARGET_IP"] = targetIps[0];
      bindings["TARGET_IP_0"] = targetIps[0];
    } else {
      for (std::size_t i = 0; i < targetIps.size(); ++i)
        bindings["TARGET_IP_" + std::to_string(i)] = targetIps[i];
    }
    const std::string command = substitute_variables(s.attacker.command, bindings);

    mark_phase("attack-start");
    report.initTimeSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start)
            .count();
    const ExecResult attack = exec.execCommand(attackerHandle, command, s.attacker.atkTime);
    mark_phase("attack-end");
    const fs::path attackLog = outDir / "logs" / "attacker.log";
    write_file(attackLog, attack.stdoutLog + attack.stderrLog);
    report.logPaths.push_back(attackLog.string());
    if (attack.exitCode != 0) {
      // The traffic happened regardless; keep collecting and labeling.
      report.warnings.push_back("attack exited with code " +
                                std::to_string(attack.exitCode));
    }

    std::vector<std::vector<std::uint8_t>> captures;
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
      auto bytes = exec.stopCapture(captureHandles[i]);
      const fs::path pcapPath = outDir / "capture" / (s.targets[i].host.name + ".pcap");
      write_file(pcapPath, bytes);
      report.capturePaths[s.targets[i].host.name] = pcapPath.string();
      if (read_packets(bytes).packets.empty())
        report.warnings.push_back("empty capture for target '" +
                                  s.targets[i].host.name + "'");
      captures.push_back(std::move(bytes));
    }
    mark_phase("collected");

    const auto& definitions = defs.empty() ? default_processing_definitions() : defs;
    for (const auto& def : definitions) {
      for (std::size_t i = 0; i < s.targets.size(); ++i) {
        const auto& target = s.targets[i];
        const fs::path csvPath =
            outDir / "flows" / def.name / (target.host.name + ".csv");
        try {
          const ExecResult r = run_external_extractor(
              def, exec, report.capturePaths[target.host.name], csvPath,
              opts.flowConfig);
          if (r.exitCode != 0) {
            report.warnings.push_back("extractor '" + def.name + "' failed on '" +
                                      target.host.name + "': " + r.stderrLog);
            continue;
          }
          // Label in place: parse the extractor's CSV back only for builtin
          // extractors, whose layout we own.
          if (builtin_extractor(def.name)) {
            const auto packets = read_packets(captures[i]).packets;
            const auto flows = builtin_extractor(def.name) == BuiltinMode::Session
                                   ? assemble_flows_session(packets, opts.flowConfig)
                                   : assemble_flows_interval(packets, opts.flowConfig);
            const LabelSet merged = merge_labels(s.labels, target.labels);
            const auto labeled = annotate_flows(
                flows, merged,
                Provenance{s.name, target.host.name, def.name, opts.runId});
            write_file(csvPath, write_flow_csv(labeled.flows));
          }
          report.flowCsvPaths[def.name + "/" + target.host.name] = csvPath.string();
        } catch (const std::exception& e) {
          report.warnings.push_back("extractor '" + def.name + "' failed on '" +
                                    target.host.name + "': " + e.what());
        }
      }
    }
    mark_phase("processed");

    for (const auto& h : created) report.resources[h.name] = exec.sampleResources(h);
  } catch (const std::exception& e) {
    return fail(e.what());
  }

  teardown_all();
  report.success = true;
  write_file(outDir / "report.json", report.to_json().dump(2) + "\n");
  return report;
}

// Factory so each scenario run gets its own executor instance.
using ExecutorFactory =
    std::function<std::unique_ptr<ExecutorContract>(const Scenario&)>;

inline ExecutorFactory mock_executor_factory(MockScript script = {}) {
  return [script](const Scenario&) { return std::make_unique<MockExecutor>(script); };
}

// Executes scenarios with at most `parallelism` in flight. Failures never
// abort siblings; each scenario owns an isolated directory named after it.
inline std::vector<ExecutionReport> run_batch(const std::vector<Scenario>& scenarios,
                                              int parallelism,
                                              const ExecutorFactory& factory,
                                              const fs::path& outRoot,
                                              const std::vector<ProcessingDefinition>& defs = {},
                                              const ExecuteOptions& opts = {}) {
  if (parallelism < 1) throw OrchestratorError("parallelism must be >= 1");

  std::vector<ExecutionReport> reports(scenarios.size());
  std::mutex mu;
  std::size_t next = 0;

  auto worker = [&] {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard lock(mu);
        if (next >= scenarios.size()) return;
        idx = next++;
      }
      const Scenario& s = scenarios[idx];
      ExecutionReport report;
      try {
        auto exec = factory(s);
        report = execute_scenario(s, defs, *exec, outRoot / s.name, opts);
      } catch (const std::exception& e) {
        report.scenario = s.name;
        report.success = false;
        report.failureCause = e.what();
      }
      std::lock_guard lock(mu);
      reports[idx] = std::move(report);
    }
  };

  const int threads = std::min<int>(parallelism, static_cast<int>(scenarios.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < std::max(threads, 1); ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream summary;
  summary << "scenario,outcome,initTimeSeconds,failureCause\n";
  for (const auto& r : reports) {
    summary << r.scenario << ',' << (r.success ? "success" : "failure") << ','
            << r.initTimeSeconds << ',' << flowdetail::csv_escape(r.failureCause)
            << '\n';
  }
  orchdetail::write_file(outRoot / "summary.csv", summary.str());
  return reports;
}

struct RepeatOptions {
  // When true, repetition k runs with shaping seed baseSeed + k; otherwise
  // every repetition uses the scenario's own seed.
  bool perRunSeeds = false;
  std::uint64_t baseSeed = 0;
  FlowConfig flowConfig;
};

// n independent executions with distinct run ids under
// outRoot/<scenario>/rep-<k>.
inline std::vector<ExecutionReport> repeat_scenario(const Scenario& s, int n,
                                                    const ExecutorFactory& factory,
                                                    const fs::path& outRoot,
                                                    const std::vector<ProcessingDefinition>& defs = {},
                                                    const RepeatOptions& ropts = {}) {
  if (n < 1) throw OrchestratorError("repetitions must be >= 1");
  std::vector<ExecutionReport> reports;
  for (int k = 0; k < n; ++k) {
    ExecuteOptions opts;
    opts.runId = "rep-" + std::to_string(k);
    opts.flowConfig = ropts.flowConfig;
    if (ropts.perRunSeeds) opts.seedOverride = ropts.baseSeed + static_cast<std::uint64_t>(k);
    auto exec = factory(s);
    reports.push_back(
        execute_scenario(s, defs, *exec, outRoot / s.name / opts.runId, opts));
  }
  return reports;
}

}  // namespace flowforge
