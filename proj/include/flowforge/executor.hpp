#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowforge/netshape.hpp"
#include "flowforge/scenario.hpp"

namespace flowforge {

enum class WorkloadRole { Attacker, Target, Processing };

struct WorkloadHandle {
  int id = -1;
  std::string name;

  bool valid() const { return id >= 0; }
};

struct CaptureHandle {
  int id = -1;
};

struct ExecResult {
  int exitCode = 0;
  std::string stdoutLog;
  std::string stderrLog;
};

struct ResourceSample {
  double cpuMillicores = 0;
  double memMiB = 0;
};

// Backend-neutral operations the orchestrator drives a scenario through.
// Implementations: the in-process mock backend here, a cluster backend
// elsewhere. Teardown must be idempotent and is always attempted, including
// on failure paths.
class ExecutorContract {
 public:
  virtual ~ExecutorContract() = default;

  virtual WorkloadHandle createWorkload(const HostSpec& spec, WorkloadRole role) = 0;
  // False on probe timeout.
  virtual bool waitReady(const WorkloadHandle& h, const ProbeSpec& probe) = 0;
  virtual void applyShaping(const WorkloadHandle& h, const TcPlan& plan) = 0;
  virtual CaptureHandle startCapture(const WorkloadHandle& h, const std::string& filter) = 0;
  virtual ExecResult execCommand(const WorkloadHandle& h, const std::string& command,
                                 std::optional<Micros> deadline) = 0;
  // Returns the capture as pcap bytes.
  virtual std::vector<std::uint8_t> stopCapture(const CaptureHandle& h) = 0;
  virtual std::string resolveAddress(const WorkloadHandle& h) = 0;
  virtual void teardown(const WorkloadHandle& h) = 0;
  virtual ResourceSample sampleResources(const WorkloadHandle& h) = 0;
};

struct ExecutionReport {
  std::string scenario;
  std::string runId;
  // Phase name -> wall-clock microseconds since epoch. Phases: deploy, ready,
  // capture-start, attack-start, attack-end, collected, processed.
  std::map<std::string, Micros> phases;
  double initTimeSeconds = 0;  // run start to attack-start
  std::map<std::string, ResourceSample> resources;  // per workload, max over run
  std::map<std::string, std::string> capturePaths;  // target -> pcap path
  // "<extractor>/<target>" -> csv path
  std::map<std::string, std::string> flowCsvPaths;
  std::vector<std::string> logPaths;
  bool success = false;
  std::string failureCause;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["runId"] = runId;
    j["phases"] = phases;
    j["initTimeSeconds"] = initTimeSeconds;
    nlohmann::json res = nlohmann::json::object();
    for (const auto& [name, sample] : resources)
      res[name] = {{"cpuMillicores", sample.cpuMillicores}, {"memMiB", sample.memMiB}};
    j["resources"] = res;
    j["artifacts"] = {{"captures", capturePaths},
                      {"flows", flowCsvPaths},
                      {"logs", logPaths}};
    j["outcome"] = success ? "success" : "failure";
    if (!success) j["failureCause"] = failureCause;
    j["warnings"] = warnings;
    return j;
  }
};

}  // namespace flowforge
