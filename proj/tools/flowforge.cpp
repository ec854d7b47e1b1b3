#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flowforge/analyze.hpp"
#include "flowforge/flow.hpp"
#include "flowforge/labeler.hpp"
#include "flowforge/mock_backend.hpp"
#include "flowforge/orchestrator.hpp"
#include "flowforge/pcap.hpp"
#include "flowforge/scenario.hpp"

namespace fs = std::filesystem;
using namespace flowforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitExecution = 2;
constexpr int kExitUsage = 64;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

fs::path default_out_root() {
  if (const char* env = std::getenv("FLOWFORGE_OUT")) return env;
  return "out";
}

std::vector<ProcessingDefinition> load_processing_dir(const fs::path& dir) {
  std::vector<ProcessingDefinition> defs;
  if (dir.empty()) return defs;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".yaml" || ext == ".yml"))
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files)
    defs.push_back(parse_processing_definition(read_text(f)));
  return defs;
}

// Returns nullopt and prints violations when the scenario is invalid.
std::optional<Scenario> load_valid_scenario(const fs::path& path) {
  const Scenario s = parse_scenario(read_text(path));
  const ValidationReport report = validate_scenario(s);
  if (report.empty()) return s;
  for (const auto& v : report)
    std::cerr << path.string() << ": " << v.path << ": [" << v.rule << "] "
              << v.message << "\n";
  return std::nullopt;
}

int cmd_validate(const std::vector<std::string>& paths) {
  bool ok = true;
  for (const auto& p : paths) {
    try {
      if (load_valid_scenario(p)) {
        std::cout << p << ": valid\n";
      } else {
        ok = false;
      }
    } catch (const ScenarioError& e) {
      std::cerr << p << ": " << e.what() << "\n";
      ok = false;
    }
  }
  return ok ? kExitOk : kExitValidation;
}

int cmd_run(const std::vector<std::string>& paths, const fs::path& out, int parallel,
            const std::string& backend, const fs::path& processingDir) {
  if (backend != "mock") {
    std::cerr << "backend '" << backend << "' is not available in this build\n";
    return kExitExecution;
  }
  std::vector<Scenario> scenarios;
  for (const auto& p : paths) {
    auto s = load_valid_scenario(p);
    if (!s) return kExitValidation;
    scenarios.push_back(std::move(*s));
  }
  const auto defs = load_processing_dir(processingDir);
  const auto reports = run_batch(scenarios, parallel, mock_executor_factory(), out, defs);
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << r.scenario << ": " << (r.success ? "success" : "failure");
    if (!r.success) {
      std::cout << " (" << r.failureCause << ")";
      ok = false;
    }
    std::cout << "\n";
  }
  return ok ? kExitOk : kExitExecution;
}

int cmd_repeat(const std::string& path, int n, const fs::path& out,
               const std::string& backend, bool perRunSeeds, std::uint64_t baseSeed) {
  if (backend != "mock") {
    std::cerr << "backend '" << backend << "' is not available in this build\n";
    return kExitExecution;
  }
  auto s = load_valid_scenario(path);
  if (!s) return kExitValidation;
  RepeatOptions ropts;
  ropts.perRunSeeds = perRunSeeds;
  ropts.baseSeed = baseSeed;
  const auto reports = repeat_scenario(*s, n, mock_executor_factory(), out, {}, ropts);

  std::vector<CaptureSummary> summaries;
  for (const auto& r : reports) {
    if (!r.success) {
      std::cerr << r.runId << ": " << r.failureCause << "\n";
      return kExitExecution;
    }
    for (const auto& [target, pcapPath] : r.capturePaths)
      summaries.push_back(summarize_capture(read_packets(read_bytes(pcapPath)).packets));
  }
  for (const auto& [metric, stat] : repetition_stats(summaries))
    std::cout << metric << ": " << format_mean_std(stat) << "\n";
  return kExitOk;
}

int cmd_extract(const std::string& pcapPath, const std::string& mode,
                const fs::path& out) {
  const auto packets = read_packets(read_bytes(pcapPath)).packets;
  const auto flows = mode == "interval" ? assemble_flows_interval(packets)
                                        : assemble_flows_session(packets);
  const std::string csv = write_flow_csv(flows);
  if (out.empty()) std::cout << csv;
  else write_text(out, csv);
  return kExitOk;
}

int cmd_label(const std::string& csvPath, const std::string& scenarioPath,
              const std::string& targetName, const fs::path& out) {
  auto s = load_valid_scenario(scenarioPath);
  if (!s) return kExitValidation;
  const TargetSpec* target = nullptr;
  for (const auto& t : s->targets)
    if (t.host.name == targetName) target = &t;
  if (!target) {
    std::cerr << "no target named '" << targetName << "' in scenario\n";
    return kExitValidation;
  }
  const auto cols = label_columns(merge_labels(s->labels, target->labels));
  Table t = parse_csv(read_text(csvPath));
  for (const auto& [k, v] : cols) t.header.push_back(k);
  for (auto& row : t.rows)
    for (const auto& [k, v] : cols) row.push_back(v);
  const std::string csv = write_csv(t);
  if (out.empty()) std::cout << csv;
  else write_text(out, csv);
  return kExitOk;
}

int cmd_clean(const std::string& csvPath, const fs::path& out) {
  const auto [cleaned, report] = clean_dataset(parse_csv(read_text(csvPath)));
  const std::string csv = write_csv(cleaned);
  if (out.empty()) std::cout << csv;
  else write_text(out, csv);
  std::cerr << "dropped " << report.droppedColumns << " columns, encoded "
            << report.encodedPortColumns << " port columns, removed "
            << report.missingValueRows << " incomplete rows, "
            << report.duplicateRows << " duplicates\n";
  return kExitOk;
}

int cmd_analyze_summary(const std::vector<std::string>& pcaps) {
  for (const auto& p : pcaps) {
    const auto s = summarize_capture(read_packets(read_bytes(p)).packets);
    std::cout << p << ": packets=" << s.packetCount << " bytes=" << s.byteSum
              << " sessionFlows=" << s.sessionFlows
              << " intervalFlows=" << s.intervalFlows << "\n";
  }
  return kExitOk;
}

int cmd_analyze_repstats(const std::vector<std::string>& pcaps) {
  std::vector<CaptureSummary> summaries;
  for (const auto& p : pcaps)
    summaries.push_back(summarize_capture(read_packets(read_bytes(p)).packets));
  for (const auto& [metric, stat] : repetition_stats(summaries))
    std::cout << metric << ": " << format_mean_std(stat) << "\n";
  return kExitOk;
}

int cmd_analyze_dist(const std::vector<std::string>& pcaps, const std::string& feature,
                     int bins, const std::string& format, const fs::path& out) {
  std::vector<std::pair<std::string, std::vector<FlowRecord>>> sets;
  for (const auto& p : pcaps)
    sets.emplace_back(fs::path(p).stem().string(),
                      assemble_flows_session(read_packets(read_bytes(p)).packets));
  const auto dist = feature_distribution(sets, feature, static_cast<std::size_t>(bins));
  const std::string text = format == "json" ? distribution_to_json(dist).dump(2) + "\n"
                                            : distribution_to_csv(dist);
  if (out.empty()) std::cout << text;
  else write_text(out, text);
  return kExitOk;
}

int cmd_analyze_diff(const std::string& a, const std::string& b, bool strict) {
  const auto pa = read_packets(read_bytes(a)).packets;
  const auto pb = read_packets(read_bytes(b)).packets;
  const DiffReport r = packet_diff(pa, pb, strict ? DiffMask{} : default_diff_mask());
  std::cout << diff_to_json(r).dump(2) << "\n";
  return r.mismatched == 0 && r.unpaired == 0 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-driven network traffic generation and labeling pipeline"};
  app.require_subcommand(1);

  std::vector<std::string> scenarioPaths;
  std::string scenarioPath, pcapPath, csvPath, targetName, feature;
  std::string mode = "session", backend = "mock", format = "csv";
  std::string pcapA, pcapB;
  std::vector<std::string> pcapPaths;
  fs::path outPath, processingDir;
  fs::path outRoot = default_out_root();
  int parallel = 1, repetitions = 1, bins = 10;
  bool perRunSeeds = false, strict = false;
  std::uint64_t baseSeed = 0;

  auto* validate = app.add_subcommand("validate", "Check scenario files");
  validate->add_option("scenarios", scenarioPaths)->required();

  auto* run = app.add_subcommand("run", "Execute scenarios");
  run->add_option("scenarios", scenarioPaths)->required();
  run->add_option("--out", outRoot, "Output root directory");
  run->add_option("--parallel", parallel, "Concurrent scenarios");
  run->add_option("--backend", backend)->check(CLI::IsMember({"mock", "cluster"}));
  run->add_option("--processing", processingDir, "Processing definition directory");

  auto* repeat = app.add_subcommand("repeat", "Execute one scenario repeatedly");
  repeat->add_option("scenario", scenarioPath)->required();
  repeat->add_option("-n", repetitions, "Repetitions")->required();
  repeat->add_option("--out", outRoot, "Output root directory");
  repeat->add_option("--backend", backend)->check(CLI::IsMember({"mock", "cluster"}));
  repeat->add_flag("--per-run-seeds", perRunSeeds, "Vary the shaping seed per run");
  repeat->add_option("--base-seed", baseSeed, "First per-run seed");

  auto* extract = app.add_subcommand("extract", "Extract flow records from a capture");
  extract->add_option("pcap", pcapPath)->required();
  extract->add_option("--mode", mode)->check(CLI::IsMember({"session", "interval"}));
  extract->add_option("--out", outPath, "Output CSV (stdout when omitted)");

  auto* label = app.add_subcommand("label", "Append scenario labels to a flow CSV");
  label->add_option("csv", csvPath)->required();
  label->add_option("--scenario", scenarioPath)->required();
  label->add_option("--target", targetName)->required();
  label->add_option("--out", outPath, "Output CSV (stdout when omitted)");

  auto* clean = app.add_subcommand("clean", "Prepare a flow CSV for training");
  clean->add_option("csv", csvPath)->required();
  clean->add_option("--out", outPath, "Output CSV (stdout when omitted)");

  auto* analyze = app.add_subcommand("analyze", "Capture and flow analysis");
  analyze->require_subcommand(1);
  auto* summary = analyze->add_subcommand("summary", "Per-capture counts");
  summary->add_option("pcaps", pcapPaths)->required();
  auto* repstats = analyze->add_subcommand("repstats", "Mean(std) across captures");
  repstats->add_option("pcaps", pcapPaths)->required();
  auto* dist = analyze->add_subcommand("dist", "Feature distribution histogram");
  dist->add_option("pcaps", pcapPaths)->required();
  dist->add_option("--feature", feature)->required();
  dist->add_option("--bins", bins);
  dist->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  dist->add_option("--out", outPath);
  auto* diff = analyze->add_subcommand("diff", "Header-masked packet diff");
  diff->add_option("a", pcapA)->required();
  diff->add_option("b", pcapB)->required();
  diff->add_flag("--strict", strict, "Compare all fields (empty mask)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(scenarioPaths);
    if (*run) return cmd_run(scenarioPaths, outRoot, parallel, backend, processingDir);
    if (*repeat)
      return cmd_repeat(scenarioPath, repetitions, outRoot, backend, perRunSeeds, baseSeed);
    if (*extract) return cmd_extract(pcapPath, mode, outPath);
    if (*label) return cmd_label(csvPath, scenarioPath, targetName, outPath);
    if (*clean) return cmd_clean(csvPath, outPath);
    if (*summary) return cmd_analyze_summary(pcapPaths);
    if (*repstats) return cmd_analyze_repstats(pcapPaths);
    if (*dist) return cmd_analyze_dist(pcapPaths, feature, bins, format, outPath);
    if (*diff) return cmd_analyze_diff(pcapA, pcapB, strict);
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitExecution;
  }
  return kExitUsage;
}
