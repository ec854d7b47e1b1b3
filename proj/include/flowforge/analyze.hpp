#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowforge/flow.hpp"
#include "flowforge/packet.hpp"

namespace flowforge {

struct AnalyzeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Capture summaries
// ---------------------------------------------------------------------------

struct CaptureSummary {
  std::size_t packetCount = 0;
  std::uint64_t byteSum = 0;  // raw on-wire bytes
  std::size_t sessionFlows = 0;
  std::size_t intervalFlows = 0;

  bool operator==(const CaptureSummary&) const = default;

  std::map<std::string, double> metrics() const {
    return {{"packetCount", static_cast<double>(packetCount)},
            {"byteSum", static_cast<double>(byteSum)},
            {"sessionFlows", static_cast<double>(sessionFlows)},
            {"intervalFlows", static_cast<double>(intervalFlows)}};
  }
};

inline CaptureSummary summarize_capture(const std::vector<Packet>& packets,
                                        const FlowConfig& cfg = {}) {
  CaptureSummary s;
  s.packetCount = packets.size();
  for (const Packet& p : packets) s.byteSum += p.rawLen;
  s.sessionFlows = assemble_flows_session(packets, cfg).size();
  s.intervalFlows = assemble_flows_interval(packets, cfg).size();
  return s;
}

// ---------------------------------------------------------------------------
// Repetition statistics
// ---------------------------------------------------------------------------

struct RepStat {
  double mean = 0;
  double std = 0;
};

inline std::string format_mean_std(const RepStat& r) {
  auto fmt = [](double v) {
    if (v == static_cast<double>(static_cast<std::int64_t>(v)) && std::abs(v) < 1e15)
      return std::to_string(static_cast<std::int64_t>(v));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  return fmt(r.mean) + "(" + fmt(r.std) + ")";
}

// Population mean and std per metric across repeated runs.
inline std::map<std::string, RepStat> repetition_stats(
    const std::vector<CaptureSummary>& summaries) {
  if (summaries.empty()) throw AnalyzeError("repetition_stats needs at least one summary");
  std::map<std::string, std::vector<double>> series;
  for (const auto& s : summaries)
    for (const auto& [name, v] : s.metrics()) series[name].push_back(v);

  std::map<std::string, RepStat> out;
  for (const auto& [name, xs] : series) {
    const auto st = flowdetail::population_stats(xs);
    out[name] = RepStat{st.mean, st.std};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature distributions
// ---------------------------------------------------------------------------

struct DistributionStats {
  double min = 0, max = 0, mean = 0, std = 0;
  double q1 = 0, median = 0, q3 = 0;
};

struct FeatureDistribution {
  std::string feature;
  std::vector<double> binEdges;  // size bins+1, shared across all sets
  // insertion order of the input preserved
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::size_t>> counts;
  std::map<std::string, DistributionStats> stats;
};

namespace analyzedetail {

// Linear-interpolation quantile over a sorted sample.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace analyzedetail

// Histograms one feature across named flow sets with a shared bin grid, so the
// outputs are directly comparable.
inline FeatureDistribution feature_distribution(
    const std::vector<std::pair<std::string, std::vector<FlowRecord>>>& flowSets,
    const std::string& feature, std::size_t bins = 10) {
  if (bins == 0) throw AnalyzeError("bins must be positive");
  const auto& names = feature_names();
  const auto it = std::find(names.begin(), names.end(), feature);
  if (it == names.end()) throw AnalyzeError("unknown feature '" + feature + "'");
  const std::size_t fidx = static_cast<std::size_t>(it - names.begin());

  FeatureDistribution out;
  out.feature = feature;

  std::map<std::string, std::vector<double>> values;
  double lo = 0, hi = 0;
  bool any = false;
  for (const auto& [name, flows] : flowSets) {
    out.names.push_back(name);
    auto& xs = values[name];
    for (const auto& f : flows) {
      xs.push_back(f.features[fidx]);
      if (!any || xs.back() < lo) lo = any ? std::min(lo, xs.back()) : xs.back();
      if (!any || xs.back() > hi) hi = any ? std::max(hi, xs.back()) : xs.back();
      any = true;
    }
  }
  if (!any) lo = hi = 0;
  if (lo == hi) hi = lo + 1;  // degenerate range still gets one occupied bin

  out.binEdges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    out.binEdges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);

  for (const auto& name : out.names) {
    auto& xs = values[name];
    auto& hist = out.counts[name];
    hist.assign(bins, 0);
    for (double x : xs) {
      std::size_t b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
      if (b >= bins) b = bins - 1;  // right edge inclusive
      ++hist[b];
    }
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const auto st = flowdetail::population_stats(xs);
    DistributionStats d;
    if (!sorted.empty()) {
      d.min = sorted.front();
      d.max = sorted.back();
    }
    d.mean = st.mean;
    d.std = st.std;
    d.q1 = analyzedetail::quantile(sorted, 0.25);
    d.median = analyzedetail::quantile(sorted, 0.5);
    d.q3 = analyzedetail::quantile(sorted, 0.75);
    out.stats[name] = d;
  }
  return out;
}

inline std::string distribution_to_csv(const FeatureDistribution& d) {
  std::ostringstream os;
  os << "bin_low,bin_high";
  for (const auto& name : d.names) os << ',' << flowdetail::csv_escape(name);
  os << '\n';
  const std::size_t bins = d.binEdges.size() - 1;
  for (std::size_t b = 0; b < bins; ++b) {
    os << flowdetail::format_feature(d.binEdges[b]) << ','
       << flowdetail::format_feature(d.binEdges[b + 1]);
    for (const auto& name : d.names) os << ',' << d.counts.at(name)[b];
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json distribution_to_json(const FeatureDistribution& d) {
  nlohmann::json j;
  j["feature"] = d.feature;
  j["binEdges"] = d.binEdges;
  for (const auto& name : d.names) {
    const auto& st = d.stats.at(name);
    j["sets"][name] = {{"counts", d.counts.at(name)},
                       {"min", st.min},
                       {"max", st.max},
                       {"mean", st.mean},
                       {"std", st.std},
                       {"q1", st.q1},
                       {"median", st.median},
                       {"q3", st.q3}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Header-masked packet diffing
// ---------------------------------------------------------------------------

// Fields excluded from comparison. Ports masks high (>= 1024) ports only;
// well-known service ports still have to match.
struct DiffMask {
  bool addresses = false;
  bool ports = false;
  bool checksums = false;
  bool timestamps = false;
};

inline DiffMask default_diff_mask() { return DiffMask{true, true, true, true}; }

struct Divergence {
  std::size_t conversation = 0;
  std::size_t index = 0;  // position within the conversation
  std::string field;
};

struct DiffReport {
  std::size_t matched = 0;
  std::size_t mismatched = 0;
  std::size_t unpaired = 0;
  std::optional<Divergence> firstDivergence;
};

namespace analyzedetail {

// Conversations in first-appearance order; packets keep capture order.
inline std::vector<std::vector<const Packet*>> conversations(
    const std::vector<Packet>& packets) {
  std::map<flowdetail::LookupKey, std::size_t> index;
  std::vector<std::vector<const Packet*>> out;
  for (const Packet& p : packets) {
    const auto lk = flowdetail::lookup_key(p, flowdetail::Mode::Session);
    auto [it, fresh] = index.emplace(lk, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(&p);
  }
  return out;
}

inline bool high_port(std::uint32_t p) { return p >= 1024; }

// Empty string when equal under the mask, otherwise the first differing field.
inline std::string compare_packets(const Packet& a, const Packet& b, const DiffMask& m) {
  if (a.protocol != b.protocol) return "protocol";
  if (!m.timestamps && a.timestamp != b.timestamp) return "timestamp";
  if (!m.addresses && (a.srcAddr != b.srcAddr || a.dstAddr != b.dstAddr)) return "address";
  if (a.srcPort != b.srcPort && !(m.ports && (high_port(a.srcPort) || high_port(b.srcPort))))
    return "srcPort";
  if (a.dstPort != b.dstPort && !(m.ports && (high_port(a.dstPort) || high_port(b.dstPort))))
    return "dstPort";
  if (a.tcpFlags != b.tcpFlags) return "tcpFlags";
  if (a.payload != b.payload) return "payload";
  return "";
}

}  // namespace analyzedetail

// Positional alignment: conversation i of `a` pairs with conversation i of
// `b`, packet j with packet j. Sufficient for deterministic synthetic traffic;
// real captures with reordering would need content matching.
inline DiffReport packet_diff(const std::vector<Packet>& a, const std::vector<Packet>& b,
                              const DiffMask& mask = default_diff_mask()) {
  using namespace analyzedetail;
  DiffReport r;
  const auto convA = conversations(a);
  const auto convB = conversations(b);
  const std::size_t nconv = std::max(convA.size(), convB.size());
  for (std::size_t c = 0; c < nconv; ++c) {
    const auto empty = std::vector<const Packet*>{};
    const auto& ca = c < convA.size() ? convA[c] : empty;
    const auto& cb = c < convB.size() ? convB[c] : empty;
    const std::size_t paired = std::min(ca.size(), cb.size());
    r.unpaired += std::max(ca.size(), cb.size()) - paired;
    for (std::size_t i = 0; i < paired; ++i) {
      const std::string field = compare_packets(*ca[i], *cb[i], mask);
      if (field.empty()) {
        ++r.matched;
      } else {
        ++r.mismatched;
        if (!r.firstDivergence) r.firstDivergence = Divergence{c, i, field};
      }
    }
  }
  return r;
}

inline nlohmann::json diff_to_json(const DiffReport& r) {
  nlohmann::json j;
  j["matched"] = r.matched;
  j["mismatched"] = r.mismatched;
  j["unpaired"] = r.unpaired;
  if (r.firstDivergence) {
    j["firstDivergence"] = {{"conversation", r.firstDivergence->conversation},
                            {"index", r.firstDivergence->index},
                            {"field", r.firstDivergence->field}};
  }
  return j;
}

}  // namespace flowforge
