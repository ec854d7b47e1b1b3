#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flowforge/packet.hpp"

namespace flowforge {

struct FlowConfig {
  Micros flowTimeout = 120 * kMicrosPerSecond;   // session cut on idle gap
  Micros activityTimeout = 5 * kMicrosPerSecond; // active/idle boundary
  Micros interval = 60 * kMicrosPerSecond;       // interval-mode record length
};

// Feature vector column order. This is the documented CSV order.
inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "Flow Duration",
      "Total Fwd Packet",
      "Total Bwd Packets",
      "Total Length of Fwd Packet",
      "Total Length of Bwd Packet",
      "Packet Length Mean",
      "Packet Length Std",
      "Average Packet Size",
      "Flow Bytes/s",
      "Flow Packets/s",
      "Fwd Packets/s",
      "Bwd Packets/s",
      "Flow IAT Mean",
      "Flow IAT Std",
      "Fwd IAT Total",
      "Fwd IAT Mean",
      "Fwd IAT Std",
      "Bwd IAT Total",
      "Bwd IAT Mean",
      "Bwd IAT Std",
      "Fwd Header Length",
      "Bwd Header Length",
      "Fwd Act Data Packets",
      "Bwd Act Data Packets",
      "PSH Flag Count",
      "Bwd PSH Flags",
      "Ack Flag Count",
      "Down/Up Ratio",
      "Idle Mean",
      "Total Connection Flow Time",
  };
  return names;
}

constexpr std::size_t kFeatureCount = 30;

struct FlowRecord {
  FlowKey key;
  Micros startTime = 0;
  Micros endTime = 0;
  std::array<double, kFeatureCount> features{};
  // Label columns, appended after features in CSV output.
  std::vector<std::pair<std::string, std::string>> labels;

  double feature(const std::string& name) const {
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return features[i];
    throw std::out_of_range("unknown feature '" + name + "'");
  }
};

namespace flowdetail {

struct Stats {
  double mean = 0, std = 0, sum = 0;
  std::size_t n = 0;
};

// Population statistics; a single sample has std 0.
inline Stats population_stats(const std::vector<double>& xs) {
  Stats s;
  s.n = xs.size();
  if (xs.empty()) return s;
  for (double x : xs) s.sum += x;
  s.mean = s.sum / static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

inline std::vector<double> iats(const std::vector<Micros>& ts) {
  std::vector<double> out;
  for (std::size_t i = 1; i < ts.size(); ++i)
    out.push_back(static_cast<double>(ts[i] - ts[i - 1]));
  return out;
}

}  // namespace flowdetail

// Computes the full feature vector from a flow's member packets. `forward[i]`
// tags packets[i]'s direction relative to the flow key. Rate features are 0
// when the flow duration is 0.
inline FlowRecord compute_features(const FlowKey& key,
                                   const std::vector<Packet>& packets,
                                   const std::vector<bool>& forward,
                                   const FlowConfig& cfg = {}) {
  using namespace flowdetail;
  FlowRecord rec;
  rec.key = key;
  rec.startTime = packets.front().timestamp;
  rec.endTime = packets.back().timestamp;

  std::vector<Micros> all_ts, fwd_ts, bwd_ts;
  std::vector<double> lengths;
  double fwd_bytes = 0, bwd_bytes = 0;
  double fwd_header = 0, bwd_header = 0;
  std::size_t fwd_n = 0, bwd_n = 0, fwd_act = 0, bwd_act = 0;
  std::size_t psh = 0, bwd_psh = 0, ack = 0;

  for (std::size_t i = 0; i < packets.size(); ++i) {
    const Packet& p = packets[i];
    all_ts.push_back(p.timestamp);
    lengths.push_back(static_cast<double>(p.payloadLen));
    const bool fwd = forward[i];
    if (fwd) {
      fwd_ts.push_back(p.timestamp);
      fwd_bytes += p.payloadLen;
      fwd_header += p.headerLen;
      ++fwd_n;
      if (p.payloadLen >= 1) ++fwd_act;
    } else {
      bwd_ts.push_back(p.timestamp);
      bwd_bytes += p.payloadLen;
      bwd_header += p.headerLen;
      ++bwd_n;
      if (p.payloadLen >= 1) ++bwd_act;
      if (p.tcpFlags & tcpflag::PSH) ++bwd_psh;
    }
    if (p.tcpFlags & tcpflag::PSH) ++psh;
    if (p.tcpFlags & tcpflag::ACK) ++ack;
  }

  const double duration = static_cast<double>(rec.endTime - rec.startTime);
  const double duration_s = duration / static_cast<double>(kMicrosPerSecond);
  const auto len_stats = population_stats(lengths);
  const auto flow_iat = population_stats(iats(all_ts));
  const auto fwd_iat = population_stats(iats(fwd_ts));
  const auto bwd_iat = population_stats(iats(bwd_ts));

  // Gaps above the activity timeout are idle periods; active sub-flow time is
  // total duration minus idle time.
  std::vector<double> idle_gaps;
  double idle_total = 0;
  for (double gap : iats(all_ts)) {
    if (gap > static_cast<double>(cfg.activityTimeout)) {
      idle_gaps.push_back(gap);
      idle_total += gap;
    }
  }
  const auto idle_stats = population_stats(idle_gaps);

  auto rate = [&](double count) { return duration_s > 0 ? count / duration_s : 0.0; };

  std::size_t i = 0;
  auto set = [&](double v) { rec.features[i++] = v; };
  set(duration);                                       // Flow Duration
  set(static_cast<double>(fwd_n));                     // Total Fwd Packet
  set(static_cast<double>(bwd_n));                     // Total Bwd Packets
  set(fwd_bytes);                                      // Total Length of Fwd Packet
  set(bwd_bytes);                                      // Total Length of Bwd Packet
  set(len_stats.mean);                                 // Packet Length Mean
  set(len_stats.std);                                  // Packet Length Std
  set(len_stats.sum / static_cast<double>(packets.size()));  // Average Packet Size
  set(rate(fwd_bytes + bwd_bytes));                    // Flow Bytes/s
  set(rate(static_cast<double>(packets.size())));      // Flow Packets/s
  set(rate(static_cast<double>(fwd_n)));               // Fwd Packets/s
  set(rate(static_cast<double>(bwd_n)));               // Bwd Packets/s
  set(flow_iat.mean);                                  // Flow IAT Mean
  set(flow_iat.std);                                   // Flow IAT Std
  set(fwd_iat.sum);                                    // Fwd IAT Total
  set(fwd_iat.mean);                                   // Fwd IAT Mean
  set(fwd_iat.std);                                    // Fwd IAT Std
  set(bwd_iat.sum);                                    // Bwd IAT Total
  set(bwd_iat.mean);                                   // Bwd IAT Mean
  set(bwd_iat.std);                                    // Bwd IAT Std
  set(fwd_header);                                     // Fwd Header Length
  set(bwd_header);                                     // Bwd Header Length
  set(static_cast<double>(fwd_act));                   // Fwd Act Data Packets
  set(static_cast<double>(bwd_act));                   // Bwd Act Data Packets
  set(static_cast<double>(psh));                       // PSH Flag Count
  set(static_cast<double>(bwd_psh));                   // Bwd PSH Flags
  set(static_cast<double>(ack));                       // Ack Flag Count
  set(fwd_n > 0 ? static_cast<double>(bwd_n) / static_cast<double>(fwd_n)
                : 0.0);                                // Down/Up Ratio
  set(idle_stats.mean);                                // Idle Mean
  set(duration - idle_total);                          // Total Connection Flow Time
  return rec;
}

namespace flowdetail {

// Direction-neutral lookup key. Ports carry the ICMP (id, seq) pair in
// interval mode so each echo exchange becomes its own record.
struct LookupKey {
  IpAddr lowAddr, highAddr;
  std::uint32_t lowPort, highPort;
  Protocol protocol;
  std::uint32_t icmpPair;  // (id << 16) | seq, interval mode only

  auto ordered() const {
    return std::tie(lowAddr, lowPort, highAddr, highPort, protocol, icmpPair);
  }
  bool operator<(const LookupKey& o) const { return ordered() < o.ordered(); }
};

enum class Mode { Session, Interval };

inline LookupKey lookup_key(const Packet& p, Mode mode) {
  LookupKey k{};
  k.protocol = p.protocol;
  std::uint32_t sp = p.srcPort, dp = p.dstPort;
  if (p.protocol == Protocol::ICMP) {
    sp = dp = 0;
    if (mode == Mode::Interval && p.icmpMeta)
      k.icmpPair = (std::uint32_t(p.icmpMeta->id) << 16) | p.icmpMeta->seq;
  }
  if (std::tie(p.srcAddr, sp) <= std::tie(p.dstAddr, dp)) {
    k.lowAddr = p.srcAddr;
    k.lowPort = sp;
    k.highAddr = p.dstAddr;
    k.highPort = dp;
  } else {
    k.lowAddr = p.dstAddr;
    k.lowPort = dp;
    k.highAddr = p.srcAddr;
    k.highPort = sp;
  }
  return k;
}

struct ActiveFlow {
  FlowKey key;
  std::vector<Packet> packets;
  std::vector<bool> forward;
  Micros start = 0;
  Micros last = 0;
  bool finFwd = false;
  bool finBwd = false;
  bool reset = false;

  bool closed() const { return reset || (finFwd && finBwd); }
};

inline std::vector<FlowRecord> assemble(const std::vector<Packet>& packets, Mode mode,
                                        const FlowConfig& cfg) {
  std::map<LookupKey, ActiveFlow> table;
  std::vector<FlowRecord> done;

  auto finalize = [&](ActiveFlow& f) {
    done.push_back(compute_features(f.key, f.packets, f.forward, cfg));
  };

  for (const Packet& p : packets) {
    const LookupKey lk = lookup_key(p, mode);
    auto it = table.find(lk);

    if (it != table.end()) {
      ActiveFlow& f = it->second;
      const bool gap_cut = p.timestamp - f.last > cfg.flowTimeout;
      const bool interval_cut =
          mode == Mode::Interval && p.timestamp - f.start >= cfg.interval;
      // A closed TCP conversation keeps absorbing trailing segments (the last
      // ACK of a FIN exchange, RST duplicates) until a fresh SYN arrives.
      const bool reopen = f.closed() && (p.tcpFlags & tcpflag::SYN);
      if (gap_cut || interval_cut || reopen) {
        finalize(f);
        table.erase(it);
        it = table.end();
      }
    }

    if (it == table.end()) {
      ActiveFlow f;
      f.key = make_flow_key(p);
      if (p.protocol == Protocol::ICMP) {
        f.key.portA = f.key.portB = 0;
      }
      f.start = p.timestamp;
      it = table.emplace(lk, std::move(f)).first;
    }

    ActiveFlow& f = it->second;
    const bool fwd = f.key.is_forward(p);
    f.packets.push_back(p);
    f.forward.push_back(fwd);
    f.last = p.timestamp;
    if (p.tcpFlags & tcpflag::RST) f.reset = true;
    if (p.tcpFlags & tcpflag::FIN) (fwd ? f.finFwd : f.finBwd) = true;
  }

  for (auto& [lk, f] : table) finalize(f);

  std::sort(done.begin(), done.end(), [](const FlowRecord& a, const FlowRecord& b) {
    return std::tie(a.startTime) != std::tie(b.startTime)
               ? a.startTime < b.startTime
               : a.key.ordered() < b.key.ordered();
  });
  return done;
}

}  // namespace flowdetail

// CICFlowMeter-compatible assembly: bidirectional conversations cut on idle
// timeout and TCP termination (FIN both ways or RST). ICMP is keyed per
// endpoint pair, so an echo exchange is one conversation.
inline std::vector<FlowRecord> assemble_flows_session(const std::vector<Packet>& packets,
                                                      const FlowConfig& cfg = {}) {
  return flowdetail::assemble(packets, flowdetail::Mode::Session, cfg);
}

// Argus-style assembly: additionally splits records at fixed intervals from
// flow start, and keys ICMP per (id, seq) pair.
inline std::vector<FlowRecord> assemble_flows_interval(const std::vector<Packet>& packets,
                                                       const FlowConfig& cfg = {}) {
  return flowdetail::assemble(packets, flowdetail::Mode::Interval, cfg);
}

namespace flowdetail {

inline std::string format_feature(double v) {
  if (v == static_cast<double>(static_cast<std::int64_t>(v)) &&
      std::abs(v) < 1e15) {
    return std::to_string(static_cast<std::int64_t>(v));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace flowdetail

// Metadata columns preceding the feature vector.
inline const std::vector<std::string>& meta_column_names() {
  static const std::vector<std::string> names = {
      "Flow ID", "Src IP", "Src Port", "Dst IP", "Dst Port", "Protocol", "Timestamp"};
  return names;
}

// One header row, then one row per flow ordered by (startTime, key). Label
// columns, when present, are appended after the features. RFC 4180, LF
// endings, floats with 6 decimals.
inline std::string write_flow_csv(const std::vector<FlowRecord>& flows) {
  using namespace flowdetail;
  std::ostringstream os;
  for (const auto& c : meta_column_names()) os << c << ',';
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    os << names[i];
    if (i + 1 < names.size()) os << ',';
  }
  const std::vector<std::pair<std::string, std::string>>* label_schema =
      flows.empty() ? nullptr : &flows.front().labels;
  if (label_schema) {
    for (const auto& [k, v] : *label_schema) os << ',' << csv_escape(k);
  }
  os << '\n';

  std::vector<const FlowRecord*> ordered;
  for (const auto& f : flows) ordered.push_back(&f);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const FlowRecord* a, const FlowRecord* b) {
                     if (a->startTime != b->startTime) return a->startTime < b->startTime;
                     return a->key.ordered() < b->key.ordered();
                   });

  for (const FlowRecord* f : ordered) {
    os << f->key.to_string() << ',' << ip_to_string(f->key.addrA) << ',' << f->key.portA
       << ',' << ip_to_string(f->key.addrB) << ',' << f->key.portB << ','
       << static_cast<int>(f->key.protocol) << ',' << f->startTime;
    for (double v : f->features) os << ',' << format_feature(v);
    for (const auto& [k, v] : f->labels) os << ',' << csv_escape(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace flowforge
