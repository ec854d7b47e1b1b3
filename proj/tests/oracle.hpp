#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "flowforge/flow.hpp"
#include "flowforge/mock_backend.hpp"

#include "helpers.hpp"

// Brute-force reference computation, written independently of the library:
// per-feature formulas evaluated with naive loops and the E[x^2] variance
// form.
namespace testoracle {

using namespace flowforge;

inline double omean(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double ostd(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  const double m = omean(xs);
  double sq = 0;
  for (double x : xs) sq += x * x;
  const double var = sq / static_cast<double>(xs.size()) - m * m;
  return var > 0 ? std::sqrt(var) : 0;
}

inline double oracle_feature(const std::string& name, const std::vector<Packet>& pkts,
                             const std::vector<bool>& fwd, const FlowConfig& cfg) {
  std::vector<double> all_len, fwd_len, bwd_len;
  std::vector<double> all_ts, fwd_ts, bwd_ts;
  for (std::size_t i = 0; i < pkts.size(); ++i) {
    all_len.push_back(pkts[i].payloadLen);
    all_ts.push_back(static_cast<double>(pkts[i].timestamp));
    (fwd[i] ? fwd_len : bwd_len).push_back(pkts[i].payloadLen);
    (fwd[i] ? fwd_ts : bwd_ts).push_back(static_cast<double>(pkts[i].timestamp));
  }
  auto diffs = [](const std::vector<double>& ts) {
    std::vector<double> d;
    for (std::size_t i = 1; i < ts.size(); ++i) d.push_back(ts[i] - ts[i - 1]);
    return d;
  };
  const double duration = all_ts.back() - all_ts.front();
  const double dur_s = duration / 1e6;
  auto per_second = [&](double n) { return dur_s > 0 ? n / dur_s : 0; };
  auto count_if_flag = [&](std::uint8_t flag, int which) {
    double n = 0;
    for (std::size_t i = 0; i < pkts.size(); ++i) {
      if (which == 1 && fwd[i]) continue;  // backward only
      if (pkts[i].tcpFlags & flag) ++n;
    }
    return n;
  };
  auto sum = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0);
  };

  if (name == "Flow Duration") return duration;
  if (name == "Total Fwd Packet") return static_cast<double>(fwd_len.size());
  if (name == "Total Bwd Packets") return static_cast<double>(bwd_len.size());
  if (name == "Total Length of Fwd Packet") return sum(fwd_len);
  if (name == "Total Length of Bwd Packet") return sum(bwd_len);
  if (name == "Packet Length Mean") return omean(all_len);
  if (name == "Packet Length Std") return ostd(all_len);
  if (name == "Average Packet Size") return sum(all_len) / static_cast<double>(pkts.size());
  if (name == "Flow Bytes/s") return per_second(sum(all_len));
  if (name == "Flow Packets/s") return per_second(static_cast<double>(pkts.size()));
  if (name == "Fwd Packets/s") return per_second(static_cast<double>(fwd_len.size()));
  if (name == "Bwd Packets/s") return per_second(static_cast<double>(bwd_len.size()));
  if (name == "Flow IAT Mean") return omean(diffs(all_ts));
  if (name == "Flow IAT Std") return ostd(diffs(all_ts));
  if (name == "Fwd IAT Total") return sum(diffs(fwd_ts));
  if (name == "Fwd IAT Mean") return omean(diffs(fwd_ts));
  if (name == "Fwd IAT Std") return ostd(diffs(fwd_ts));
  if (name == "Bwd IAT Total") return sum(diffs(bwd_ts));
  if (name == "Bwd IAT Mean") return omean(diffs(bwd_ts));
  if (name == "Bwd IAT Std") return ostd(diffs(bwd_ts));
  if (name == "Fwd Header Length" || name == "Bwd Header Length") {
    double n = 0;
    for (std::size_t i = 0; i < pkts.size(); ++i)
      if (fwd[i] == (name[0] == 'F')) n += pkts[i].headerLen;
    return n;
  }
  if (name == "Fwd Act Data Packets" || name == "Bwd Act Data Packets") {
    double n = 0;
    for (std::size_t i = 0; i < pkts.size(); ++i)
      if (fwd[i] == (name[0] == 'F') && pkts[i].payloadLen > 0) ++n;
    return n;
  }
  if (name == "PSH Flag Count") return count_if_flag(tcpflag::PSH, 0);
  if (name == "Bwd PSH Flags") return count_if_flag(tcpflag::PSH, 1);
  if (name == "Ack Flag Count") return count_if_flag(tcpflag::ACK, 0);
  if (name == "Down/Up Ratio")
    return fwd_len.empty() ? 0
                           : static_cast<double>(bwd_len.size()) /
                                 static_cast<double>(fwd_len.size());
  if (name == "Idle Mean" || name == "Total Connection Flow Time") {
    std::vector<double> idle;
    for (double d : diffs(all_ts))
      if (d > static_cast<double>(cfg.activityTimeout)) idle.push_back(d);
    if (name == "Idle Mean") return omean(idle);
    return duration - sum(idle);
  }
  throw std::runtime_error("oracle has no formula for " + name);
}

// Reconstructs a record's member packets from the capture: same conversation
// endpoints, timestamp inside the record's span.
struct Membership {
  std::vector<Packet> packets;
  std::vector<bool> forward;
};

inline Membership members_of(const FlowRecord& rec, const std::vector<Packet>& capture,
                             bool intervalMode) {
  // Interval mode keys ICMP by (id, seq); recover the record's pair from the
  // packet sitting exactly at the record's start.
  std::optional<IcmpMeta> pair;
  if (intervalMode && rec.key.protocol == Protocol::ICMP) {
    for (const Packet& p : capture)
      if (p.timestamp == rec.startTime && p.protocol == Protocol::ICMP) pair = p.icmpMeta;
  }

  Membership m;
  for (const Packet& p : capture) {
    if (p.timestamp < rec.startTime || p.timestamp > rec.endTime) continue;
    if (p.protocol != rec.key.protocol) continue;
    bool forward, backward;
    if (p.protocol == Protocol::ICMP) {
      forward = p.srcAddr == rec.key.addrA && p.dstAddr == rec.key.addrB;
      backward = p.srcAddr == rec.key.addrB && p.dstAddr == rec.key.addrA;
      if (pair && p.icmpMeta &&
          !(p.icmpMeta->id == pair->id && p.icmpMeta->seq == pair->seq))
        continue;
    } else {
      forward = p.srcAddr == rec.key.addrA && p.srcPort == rec.key.portA &&
                p.dstAddr == rec.key.addrB && p.dstPort == rec.key.portB;
      backward = p.srcAddr == rec.key.addrB && p.srcPort == rec.key.portB &&
                 p.dstAddr == rec.key.addrA && p.dstPort == rec.key.portA;
    }
    if (!forward && !backward) continue;
    m.packets.push_back(p);
    m.forward.push_back(forward);
  }
  return m;
}

inline bool close_enough(double a, double b) {
  const double tol = 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol;
}

inline std::vector<std::vector<Packet>> fixture_captures() {
  using testutil::gen_params;
  std::vector<std::vector<Packet>> captures;
  auto gen = [&](const std::string& kind, std::map<std::string, std::int64_t> v) {
    captures.push_back(synth_traffic(kind, gen_params(std::move(v)), 0, {}));
  };
  gen("icmp-ping", {});
  gen("icmp-ping", {{"count", 1}});
  gen("icmp-ping", {{"count", 25}, {"payload", 8}});
  gen("tcp-syn-scan", {{"discoveryPairs", 2}, {"closedPorts", 3}, {"openPorts", 1}});
  gen("tcp-syn-scan", {{"closedPorts", 40}});
  gen("tcp-syn-scan", {{"openPorts", 20}, {"discoveryPairs", 5}});
  gen("tcp-connect-burst", {{"connections", 1}});
  gen("tcp-connect-burst", {{"connections", 12}, {"requestPayload", 700}});
  gen("ssh-bruteforce-like", {{"attempts", 5}});
  gen("ssh-bruteforce-like", {{"attempts", 2}, {"rounds", 4}});
  gen("http-get", {{"requests", 7}});
  for (std::uint64_t seed = 100; seed < 120; ++seed)
    captures.push_back(testutil::random_packets(seed, 40 + 8 * (seed % 20)));
  return captures;
}

}  // namespace testoracle
