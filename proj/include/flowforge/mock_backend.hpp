#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowforge/executor.hpp"
#include "flowforge/filter.hpp"
#include "flowforge/netshape.hpp"
#include "flowforge/packet.hpp"
#include "flowforge/pcap.hpp"

namespace flowforge {

struct MockError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Generator parameters: the conversation endpoints plus per-kind knobs.
struct GenParams {
  IpAddr attacker = 0;
  IpAddr target = 0;
  std::map<std::string, std::int64_t> values;
};

namespace mockdetail {

// All synthetic traffic runs on a virtual clock with a fixed epoch and 1ms
// inter-packet spacing, so delay and bandwidth math is exactly checkable.
constexpr Micros kVirtualEpoch = 1'700'000'000LL * kMicrosPerSecond;
constexpr Micros kTick = 1'000;

struct Clock {
  Micros now = kVirtualEpoch;
  Micros next() {
    Micros t = now;
    now += kTick;
    return t;
  }
};

inline std::vector<std::uint8_t> pattern_payload(std::size_t n, std::uint8_t seed) {
  std::vector<std::uint8_t> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = static_cast<std::uint8_t>(seed + i * 31);
  return v;
}

struct Builder {
  Clock clock;
  std::vector<Packet> packets;

  Packet& add(IpAddr src, IpAddr dst, Protocol proto) {
    Packet p;
    p.timestamp = clock.next();
    p.srcAddr = src;
    p.dstAddr = dst;
    p.protocol = proto;
    packets.push_back(std::move(p));
    return packets.back();
  }

  void icmp(IpAddr src, IpAddr dst, std::uint8_t type, std::uint16_t id,
            std::uint16_t seq, std::size_t payload) {
    Packet& p = add(src, dst, Protocol::ICMP);
    p.icmpMeta = IcmpMeta{type, 0, id, seq};
    p.headerLen = 20 + 8;
    p.payload = pattern_payload(payload, static_cast<std::uint8_t>(seq));
    p.payloadLen = static_cast<std::uint32_t>(payload);
    p.rawLen = static_cast<std::uint32_t>(14 + 28 + payload);
  }

  void tcp(IpAddr src, std::uint16_t sport, IpAddr dst, std::uint16_t dport,
           std::uint8_t flags, std::size_t payload = 0) {
    Packet& p = add(src, dst, Protocol::TCP);
    p.srcPort = sport;
    p.dstPort = dport;
    p.tcpFlags = flags;
    p.headerLen = 20 + 20;
    p.payload = pattern_payload(payload, static_cast<std::uint8_t>(sport));
    p.payloadLen = static_cast<std::uint32_t>(payload);
    p.rawLen = static_cast<std::uint32_t>(14 + 40 + payload);
  }

  void udp(IpAddr src, std::uint16_t sport, IpAddr dst, std::uint16_t dport,
           std::size_t payload) {
    Packet& p = add(src, dst, Protocol::UDP);
    p.srcPort = sport;
    p.dstPort = dport;
    p.headerLen = 20 + 8;
    p.payload = pattern_payload(payload, static_cast<std::uint8_t>(sport));
    p.payloadLen = static_cast<std::uint32_t>(payload);
    p.rawLen = static_cast<std::uint32_t>(14 + 28 + payload);
  }
};

inline std::int64_t param(const GenParams& p, const std::string& key,
                          std::int64_t fallback) {
  auto it = p.values.find(key);
  return it == p.values.end() ? fallback : it->second;
}

// 10 echo request/reply pairs -> 20 packets of 98 bytes each.
inline void gen_icmp_ping(Builder& b, const GenParams& p) {
  const std::int64_t n = param(p, "count", 10);
  const std::size_t payload = static_cast<std::size_t>(param(p, "payload", 56));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto seq = static_cast<std::uint16_t>(i + 1);
    b.icmp(p.attacker, p.target, 8, 0x1234, seq, payload);
    b.icmp(p.target, p.attacker, 0, 0x1234, seq, payload);
  }
}

// Half-open scan: optional host-discovery echo pairs, then per-port probes.
// Closed ports answer SYN with RST; open ports complete SYN/SYN-ACK and the
// scanner tears down with RST.
inline void gen_tcp_syn_scan(Builder& b, const GenParams& p) {
  const std::int64_t closed = param(p, "closedPorts", 0);
  const std::int64_t open = param(p, "openPorts", 0);
  const std::int64_t discovery = param(p, "discoveryPairs", 0);
  for (std::int64_t i = 0; i < discovery; ++i) {
    const auto seq = static_cast<std::uint16_t>(i + 1);
    b.icmp(p.attacker, p.target, 8, 0x0001, seq, 0);
    b.icmp(p.target, p.attacker, 0, 0x0001, seq, 0);
  }
  std::uint16_t sport = 40000;
  std::uint16_t dport = 8000;
  for (std::int64_t i = 0; i < open; ++i, ++sport, ++dport) {
    b.tcp(p.attacker, sport, p.target, dport, tcpflag::SYN);
    b.tcp(p.target, dport, p.attacker, sport, tcpflag::SYN | tcpflag::ACK);
    b.tcp(p.attacker, sport, p.target, dport, tcpflag::RST);
  }
  for (std::int64_t i = 0; i < closed; ++i, ++sport, ++dport) {
    b.tcp(p.attacker, sport, p.target, dport, tcpflag::SYN);
    b.tcp(p.target, dport, p.attacker, sport, tcpflag::RST | tcpflag::ACK);
  }
}

inline void tcp_handshake(Builder& b, const GenParams& p, std::uint16_t sport,
                          std::uint16_t dport) {
  b.tcp(p.attacker, sport, p.target, dport, tcpflag::SYN);
  b.tcp(p.target, dport, p.attacker, sport, tcpflag::SYN | tcpflag::ACK);
  b.tcp(p.attacker, sport, p.target, dport, tcpflag::ACK);
}

inline void tcp_teardown(Builder& b, const GenParams& p, std::uint16_t sport,
                         std::uint16_t dport) {
  b.tcp(p.attacker, sport, p.target, dport, tcpflag::FIN | tcpflag::ACK);
  b.tcp(p.target, dport, p.attacker, sport, tcpflag::ACK);
  b.tcp(p.target, dport, p.attacker, sport, tcpflag::FIN | tcpflag::ACK);
  b.tcp(p.attacker, sport, p.target, dport, tcpflag::ACK);
}

// One short full connection per count, with one request/response exchange.
inline void gen_tcp_connect_burst(Builder& b, const GenParams& p) {
  const std::int64_t n = param(p, "connections", 1);
  const std::size_t req = static_cast<std::size_t>(param(p, "requestPayload", 100));
  const std::size_t resp = static_cast<std::size_t>(param(p, "responsePayload", 200));
  const auto dport = static_cast<std::uint16_t>(param(p, "port", 80));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto sport = static_cast<std::uint16_t>(49152 + (i % 16000));
    tcp_handshake(b, p, sport, dport);
    b.tcp(p.attacker, sport, p.target, dport, tcpflag::PSH | tcpflag::ACK, req);
    b.tcp(p.target, dport, p.attacker, sport, tcpflag::PSH | tcpflag::ACK, resp);
    b.tcp(p.attacker, sport, p.target, dport, tcpflag::ACK);
    tcp_teardown(b, p, sport, dport);
  }
}

// One SSH-style authentication attempt per connection: handshake, a fixed
// number of encrypted exchange rounds, orderly teardown. Every attempt is a
// distinct ephemeral source port, hence its own flow.
inline void gen_ssh_bruteforce(Builder& b, const GenParams& p) {
  const std::int64_t attempts = param(p, "attempts", 680);
  const std::int64_t rounds = param(p, "rounds", 16);
  const auto dport = static_cast<std::uint16_t>(param(p, "port", 22));
  for (std::int64_t i = 0; i < attempts; ++i) {
    const auto sport = static_cast<std::uint16_t>(32768 + (i % 28000));
    tcp_handshake(b, p, sport, dport);
    for (std::int64_t r = 0; r < rounds; ++r) {
      b.tcp(p.attacker, sport, p.target, dport, tcpflag::PSH | tcpflag::ACK, 48);
      b.tcp(p.target, dport, p.attacker, sport, tcpflag::PSH | tcpflag::ACK, 64);
    }
    tcp_teardown(b, p, sport, dport);
  }
}

// Sequential HTTP GETs, one connection each.
inline void gen_http_get(Builder& b, const GenParams& p) {
  const std::int64_t requests = param(p, "requests", 1);
  GenParams q = p;
  q.values["connections"] = requests;
  q.values["requestPayload"] = param(p, "requestPayload", 120);
  q.values["responsePayload"] = param(p, "responsePayload", 1200);
  q.values["port"] = param(p, "port", 80);
  gen_tcp_connect_burst(b, q);
}

}  // namespace mockdetail

// Produces the canonical conversation for a generator kind, then pipes it
// through the network-condition emulator with the given seed.
inline std::vector<Packet> synth_traffic(const std::string& kind, const GenParams& params,
                                         std::uint64_t seed,
                                         const NetworkConditions& conditions) {
  using namespace mockdetail;
  Builder b;
  if (kind == "icmp-ping") gen_icmp_ping(b, params);
  else if (kind == "tcp-syn-scan") gen_tcp_syn_scan(b, params);
  else if (kind == "tcp-connect-burst") gen_tcp_connect_burst(b, params);
  else if (kind == "ssh-bruteforce-like") gen_ssh_bruteforce(b, params);
  else if (kind == "http-get") gen_http_get(b, params);
  else throw MockError("unknown generator '" + kind + "'");
  return emulate_conditions(b.packets, conditions, seed);
}

// Per-target traffic script for a mock run.
struct GeneratorSpec {
  std::string kind = "icmp-ping";
  std::map<std::string, std::int64_t> params;
  std::optional<std::uint64_t> seed;  // falls back to the shaped conditions' seed
};

struct MockScript {
  std::map<std::string, GeneratorSpec> perTarget;
  std::optional<GeneratorSpec> fallback = GeneratorSpec{};
  std::set<std::string> neverReady;  // fault injection: probe always times out
  int attackExitCode = 0;
};

// Deterministic in-process ExecutorContract. Synthesizes scenario traffic on
// a virtual clock; captures are the synthesized, filter-applied packets
// serialized as classic pcap. Every call is logged for assertions.
class MockExecutor : public ExecutorContract {
 public:
  explicit MockExecutor(MockScript script = {}) : script_(std::move(script)) {}

  WorkloadHandle createWorkload(const HostSpec& spec, WorkloadRole role) override {
    std::lock_guard lock(mu_);
    Workload w;
    w.handle = WorkloadHandle{nextId_++, spec.name};
    w.spec = spec;
    w.role = role;
    w.address = allocate_address();
    workloads_.push_back(w);
    log_unlocked("createWorkload " + spec.name);
    return w.handle;
  }

  bool waitReady(const WorkloadHandle& h, const ProbeSpec&) override {
    std::lock_guard lock(mu_);
    Workload& w = find(h);
    log_unlocked("waitReady " + w.spec.name);
    return !script_.neverReady.count(w.spec.name);
  }

  void applyShaping(const WorkloadHandle& h, const TcPlan& plan) override {
    std::lock_guard lock(mu_);
    Workload& w = find(h);
    w.conditions = plan.conditions;
    log_unlocked("applyShaping " + w.spec.name);
  }

  CaptureHandle startCapture(const WorkloadHandle& h, const std::string& filter) override {
    std::lock_guard lock(mu_);
    Workload& w = find(h);
    Capture c;
    c.handle = CaptureHandle{nextCaptureId_++};
    c.workloadId = h.id;
    c.filter = CaptureFilter::parse(filter);
    captures_.push_back(std::move(c));
    log_unlocked("startCapture " + w.spec.name);
    return captures_.back().handle;
  }

  ExecResult execCommand(const WorkloadHandle& h, const std::string& command,
                         std::optional<Micros>) override {
    std::lock_guard lock(mu_);
    Workload& w = find(h);
    log_unlocked("execCommand " + w.spec.name);
    if (w.role == WorkloadRole::Attacker) {
      run_attack_unlocked(w);
      return ExecResult{script_.attackExitCode, "attack complete: " + command, ""};
    }
    // Processing and target commands have no real tool behind them here.
    return ExecResult{127, "", "mock backend cannot run '" + command + "'"};
  }

  std::vector<std::uint8_t> stopCapture(const CaptureHandle& h) override {
    std::lock_guard lock(mu_);
    for (auto& c : captures_) {
      if (c.handle.id == h.id) {
        c.active = false;
        log_unlocked("stopCapture #" + std::to_string(h.id));
        return write_pcap(c.packets);
      }
    }
    throw MockError("unknown capture handle");
  }

  std::string resolveAddress(const WorkloadHandle& h) override {
    std::lock_guard lock(mu_);
    return ip_to_string(find(h).address);
  }

  void teardown(const WorkloadHandle& h) override {
    std::lock_guard lock(mu_);
    Workload& w = find(h);
    if (w.tornDown) return;  // idempotent
    w.tornDown = true;
    log_unlocked("teardown " + w.spec.name);
  }

  ResourceSample sampleResources(const WorkloadHandle& h) override {
    std::lock_guard lock(mu_);
    const Workload& w = find(h);
    // Synthetic constants shaped like real pod telemetry.
    switch (w.role) {
      case WorkloadRole::Attacker: return {5.0, 2.0};
      case WorkloadRole::Target: return {3.0, 1.67};
      case WorkloadRole::Processing: return {18.0, 3.0};
    }
    return {};
  }

  // Assertion helpers.
  std::vector<std::string> call_log() const {
    std::lock_guard lock(mu_);
    return log_;
  }
  int teardown_count() const {
    std::lock_guard lock(mu_);
    int n = 0;
    for (const auto& w : workloads_)
      if (w.tornDown) ++n;
    return n;
  }
  int workload_count() const {
    std::lock_guard lock(mu_);
    return static_cast<int>(workloads_.size());
  }

 private:
  struct Workload {
    WorkloadHandle handle;
    HostSpec spec;
    WorkloadRole role = WorkloadRole::Target;
    IpAddr address = 0;
    NetworkConditions conditions;
    bool tornDown = false;
  };

  struct Capture {
    CaptureHandle handle;
    int workloadId = -1;
    CaptureFilter filter;
    std::vector<Packet> packets;
    bool active = true;
  };

  Workload& find(const WorkloadHandle& h) {
    for (auto& w : workloads_)
      if (w.handle.id == h.id) return w;
    throw MockError("unknown workload handle");
  }

  IpAddr allocate_address() {
    // 10.244.x.y pod-network style addresses.
    const std::uint32_t n = nextAddr_++;
    return (10u << 24) | (244u << 16) | ((n >> 8) << 8) | (n & 0xff);
  }

  void run_attack_unlocked(const Workload& attacker) {
    for (const Workload& w : workloads_) {
      if (w.role != WorkloadRole::Target || w.tornDown) continue;
      const GeneratorSpec* spec = nullptr;
      auto it = script_.perTarget.find(w.spec.name);
      if (it != script_.perTarget.end()) spec = &it->second;
      else if (script_.fallback) spec = &*script_.fallback;
      else throw MockError("no traffic script for target '" + w.spec.name + "'");

      GenParams gp;
      gp.attacker = attacker.address;
      gp.target = w.address;
      gp.values = spec->params;
      const std::uint64_t seed = spec->seed.value_or(w.conditions.effective_seed());
      const auto packets = synth_traffic(spec->kind, gp, seed, w.conditions);
      for (auto& c : captures_) {
        if (c.workloadId != w.handle.id || !c.active) continue;
        for (const Packet& p : packets)
          if (c.filter.matches(p)) c.packets.push_back(p);
      }
    }
  }

  void log_unlocked(const std::string& entry) { log_.push_back(entry); }

  MockScript script_;
  mutable std::mutex mu_;
  std::vector<Workload> workloads_;
  std::vector<Capture> captures_;
  std::vector<std::string> log_;
  int nextId_ = 0;
  int nextCaptureId_ = 0;
  std::uint32_t nextAddr_ = 256;  // start at 10.244.1.0
};

}  // namespace flowforge
