#include <catch2/catch_amalgamated.hpp>

#include "flowforge/flow.hpp"
#include "flowforge/mock_backend.hpp"

#include "helpers.hpp"

using namespace flowforge;
using testutil::gen_params;
using testutil::kAtk;
using testutil::kTgt;

namespace {

std::vector<Packet> synth(const std::string& kind,
                          std::map<std::string, std::int64_t> values = {}) {
  return synth_traffic(kind, gen_params(std::move(values)), 0, NetworkConditions{});
}

Packet tcp_packet(Micros t, bool fwd, std::uint8_t flags, std::uint32_t payload = 0,
                  std::uint16_t sport = 50000, std::uint16_t dport = 22) {
  Packet p;
  p.timestamp = t;
  p.srcAddr = fwd ? kAtk : kTgt;
  p.dstAddr = fwd ? kTgt : kAtk;
  p.srcPort = fwd ? sport : dport;
  p.dstPort = fwd ? dport : sport;
  p.protocol = Protocol::TCP;
  p.tcpFlags = flags;
  p.headerLen = 40;
  p.payloadLen = payload;
  p.payload.assign(payload, 0xab);
  p.rawLen = 54 + payload;
  return p;
}

}  // namespace

TEST_CASE("ping capture assembles to 1 session flow and 10 interval flows") {
  const auto packets = synth("icmp-ping");
  REQUIRE(packets.size() == 20);
  CHECK(assemble_flows_session(packets).size() == 1);
  CHECK(assemble_flows_interval(packets).size() == 10);
}

TEST_CASE("syn scan capture: 13 packets, 5 session flows, 6 interval flows") {
  const auto packets = synth(
      "tcp-syn-scan", {{"discoveryPairs", 2}, {"closedPorts", 3}, {"openPorts", 1}});
  REQUIRE(packets.size() == 13);
  CHECK(assemble_flows_session(packets).size() == 5);
  CHECK(assemble_flows_interval(packets).size() == 6);
}

TEST_CASE("five distinct conversations give five flows") {
  std::vector<Packet> packets;
  Micros t = 0;
  for (int c = 0; c < 5; ++c) {
    Packet q;
    q.timestamp = t++;
    q.srcAddr = kAtk;
    q.dstAddr = kTgt;
    q.srcPort = static_cast<std::uint16_t>(40000 + c);
    q.dstPort = 53;
    q.protocol = Protocol::UDP;
    q.headerLen = 28;
    q.payloadLen = 30;
    q.rawLen = 72;
    packets.push_back(q);
    std::swap(q.srcAddr, q.dstAddr);
    std::swap(q.srcPort, q.dstPort);
    q.timestamp = t++;
    packets.push_back(q);
  }
  CHECK(assemble_flows_session(packets).size() == 5);
}

TEST_CASE("single unanswered SYN is one flow with no backward packets") {
  const auto flows = assemble_flows_session({tcp_packet(0, true, tcpflag::SYN)});
  REQUIRE(flows.size() == 1);
  CHECK(flows[0].feature("Total Fwd Packet") == 1.0);
  CHECK(flows[0].feature("Total Bwd Packets") == 0.0);
  CHECK(flows[0].feature("Flow Duration") == 0.0);
  CHECK(flows[0].feature("Flow Bytes/s") == 0.0);
  CHECK(flows[0].feature("Down/Up Ratio") == 0.0);
}

TEST_CASE("a 130s conversation splits into 3 interval records") {
  std::vector<Packet> packets;
  for (Micros t = 0; t <= 130 * kMicrosPerSecond; t += 10 * kMicrosPerSecond)
    packets.push_back(tcp_packet(t, (t / (10 * kMicrosPerSecond)) % 2 == 0, tcpflag::ACK));
  FlowConfig cfg;
  cfg.interval = 60 * kMicrosPerSecond;
  CHECK(assemble_flows_interval(packets, cfg).size() == 3);
  CHECK(assemble_flows_session(packets, cfg).size() == 1);
}

TEST_CASE("flow timeout cuts a session flow") {
  FlowConfig cfg;
  cfg.flowTimeout = 120 * kMicrosPerSecond;
  std::vector<Packet> packets = {tcp_packet(0, true, tcpflag::ACK),
                                 tcp_packet(121 * kMicrosPerSecond, true, tcpflag::ACK)};
  CHECK(assemble_flows_session(packets, cfg).size() == 2);
  packets[1].timestamp = 119 * kMicrosPerSecond;
  CHECK(assemble_flows_session(packets, cfg).size() == 1);
}

TEST_CASE("closed conversations absorb trailing segments until a new SYN") {
  std::vector<Packet> packets = {
      tcp_packet(0, true, tcpflag::SYN),
      tcp_packet(1, false, tcpflag::SYN | tcpflag::ACK),
      tcp_packet(2, true, tcpflag::ACK),
      tcp_packet(3, true, tcpflag::FIN | tcpflag::ACK),
      tcp_packet(4, false, tcpflag::ACK),
      tcp_packet(5, false, tcpflag::FIN | tcpflag::ACK),
      tcp_packet(6, true, tcpflag::ACK),  // trailing ACK joins the closed flow
  };
  auto flows = assemble_flows_session(packets);
  REQUIRE(flows.size() == 1);
  CHECK(flows[0].feature("Total Fwd Packet") + flows[0].feature("Total Bwd Packets") == 7.0);

  // A fresh handshake on the same 5-tuple starts a second flow.
  packets.push_back(tcp_packet(7, true, tcpflag::SYN));
  packets.push_back(tcp_packet(8, false, tcpflag::SYN | tcpflag::ACK));
  flows = assemble_flows_session(packets);
  REQUIRE(flows.size() == 2);
  CHECK(flows[1].feature("Total Fwd Packet") + flows[1].feature("Total Bwd Packets") == 2.0);
}

TEST_CASE("RST also closes a conversation") {
  std::vector<Packet> packets = {
      tcp_packet(0, true, tcpflag::SYN),
      tcp_packet(1, false, tcpflag::RST),
      tcp_packet(2, true, tcpflag::SYN),
  };
  CHECK(assemble_flows_session(packets).size() == 2);
}

TEST_CASE("hand-computed forward IAT example") {
  const std::vector<Packet> packets = {
      tcp_packet(0, true, tcpflag::ACK, 10),
      tcp_packet(1 * kMicrosPerSecond, true, tcpflag::ACK, 20),
      tcp_packet(3 * kMicrosPerSecond, true, tcpflag::ACK, 30),
  };
  const auto rec = compute_features(make_flow_key(packets[0]), packets,
                                    {true, true, true});
  CHECK(rec.feature("Fwd IAT Total") == 3'000'000.0);
  CHECK(rec.feature("Fwd IAT Mean") == 1'500'000.0);
  CHECK(rec.feature("Total Length of Fwd Packet") == 60.0);
  CHECK(rec.feature("Packet Length Mean") == 20.0);
  CHECK(rec.feature("Total Fwd Packet") == 3.0);
}

TEST_CASE("down/up ratio is backward over forward") {
  std::vector<Packet> packets;
  for (int i = 0; i < 2; ++i) packets.push_back(tcp_packet(i, true, tcpflag::ACK, 5));
  for (int i = 2; i < 6; ++i) packets.push_back(tcp_packet(i, false, tcpflag::ACK, 5));
  const auto rec = compute_features(make_flow_key(packets[0]), packets,
                                    {true, true, false, false, false, false});
  CHECK(rec.feature("Down/Up Ratio") == 2.0);
}

TEST_CASE("idle time splits off from total connection flow time") {
  FlowConfig cfg;
  cfg.activityTimeout = 5 * kMicrosPerSecond;
  const std::vector<Packet> packets = {
      tcp_packet(0, true, tcpflag::ACK),
      tcp_packet(1 * kMicrosPerSecond, true, tcpflag::ACK),
      tcp_packet(11 * kMicrosPerSecond, true, tcpflag::ACK),  // 10s idle gap
      tcp_packet(12 * kMicrosPerSecond, true, tcpflag::ACK),
  };
  const auto rec = compute_features(make_flow_key(packets[0]), packets,
                                    {true, true, true, true}, cfg);
  CHECK(rec.feature("Idle Mean") == 10'000'000.0);
  CHECK(rec.feature("Flow Duration") == 12'000'000.0);
  CHECK(rec.feature("Total Connection Flow Time") == 2'000'000.0);
}

TEST_CASE("csv output shape and determinism") {
  const auto packets = synth("icmp-ping");
  const auto flows = assemble_flows_session(packets);
  const std::string csv = write_flow_csv(flows);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header.rfind("Flow ID,Src IP,Src Port,Dst IP,Dst Port,Protocol,Timestamp,"
                     "Flow Duration,",
                     0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(write_flow_csv(flows) == csv);
  const std::string empty = write_flow_csv({});
  CHECK(empty.find("Flow Duration") != std::string::npos);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);
}

TEST_CASE("csv rows are sorted by start time then key") {
  std::vector<Packet> packets = {
      tcp_packet(100, true, tcpflag::ACK, 1, 50002, 80),
      tcp_packet(50, true, tcpflag::ACK, 1, 50001, 80),
  };
  const std::string csv = write_flow_csv(assemble_flows_session(packets));
  CHECK(csv.find("50001") < csv.find("50002"));
}
