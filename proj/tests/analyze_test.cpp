#include <catch2/catch_amalgamated.hpp>

#include "flowforge/analyze.hpp"
#include "flowforge/mock_backend.hpp"

#include "helpers.hpp"

using namespace flowforge;
using testutil::gen_params;

TEST_CASE("capture summary of the ping scenario") {
  const auto packets = synth_traffic("icmp-ping", gen_params(), 0, {});
  const CaptureSummary s = summarize_capture(packets);
  CHECK(s.packetCount == 20);
  CHECK(s.byteSum == 1960);
  CHECK(s.sessionFlows == 1);
  CHECK(s.intervalFlows == 10);
}

TEST_CASE("empty captures summarize to zero") {
  CHECK(summarize_capture({}) == CaptureSummary{});
}

TEST_CASE("repetition statistics use the population std") {
  CaptureSummary a;
  a.packetCount = 10;
  CaptureSummary b;
  b.packetCount = 20;
  const auto stats = repetition_stats({a, b});
  CHECK(stats.at("packetCount").mean == 15.0);
  CHECK(stats.at("packetCount").std == 5.0);
  CHECK(format_mean_std(stats.at("packetCount")) == "15(5)");

  const auto single = repetition_stats({a});
  CHECK(single.at("packetCount").mean == 10.0);
  CHECK(single.at("packetCount").std == 0.0);

  const auto identical = repetition_stats(std::vector<CaptureSummary>(100, a));
  for (const auto& [name, st] : identical) CHECK(st.std == 0.0);

  CHECK_THROWS_AS(repetition_stats({}), AnalyzeError);
}

TEST_CASE("feature distributions share bin edges across sets") {
  const auto packets =
      synth_traffic("tcp-connect-burst", gen_params({{"connections", 8}}), 0, {});
  const auto flows = assemble_flows_session(packets);
  const auto d = feature_distribution({{"a", flows}, {"b", flows}}, "Flow IAT Mean", 8);
  REQUIRE(d.binEdges.size() == 9);
  CHECK(d.counts.at("a") == d.counts.at("b"));
  CHECK(d.stats.at("a").mean == d.stats.at("b").mean);

  std::size_t total = 0;
  for (auto n : d.counts.at("a")) total += n;
  CHECK(total == flows.size());

  CHECK_THROWS_AS(feature_distribution({{"a", flows}}, "Bogus Feature", 8), AnalyzeError);
}

TEST_CASE("a constant feature occupies a single bin with zero std") {
  const auto packets = synth_traffic("icmp-ping", gen_params(), 0, {});
  const auto flows = assemble_flows_interval(packets);
  const auto d = feature_distribution({{"ping", flows}}, "Packet Length Mean", 5);
  std::size_t occupied = 0;
  for (auto n : d.counts.at("ping"))
    if (n > 0) ++occupied;
  CHECK(occupied == 1);
  CHECK(d.stats.at("ping").std == 0.0);
  CHECK(d.stats.at("ping").min == d.stats.at("ping").max);
}

TEST_CASE("delay shifts the Flow IAT Mean distribution by a computable offset") {
  // Pure delay translates all timestamps equally, so within-flow gaps and
  // hence IAT features are unchanged; the offset on Flow IAT Mean is zero
  // while flow start times shift by exactly the delay.
  const auto base = synth_traffic("tcp-syn-scan",
                                  gen_params({{"closedPorts", 5}, {"openPorts", 2}}), 0, {});
  NetworkConditions c;
  c.delay = 100'000;
  const auto delayed = emulate_conditions(base, c, 0);
  const auto fa = assemble_flows_session(base);
  const auto fb = assemble_flows_session(delayed);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fb[i].startTime - fa[i].startTime == 100'000);
    CHECK(fb[i].feature("Flow IAT Mean") == fa[i].feature("Flow IAT Mean"));
  }
  const auto d = feature_distribution({{"base", fa}, {"delayed", fb}}, "Flow IAT Mean", 6);
  CHECK(d.counts.at("base") == d.counts.at("delayed"));
}

TEST_CASE("distribution output renders as csv and json") {
  const auto flows =
      assemble_flows_session(synth_traffic("icmp-ping", gen_params(), 0, {}));
  const auto d = feature_distribution({{"ping", flows}}, "Flow Duration", 4);
  const std::string csv = distribution_to_csv(d);
  CHECK(csv.rfind("bin_low,bin_high,ping\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  const auto j = distribution_to_json(d);
  CHECK(j["feature"] == "Flow Duration");
  CHECK(j["sets"]["ping"]["counts"].size() == 4);
}

TEST_CASE("a capture diffs cleanly against itself under the empty mask") {
  const auto packets = synth_traffic("tcp-connect-burst",
                                     gen_params({{"connections", 4}}), 0, {});
  const DiffReport r = packet_diff(packets, packets, DiffMask{});
  CHECK(r.matched == packets.size());
  CHECK(r.mismatched == 0);
  CHECK(r.unpaired == 0);
  CHECK_FALSE(r.firstDivergence);
}

TEST_CASE("rewritten addresses disappear under the default mask") {
  const auto packets = synth_traffic("tcp-connect-burst",
                                     gen_params({{"connections", 4}}), 0, {});
  auto rewritten = packets;
  for (auto& p : rewritten) {
    p.srcAddr += 0x01000000;
    p.dstAddr += 0x01000000;
    p.timestamp += 12345;
  }
  const DiffReport masked = packet_diff(packets, rewritten);
  CHECK(masked.mismatched == 0);
  CHECK(masked.matched == packets.size());

  const DiffReport strict = packet_diff(packets, rewritten, DiffMask{});
  CHECK(strict.mismatched == packets.size());
  REQUIRE(strict.firstDivergence);
  CHECK(strict.firstDivergence->field == "timestamp");
}

TEST_CASE("length mismatches surface as unpaired packets") {
  auto a = synth_traffic("icmp-ping", gen_params({{"count", 3}}), 0, {});
  auto b = a;
  b.pop_back();
  const DiffReport r = packet_diff(a, b);
  CHECK(r.unpaired == 1);
  CHECK(r.matched == b.size());

  // Symmetric under argument swap.
  const DiffReport rev = packet_diff(b, a);
  CHECK(rev.unpaired == r.unpaired);
  CHECK(rev.matched == r.matched);
  CHECK(rev.mismatched == r.mismatched);
}

TEST_CASE("payload differences are always reported") {
  auto a = synth_traffic("http-get", gen_params({{"requests", 2}}), 0, {});
  auto b = a;
  for (auto& p : b)
    if (!p.payload.empty()) {
      p.payload[0] ^= 0xff;
      break;
    }
  const DiffReport r = packet_diff(a, b);
  CHECK(r.mismatched == 1);
  REQUIRE(r.firstDivergence);
  CHECK(r.firstDivergence->field == "payload");
}
