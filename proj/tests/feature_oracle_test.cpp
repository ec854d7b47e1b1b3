#include <catch2/catch_amalgamated.hpp>

#include "flowforge/pcap.hpp"

#include "oracle.hpp"

using namespace flowforge;

TEST_CASE("every feature matches the brute-force oracle on all fixtures") {
  const auto captures = testoracle::fixture_captures();
  REQUIRE(captures.size() >= 25);

  std::size_t flows_checked = 0;
  for (std::size_t ci = 0; ci < captures.size(); ++ci) {
    CAPTURE(ci);
    REQUIRE(captures[ci].size() <= 200);
    // Round-trip through the pcap layer so the fixtures are real captures.
    const auto capture = read_packets(write_pcap(captures[ci])).packets;
    REQUIRE(capture.size() == captures[ci].size());

    const FlowConfig cfg;
    for (bool interval : {false, true}) {
      const auto flows = interval ? assemble_flows_interval(capture, cfg)
                                  : assemble_flows_session(capture, cfg);
      for (const auto& rec : flows) {
        const auto m = testoracle::members_of(rec, capture, interval);
        REQUIRE(!m.packets.empty());
        for (std::size_t f = 0; f < feature_names().size(); ++f) {
          const std::string& name = feature_names()[f];
          const double expected =
              testoracle::oracle_feature(name, m.packets, m.forward, cfg);
          CAPTURE(name, interval, rec.key.to_string());
          CHECK(testoracle::close_enough(rec.features[f], expected));
        }
        ++flows_checked;
      }
    }
  }
  CHECK(flows_checked > 50);
}
