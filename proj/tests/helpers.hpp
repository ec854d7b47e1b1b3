#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "flowforge/mock_backend.hpp"
#include "flowforge/packet.hpp"

namespace testutil {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(FIXTURE_DIR) / name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("flowforge-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline constexpr flowforge::IpAddr kAtk = (10u << 24) | (244u << 16) | (1u << 8) | 1;
inline constexpr flowforge::IpAddr kTgt = (10u << 24) | (244u << 16) | (2u << 8) | 7;

inline flowforge::GenParams gen_params(
    std::map<std::string, std::int64_t> values = {}) {
  flowforge::GenParams p;
  p.attacker = kAtk;
  p.target = kTgt;
  p.values = std::move(values);
  return p;
}

// Randomized but reproducible traffic over a handful of conversations.
inline std::vector<flowforge::Packet> random_packets(std::uint64_t seed,
                                                     std::size_t count) {
  using namespace flowforge;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> conv(0, 4);
  std::uniform_int_distribution<int> dir(0, 1);
  std::uniform_int_distribution<int> len(0, 400);
  std::uniform_int_distribution<int> gap_ms(1, 8000);
  std::uniform_int_distribution<int> flags(0, 0x3f);

  std::vector<Packet> out;
  Micros t = 1'700'000'000LL * kMicrosPerSecond;
  for (std::size_t i = 0; i < count; ++i) {
    t += static_cast<Micros>(gap_ms(rng)) * 1000;
    const int c = conv(rng);
    Packet p;
    p.timestamp = t;
    const bool fwd = dir(rng) == 0;
    p.srcAddr = fwd ? kAtk : kTgt;
    p.dstAddr = fwd ? kTgt : kAtk;
    if (c == 4) {
      p.protocol = Protocol::ICMP;
      p.icmpMeta = IcmpMeta{static_cast<std::uint8_t>(fwd ? 8 : 0), 0, 7,
                            static_cast<std::uint16_t>(i % 5)};
      p.headerLen = 28;
    } else {
      p.protocol = c % 2 == 0 ? Protocol::TCP : Protocol::UDP;
      p.srcPort = static_cast<std::uint16_t>(fwd ? 50000 + c : 1000 + c);
      p.dstPort = static_cast<std::uint16_t>(fwd ? 1000 + c : 50000 + c);
      p.headerLen = p.protocol == Protocol::TCP ? 40 : 28;
      if (p.protocol == Protocol::TCP)
        p.tcpFlags = static_cast<std::uint8_t>(flags(rng)) & ~flowforge::tcpflag::RST;
    }
    const auto n = static_cast<std::size_t>(len(rng));
    p.payload = flowforge::mockdetail::pattern_payload(n, static_cast<std::uint8_t>(i));
    p.payloadLen = static_cast<std::uint32_t>(n);
    p.rawLen = 14 + p.headerLen + p.payloadLen;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace testutil
