#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "flowforge/units.hpp"

namespace flowforge {

enum class Protocol : std::uint8_t { TCP = 6, UDP = 17, ICMP = 1 };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::TCP: return "TCP";
    case Protocol::UDP: return "UDP";
    case Protocol::ICMP: return "ICMP";
  }
  return "?";
}

namespace tcpflag {
constexpr std::uint8_t FIN = 0x01;
constexpr std::uint8_t SYN = 0x02;
constexpr std::uint8_t RST = 0x04;
constexpr std::uint8_t PSH = 0x08;
constexpr std::uint8_t ACK = 0x10;
constexpr std::uint8_t URG = 0x20;
}  // namespace tcpflag

// IPv4 addresses as host-order integers.
using IpAddr = std::uint32_t;

inline std::string ip_to_string(IpAddr a) {
  std::ostringstream os;
  os << ((a >> 24) & 0xff) << '.' << ((a >> 16) & 0xff) << '.' << ((a >> 8) & 0xff)
     << '.' << (a & 0xff);
  return os.str();
}

inline std::optional<IpAddr> ip_from_string(const std::string& s) {
  IpAddr out = 0;
  int octet = 0, parts = 0;
  bool have_digit = false;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '.') {
      if (!have_digit || octet > 255) return std::nullopt;
      out = (out << 8) | static_cast<IpAddr>(octet);
      ++parts;
      octet = 0;
      have_digit = false;
    } else if (s[i] >= '0' && s[i] <= '9') {
      octet = octet * 10 + (s[i] - '0');
      have_digit = true;
      if (octet > 255) return std::nullopt;
    } else {
      return std::nullopt;
    }
  }
  if (parts != 4) return std::nullopt;
  return out;
}

struct IcmpMeta {
  std::uint8_t type = 0;
  std::uint8_t code = 0;
  std::uint16_t id = 0;
  std::uint16_t seq = 0;

  bool operator==(const IcmpMeta&) const = default;
};

struct Packet {
  Micros timestamp = 0;  // microseconds since epoch
  IpAddr srcAddr = 0;
  IpAddr dstAddr = 0;
  std::uint16_t srcPort = 0;  // 0 for ICMP
  std::uint16_t dstPort = 0;
  Protocol protocol = Protocol::TCP;
  std::uint32_t headerLen = 0;   // IP header + transport header, bytes
  std::uint32_t payloadLen = 0;  // transport payload, bytes
  std::uint8_t tcpFlags = 0;
  std::optional<IcmpMeta> icmpMeta;
  std::uint32_t rawLen = 0;  // total on-wire bytes
  std::vector<std::uint8_t> payload;  // captured payload bytes (may be truncated)

  bool operator==(const Packet&) const = default;
};

// Canonical bidirectional 5-tuple. (A, B) is the first-packet direction.
struct FlowKey {
  IpAddr addrA = 0;
  std::uint16_t portA = 0;
  IpAddr addrB = 0;
  std::uint16_t portB = 0;
  Protocol protocol = Protocol::TCP;

  bool operator==(const FlowKey&) const = default;

  // True when the packet travels A -> B.
  bool is_forward(const Packet& p) const {
    return p.srcAddr == addrA && p.srcPort == portA && p.dstAddr == addrB &&
           p.dstPort == portB;
  }

  auto ordered() const { return std::tie(addrA, portA, addrB, portB, protocol); }

  std::string to_string() const {
    std::ostringstream os;
    os << ip_to_string(addrA) << '-' << ip_to_string(addrB) << '-' << portA << '-'
       << portB << '-' << static_cast<int>(protocol);
    return os.str();
  }
};

inline FlowKey make_flow_key(const Packet& first) {
  FlowKey k;
  k.addrA = first.srcAddr;
  k.portA = first.srcPort;
  k.addrB = first.dstAddr;
  k.portB = first.dstPort;
  k.protocol = first.protocol;
  return k;
}

}  // namespace flowforge
