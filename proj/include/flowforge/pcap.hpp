#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowforge/packet.hpp"

namespace flowforge {

struct PcapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReadResult {
  std::vector<Packet> packets;
  std::size_t skipped = 0;  // non-IPv4 frames
};

namespace pcapdetail {

constexpr std::uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNanos = 0xa1b23c4d;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::uint32_t kLinkRawIp = 101;

inline std::uint32_t bswap32(std::uint32_t v) {
  return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}
inline std::uint16_t bswap16(std::uint16_t v) {
  return static_cast<std::uint16_t>((v << 8) | (v >> 8));
}

struct ByteReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;
  bool swap = false;

  bool remaining(std::size_t n) const { return pos + n <= size; }

  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, data + pos, 4);
    pos += 4;
    return swap ? bswap32(v) : v;
  }
  std::uint16_t u16() {
    std::uint16_t v;
    std::memcpy(&v, data + pos, 2);
    pos += 2;
    return swap ? bswap16(v) : v;
  }
};

inline std::uint16_t be16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}
inline std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline std::uint16_t inet_checksum(const std::uint8_t* data, std::size_t len) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < len; i += 2) sum += be16(data + i);
  if (len & 1) sum += std::uint32_t(data[len - 1]) << 8;
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

// Parses one IPv4 packet starting at the IP header. Returns false when the
// frame is not something the pipeline models (fragments, other protocols).
inline bool parse_ipv4(const std::uint8_t* ip, std::size_t len, std::uint32_t orig_len,
                       Micros ts, Packet& out) {
  if (len < 20) return false;
  if ((ip[0] >> 4) != 4) return false;
  const std::size_t ihl = (ip[0] & 0x0f) * 4;
  if (ihl < 20 || len < ihl) return false;
  const std::uint8_t proto = ip[9];

  out = Packet{};
  out.timestamp = ts;
  out.srcAddr = be32(ip + 12);
  out.dstAddr = be32(ip + 16);
  out.rawLen = orig_len;

  const std::uint16_t total_len = be16(ip + 2);
  const std::uint8_t* l4 = ip + ihl;
  const std::size_t l4_captured = len - ihl;
  const std::size_t l4_total = total_len > ihl ? total_len - ihl : l4_captured;

  std::size_t l4_header;
  if (proto == 6) {
    if (l4_captured < 20) return false;
    out.protocol = Protocol::TCP;
    out.srcPort = be16(l4);
    out.dstPort = be16(l4 + 2);
    l4_header = (l4[12] >> 4) * 4;
    if (l4_header < 20 || l4_captured < l4_header) return false;
    out.tcpFlags = l4[13] & 0x3f;
  } else if (proto == 17) {
    if (l4_captured < 8) return false;
    out.protocol = Protocol::UDP;
    out.srcPort = be16(l4);
    out.dstPort = be16(l4 + 2);
    l4_header = 8;
  } else if (proto == 1) {
    if (l4_captured < 8) return false;
    out.protocol = Protocol::ICMP;
    IcmpMeta m;
    m.type = l4[0];
    m.code = l4[1];
    m.id = be16(l4 + 4);
    m.seq = be16(l4 + 6);
    out.icmpMeta = m;
    l4_header = 8;
  } else {
    return false;
  }

  out.headerLen = static_cast<std::uint32_t>(ihl + l4_header);
  out.payloadLen =
      static_cast<std::uint32_t>(l4_total > l4_header ? l4_total - l4_header : 0);
  const std::size_t avail = l4_captured > l4_header ? l4_captured - l4_header : 0;
  const std::size_t take = std::min<std::size_t>(avail, out.payloadLen);
  out.payload.assign(l4 + l4_header, l4 + l4_header + take);
  return true;
}

}  // namespace pcapdetail

// Classic pcap only: microsecond and nanosecond magics, both endiannesses.
// Nanosecond timestamps are truncated to microseconds. Non-IPv4 frames are
// skipped and counted.
inline ReadResult read_packets(const std::vector<std::uint8_t>& bytes) {
  using namespace pcapdetail;
  ReadResult result;
  ByteReader r{bytes.data(), bytes.size()};
  if (!r.remaining(24)) throw PcapError("truncated pcap global header");

  std::uint32_t magic = r.u32();
  bool nanos = false;
  if (magic == kMagicMicros) {
  } else if (magic == kMagicNanos) {
    nanos = true;
  } else if (bswap32(magic) == kMagicMicros) {
    r.swap = true;
  } else if (bswap32(magic) == kMagicNanos) {
    r.swap = true;
    nanos = true;
  } else {
    throw PcapError("bad pcap magic");
  }

  r.u16();  // version major
  r.u16();  // version minor
  r.u32();  // thiszone
  r.u32();  // sigfigs
  r.u32();  // snaplen
  const std::uint32_t linktype = r.u32();
  if (linktype != kLinkEthernet && linktype != kLinkRawIp)
    throw PcapError("unsupported pcap link type " + std::to_string(linktype));

  while (r.pos < r.size) {
    if (!r.remaining(16)) throw PcapError("truncated pcap record header");
    const std::uint32_t ts_sec = r.u32();
    const std::uint32_t ts_frac = r.u32();
    const std::uint32_t incl_len = r.u32();
    const std::uint32_t orig_len = r.u32();
    if (!r.remaining(incl_len)) throw PcapError("truncated pcap record body");
    const std::uint8_t* frame = r.data + r.pos;
    r.pos += incl_len;

    const Micros ts = static_cast<Micros>(ts_sec) * kMicrosPerSecond +
                      (nanos ? ts_frac / 1000 : ts_frac);

    const std::uint8_t* ip = frame;
    std::size_t ip_len = incl_len;
    std::uint32_t ip_orig = orig_len;
    if (linktype == kLinkEthernet) {
      if (incl_len < 14 || be16(frame + 12) != 0x0800) {
        ++result.skipped;
        continue;
      }
      ip = frame + 14;
      ip_len = incl_len - 14;
      ip_orig = orig_len;  // rawLen stays the on-wire frame size
    }

    Packet p;
    if (parse_ipv4(ip, ip_len, ip_orig, ts, p)) {
      result.packets.push_back(std::move(p));
    } else {
      ++result.skipped;
    }
  }
  return result;
}

namespace pcapdetail {

inline void put16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x >> 8));
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
}
inline void put32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(static_cast<std::uint8_t>(x >> 24));
  v.push_back(static_cast<std::uint8_t>((x >> 16) & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
}
inline void put32le(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 16) & 0xff));
  v.push_back(static_cast<std::uint8_t>(x >> 24));
}
inline void put16le(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>(x >> 8));
}

// Builds an Ethernet/IPv4 frame realizing the packet's fields. MAC addresses
// are derived from the IPs so frames are deterministic.
inline std::vector<std::uint8_t> build_frame(const Packet& p) {
  std::vector<std::uint8_t> f;
  auto mac = [&](IpAddr a) {
    f.push_back(0x02);
    f.push_back(0x42);
    put32(f, a);
  };
  mac(p.dstAddr);
  mac(p.srcAddr);
  put16(f, 0x0800);

  std::size_t l4_header = (p.protocol == Protocol::TCP) ? 20 : 8;
  const std::uint16_t total_len =
      static_cast<std::uint16_t>(20 + l4_header + p.payload.size());

  const std::size_t ip_off = f.size();
  f.push_back(0x45);  // version 4, ihl 5
  f.push_back(0);
  put16(f, total_len);
  put16(f, 0);       // id
  put16(f, 0x4000);  // don't fragment
  f.push_back(64);   // ttl
  f.push_back(static_cast<std::uint8_t>(p.protocol));
  put16(f, 0);  // checksum placeholder
  put32(f, p.srcAddr);
  put32(f, p.dstAddr);
  const std::uint16_t ip_sum = inet_checksum(f.data() + ip_off, 20);
  f[ip_off + 10] = static_cast<std::uint8_t>(ip_sum >> 8);
  f[ip_off + 11] = static_cast<std::uint8_t>(ip_sum & 0xff);

  if (p.protocol == Protocol::TCP) {
    put16(f, p.srcPort);
    put16(f, p.dstPort);
    put32(f, 0);  // seq
    put32(f, 0);  // ack
    f.push_back(0x50);  // data offset 5
    f.push_back(p.tcpFlags);
    put16(f, 0xffff);  // window
    put16(f, 0);       // checksum (not computed)
    put16(f, 0);       // urgent
  } else if (p.protocol == Protocol::UDP) {
    put16(f, p.srcPort);
    put16(f, p.dstPort);
    put16(f, static_cast<std::uint16_t>(8 + p.payload.size()));
    put16(f, 0);
  } else {
    const IcmpMeta m = p.icmpMeta.value_or(IcmpMeta{});
    f.push_back(m.type);
    f.push_back(m.code);
    put16(f, 0);  // checksum placeholder
    put16(f, m.id);
    put16(f, m.seq);
  }
  f.insert(f.end(), p.payload.begin(), p.payload.end());
  return f;
}

}  // namespace pcapdetail

// Serializes packets as a classic little-endian microsecond pcap with
// Ethernet framing.
inline std::vector<std::uint8_t> write_pcap(const std::vector<Packet>& packets) {
  using namespace pcapdetail;
  std::vector<std::uint8_t> out;
  put32le(out, kMagicMicros);
  put16le(out, 2);
  put16le(out, 4);
  put32le(out, 0);
  put32le(out, 0);
  put32le(out, 65535);
  put32le(out, kLinkEthernet);
  for (const Packet& p : packets) {
    const auto frame = build_frame(p);
    put32le(out, static_cast<std::uint32_t>(p.timestamp / kMicrosPerSecond));
    put32le(out, static_cast<std::uint32_t>(p.timestamp % kMicrosPerSecond));
    put32le(out, static_cast<std::uint32_t>(frame.size()));
    put32le(out, static_cast<std::uint32_t>(frame.size()));
    out.insert(out.end(), frame.begin(), frame.end());
  }
  return out;
}

}  // namespace flowforge
