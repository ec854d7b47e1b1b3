#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flowforge/packet.hpp"
#include "flowforge/scenario.hpp"

namespace flowforge {

struct NetshapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A rendered traffic-control plan plus the conditions it encodes, so in-process
// executors can apply the same semantics without parsing command strings back.
struct TcPlan {
  std::vector<std::string> commands;
  NetworkConditions conditions;

  bool empty() const { return commands.empty(); }
};

namespace netshapedetail {

inline bool valid_interface(const std::string& name) {
  if (name.empty() || name.size() > 15) return false;
  for (char c : name) {
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
          c == '-' || c == '_' || c == '.' || c == '@'))
      return false;
  }
  return true;
}

}  // namespace netshapedetail

// Renders the qdisc setup: a tbf stage for bandwidth, then a netem stage for
// the impairments, chained as netem under tbf when both are present. A
// zero/default condition set renders an empty plan.
inline TcPlan render_tc_plan(const NetworkConditions& c, const std::string& interface) {
  if (!netshapedetail::valid_interface(interface))
    throw NetshapeError("invalid interface name '" + interface + "'");

  TcPlan plan;
  plan.conditions = c;

  const bool want_bandwidth = c.effective_bandwidth() > 0;
  const bool want_netem = c.effective_delay() > 0 || c.effective_loss() > 0 ||
                          c.effective_corrupt() > 0 || c.effective_duplicate() > 0;
  if (!want_bandwidth && !want_netem) return plan;

  std::string parent = "root handle 1:";
  if (want_bandwidth) {
    std::ostringstream os;
    os << "tc qdisc add dev " << interface << " root handle 1: tbf rate "
       << format_rate(c.effective_bandwidth()) << " latency "
       << format_duration(c.effective_queue_size()) << " burst 32kbit";
    plan.commands.push_back(os.str());
    parent = "parent 1:1 handle 10:";
  }
  if (want_netem) {
    std::ostringstream os;
    os << "tc qdisc add dev " << interface << " " << parent << " netem limit "
       << c.effective_limit();
    if (c.effective_delay() > 0) {
      os << " delay " << format_duration(c.effective_delay());
      if (c.effective_jitter() > 0) {
        os << " " << format_duration(c.effective_jitter());
        if (c.effective_distribution() != "uniform")
          os << " distribution " << c.effective_distribution();
      }
    }
    if (c.effective_loss() > 0) os << " loss " << format_percent(c.effective_loss());
    if (c.effective_corrupt() > 0)
      os << " corrupt " << format_percent(c.effective_corrupt());
    if (c.effective_duplicate() > 0)
      os << " duplicate " << format_percent(c.effective_duplicate());
    if (c.seed) os << " seed " << *c.seed;
    plan.commands.push_back(os.str());
  }
  return plan;
}

namespace netshapedetail {

// Jitter draw in microseconds, centered on zero, scaled by `jitter`.
// Pareto and paretonormal use closed-form approximations of netem's tables.
inline double draw_jitter(std::mt19937_64& rng, Micros jitter,
                          const std::string& distribution) {
  const double j = static_cast<double>(jitter);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (distribution == "uniform") {
    return (uni(rng) * 2.0 - 1.0) * j;
  }
  if (distribution == "pareto") {
    constexpr double alpha = 3.0;
    const double u = std::max(uni(rng), 1e-12);
    const double pareto = (std::pow(u, -1.0 / alpha) - 1.0) / (alpha / (alpha - 1.0) - 1.0);
    return (pareto - 1.0) * j;
  }
  std::normal_distribution<double> norm(0.0, 1.0);
  if (distribution == "paretonormal") {
    constexpr double alpha = 3.0;
    const double u = std::max(uni(rng), 1e-12);
    const double pareto = (std::pow(u, -1.0 / alpha) - 1.0) / (alpha / (alpha - 1.0) - 1.0);
    return (0.25 * (pareto - 1.0) + 0.75 * norm(rng)) * j;
  }
  return norm(rng) * j;  // "normal" and anything unrecognized
}

}  // namespace netshapedetail

// Applies the conditions to a time-ordered packet sequence. Stage order:
// loss -> duplicate -> corrupt -> delay/jitter -> bandwidth serialization.
// All randomness comes from the seed; identical inputs give identical output.
inline std::vector<Packet> emulate_conditions(const std::vector<Packet>& packets,
                                              const NetworkConditions& c,
                                              std::uint64_t seed) {
  using namespace netshapedetail;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  const double loss = c.effective_loss() / 100.0;
  const double duplicate = c.effective_duplicate() / 100.0;
  const double corrupt = c.effective_corrupt() / 100.0;
  const Micros delay = c.effective_delay();
  const Micros jitter = c.effective_jitter();
  const std::uint64_t bandwidth = c.effective_bandwidth();

  std::vector<Packet> stage;
  stage.reserve(packets.size());
  for (const Packet& p : packets) {
    if (loss > 0 && uni(rng) < loss) continue;
    stage.push_back(p);
    if (duplicate > 0 && uni(rng) < duplicate) stage.push_back(p);
  }

  if (corrupt > 0) {
    for (Packet& p : stage) {
      if (uni(rng) < corrupt && !p.payload.empty()) {
        // Flip one bit of one payload byte; headers stay intact so flow
        // keying survives corruption.
        const std::size_t idx = static_cast<std::size_t>(uni(rng) * p.payload.size()) %
                                p.payload.size();
        p.payload[idx] ^= 0x01;
      }
    }
  }

  if (delay > 0 || jitter > 0) {
    for (Packet& p : stage) {
      double shift = static_cast<double>(delay);
      if (jitter > 0) shift += draw_jitter(rng, jitter, c.effective_distribution());
      p.timestamp += static_cast<Micros>(std::llround(std::max(shift, 0.0)));
    }
    // Jitter may make timestamps cross; packets then really do reorder.
    std::stable_sort(stage.begin(), stage.end(),
                     [](const Packet& a, const Packet& b) {
                       return a.timestamp < b.timestamp;
                     });
  }

  if (bandwidth == 0) return stage;

  // Token-bucket serialization: each departure waits for the line to clear.
  // A packet is dropped when the queue holds more than `limit` packets or the
  // queued wait would exceed the queueSize latency bound, whichever trips
  // first.
  std::vector<Packet> out;
  out.reserve(stage.size());
  const std::int64_t limit = c.effective_limit();
  const Micros queue_latency = c.effective_queue_size();
  Micros line_free_at = 0;
  std::deque<Micros> departures;  // departure times of queued/in-flight packets

  for (Packet& p : stage) {
    while (!departures.empty() && departures.front() <= p.timestamp)
      departures.pop_front();
    const Micros tx_us = static_cast<Micros>(
        (static_cast<double>(p.rawLen) * 8.0 / static_cast<double>(bandwidth)) *
        kMicrosPerSecond);
    const Micros start = std::max(p.timestamp, line_free_at);
    const Micros departure = start + tx_us;
    if (static_cast<std::int64_t>(departures.size()) >= limit) continue;
    if (departure - p.timestamp > queue_latency + tx_us) continue;
    line_free_at = departure;
    departures.push_back(departure);
    p.timestamp = departure;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace flowforge
