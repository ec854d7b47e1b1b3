#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace flowforge {

// All durations are carried as integer microseconds.
using Micros = std::int64_t;

constexpr Micros kMicrosPerSecond = 1'000'000;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::pair<double, std::string> split_number_suffix(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' ||
          text[i] == '-' || text[i] == '+')) {
    ++i;
  }
  if (i == 0) throw ParseError("expected a number in '" + text + "'");
  double value = std::stod(text.substr(0, i));
  return {value, text.substr(i)};
}

inline std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

// "30s", "100ms", "250us", "2m". A bare number is taken as seconds.
inline Micros parse_duration(const std::string& text) {
  auto [value, suffix] = detail::split_number_suffix(text);
  const std::string unit = detail::to_lower(suffix);
  double factor;
  if (unit == "us" || unit == "µs") factor = 1;
  else if (unit == "ms") factor = 1e3;
  else if (unit == "s" || unit.empty()) factor = 1e6;
  else if (unit == "m") factor = 60e6;
  else if (unit == "h") factor = 3600e6;
  else throw ParseError("unknown duration unit '" + suffix + "'");
  return static_cast<Micros>(value * factor);
}

inline std::string format_duration(Micros us) {
  if (us % kMicrosPerSecond == 0) return std::to_string(us / kMicrosPerSecond) + "s";
  if (us % 1000 == 0) return std::to_string(us / 1000) + "ms";
  return std::to_string(us) + "us";
}

// Rates are bits per second; 0 means unlimited.
inline std::uint64_t parse_rate(const std::string& text) {
  auto [value, suffix] = detail::split_number_suffix(text);
  const std::string unit = detail::to_lower(suffix);
  double factor;
  if (unit == "bit") factor = 1;
  else if (unit == "kbit") factor = 1e3;
  else if (unit == "mbit") factor = 1e6;
  else if (unit == "gbit") factor = 1e9;
  else throw ParseError("unknown rate unit '" + suffix + "'");
  if (value <= 0) throw ParseError("rate must be positive: '" + text + "'");
  return static_cast<std::uint64_t>(value * factor);
}

inline std::string format_rate(std::uint64_t bits_per_second) {
  if (bits_per_second % 1'000'000'000 == 0)
    return std::to_string(bits_per_second / 1'000'000'000) + "gbit";
  if (bits_per_second % 1'000'000 == 0)
    return std::to_string(bits_per_second / 1'000'000) + "mbit";
  if (bits_per_second % 1'000 == 0)
    return std::to_string(bits_per_second / 1'000) + "kbit";
  return std::to_string(bits_per_second) + "bit";
}

// "5%", "12.5%" or a bare number.
inline double parse_percent(const std::string& text) {
  auto [value, suffix] = detail::split_number_suffix(text);
  if (!suffix.empty() && suffix != "%")
    throw ParseError("unknown percentage suffix '" + suffix + "'");
  return value;
}

inline std::string format_percent(double pct) {
  if (pct == static_cast<std::int64_t>(pct))
    return std::to_string(static_cast<std::int64_t>(pct)) + "%";
  std::string s = std::to_string(pct);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s + "%";
}

// CPU quantities: "100m" millicores or "2" whole cores. Stored as millicores.
inline std::int64_t parse_cpu(const std::string& text) {
  auto [value, suffix] = detail::split_number_suffix(text);
  if (suffix == "m") return static_cast<std::int64_t>(value);
  if (suffix.empty()) return static_cast<std::int64_t>(value * 1000);
  throw ParseError("unknown cpu unit '" + suffix + "'");
}

inline std::string format_cpu(std::int64_t millicores) {
  return std::to_string(millicores) + "m";
}

// Memory quantities: "100Mi", "2Gi", "512Ki", bare bytes. Stored as bytes.
inline std::int64_t parse_memory(const std::string& text) {
  auto [value, suffix] = detail::split_number_suffix(text);
  const std::string unit = detail::to_lower(suffix);
  double factor;
  if (unit.empty()) factor = 1;
  else if (unit == "ki") factor = 1024.0;
  else if (unit == "mi") factor = 1024.0 * 1024;
  else if (unit == "gi") factor = 1024.0 * 1024 * 1024;
  else if (unit == "k") factor = 1e3;
  else if (unit == "m") factor = 1e6;
  else if (unit == "g") factor = 1e9;
  else throw ParseError("unknown memory unit '" + suffix + "'");
  return static_cast<std::int64_t>(value * factor);
}

inline std::string format_memory(std::int64_t bytes) {
  constexpr std::int64_t mi = 1024 * 1024;
  if (bytes % (mi * 1024) == 0) return std::to_string(bytes / (mi * 1024)) + "Gi";
  if (bytes % mi == 0) return std::to_string(bytes / mi) + "Mi";
  if (bytes % 1024 == 0) return std::to_string(bytes / 1024) + "Ki";
  return std::to_string(bytes);
}

}  // namespace flowforge
