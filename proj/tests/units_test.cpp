#include <catch2/catch_amalgamated.hpp>

#include "flowforge/units.hpp"

using namespace flowforge;

TEST_CASE("duration parsing covers the tc suffixes") {
  CHECK(parse_duration("30s") == 30 * kMicrosPerSecond);
  CHECK(parse_duration("100ms") == 100'000);
  CHECK(parse_duration("250us") == 250);
  CHECK(parse_duration("2m") == 120 * kMicrosPerSecond);
  CHECK(parse_duration("1h") == 3600 * kMicrosPerSecond);
  CHECK(parse_duration("0ms") == 0);
  CHECK(parse_duration("1.5s") == 1'500'000);
  CHECK(parse_duration("42") == 42 * kMicrosPerSecond);
  CHECK_THROWS_AS(parse_duration("10 parsecs"), ParseError);
  CHECK_THROWS_AS(parse_duration("fast"), ParseError);
}

TEST_CASE("duration formatting picks the largest exact unit") {
  CHECK(format_duration(30 * kMicrosPerSecond) == "30s");
  CHECK(format_duration(100'000) == "100ms");
  CHECK(format_duration(250) == "250us");
  CHECK(parse_duration(format_duration(123'456)) == 123'456);
}

TEST_CASE("rate parsing is case-insensitive about units") {
  CHECK(parse_rate("100mbit") == 100'000'000);
  CHECK(parse_rate("100Mbit") == 100'000'000);
  CHECK(parse_rate("10Mbit") == 10'000'000);
  CHECK(parse_rate("1Gbit") == 1'000'000'000);
  CHECK(parse_rate("56kbit") == 56'000);
  CHECK(parse_rate("300bit") == 300);
  CHECK_THROWS_AS(parse_rate("100"), ParseError);
  CHECK_THROWS_AS(parse_rate("-5mbit"), ParseError);
}

TEST_CASE("rate formatting round-trips") {
  CHECK(format_rate(100'000'000) == "100mbit");
  CHECK(format_rate(1'000'000'000) == "1gbit");
  CHECK(parse_rate(format_rate(56'000)) == 56'000);
}

TEST_CASE("percent parsing accepts bare numbers and % suffix") {
  CHECK(parse_percent("5%") == 5.0);
  CHECK(parse_percent("12.5%") == 12.5);
  CHECK(parse_percent("0%") == 0.0);
  CHECK(parse_percent("3") == 3.0);
  CHECK_THROWS_AS(parse_percent("5pc"), ParseError);
  CHECK(format_percent(5.0) == "5%");
  CHECK(format_percent(12.5) == "12.5%");
}

TEST_CASE("cpu quantities are stored as millicores") {
  CHECK(parse_cpu("100m") == 100);
  CHECK(parse_cpu("500m") == 500);
  CHECK(parse_cpu("2") == 2000);
  CHECK(format_cpu(100) == "100m");
  CHECK_THROWS_AS(parse_cpu("100x"), ParseError);
}

TEST_CASE("memory quantities are stored as bytes") {
  CHECK(parse_memory("100Mi") == 100LL * 1024 * 1024);
  CHECK(parse_memory("250Mi") == 250LL * 1024 * 1024);
  CHECK(parse_memory("2Gi") == 2LL * 1024 * 1024 * 1024);
  CHECK(parse_memory("512Ki") == 512LL * 1024);
  CHECK(parse_memory("4096") == 4096);
  CHECK(parse_memory("1M") == 1'000'000);
  CHECK(format_memory(100LL * 1024 * 1024) == "100Mi");
  CHECK_THROWS_AS(parse_memory("1Ti"), ParseError);
}
