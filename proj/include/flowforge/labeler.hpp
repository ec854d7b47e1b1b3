#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowforge/flow.hpp"
#include "flowforge/scenario.hpp"

namespace flowforge {

// Field-wise override: per-target values win, keys present in only one side
// are kept.
inline LabelSet merge_labels(const LabelSet& global,
                             const std::optional<LabelSet>& per_target) {
  if (!per_target) return global;
  LabelSet out = global;
  const LabelSet& t = *per_target;
  if (t.label) out.label = t.label;
  if (t.category) out.category = t.category;
  if (t.subcategory) out.subcategory = t.subcategory;
  if (t.scenario) out.scenario = t.scenario;
  for (const auto& [k, v] : t.extra) out.extra[k] = v;
  return out;
}

struct Provenance {
  std::string scenario;
  std::string target;
  std::string extractor;
  std::string runId;
};

struct LabeledFlowSet {
  std::vector<FlowRecord> flows;
  Provenance provenance;
};

// Label CSV columns: the four fixed names, then sorted extra keys.
inline std::vector<std::pair<std::string, std::string>> label_columns(const LabelSet& l) {
  std::vector<std::pair<std::string, std::string>> cols;
  cols.emplace_back("label", l.label ? std::to_string(*l.label) : "");
  cols.emplace_back("category", l.category.value_or(""));
  cols.emplace_back("subcategory", l.subcategory.value_or(""));
  cols.emplace_back("scenario", l.scenario.value_or(""));
  for (const auto& [k, v] : l.extra) cols.emplace_back(k, v);  // std::map is sorted
  return cols;
}

// Stamps every flow with the full label set. Isolation guarantees all traffic
// in a capture is scenario traffic, so no flow is left unlabeled.
inline LabeledFlowSet annotate_flows(std::vector<FlowRecord> flows, const LabelSet& labels,
                                     const Provenance& provenance) {
  const auto cols = label_columns(labels);
  for (FlowRecord& f : flows) f.labels = cols;
  return LabeledFlowSet{std::move(flows), provenance};
}

// IANA port categories: 0 well-known, 1 registered, 2 dynamic.
inline int encode_port_category(std::uint32_t port) {
  if (port <= 1023) return 0;
  if (port <= 49151) return 1;
  return 2;
}

// ---------------------------------------------------------------------------
// Dataset preparation (CSV-shaped tables)
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const Table&) const = default;
};

namespace labelerdetail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::exchange(cur, {}));
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace labelerdetail

inline Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && is.eof()) break;
    auto cells = labelerdetail::split_csv_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline std::string write_csv(const Table& t) {
  std::ostringstream os;
  auto emit_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << flowdetail::csv_escape(row[i]);
      if (i + 1 < row.size()) os << ',';
    }
    os << '\n';
  };
  emit_row(t.header);
  for (const auto& r : t.rows) emit_row(r);
  return os.str();
}

struct CleanReport {
  std::size_t droppedColumns = 0;
  std::size_t encodedPortColumns = 0;
  std::size_t missingValueRows = 0;
  std::size_t duplicateRows = 0;
};

// Dataset cleaning: drops metadata/spurious columns, maps ports to IANA
// categories, removes rows with missing values, removes exact duplicates.
// Idempotent by construction.
inline std::pair<Table, CleanReport> clean_dataset(const Table& input) {
  static const std::set<std::string> kDropColumns = {
      "id",        "Flow ID",   "Src IP",
      "Dst IP",    "Timestamp", "FWD Init Win Bytes",
      "Bwd Init Win Bytes"};
  static const std::set<std::string> kPortColumns = {"Src Port", "Dst Port"};

  CleanReport report;
  std::vector<std::size_t> keep;
  std::vector<bool> is_port;
  Table out;
  for (std::size_t i = 0; i < input.header.size(); ++i) {
    if (kDropColumns.count(input.header[i])) {
      ++report.droppedColumns;
      continue;
    }
    keep.push_back(i);
    const bool port = kPortColumns.count(input.header[i]) > 0;
    is_port.push_back(port);
    if (port) ++report.encodedPortColumns;
    out.header.push_back(input.header[i]);
  }

  std::set<std::vector<std::string>> seen;
  for (const auto& row : input.rows) {
    std::vector<std::string> cells;
    bool missing = false;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const std::string& cell = keep[k] < row.size() ? row[keep[k]] : "";
      if (cell.empty()) {
        missing = true;
        break;
      }
      if (is_port[k]) {
        // Already-encoded categories (0/1/2) pass through unchanged, which
        // keeps cleaning idempotent.
        try {
          const unsigned long port = std::stoul(cell);
          cells.push_back(cell.size() == 1 && port <= 2
                              ? cell
                              : std::to_string(encode_port_category(
                                    static_cast<std::uint32_t>(port))));
        } catch (...) {
          missing = true;
          break;
        }
      } else {
        cells.push_back(cell);
      }
    }
    if (missing) {
      ++report.missingValueRows;
      continue;
    }
    if (!seen.insert(cells).second) {
      ++report.duplicateRows;
      continue;
    }
    out.rows.push_back(std::move(cells));
  }
  return {std::move(out), report};
}

}  // namespace flowforge
