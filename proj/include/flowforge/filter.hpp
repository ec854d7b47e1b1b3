#pragma once

#include <cctype>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flowforge/packet.hpp"

namespace flowforge {

struct FilterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Capture-filter subset: `host <ip>`, `and`, `or`, `not`, `arp`, parentheses.
// `host` matches source or destination. The pipeline carries IP packets only,
// so `arp` never matches after decoding; it exists so real tcpdump filters
// like "... and not arp" parse and behave.
class CaptureFilter {
 public:
  // Empty or all-whitespace expression matches everything.
  static CaptureFilter parse(const std::string& expression) {
    CaptureFilter f;
    auto tokens = tokenize(expression);
    if (tokens.empty()) return f;
    std::size_t pos = 0;
    f.root_ = parse_or(tokens, pos);
    if (pos != tokens.size())
      throw FilterError("unexpected token '" + tokens[pos] + "' in filter");
    return f;
  }

  bool matches(const Packet& p) const { return root_ ? eval(*root_, p) : true; }

  std::vector<Packet> apply(const std::vector<Packet>& packets) const {
    std::vector<Packet> out;
    for (const Packet& p : packets)
      if (matches(p)) out.push_back(p);
    return out;
  }

 private:
  struct Node {
    enum class Kind { Host, Arp, Not, And, Or } kind;
    IpAddr host = 0;
    std::unique_ptr<Node> lhs, rhs;
  };

  std::shared_ptr<Node> root_;

  static bool eval(const Node& n, const Packet& p) {
    switch (n.kind) {
      case Node::Kind::Host: return p.srcAddr == n.host || p.dstAddr == n.host;
      case Node::Kind::Arp: return false;
      case Node::Kind::Not: return !eval(*n.lhs, p);
      case Node::Kind::And: return eval(*n.lhs, p) && eval(*n.rhs, p);
      case Node::Kind::Or: return eval(*n.lhs, p) || eval(*n.rhs, p);
    }
    return false;
  }

  static std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : s) {
      if (c == '(' || c == ')') {
        if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
        tokens.emplace_back(1, c);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
  }

  static std::unique_ptr<Node> parse_or(const std::vector<std::string>& t,
                                        std::size_t& pos) {
    auto lhs = parse_and(t, pos);
    while (pos < t.size() && t[pos] == "or") {
      ++pos;
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::Or;
      node->lhs = std::move(lhs);
      node->rhs = parse_and(t, pos);
      lhs = std::move(node);
    }
    return lhs;
  }

  static std::unique_ptr<Node> parse_and(const std::vector<std::string>& t,
                                         std::size_t& pos) {
    auto lhs = parse_unary(t, pos);
    while (pos < t.size() && t[pos] == "and") {
      ++pos;
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::And;
      node->lhs = std::move(lhs);
      node->rhs = parse_unary(t, pos);
      lhs = std::move(node);
    }
    return lhs;
  }

  static std::unique_ptr<Node> parse_unary(const std::vector<std::string>& t,
                                           std::size_t& pos) {
    if (pos >= t.size()) throw FilterError("unexpected end of filter expression");
    const std::string& tok = t[pos];
    if (tok == "not") {
      ++pos;
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::Not;
      node->lhs = parse_unary(t, pos);
      return node;
    }
    if (tok == "(") {
      ++pos;
      auto inner = parse_or(t, pos);
      if (pos >= t.size() || t[pos] != ")") throw FilterError("missing ')' in filter");
      ++pos;
      return inner;
    }
    if (tok == "host") {
      ++pos;
      if (pos >= t.size()) throw FilterError("'host' needs an address");
      auto ip = ip_from_string(t[pos]);
      if (!ip) throw FilterError("bad host address '" + t[pos] + "'");
      ++pos;
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::Host;
      node->host = *ip;
      return node;
    }
    if (tok == "arp") {
      ++pos;
      auto node = std::make_unique<Node>();
      node->kind = Node::Kind::Arp;
      return node;
    }
    throw FilterError("unsupported filter token '" + tok + "'");
  }
};

inline std::vector<Packet> apply_capture_filter(const std::vector<Packet>& packets,
                                                const std::string& expression) {
  return CaptureFilter::parse(expression).apply(packets);
}

}  // namespace flowforge
