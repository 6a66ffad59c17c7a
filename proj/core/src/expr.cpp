#include "omlab/expr.hpp"

#include <cctype>
#include <cstdlib>
#include <optional>

#include "omlab/error.hpp"

namespace omlab::expr {
namespace {

bool is_delimiter(char c) {
  return c == '(' || c == ')' || c == '[' || c == ']' || c == ',' ||
         std::isspace(static_cast<unsigned char>(c));
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_literal(std::string_view s) {
  if (auto v = parse_double(s)) return v;
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const auto num = parse_double(s.substr(0, slash));
  const auto den = parse_double(s.substr(slash + 1));
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse_all() {
    Node node = parse_value();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + std::string(text_) + "': " + what + " at offset " +
                     std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::vector<Node> parse_sequence(char close) {
    std::vector<Node> items;
    if (consume(close)) return items;
    for (;;) {
      items.push_back(parse_value());
      if (consume(close)) return items;
      if (!consume(',')) fail(std::string("expected ',' or '") + close + "'");
    }
  }

  Node parse_value() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end");
    Node node;
    if (consume('[')) {
      node.kind = Node::Kind::List;
      node.items = parse_sequence(']');
      return node;
    }
    if (consume('(')) {
      node.kind = Node::Kind::List;
      node.items = parse_sequence(')');
      return node;
    }
    std::string token;
    if (text_[pos_] == '"') {
      const auto close = text_.find('"', pos_ + 1);
      if (close == std::string_view::npos) fail("unterminated string");
      token = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
      node.kind = Node::Kind::Word;
      node.text = token;
    } else {
      const auto start = pos_;
      while (pos_ < text_.size() && !is_delimiter(text_[pos_])) ++pos_;
      token = std::string(text_.substr(start, pos_ - start));
      if (token.empty()) fail("expected a value");
      if (auto number = parse_literal(token)) {
        node.kind = Node::Kind::Number;
        node.number = *number;
        node.text = token;
        return node;
      }
      node.kind = Node::Kind::Word;
      node.text = token;
    }
    if (consume('(')) {
      node.kind = Node::Kind::Call;
      node.items = parse_sequence(')');
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Node::is_call(std::string_view name) const { return kind == Kind::Call && text == name; }

double Node::as_number() const {
  if (kind != Kind::Number) throw ParseError("expected a number, got '" + to_string() + "'");
  return number;
}

const std::string& Node::as_word() const {
  if (kind != Kind::Word && kind != Kind::Number)
    throw ParseError("expected a name, got '" + to_string() + "'");
  return text;
}

std::string Node::to_string() const {
  switch (kind) {
    case Kind::Number:
    case Kind::Word:
      return text;
    case Kind::Call:
    case Kind::List: {
      std::string out = kind == Kind::Call ? text + "(" : "[";
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += items[i].to_string();
      }
      return out + (kind == Kind::Call ? ")" : "]");
    }
  }
  return {};
}

Node parse(std::string_view text) { return Parser(text).parse_all(); }

void expect_arity(const Node& node, std::size_t lo, std::size_t hi) {
  const std::size_t n = node.kind == Node::Kind::Call ? node.items.size() : 0;
  if (n < lo || n > hi)
    throw ParseError("'" + node.to_string() + "': expected " + std::to_string(lo) +
                     (hi != lo ? ".." + std::to_string(hi) : "") + " arguments");
}

bool names(const Node& node, std::string_view name) {
  return (node.kind == Node::Kind::Word || node.kind == Node::Kind::Call) && node.text == name;
}

}  // namespace omlab::expr
