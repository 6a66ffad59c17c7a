#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace omlab::expr {

// Parsed form of the call-expression grammar shared by every selector string,
// e.g. `mul(wballpow(1/2), rpow(0.25))` or `piecewise([(0,1,2,0),(1,2,1,-1)])`.
struct Node {
  enum class Kind { Number, Word, Call, List };
  Kind kind = Kind::Word;
  double number = 0.0;
  // identifier, path or call name
  std::string text;
  // call arguments or list/tuple items
  std::vector<Node> items;

  [[nodiscard]] bool is_call(std::string_view name) const;
  [[nodiscard]] double as_number() const;
  [[nodiscard]] const std::string& as_word() const;
  [[nodiscard]] std::string to_string() const;
};

Node parse(std::string_view text);

// Throws ParseError unless node is a call with argument count in [lo, hi].
void expect_arity(const Node& node, std::size_t lo, std::size_t hi);

// A bare word `name` or a call `name(...)`.
[[nodiscard]] bool names(const Node& node, std::string_view name);

}  // namespace omlab::expr
