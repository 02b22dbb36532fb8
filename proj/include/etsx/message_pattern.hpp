#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace etsx::ets {

// Exception-message pattern: literal segments interleaved with
// match-anything wildcards. Rendered as \Qliteral\E[\s\S]* regex text.
struct MessagePattern {
  struct Seg {
    bool wildcard = false;
    std::string text;
    bool operator==(const Seg&) const = default;
  };
  std::vector<Seg> segs;

  static MessagePattern literal(std::string text);
  static MessagePattern any();
  static MessagePattern parse_regex(const std::string& regex_text);

  void append_literal(std::string_view text);
  void append_wildcard();
  bool literal_only() const;
  bool is_any() const;
  bool matches(std::string_view msg) const;
  std::string regex_text() const;
  bool operator==(const MessagePattern&) const = default;
};

}  // namespace etsx::ets
