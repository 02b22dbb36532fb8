#include "etsx/message_pattern.hpp"

#include "etsx/common.hpp"

namespace etsx::ets {

MessagePattern MessagePattern::literal(std::string text) {
  MessagePattern p;
  p.append_literal(text);
  return p;
}

MessagePattern MessagePattern::any() {
  MessagePattern p;
  p.append_wildcard();
  return p;
}

void MessagePattern::append_literal(std::string_view text) {
  if (!segs.empty() && !segs.back().wildcard) {
    segs.back().text += text;
    return;
  }
  segs.push_back(Seg{false, std::string(text)});
}

void MessagePattern::append_wildcard() {
  if (!segs.empty() && segs.back().wildcard) return;  // adjacent wildcards collapse
  segs.push_back(Seg{true, ""});
}

bool MessagePattern::literal_only() const {
  for (const auto& s : segs)
    if (s.wildcard) return false;
  return true;
}

bool MessagePattern::is_any() const { return segs.size() == 1 && segs[0].wildcard; }

bool MessagePattern::matches(std::string_view msg) const {
  // Greedy left-to-right match: literals anchored between wildcards.
  size_t pos = 0;
  bool floating = false;  // a wildcard precedes the next literal
  for (size_t i = 0; i < segs.size(); ++i) {
    const Seg& s = segs[i];
    if (s.wildcard) {
      floating = true;
      continue;
    }
    if (!floating) {
      if (msg.compare(pos, s.text.size(), s.text) != 0) return false;
      pos += s.text.size();
    } else {
      bool is_last_literal = true;
      for (size_t j = i + 1; j < segs.size(); ++j)
        if (!segs[j].wildcard) is_last_literal = false;
      bool trailing_wildcard = !segs.empty() && segs.back().wildcard;
      if (is_last_literal && !trailing_wildcard) {
        // must match at the very end
        if (msg.size() < pos + s.text.size()) return false;
        size_t at = msg.size() - s.text.size();
        if (msg.compare(at, s.text.size(), s.text) != 0) return false;
        pos = msg.size();
      } else {
        size_t found = msg.find(s.text, pos);
        if (found == std::string_view::npos) return false;
        pos = found + s.text.size();
      }
      floating = false;
    }
  }
  if (floating) return true;  // trailing wildcard eats the rest
  return pos == msg.size();
}

std::string MessagePattern::regex_text() const {
  std::string out;
  for (const auto& s : segs) {
    if (s.wildcard)
      out += "[\\s\\S]*";
    else
      out += "\\Q" + s.text + "\\E";
  }
  return out;
}

MessagePattern MessagePattern::parse_regex(const std::string& regex_text) {
  static const std::string kWildcard = "[\\s\\S]*";
  MessagePattern p;
  size_t i = 0;
  while (i < regex_text.size()) {
    if (regex_text.compare(i, kWildcard.size(), kWildcard) == 0) {
      p.append_wildcard();
      i += kWildcard.size();
    } else if (regex_text.compare(i, 2, "\\Q") == 0) {
      size_t end = regex_text.find("\\E", i + 2);
      if (end == std::string::npos) throw Error("unterminated \\Q segment in message pattern");
      p.append_literal(std::string_view(regex_text).substr(i + 2, end - i - 2));
      i = end + 2;
    } else {
      throw Error("malformed message pattern: " + regex_text);
    }
  }
  return p;
}

}  // namespace etsx::ets
