#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace etsx {

// Base error for all engine failures. Parse errors carry a position.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
  ParseError(const std::string& msg, int line, int col)
      : Error(msg + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")"),
        line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

private:
  int line_;
  int col_;
};

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// FNV-1a, used for cassette keys and crash ids.
std::uint64_t fnv1a(std::string_view data);
std::string fnv1a_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Splits a dotted signature "pkg.Cls.member" into {"pkg.Cls", "member"}.
std::pair<std::string, std::string> split_member(const std::string& qualified);

// First n dot-separated elements of a class name ("cgeo.geocaching" for n=2).
std::string package_prefix(const std::string& class_name, int n);

}  // namespace etsx
