#pragma once

#include <optional>
#include <string>
#include <vector>

#include "etsx/ets.hpp"
#include "etsx/ir.hpp"

namespace etsx::crash {

struct CrashReport {
  std::string exception_type;
  std::string message;
  bool message_missing = false;
  std::vector<std::string> stack;  // top (signaler) -> bottom (entry)
  std::optional<std::string> version;

  std::string id() const;  // stable content hash
};

// Syntax-only parse of the crash text format (header "crash/1").
CrashReport parse_report_text(const std::string& text);

// Parse plus the partition checks: top frame must resolve into the
// framework, and at least one frame into the application.
CrashReport parse_crash_report(const std::string& text, const ir::Program& program);

void validate_report(const CrashReport& report, const ir::Program& program);

struct StackRoles {
  std::string signaler;
  std::string crash_api;     // first framework frame counting from the application side
  std::string crash_method;  // last application frame, adjacent to crashAPI
  std::string entry;         // bottom application frame
  int crash_api_index = -1;
  int crash_method_index = -1;
  std::vector<std::string> warnings;
};

StackRoles assign_roles(const CrashReport& report, const ir::Program& program);

struct MatchResult {
  ets::Ets ets;
  bool low_confidence = false;  // matched without a message
  std::vector<std::string> notes;
};

// Signaler + exception type + message-pattern match over one or more
// version stores; with an unknown version the majority ETS-related type
// wins, ties broken by lowest version label then lexical sink id.
MatchResult best_match_ets(const CrashReport& report, const std::vector<ets::EtsStore>& stores,
                           const std::optional<std::string>& version = std::nullopt);

}  // namespace etsx::crash
