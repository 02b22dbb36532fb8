#include "etsx/crash.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace etsx::crash {

std::string CrashReport::id() const {
  std::string blob = exception_type + "\n" + message + "\n";
  for (const auto& f : stack) blob += f + "\n";
  if (version) blob += *version;
  return fnv1a_hex(blob);
}

CrashReport parse_report_text(const std::string& text) {
  CrashReport rep;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false, in_stack = false, type_seen = false, message_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      if (t != "crash/1") throw ParseError("expected header crash/1", line_no, 1);
      header_seen = true;
      continue;
    }
    if (in_stack) {
      std::string frame = t;
      if (starts_with(frame, "at ")) frame = trim(frame.substr(3));
      if (frame.find('.') == std::string::npos)
        throw ParseError("malformed stack frame '" + frame + "'", line_no, 1);
      rep.stack.push_back(frame);
      continue;
    }
    if (starts_with(t, "type:")) {
      rep.exception_type = trim(t.substr(5));
      type_seen = true;
    } else if (starts_with(t, "message:")) {
      rep.message = trim(t.substr(8));
      message_seen = true;
    } else if (starts_with(t, "version:")) {
      rep.version = trim(t.substr(8));
    } else if (t == "stack:") {
      in_stack = true;
    } else {
      throw ParseError("unexpected line in crash report: " + t, line_no, 1);
    }
  }
  if (!header_seen) throw ParseError("empty crash report", 1, 1);
  if (!type_seen) throw Error("crash report missing type line");
  if (rep.stack.empty()) throw Error("crash report missing stack frames");
  if (!message_seen) rep.message_missing = true;
  return rep;
}

void validate_report(const CrashReport& report, const ir::Program& program) {
  auto top = program.partition_of_sig(report.stack.front());
  if (!top || *top != ir::Partition::Framework)
    throw Error("top frame " + report.stack.front() + " does not resolve in the framework");
  bool has_app = false;
  for (const auto& f : report.stack) {
    auto p = program.partition_of_sig(f);
    if (p && *p == ir::Partition::Application) has_app = true;
  }
  if (!has_app) throw Error("no application frame in crash stack");
}

CrashReport parse_crash_report(const std::string& text, const ir::Program& program) {
  CrashReport rep = parse_report_text(text);
  validate_report(rep, program);
  return rep;
}

StackRoles assign_roles(const CrashReport& report, const ir::Program& program) {
  StackRoles roles;
  roles.signaler = report.stack.front();
  const int n = static_cast<int>(report.stack.size());
  auto is_app = [&](int i) {
    auto p = program.partition_of_sig(report.stack[static_cast<size_t>(i)]);
    return p && *p == ir::Partition::Application;
  };
  // topmost framework/application boundary
  int first_app = -1;
  for (int i = 0; i < n; ++i) {
    if (is_app(i)) {
      first_app = i;
      break;
    }
  }
  if (first_app <= 0) throw Error("cannot assign roles: no boundary in stack");
  roles.crash_api = report.stack[static_cast<size_t>(first_app - 1)];
  roles.crash_api_index = first_app - 1;
  roles.crash_method = report.stack[static_cast<size_t>(first_app)];
  roles.crash_method_index = first_app;
  // bottom application frame
  for (int i = n - 1; i >= 0; --i) {
    if (is_app(i)) {
      roles.entry = report.stack[static_cast<size_t>(i)];
      break;
    }
  }
  // interleavings below the first boundary get a warning
  for (int i = first_app + 1; i < n; ++i) {
    if (!is_app(i)) {
      roles.warnings.push_back("interleaved framework frame below the topmost boundary: " +
                               report.stack[static_cast<size_t>(i)] +
                               "; roles use the topmost boundary");
      break;
    }
  }
  return roles;
}

MatchResult best_match_ets(const CrashReport& report, const std::vector<ets::EtsStore>& stores,
                           const std::optional<std::string>& version) {
  if (stores.empty()) throw Error("no ETS stores given");
  const std::string& signaler = report.stack.front();

  struct Cand {
    const ets::Ets* ets;
    std::string version;
  };
  std::vector<Cand> candidates;
  bool signaler_seen = false, type_seen = false;
  std::optional<std::string> want_version = version ? version : report.version;

  for (const auto& store : stores) {
    std::string ver = store.version.value_or("");
    if (want_version && !ver.empty() && ver != *want_version) continue;
    for (const auto& e : store.records) {
      if (e.id.sink.signaler != signaler) continue;
      signaler_seen = true;
      if (e.id.type != report.exception_type) continue;
      type_seen = true;
      if (!report.message_missing && !e.id.message.matches(report.message)) continue;
      candidates.push_back(Cand{&e, ver});
    }
  }
  if (candidates.empty()) {
    std::string why = !signaler_seen ? "no ETS for signaler " + signaler
                      : !type_seen
                          ? "signaler matched but no ETS of type " + report.exception_type
                          : "type matched but the message matched no pattern";
    throw Error("no matching ETS: " + why);
  }

  auto pick = [&](std::vector<Cand>& pool) -> Cand {
    std::sort(pool.begin(), pool.end(), [](const Cand& a, const Cand& b) {
      if (a.version != b.version) return a.version < b.version;
      return a.ets->id.sink.key() < b.ets->id.sink.key();
    });
    return pool.front();
  };

  MatchResult result;
  if (report.message_missing) {
    result.low_confidence = true;
    result.notes.push_back("matched on type and signaler only (empty message)");
  }
  if (want_version) {
    result.ets = *pick(candidates).ets;
    return result;
  }
  // group by ETS-related type, take the most classified one
  std::map<ets::EtsType, std::vector<Cand>> groups;
  for (const auto& c : candidates) groups[ets::classify_ets(*c.ets)].push_back(c);
  size_t best = 0;
  for (const auto& [t, g] : groups) best = std::max(best, g.size());
  std::vector<Cand> pool;
  for (auto& [t, g] : groups)
    if (g.size() == best) pool.insert(pool.end(), g.begin(), g.end());
  result.ets = *pick(pool).ets;
  if (groups.size() > 1)
    result.notes.push_back("multiple ETS-related types matched across versions; majority type " +
                           std::string(ets::ets_type_name(ets::classify_ets(result.ets))) +
                           " selected");
  return result;
}

}  // namespace etsx::crash
