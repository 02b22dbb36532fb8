#include <algorithm>

#include "doctest.h"
#include "etsx/crash.hpp"
#include "etsx/ets_extract.hpp"
#include "etsx/ir_parse.hpp"
#include "testutil.hpp"

using namespace etsx;
using testutil::fixture_text;

namespace {

ets::Ets synthetic_ets(const std::string& signaler, int sink, const std::string& version,
                       bool with_vars, bool with_apis) {
  ets::Ets e;
  e.id.sink = ets::SinkRef{signaler, sink};
  e.id.type = "SomeException";
  e.id.message = ets::MessagePattern::literal("boom");
  e.key_cond_vars = {"x"};
  if (with_vars) e.key_vars.push_back(ets::KeyVar{signaler, 0, "x"});
  if (with_apis) e.key_apis.push_back(ets::KeyApi{"F.api", "F.f", "x", 1});
  e.version = version;
  return e;
}

}  // namespace

TEST_CASE("crash parse: motivating report fields and roles") {
  ir::Program program = ir::parse_program(fixture_text("motivating.mir"));
  crash::CrashReport rep =
      crash::parse_crash_report(fixture_text("motivating.crash"), program);
  CHECK(rep.exception_type == "IllegalStateException");
  CHECK(rep.stack.size() == 5);
  CHECK(rep.version == std::optional<std::string>("v10"));
  CHECK_FALSE(rep.message_missing);

  crash::StackRoles roles = crash::assign_roles(rep, program);
  CHECK(roles.signaler == "SQLiteClosable.acquireReference");
  CHECK(roles.crash_api == "SQLiteStatement.simpleQueryForLong");
  CHECK(roles.crash_method == "cgeo.geocaching.DataStore.simpleQueryForLong");
  CHECK(roles.entry == "cgeo.geocaching.MainActivity.run");
  CHECK(roles.warnings.empty());
}

TEST_CASE("crash parse: framework-only stack is rejected") {
  ir::Program program = ir::parse_program(fixture_text("motivating.mir"));
  std::string text =
      "crash/1\ntype: IllegalStateException\nmessage: x\nstack:\n"
      "  SQLiteClosable.acquireReference\n";
  CHECK_THROWS_WITH_AS(crash::parse_crash_report(text, program),
                       doctest::Contains("no application frame"), Error);
}

TEST_CASE("crash parse: missing message is flagged, malformed frame is fatal") {
  ir::Program program = ir::parse_program(fixture_text("motivating.mir"));
  std::string text =
      "crash/1\ntype: IllegalStateException\nstack:\n"
      "  SQLiteClosable.acquireReference\n"
      "  cgeo.geocaching.MainActivity.run\n";
  crash::CrashReport rep = crash::parse_crash_report(text, program);
  CHECK(rep.message_missing);
  CHECK(rep.message.empty());

  CHECK_THROWS_WITH_AS(
      crash::parse_report_text("crash/1\ntype: T\nmessage: m\nstack:\n  noDotsHere\n"),
      doctest::Contains("malformed stack frame"), ParseError);
}

TEST_CASE("roles: single framework frame above an application-only stack") {
  ir::Program program = ir::parse_program(fixture_text("corpus/01_unconditional/program.mir"));
  crash::CrashReport rep =
      crash::parse_crash_report(fixture_text("corpus/01_unconditional/crash.txt"), program);
  crash::StackRoles roles = crash::assign_roles(rep, program);
  CHECK(roles.crash_api == "fw.base.F1.noCondThrow");
  CHECK(roles.crash_api_index == 0);
  CHECK(roles.crash_method == "app.demo.A1.trigger");
  CHECK(roles.entry == "app.demo.A1.trigger");
}

TEST_CASE("roles: interleaved stack uses the topmost boundary and warns") {
  std::string text =
      "mir/1\n"
      "class FW framework\n"
      "  method api() public\n    0: return\n  end\n"
      "  method inner() public\n    0: return\n  end\n"
      "end\n"
      "class app.Main application\n"
      "  method a() public entry\n    0: call FW.api() -> 1\n    1: return\n  end\n"
      "  method b() public\n    0: call FW.inner() -> 1\n    1: return\n  end\n"
      "end\n";
  ir::Program program = ir::parse_program(text);
  crash::CrashReport rep;
  rep.exception_type = "E";
  rep.stack = {"FW.api", "app.Main.a", "FW.inner", "app.Main.b"};
  crash::StackRoles roles = crash::assign_roles(rep, program);
  CHECK(roles.crash_api == "FW.api");
  CHECK(roles.crash_method == "app.Main.a");
  CHECK(roles.entry == "app.Main.b");
  REQUIRE(roles.warnings.size() == 1);
  CHECK(roles.warnings[0].find("topmost boundary") != std::string::npos);
}

TEST_CASE("roles: renaming application packages leaves role indices unchanged") {
  ir::Program program = ir::parse_program(fixture_text("motivating.mir"));
  std::string renamed_text = fixture_text("motivating.mir");
  std::string from = "cgeo.geocaching";
  std::string to = "org.example.app";
  size_t pos = 0;
  while ((pos = renamed_text.find(from, pos)) != std::string::npos) {
    renamed_text.replace(pos, from.size(), to);
    pos += to.size();
  }
  ir::Program renamed = ir::parse_program(renamed_text);
  std::string crash_text = fixture_text("motivating.crash");
  pos = 0;
  while ((pos = crash_text.find(from, pos)) != std::string::npos) {
    crash_text.replace(pos, from.size(), to);
    pos += to.size();
  }
  crash::StackRoles a =
      crash::assign_roles(crash::parse_crash_report(fixture_text("motivating.crash"), program),
                          program);
  crash::StackRoles b =
      crash::assign_roles(crash::parse_crash_report(crash_text, renamed), renamed);
  CHECK(a.crash_api_index == b.crash_api_index);
  CHECK(a.crash_method_index == b.crash_method_index);
}

TEST_CASE("match: motivating message against the extracted pattern") {
  ir::Program program = ir::parse_program(fixture_text("motivating.mir"));
  ets::EtsStore store = ets::extract_ets_serial(program);
  crash::CrashReport rep =
      crash::parse_crash_report(fixture_text("motivating.crash"), program);
  crash::MatchResult m = crash::best_match_ets(rep, {store});
  CHECK(m.ets.id.sink.signaler == "SQLiteClosable.acquireReference");
  CHECK_FALSE(m.low_confidence);
}

TEST_CASE("match: empty message degrades to type+signaler with a flag") {
  ir::Program program = ir::parse_program(fixture_text("motivating.mir"));
  ets::EtsStore store = ets::extract_ets_serial(program);
  crash::CrashReport rep;
  rep.exception_type = "IllegalStateException";
  rep.message_missing = true;
  rep.stack = {"SQLiteClosable.acquireReference", "cgeo.geocaching.MainActivity.run"};
  crash::MatchResult m = crash::best_match_ets(rep, {store});
  CHECK(m.low_confidence);
}

TEST_CASE("match: majority ETS-related type wins across versions") {
  std::vector<ets::EtsStore> stores;
  // three versions classify the exception as OnlyKeyAPI, one as KeyVarAndKeyAPI
  for (int i = 0; i < 3; ++i) {
    ets::EtsStore s;
    s.version = "v" + std::to_string(i + 2);
    s.records.push_back(synthetic_ets("F.sig", 3, *s.version, false, true));
    stores.push_back(std::move(s));
  }
  {
    ets::EtsStore s;
    s.version = "v1";
    s.records.push_back(synthetic_ets("F.sig", 3, "v1", true, true));
    stores.push_back(std::move(s));
  }
  crash::CrashReport rep;
  rep.exception_type = "SomeException";
  rep.message = "boom";
  rep.stack = {"F.sig", "app.Main.run"};

  crash::MatchResult m = crash::best_match_ets(rep, stores);
  CHECK(ets::classify_ets(m.ets) == ets::EtsType::OnlyKeyAPI);
  CHECK(m.ets.version == std::optional<std::string>("v2"));  // lowest version label tie-break

  SUBCASE("store order does not change the selection") {
    std::reverse(stores.begin(), stores.end());
    crash::MatchResult m2 = crash::best_match_ets(rep, stores);
    CHECK(ets::classify_ets(m2.ets) == ets::EtsType::OnlyKeyAPI);
    CHECK(m2.ets.version == std::optional<std::string>("v2"));
  }
  SUBCASE("a known version pins the store") {
    crash::MatchResult m3 = crash::best_match_ets(rep, stores, std::string("v1"));
    CHECK(ets::classify_ets(m3.ets) == ets::EtsType::KeyVarAndKeyAPI);
  }
}

TEST_CASE("match: no-match errors carry nearest-miss diagnostics") {
  std::vector<ets::EtsStore> stores(1);
  stores[0].records.push_back(synthetic_ets("F.sig", 3, "", false, true));
  crash::CrashReport rep;
  rep.exception_type = "SomeException";
  rep.message = "entirely different";
  rep.stack = {"F.sig", "app.Main.run"};
  CHECK_THROWS_WITH_AS(crash::best_match_ets(rep, stores),
                       doctest::Contains("message matched no pattern"), Error);

  rep.exception_type = "OtherException";
  CHECK_THROWS_WITH_AS(crash::best_match_ets(rep, stores), doctest::Contains("no ETS of type"),
                       Error);

  rep.stack = {"F.unknown", "app.Main.run"};
  CHECK_THROWS_WITH_AS(crash::best_match_ets(rep, stores),
                       doctest::Contains("no ETS for signaler"), Error);
}

TEST_CASE("classify_ets covers all five types exclusively") {
  ets::Ets e;
  e.id.type = "E";
  CHECK(ets::classify_ets(e) == ets::EtsType::NoKeyCondVar);
  e.key_cond_vars = {"x"};
  CHECK(ets::classify_ets(e) == ets::EtsType::NoExternalVar);
  e.key_vars.push_back(ets::KeyVar{"F.m", 0, "x"});
  CHECK(ets::classify_ets(e) == ets::EtsType::OnlyKeyVar);
  e.key_apis.push_back(ets::KeyApi{"F.api", "F.f", "x", 1});
  CHECK(ets::classify_ets(e) == ets::EtsType::KeyVarAndKeyAPI);
  e.key_vars.clear();
  CHECK(ets::classify_ets(e) == ets::EtsType::OnlyKeyAPI);
}
