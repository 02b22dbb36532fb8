#include "etsx/ranking_io.hpp"

#include "json.hpp"

namespace etsx::loc {

using ordered_json = nlohmann::ordered_json;

namespace {

const char* evidence_kind_name(Evidence::Kind k) {
  switch (k) {
    case Evidence::Kind::OverridePath: return "override-path";
    case Evidence::Kind::ValuePassing: return "value-passing";
    case Evidence::Kind::FieldMutation: return "field-mutation";
    case Evidence::Kind::ObjectMutation: return "object-mutation";
    case Evidence::Kind::KeyApiChain: return "keyapi-chain";
    case Evidence::Kind::CgExpansion: return "cg-expansion";
    case Evidence::Kind::StackFrame: return "stack-frame";
  }
  return "?";
}

Evidence::Kind evidence_kind_from(const std::string& s) {
  if (s == "override-path") return Evidence::Kind::OverridePath;
  if (s == "value-passing") return Evidence::Kind::ValuePassing;
  if (s == "field-mutation") return Evidence::Kind::FieldMutation;
  if (s == "object-mutation") return Evidence::Kind::ObjectMutation;
  if (s == "keyapi-chain") return Evidence::Kind::KeyApiChain;
  if (s == "cg-expansion") return Evidence::Kind::CgExpansion;
  return Evidence::Kind::StackFrame;
}

Strategy strategy_from(const std::string& s) {
  if (s == "S1") return Strategy::S1;
  if (s == "S2") return Strategy::S2;
  if (s == "S3") return Strategy::S3;
  if (s == "S4") return Strategy::S4;
  return Strategy::StackDefault;
}

ordered_json evidence_json(const Evidence& ev) {
  ordered_json j;
  j["strategy"] = strategy_name(ev.strategy);
  j["kind"] = evidence_kind_name(ev.kind);
  j["chain"] = ev.chain;
  j["vars"] = ev.vars;
  if (!ev.modified_ref.empty()) j["modified_ref"] = ev.modified_ref;
  if (!ev.key_api.empty()) j["key_api"] = ev.key_api;
  if (!ev.key_field.empty()) j["key_field"] = ev.key_field;
  if (ev.dpt) j["dpt"] = ev.dpt;
  if (ev.key_var) {
    j["key_var"] = {{"mtd", ev.key_var->mtd},
                    {"loc", ev.key_var->loc},
                    {"key_cond_var", ev.key_var->key_cond_var}};
  }
  j["score"] = ev.score;
  j["distance"] = ev.distance ? ordered_json(*ev.distance) : ordered_json(nullptr);
  j["attach_index"] = ev.attach_index;
  return j;
}

Evidence evidence_from(const ordered_json& j) {
  Evidence ev;
  ev.strategy = strategy_from(j.at("strategy").get<std::string>());
  ev.kind = evidence_kind_from(j.at("kind").get<std::string>());
  ev.chain = j.at("chain").get<std::vector<std::string>>();
  ev.vars = j.at("vars").get<std::vector<std::string>>();
  if (j.contains("modified_ref")) ev.modified_ref = j.at("modified_ref").get<std::string>();
  if (j.contains("key_api")) ev.key_api = j.at("key_api").get<std::string>();
  if (j.contains("key_field")) ev.key_field = j.at("key_field").get<std::string>();
  if (j.contains("dpt")) ev.dpt = j.at("dpt").get<int>();
  if (j.contains("key_var")) {
    const auto& kv = j.at("key_var");
    ev.key_var = ets::KeyVar{kv.at("mtd").get<std::string>(), kv.at("loc").get<int>(),
                             kv.at("key_cond_var").get<std::string>()};
  }
  ev.score = j.at("score").get<double>();
  if (!j.at("distance").is_null()) ev.distance = j.at("distance").get<int>();
  ev.attach_index = j.at("attach_index").get<int>();
  return ev;
}

}  // namespace

std::string ranking_to_json(const crash::CrashReport& report, const ets::Ets& ets,
                            const Ranking& ranking) {
  ordered_json j;
  ordered_json rep;
  rep["type"] = report.exception_type;
  rep["message"] = report.message;
  rep["message_missing"] = report.message_missing;
  rep["stack"] = report.stack;
  rep["version"] = report.version ? ordered_json(*report.version) : ordered_json(nullptr);
  j["report"] = rep;
  j["ets"] = ordered_json::parse(ets::serialize_ets_record(ets));
  j["ets_version"] = ets.version ? ordered_json(*ets.version) : ordered_json(nullptr);
  ordered_json cands = ordered_json::array();
  for (const auto& c : ranking.candidates) {
    ordered_json cj;
    cj["sig"] = c.sig;
    cj["score"] = c.score;
    std::vector<std::string> strategies;
    for (auto s : c.strategies) strategies.push_back(strategy_name(s));
    cj["strategies"] = strategies;
    cj["distance"] = c.distance ? ordered_json(*c.distance) : ordered_json(nullptr);
    ordered_json evs = ordered_json::array();
    for (const auto& ev : c.evidence) evs.push_back(evidence_json(ev));
    cj["evidence"] = evs;
    cj["flags"] = c.flags;
    cands.push_back(cj);
  }
  j["candidates"] = cands;
  j["warnings"] = ranking.warnings;
  return j.dump(2);
}

RankingBundle ranking_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  RankingBundle out;
  const auto& rep = j.at("report");
  out.report.exception_type = rep.at("type").get<std::string>();
  out.report.message = rep.at("message").get<std::string>();
  out.report.message_missing = rep.at("message_missing").get<bool>();
  out.report.stack = rep.at("stack").get<std::vector<std::string>>();
  if (!rep.at("version").is_null()) out.report.version = rep.at("version").get<std::string>();
  std::optional<std::string> ver;
  if (!j.at("ets_version").is_null()) ver = j.at("ets_version").get<std::string>();
  out.ets = ets::parse_ets_record(j.at("ets").dump(), ver);
  for (const auto& cj : j.at("candidates")) {
    Candidate c;
    c.sig = cj.at("sig").get<std::string>();
    c.score = cj.at("score").get<double>();
    for (const auto& s : cj.at("strategies"))
      c.strategies.insert(strategy_from(s.get<std::string>()));
    if (!cj.at("distance").is_null()) c.distance = cj.at("distance").get<int>();
    for (const auto& ej : cj.at("evidence")) c.evidence.push_back(evidence_from(ej));
    c.flags = cj.at("flags").get<std::vector<std::string>>();
    out.ranking.candidates.push_back(std::move(c));
  }
  out.ranking.warnings = j.at("warnings").get<std::vector<std::string>>();
  return out;
}

}  // namespace etsx::loc
