#include "etsx/ets.hpp"

#include <algorithm>
#include <sstream>

#include "etsx/ir_parse.hpp"
#include "json.hpp"

namespace etsx::ets {

using ordered_json = nlohmann::ordered_json;

const char* cond_tag_name(CondTag t) {
  switch (t) {
    case CondTag::Basic: return "basic";
    case CondTag::NotReturn: return "not-return";
    case CondTag::TryCatch: return "try-catch";
  }
  return "?";
}

const char* ets_type_name(EtsType t) {
  switch (t) {
    case EtsType::NoKeyCondVar: return "NoKeyCondVar";
    case EtsType::NoExternalVar: return "NoExternalVar";
    case EtsType::OnlyKeyVar: return "OnlyKeyVar";
    case EtsType::OnlyKeyAPI: return "OnlyKeyAPI";
    case EtsType::KeyVarAndKeyAPI: return "KeyVarAndKeyAPI";
  }
  return "?";
}

bool Ets::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

EtsType classify_ets(const Ets& ets) {
  if (ets.key_cond_vars.empty()) return EtsType::NoKeyCondVar;
  bool vars = !ets.key_vars.empty();
  bool apis = !ets.key_apis.empty();
  if (!vars && !apis) return EtsType::NoExternalVar;
  if (vars && apis) return EtsType::KeyVarAndKeyAPI;
  return vars ? EtsType::OnlyKeyVar : EtsType::OnlyKeyAPI;
}

namespace {

ordered_json ets_to_json(const Ets& e) {
  ordered_json j;
  j["signaler"] = e.id.sink.signaler;
  j["sink_stmt"] = e.id.sink.stmt;
  j["type"] = e.id.type;
  j["message"] = e.id.message.regex_text();
  ordered_json conds = ordered_json::array();
  for (const auto& kc : e.key_conds) {
    ordered_json c;
    c["cond"] = kc.cond.to_text();
    c["tag"] = cond_tag_name(kc.tag);
    conds.push_back(c);
  }
  j["key_conds"] = conds;
  j["key_cond_vars"] = e.key_cond_vars;
  ordered_json kvs = ordered_json::array();
  for (const auto& kv : e.key_vars) {
    ordered_json v;
    v["mtd"] = kv.mtd;
    v["loc"] = kv.loc;
    v["key_cond_var"] = kv.key_cond_var;
    kvs.push_back(v);
  }
  j["key_vars"] = kvs;
  ordered_json kas = ordered_json::array();
  for (const auto& ka : e.key_apis) {
    ordered_json a;
    a["mtd"] = ka.mtd;
    a["key_field"] = ka.key_field;
    a["key_cond_var"] = ka.key_cond_var;
    a["dpt"] = ka.dpt;
    kas.push_back(a);
  }
  j["key_apis"] = kas;
  j["flags"] = e.flags;
  return j;
}

Ets ets_from_json(const ordered_json& j, const std::optional<std::string>& version) {
  Ets e;
  e.id.sink.signaler = j.at("signaler").get<std::string>();
  e.id.sink.stmt = j.at("sink_stmt").get<int>();
  e.id.type = j.at("type").get<std::string>();
  e.id.message = MessagePattern::parse_regex(j.at("message").get<std::string>());
  for (const auto& c : j.at("key_conds")) {
    KeyCond kc;
    kc.cond = ir::parse_cond_text(c.at("cond").get<std::string>());
    std::string tag = c.at("tag").get<std::string>();
    kc.tag = tag == "basic" ? CondTag::Basic
                            : tag == "not-return" ? CondTag::NotReturn : CondTag::TryCatch;
    e.key_conds.push_back(std::move(kc));
  }
  e.key_cond_vars = j.at("key_cond_vars").get<std::vector<std::string>>();
  for (const auto& v : j.at("key_vars"))
    e.key_vars.push_back(KeyVar{v.at("mtd").get<std::string>(), v.at("loc").get<int>(),
                                v.at("key_cond_var").get<std::string>()});
  for (const auto& a : j.at("key_apis"))
    e.key_apis.push_back(KeyApi{a.at("mtd").get<std::string>(), a.at("key_field").get<std::string>(),
                                a.at("key_cond_var").get<std::string>(), a.at("dpt").get<int>()});
  e.flags = j.at("flags").get<std::vector<std::string>>();
  e.version = version;
  return e;
}

}  // namespace

std::string serialize_ets_record(const Ets& ets) { return ets_to_json(ets).dump(); }

Ets parse_ets_record(const std::string& json_line, const std::optional<std::string>& version) {
  return ets_from_json(ordered_json::parse(json_line), version);
}

std::string serialize_store(const EtsStore& store) {
  std::ostringstream os;
  os << "etsstore/1";
  if (store.version) os << " " << *store.version;
  os << "\n";
  for (const auto& e : store.records) os << ets_to_json(e).dump() << "\n";
  return os.str();
}

EtsStore parse_store(const std::string& text) {
  EtsStore store;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error("empty ETS store");
  auto parts = split(trim(line), ' ');
  if (parts.empty() || parts[0] != "etsstore/1")
    throw Error("bad ETS store header: " + line);
  if (parts.size() > 1 && !parts[1].empty()) store.version = parts[1];
  while (std::getline(is, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    store.records.push_back(ets_from_json(ordered_json::parse(t), store.version));
  }
  return store;
}

void save_store(const EtsStore& store, const std::string& path) {
  write_file(path, serialize_store(store));
}

EtsStore load_store(const std::string& path) { return parse_store(read_file(path)); }

}  // namespace etsx::ets
