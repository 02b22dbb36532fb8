#pragma once

#include <optional>
#include <string>
#include <vector>

#include "etsx/ir.hpp"
#include "etsx/message_pattern.hpp"

namespace etsx::ets {

enum class CondTag { Basic, NotReturn, TryCatch };
const char* cond_tag_name(CondTag t);

struct KeyCond {
  ir::CondExpr cond;
  CondTag tag = CondTag::Basic;
};

// Public framework-method parameter position whose value can reach a
// key condition variable.
struct KeyVar {
  std::string mtd;  // method sig
  int loc = 0;      // 0-based parameter location (rendered 1-based in reports)
  std::string key_cond_var;
  bool operator==(const KeyVar&) const = default;
};

// Public framework method whose invocation mutates a field a key
// condition variable depends on; dpt is 1 for the direct storer.
struct KeyApi {
  std::string mtd;
  std::string key_field;  // qualified Class.field
  std::string key_cond_var;
  int dpt = 1;
  bool operator==(const KeyApi&) const = default;
};

struct SinkRef {
  std::string signaler;  // method sig
  int stmt = -1;
  std::string key() const { return signaler + "#" + std::to_string(stmt); }
  bool operator==(const SinkRef&) const = default;
};

struct EtsId {
  SinkRef sink;
  std::string type;  // exception type
  MessagePattern message;
};

struct Ets {
  EtsId id;
  std::vector<KeyCond> key_conds;
  std::vector<std::string> key_cond_vars;
  std::vector<KeyVar> key_vars;
  std::vector<KeyApi> key_apis;
  std::vector<std::string> flags;  // imprecise-message, coarse-try-catch, nested-catch, ...
  std::optional<std::string> version;

  bool has_flag(const std::string& f) const;
};

enum class EtsType { NoKeyCondVar, NoExternalVar, OnlyKeyVar, OnlyKeyAPI, KeyVarAndKeyAPI };
const char* ets_type_name(EtsType t);

// Table-driven classification over field emptiness; total over all ETSs.
EtsType classify_ets(const Ets& ets);

struct EtsStore {
  std::optional<std::string> version;
  std::vector<Ets> records;
  std::vector<std::string> warnings;  // per-sink extraction warnings
};

// Line-delimited store: "etsstore/1 [version]" header, one record per line,
// stable field order.
std::string serialize_store(const EtsStore& store);
EtsStore parse_store(const std::string& text);
void save_store(const EtsStore& store, const std::string& path);
EtsStore load_store(const std::string& path);

// One record as a compact JSON line (the store's record format).
std::string serialize_ets_record(const Ets& ets);
Ets parse_ets_record(const std::string& json_line,
                     const std::optional<std::string>& version = std::nullopt);

}  // namespace etsx::ets
