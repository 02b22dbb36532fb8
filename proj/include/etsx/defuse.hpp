#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "etsx/cfg.hpp"
#include "etsx/ir.hpp"

namespace etsx::ir {

// Reaching definitions for one method. Fields are tracked as pseudo
// variables keyed by their qualified name ("Cls.f"): field-store defines
// them, field-load reads them, and kFieldInitDef marks the value at entry.
class DefUse {
public:
  DefUse(const MethodDef& method, const Cfg& cfg);

  // Definitions of `var` reaching `at_stmt` (before it executes), sorted
  // ascending. Synthetic ids: param_def_id(loc), kThisDef, kFieldInitDef.
  // Throws on variables unknown to the method.
  std::vector<int> defs_reaching(const std::string& var, int at_stmt) const;

  bool knows(const std::string& var) const { return var_ids_.count(var) != 0; }
  const MethodDef& method() const { return *method_; }

private:
  const MethodDef* method_;
  std::map<std::string, int> var_ids_;
  std::vector<std::vector<int>> def_sites_;               // var id -> defining stmt ids
  std::vector<int> entry_defs_;                           // var id -> synthetic def or 1
  std::vector<std::map<int, std::set<int>>> in_;          // stmt -> var id -> def ids
};

DefUse build_def_use(const MethodDef& method, const Cfg& cfg);

}  // namespace etsx::ir
