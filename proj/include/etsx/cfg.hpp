#pragma once

#include <string>
#include <vector>

#include "etsx/ir.hpp"

namespace etsx::ir {

// Control-flow view of one method body. Edge set equals the successor
// lists; entry is statement 0.
struct Cfg {
  const MethodDef* method = nullptr;
  std::vector<std::vector<int>> succs;
  std::vector<std::vector<int>> preds;
  std::vector<std::string> warnings;  // unreachable statements

  int entry() const { return 0; }
  int size() const { return static_cast<int>(succs.size()); }
  // Statements from which `stmt` is reachable (excluding itself), ascending.
  std::vector<int> transitive_preds(int stmt) const;
  bool reaches(int from, int to) const;  // from == to counts as reachable
};

Cfg build_cfg(const MethodDef& method);

}  // namespace etsx::ir
