#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "etsx/ir.hpp"

namespace etsx::ir {

struct CallEdge {
  std::string caller;
  std::string callee;  // resolved method sig, or the external sig as written
  int site = -1;       // call statement id in the caller
  bool external = false;
};

struct CallGraph {
  std::vector<CallEdge> edges;  // sorted by (caller, site, callee)

  std::vector<const CallEdge*> edges_from(const std::string& caller) const;
  std::vector<const CallEdge*> edges_to(const std::string& callee) const;
  std::set<std::string> callers_of(const std::string& callee) const;
  std::set<std::string> callees_of(const std::string& caller) const;

private:
  friend CallGraph build_cg(const Program&);
  std::multimap<std::string, size_t> by_caller_;
  std::multimap<std::string, size_t> by_callee_;
};

// One edge per call site and resolved target. Resolution walks the
// superclass chain for the static target and adds an edge per overriding
// subclass implementation (conservative dispatch).
CallGraph build_cg(const Program& program);

// Least hop count from any anchor to target, edges treated bidirectionally.
std::optional<int> call_depth(const CallGraph& cg, const std::set<std::string>& anchors,
                              const std::string& target);

// Directed least hop count caller -> callee (forward call edges only).
std::optional<int> forward_depth(const CallGraph& cg, const std::string& from,
                                 const std::set<std::string>& targets);

}  // namespace etsx::ir
