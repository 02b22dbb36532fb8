#include "etsx/callgraph.hpp"

#include <algorithm>
#include <deque>

namespace etsx::ir {

std::vector<const CallEdge*> CallGraph::edges_from(const std::string& caller) const {
  std::vector<const CallEdge*> out;
  auto range = by_caller_.equal_range(caller);
  for (auto it = range.first; it != range.second; ++it) out.push_back(&edges[it->second]);
  return out;
}

std::vector<const CallEdge*> CallGraph::edges_to(const std::string& callee) const {
  std::vector<const CallEdge*> out;
  auto range = by_callee_.equal_range(callee);
  for (auto it = range.first; it != range.second; ++it) out.push_back(&edges[it->second]);
  return out;
}

std::set<std::string> CallGraph::callers_of(const std::string& callee) const {
  std::set<std::string> out;
  for (const CallEdge* e : edges_to(callee)) out.insert(e->caller);
  return out;
}

std::set<std::string> CallGraph::callees_of(const std::string& caller) const {
  std::set<std::string> out;
  for (const CallEdge* e : edges_from(caller)) out.insert(e->callee);
  return out;
}

CallGraph build_cg(const Program& program) {
  CallGraph cg;
  for (const auto& cls : program.classes) {
    for (const auto& m : cls.methods) {
      for (const auto& st : m.body) {
        if (st.kind != StmtKind::Call) continue;
        std::set<std::string> targets;
        bool external = false;
        if (const MethodDef* static_target = program.resolve_method(st.callee)) {
          targets.insert(static_target->sig());
          // conservative dispatch: every subclass override of the static
          // receiver class is also a possible callee
          auto [recv_cls, member] = split_member(st.callee);
          for (const auto& sub : program.subclasses_of(recv_cls)) {
            if (const MethodDef* ov = program.find_method(sub + "." + member))
              targets.insert(ov->sig());
          }
        } else if (program.find_external(st.callee)) {
          targets.insert(st.callee);
          external = true;
        } else {
          throw Error("unresolved callee " + st.callee + " in " + m.sig());
        }
        for (const auto& t : targets)
          cg.edges.push_back(CallEdge{m.sig(), t, st.id, external});
      }
    }
  }
  std::sort(cg.edges.begin(), cg.edges.end(), [](const CallEdge& a, const CallEdge& b) {
    if (a.caller != b.caller) return a.caller < b.caller;
    if (a.site != b.site) return a.site < b.site;
    return a.callee < b.callee;
  });
  for (size_t i = 0; i < cg.edges.size(); ++i) {
    cg.by_caller_.emplace(cg.edges[i].caller, i);
    cg.by_callee_.emplace(cg.edges[i].callee, i);
  }
  return cg;
}

std::optional<int> call_depth(const CallGraph& cg, const std::set<std::string>& anchors,
                              const std::string& target) {
  if (anchors.empty()) throw Error("call_depth requires a non-empty anchor set");
  if (anchors.count(target)) return 0;
  std::map<std::string, int> dist;
  std::deque<std::string> work;
  for (const auto& a : anchors) {
    dist[a] = 0;
    work.push_back(a);
  }
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop_front();
    int d = dist[cur];
    auto visit = [&](const std::string& next) {
      if (dist.count(next)) return false;
      dist[next] = d + 1;
      if (next == target) return true;
      work.push_back(next);
      return false;
    };
    for (const CallEdge* e : cg.edges_from(cur))
      if (visit(e->callee)) return d + 1;
    for (const CallEdge* e : cg.edges_to(cur))
      if (visit(e->caller)) return d + 1;
  }
  return std::nullopt;
}

std::optional<int> forward_depth(const CallGraph& cg, const std::string& from,
                                 const std::set<std::string>& targets) {
  if (targets.count(from)) return 0;
  std::map<std::string, int> dist{{from, 0}};
  std::deque<std::string> work{from};
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop_front();
    int d = dist[cur];
    for (const CallEdge* e : cg.edges_from(cur)) {
      if (dist.count(e->callee)) continue;
      dist[e->callee] = d + 1;
      if (targets.count(e->callee)) return d + 1;
      work.push_back(e->callee);
    }
  }
  return std::nullopt;
}

}  // namespace etsx::ir
