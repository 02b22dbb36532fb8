#include "etsx/defuse.hpp"

#include <algorithm>
#include <deque>

namespace etsx::ir {

namespace {

// The variable this statement defines for reaching-def purposes, with
// field pseudo variables included.
std::vector<std::pair<std::string, int>> stmt_defs(const Stmt& st) {
  std::vector<std::pair<std::string, int>> out;
  if (auto v = st.defined_var()) out.emplace_back(*v, st.id);
  if (st.kind == StmtKind::FieldStore) out.emplace_back(st.field.qualified(), st.id);
  return out;
}

}  // namespace

DefUse::DefUse(const MethodDef& method, const Cfg& cfg) : method_(&method) {
  auto var_id = [this](const std::string& name) {
    auto it = var_ids_.find(name);
    if (it != var_ids_.end()) return it->second;
    int id = static_cast<int>(var_ids_.size());
    var_ids_.emplace(name, id);
    def_sites_.push_back({});
    entry_defs_.push_back(1);  // 1 = no entry def (valid ids are <= 0 or stmt ids)
    return id;
  };

  for (size_t i = 0; i < method.params.size(); ++i)
    entry_defs_[static_cast<size_t>(var_id(method.params[i].name))] =
        param_def_id(static_cast<int>(i));
  entry_defs_[static_cast<size_t>(var_id("this"))] = kThisDef;

  for (const auto& st : method.body) {
    for (auto& [v, s] : stmt_defs(st)) def_sites_[static_cast<size_t>(var_id(v))].push_back(s);
    for (const auto& v : st.used_vars()) var_id(v);
    if (st.kind == StmtKind::FieldLoad || st.kind == StmtKind::FieldStore) {
      int fid = var_id(st.field.qualified());
      if (entry_defs_[static_cast<size_t>(fid)] == 1)
        entry_defs_[static_cast<size_t>(fid)] = kFieldInitDef;
    }
  }

  int n = static_cast<int>(method.body.size());
  in_.assign(static_cast<size_t>(n), {});
  std::vector<std::map<int, std::set<int>>> out(static_cast<size_t>(n));

  std::map<int, std::set<int>> entry_state;
  for (const auto& [name, id] : var_ids_)
    if (entry_defs_[static_cast<size_t>(id)] != 1)
      entry_state[id] = {entry_defs_[static_cast<size_t>(id)]};

  std::deque<int> work;
  for (int i = 0; i < n; ++i) work.push_back(i);
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    std::map<int, std::set<int>> in_state;
    if (s == 0) in_state = entry_state;
    for (int p : cfg.preds[s])
      for (const auto& [v, defs] : out[static_cast<size_t>(p)])
        in_state[v].insert(defs.begin(), defs.end());
    std::map<int, std::set<int>> out_state = in_state;
    for (auto& [v, sid] : stmt_defs(method.body[static_cast<size_t>(s)])) {
      int id = var_ids_.at(v);
      out_state[id] = {sid};
    }
    bool changed = in_state != in_[static_cast<size_t>(s)] || out_state != out[static_cast<size_t>(s)];
    in_[static_cast<size_t>(s)] = std::move(in_state);
    if (changed) {
      out[static_cast<size_t>(s)] = std::move(out_state);
      for (int succ : cfg.succs[s])
        if (std::find(work.begin(), work.end(), succ) == work.end()) work.push_back(succ);
    }
  }
}

std::vector<int> DefUse::defs_reaching(const std::string& var, int at_stmt) const {
  auto it = var_ids_.find(var);
  if (it == var_ids_.end())
    throw Error("unknown variable " + var + " in " + method_->sig());
  if (at_stmt < 0 || at_stmt >= static_cast<int>(in_.size()))
    throw Error("statement id out of range in " + method_->sig());
  const auto& state = in_[static_cast<size_t>(at_stmt)];
  auto dit = state.find(it->second);
  if (dit == state.end()) return {};
  std::vector<int> out(dit->second.begin(), dit->second.end());
  std::sort(out.begin(), out.end());
  return out;
}

DefUse build_def_use(const MethodDef& method, const Cfg& cfg) { return DefUse(method, cfg); }

}  // namespace etsx::ir
