#include "etsx/cfg.hpp"

#include <algorithm>
#include <deque>

namespace etsx::ir {

Cfg build_cfg(const MethodDef& method) {
  if (method.body.empty()) throw Error("cannot build CFG for empty method " + method.sig());
  Cfg cfg;
  cfg.method = &method;
  int n = static_cast<int>(method.body.size());
  cfg.succs.assign(n, {});
  cfg.preds.assign(n, {});
  for (const auto& st : method.body) {
    for (int s : st.succs) {
      if (s < 0 || s >= n)
        throw Error("dangling successor id " + std::to_string(s) + " in " + method.sig());
      cfg.succs[st.id].push_back(s);
      cfg.preds[s].push_back(st.id);
    }
  }
  for (auto& p : cfg.preds) std::sort(p.begin(), p.end());

  // unreachable statements are reported, not fatal
  std::vector<bool> seen(n, false);
  std::deque<int> work{0};
  seen[0] = true;
  while (!work.empty()) {
    int cur = work.front();
    work.pop_front();
    for (int s : cfg.succs[cur])
      if (!seen[s]) {
        seen[s] = true;
        work.push_back(s);
      }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i])
      cfg.warnings.push_back("unreachable statement " + std::to_string(i) + " in " + method.sig());
  return cfg;
}

std::vector<int> Cfg::transitive_preds(int stmt) const {
  std::vector<bool> seen(succs.size(), false);
  std::deque<int> work;
  for (int p : preds[stmt]) {
    if (!seen[p]) {
      seen[p] = true;
      work.push_back(p);
    }
  }
  std::vector<int> out;
  while (!work.empty()) {
    int cur = work.front();
    work.pop_front();
    out.push_back(cur);
    for (int p : preds[cur])
      if (!seen[p]) {
        seen[p] = true;
        work.push_back(p);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Cfg::reaches(int from, int to) const {
  if (from == to) return true;
  std::vector<bool> seen(succs.size(), false);
  std::deque<int> work{from};
  seen[from] = true;
  while (!work.empty()) {
    int cur = work.front();
    work.pop_front();
    for (int s : succs[cur]) {
      if (s == to) return true;
      if (!seen[s]) {
        seen[s] = true;
        work.push_back(s);
      }
    }
  }
  return false;
}

}  // namespace etsx::ir
