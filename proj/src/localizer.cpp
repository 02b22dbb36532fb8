#include "etsx/localizer.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>

#include "etsx/cfg.hpp"
#include "etsx/defuse.hpp"

namespace etsx::loc {

using ir::Atom;
using ir::MethodDef;
using ir::Stmt;
using ir::StmtKind;

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::S1: return "S1";
    case Strategy::S2: return "S2";
    case Strategy::S3: return "S3";
    case Strategy::S4: return "S4";
    case Strategy::StackDefault: return "stack-default";
  }
  return "?";
}

const Candidate* find_candidate(const Ranking& r, const std::string& sig) {
  for (const auto& c : r.candidates)
    if (c.sig == sig) return &c;
  return nullptr;
}

std::optional<int> data_trace_distance(const ir::CallGraph& cg,
                                       const std::vector<std::string>& stack,
                                       const std::string& crash_method, const std::string& sig) {
  std::optional<int> best;
  for (const auto& fj : stack) {
    auto d1 = ir::call_depth(cg, {fj}, sig);
    if (!d1) continue;
    auto d2 = ir::call_depth(cg, {fj}, crash_method);
    if (!d2) continue;
    int total = *d1 + *d2;
    if (!best || total < *best) best = total;
  }
  return best;
}

namespace {

// Call statements in the crash method that resolve to the crashAPI.
std::vector<const Stmt*> crash_sites(const LocateInput& in) {
  std::vector<const Stmt*> out;
  const MethodDef* cm = in.program->find_method(in.roles->crash_method);
  if (!cm) return out;
  for (const auto& st : cm->body) {
    if (st.kind != StmtKind::Call) continue;
    for (const auto* e : in.cg->edges_from(cm->sig()))
      if (e->site == st.id && e->callee == in.roles->crash_api) {
        out.push_back(&st);
        break;
      }
  }
  return out;
}

struct PathNode {
  std::string sig;
  std::string var;
};

struct TraceState {
  const MethodDef* method;
  std::string var;
  int stmt;
  std::vector<PathNode> path;  // outermost first, crashMethod last
  int hops;
};

// Shared backward data trace for S2/S3. Every application method the
// value flows through becomes a candidate; field stores and pre-call
// object mutations contribute their own evidence kinds.
void trace_value(const LocateInput& in, const LocateConfig& config, Strategy strategy,
                 const std::optional<ets::KeyVar>& key_var, const std::string& seed_var,
                 const Stmt& site, std::vector<Candidate>& out) {
  const MethodDef* cm = in.program->find_method(in.roles->crash_method);
  if (!cm) return;

  std::map<std::string, ir::Cfg> cfgs;
  std::map<std::string, ir::DefUse> defuse;
  auto analysis = [&](const MethodDef& m) -> const ir::DefUse& {
    auto it = defuse.find(m.sig());
    if (it != defuse.end()) return it->second;
    auto [cit, ok] = cfgs.emplace(m.sig(), ir::build_cfg(m));
    (void)ok;
    return defuse.emplace(m.sig(), ir::DefUse(m, cit->second)).first->second;
  };

  auto add_candidate = [&](const std::vector<PathNode>& path, Evidence::Kind kind,
                           const std::string& modified_ref) {
    Candidate c;
    c.sig = path.front().sig;
    c.strategies.insert(strategy);
    Evidence ev;
    ev.strategy = strategy;
    ev.kind = kind;
    ev.modified_ref = modified_ref;
    ev.key_var = key_var;
    for (const auto& n : path) {
      ev.chain.push_back(n.sig);
      ev.vars.push_back(n.var);
    }
    c.evidence.push_back(std::move(ev));
    out.push_back(std::move(c));
  };

  std::deque<TraceState> work;
  std::set<std::tuple<std::string, std::string, int>> visited;
  work.push_back(TraceState{cm, seed_var, site.id, {PathNode{cm->sig(), seed_var}}, 0});
  visited.emplace(cm->sig(), seed_var, site.id);
  add_candidate(work.back().path, Evidence::Kind::ValuePassing, "");

  // object-mutation supplement: app callees taking the seed before the
  // crash site
  {
    ir::Cfg cfg = ir::build_cfg(*cm);
    auto preds = cfg.transitive_preds(site.id);
    for (int p : preds) {
      const Stmt& st = cm->body[static_cast<size_t>(p)];
      if (st.kind != StmtKind::Call) continue;
      bool passes_seed = false;
      for (const auto& a : st.args)
        if (a.is_var() && a.text == seed_var) passes_seed = true;
      if (!passes_seed) continue;
      const MethodDef* callee = in.program->resolve_method(st.callee);
      if (!callee || !in.program->is_application_method(callee->sig())) continue;
      add_candidate({PathNode{callee->sig(), seed_var}, PathNode{cm->sig(), seed_var}},
                    Evidence::Kind::ObjectMutation, seed_var);
    }
  }

  while (!work.empty()) {
    TraceState cur = work.front();
    work.pop_front();
    if (cur.hops > config.trace_depth) continue;
    if (cur.var == "this") continue;
    const ir::DefUse& du = analysis(*cur.method);
    if (!du.knows(cur.var)) continue;
    for (int d : du.defs_reaching(cur.var, cur.stmt)) {
      if (ir::is_param_def(d)) {
        int loc = ir::param_loc_of_def(d);
        std::string pname = cur.method->params[static_cast<size_t>(loc)].name;
        for (const auto* edge : in.cg->edges_to(cur.method->sig())) {
          const MethodDef* caller = in.program->find_method(edge->caller);
          if (!caller || caller->body.empty()) continue;
          if (!in.program->is_application_method(caller->sig())) continue;
          const Stmt& call_site = caller->body[static_cast<size_t>(edge->site)];
          if (loc >= static_cast<int>(call_site.args.size())) continue;
          const Atom& actual = call_site.args[static_cast<size_t>(loc)];
          std::vector<PathNode> path = cur.path;
          path.front().var = pname;  // value enters through this parameter
          std::string avar = actual.is_var() ? actual.text : actual.to_text();
          path.insert(path.begin(), PathNode{caller->sig(), avar});
          add_candidate(path, Evidence::Kind::ValuePassing, "");
          if (actual.is_var() &&
              visited.emplace(caller->sig(), actual.text, call_site.id).second) {
            work.push_back(TraceState{caller, actual.text, call_site.id, path, cur.hops + 1});
          }
        }
        continue;
      }
      if (d < 0) continue;
      const Stmt& st = cur.method->body[static_cast<size_t>(d)];
      switch (st.kind) {
        case StmtKind::Assign: {
          std::vector<std::string> vars;
          st.rhs.collect_vars(vars);
          for (const auto& v : vars)
            if (visited.emplace(cur.method->sig(), v, d).second)
              work.push_back(TraceState{cur.method, v, d, cur.path, cur.hops});
          break;
        }
        case StmtKind::Call: {
          const MethodDef* callee = in.program->resolve_method(st.callee);
          if (!callee || callee->body.empty()) break;
          if (!in.program->is_application_method(callee->sig())) break;
          std::vector<PathNode> path = cur.path;
          path.insert(path.begin(), PathNode{callee->sig(), "return"});
          add_candidate(path, Evidence::Kind::ValuePassing, "");
          for (const auto& rs : callee->body) {
            if (rs.kind != StmtKind::Return || !rs.ret_value || !rs.ret_value->is_var()) continue;
            std::vector<PathNode> rpath = path;
            rpath.front().var = rs.ret_value->text;
            if (visited.emplace(callee->sig(), rs.ret_value->text, rs.id).second)
              work.push_back(
                  TraceState{callee, rs.ret_value->text, rs.id, rpath, cur.hops + 1});
          }
          break;
        }
        case StmtKind::FieldLoad: {
          // application methods storing this field join the candidate set
          for (const auto& cls : in.program->classes) {
            if (in.program->partition.at(cls.name) != ir::Partition::Application) continue;
            for (const auto& m : cls.methods) {
              for (const auto& ms : m.body) {
                if (ms.kind != StmtKind::FieldStore || !(ms.field == st.field)) continue;
                std::vector<PathNode> path = cur.path;
                path.insert(path.begin(), PathNode{m.sig(), st.field.qualified()});
                add_candidate(path, Evidence::Kind::FieldMutation, st.field.qualified());
                if (ms.stored.is_var() &&
                    visited.emplace(m.sig(), ms.stored.text, ms.id).second)
                  work.push_back(
                      TraceState{&m, ms.stored.text, ms.id, path, cur.hops + 1});
              }
            }
          }
          break;
        }
        case StmtKind::FieldStore:
          if (st.stored.is_var() &&
              visited.emplace(cur.method->sig(), st.stored.text, d).second)
            work.push_back(TraceState{cur.method, st.stored.text, d, cur.path, cur.hops});
          break;
        default: break;
      }
    }
  }
}

}  // namespace

std::vector<Candidate> strategy_s1(const LocateInput& in, const LocateConfig& config) {
  (void)config;
  std::vector<Candidate> out;
  auto [sig_cls, sig_member] = split_member(in.ets->id.sink.signaler);
  for (const auto& sub : in.program->subclasses_of(sig_cls)) {
    if (in.program->partition.at(sub) != ir::Partition::Application) continue;
    // no override of the signaler anywhere on the chain below sig_cls
    bool overridden = false;
    for (const auto& link : in.program->superclass_chain(sub)) {
      if (link == sig_cls) break;
      if (in.program->find_method(link + "." + sig_member)) overridden = true;
    }
    if (overridden) continue;
    // candidate method: the closest stack method of this class, else a
    // constructor-like method, else the first method
    const ir::ClassDef* cls = in.program->find_class(sub);
    std::string candidate_sig;
    for (const auto& frame : in.report->stack) {
      auto [fcls, fm] = split_member(frame);
      if (fcls == sub) {
        candidate_sig = frame;
        break;
      }
    }
    if (candidate_sig.empty() && cls) {
      for (const auto& m : cls->methods)
        if (m.name == "init" || m.name == "<init>") candidate_sig = m.sig();
      if (candidate_sig.empty() && !cls->methods.empty()) candidate_sig = cls->methods[0].sig();
    }
    if (candidate_sig.empty()) continue;
    Candidate c;
    c.sig = candidate_sig;
    c.strategies.insert(Strategy::S1);
    Evidence ev;
    ev.strategy = Strategy::S1;
    ev.kind = Evidence::Kind::OverridePath;
    for (const auto& link : in.program->superclass_chain(sub)) {
      ev.chain.push_back(link);
      if (link == sig_cls) break;
    }
    c.evidence.push_back(std::move(ev));
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Candidate> strategy_s2(const LocateInput& in, const LocateConfig& config) {
  std::vector<Candidate> out;
  for (const Stmt* site : crash_sites(in)) {
    bool any_var = false;
    for (const auto& a : site->args) {
      if (!a.is_var()) continue;
      any_var = true;
      trace_value(in, config, Strategy::S2, std::nullopt, a.text, *site, out);
    }
    if (!any_var) {
      // constant or no arguments: the crash method itself is the candidate
      Candidate c;
      c.sig = in.roles->crash_method;
      c.strategies.insert(Strategy::S2);
      Evidence ev;
      ev.strategy = Strategy::S2;
      ev.kind = Evidence::Kind::ValuePassing;
      ev.chain = {in.roles->crash_method};
      ev.vars = {"(const)"};
      c.evidence.push_back(std::move(ev));
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<Candidate> strategy_s3(const LocateInput& in, const LocateConfig& config,
                                   std::vector<std::string>& warnings) {
  std::vector<Candidate> out;
  for (const Stmt* site : crash_sites(in)) {
    for (const auto& kv : in.ets->key_vars) {
      if (kv.mtd != in.roles->crash_api) continue;
      if (kv.loc >= static_cast<int>(site->args.size())) {
        warnings.push_back("keyVar position " + std::to_string(kv.loc) +
                           " exceeds crashAPI arity; skipped");
        continue;
      }
      const Atom& a = site->args[static_cast<size_t>(kv.loc)];
      if (!a.is_var()) {
        Candidate c;
        c.sig = in.roles->crash_method;
        c.strategies.insert(Strategy::S3);
        Evidence ev;
        ev.strategy = Strategy::S3;
        ev.kind = Evidence::Kind::ValuePassing;
        ev.chain = {in.roles->crash_method};
        ev.vars = {a.to_text()};
        ev.key_var = kv;
        c.evidence.push_back(std::move(ev));
        out.push_back(std::move(c));
        continue;
      }
      trace_value(in, config, Strategy::S3, kv, a.text, *site, out);
    }
  }
  return out;
}

std::vector<Candidate> strategy_s4(const LocateInput& in, const LocateConfig& config) {
  std::vector<Candidate> out;
  std::set<std::pair<std::string, int>> seen_api;  // (mtd, dpt) deduped
  for (const auto& ka : in.ets->key_apis) {
    if (!seen_api.emplace(ka.mtd, ka.dpt).second) continue;
    struct Node {
      std::string sig;
      std::vector<std::string> chain;  // sig .. keyAPI
      int hops;                        // caller hops above the direct invoker
    };
    std::deque<Node> work;
    std::set<std::string> visited;
    for (const auto* edge : in.cg->edges_to(ka.mtd)) {
      if (!in.program->is_application_method(edge->caller)) continue;
      if (visited.count(edge->caller)) continue;
      visited.insert(edge->caller);
      work.push_back(Node{edge->caller, {edge->caller, ka.mtd}, 0});
    }
    while (!work.empty()) {
      Node cur = work.front();
      work.pop_front();
      Candidate c;
      c.sig = cur.sig;
      c.strategies.insert(Strategy::S4);
      Evidence ev;
      ev.strategy = Strategy::S4;
      ev.kind = Evidence::Kind::KeyApiChain;
      ev.chain = cur.chain;
      ev.key_api = ka.mtd;
      ev.key_field = ka.key_field;
      ev.dpt = ka.dpt;
      ev.distance = cur.hops + ka.dpt;
      c.evidence.push_back(std::move(ev));
      out.push_back(std::move(c));

      if (cur.hops + 1 > config.trace_depth) continue;
      // heavy fan-in stops caller expansion
      if (!config.no_call_filter &&
          static_cast<int>(in.cg->callers_of(cur.sig).size()) > config.caller_cap)
        continue;
      for (const auto* edge : in.cg->edges_to(cur.sig)) {
        if (!in.program->is_application_method(edge->caller)) continue;
        if (!visited.insert(edge->caller).second) continue;
        std::vector<std::string> chain = cur.chain;
        chain.insert(chain.begin(), edge->caller);
        work.push_back(Node{edge->caller, chain, cur.hops + 1});
      }
    }
  }
  return out;
}

namespace {

std::vector<Candidate> pure_cg_candidates(const LocateInput& in, const LocateConfig& config) {
  std::vector<Candidate> out;
  std::map<std::string, int> dist;
  std::deque<std::string> work;
  for (const auto& f : in.report->stack) {
    if (dist.count(f)) continue;
    dist[f] = 0;
    work.push_back(f);
  }
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop_front();
    int d = dist[cur];
    if (d >= config.pure_cg_depth) continue;
    auto step = [&](const std::string& next) {
      if (dist.count(next)) return;
      dist[next] = d + 1;
      work.push_back(next);
    };
    for (const auto* e : in.cg->edges_from(cur)) step(e->callee);
    for (const auto* e : in.cg->edges_to(cur)) step(e->caller);
  }
  for (const auto& [sig, d] : dist) {
    if (!in.program->is_application_method(sig)) continue;
    Candidate c;
    c.sig = sig;
    c.strategies.insert(Strategy::S2);
    Evidence ev;
    ev.strategy = Strategy::S2;
    ev.kind = Evidence::Kind::CgExpansion;
    ev.distance = d;
    ev.chain = {sig};
    c.evidence.push_back(std::move(ev));
    out.push_back(std::move(c));
  }
  return out;
}

int stack_index_of(const std::vector<std::string>& stack, const std::string& sig) {
  for (size_t i = 0; i < stack.size(); ++i)
    if (stack[i] == sig) return static_cast<int>(i);
  return -1;
}

}  // namespace

Ranking locate(const ir::Program& program, const crash::CrashReport& report, const ets::Ets& ets_in,
               const LocateConfig& config) {
  Ranking ranking;
  ir::CallGraph cg = ir::build_cg(program);
  crash::StackRoles roles = crash::assign_roles(report, program);
  for (auto& w : roles.warnings) ranking.warnings.push_back(w);

  ets::Ets ets = ets_in;
  if (config.no_key_var) ets.key_vars.clear();
  if (config.no_key_api) ets.key_apis.clear();

  LocateInput in{&program, &cg, &report, &roles, &ets};

  std::vector<Candidate> raw;
  if (config.pure_cg) {
    raw = pure_cg_candidates(in, config);
  } else {
    std::vector<Strategy> strategies;
    if (config.only_s2) {
      strategies = {Strategy::S2};
    } else {
      switch (ets::classify_ets(ets)) {
        case ets::EtsType::NoKeyCondVar: strategies = {Strategy::S1}; break;
        case ets::EtsType::NoExternalVar: strategies = {Strategy::S2}; break;
        case ets::EtsType::OnlyKeyVar: strategies = {Strategy::S3}; break;
        case ets::EtsType::OnlyKeyAPI: strategies = {Strategy::S4}; break;
        case ets::EtsType::KeyVarAndKeyAPI:
          strategies = {Strategy::S3, Strategy::S4};
          break;
      }
    }
    for (Strategy s : strategies) {
      std::vector<Candidate> got;
      switch (s) {
        case Strategy::S1: got = strategy_s1(in, config); break;
        case Strategy::S2: got = strategy_s2(in, config); break;
        case Strategy::S3: got = strategy_s3(in, config, ranking.warnings); break;
        case Strategy::S4: got = strategy_s4(in, config); break;
        default: break;
      }
      raw.insert(raw.end(), got.begin(), got.end());
    }
  }

  // package-prefix filter against the whole stack
  std::set<std::string> stack_prefixes;
  for (const auto& f : report.stack) {
    auto [cls, m] = split_member(f);
    stack_prefixes.insert(package_prefix(cls, config.package_prefix_len));
  }
  std::vector<Candidate> filtered;
  for (auto& c : raw) {
    auto [cls, m] = split_member(c.sig);
    if (!stack_prefixes.count(package_prefix(cls, config.package_prefix_len))) continue;
    filtered.push_back(std::move(c));
  }

  // score evidence and merge per method
  std::map<std::string, Candidate> merged;
  for (auto& c : filtered) {
    for (auto& ev : c.evidence) {
      switch (ev.kind) {
        case Evidence::Kind::KeyApiChain: {
          int caller_hops = static_cast<int>(ev.chain.size()) - 2;
          ev.score = config.init - caller_hops - ev.dpt;
          ev.distance = caller_hops + ev.dpt;
          break;
        }
        case Evidence::Kind::CgExpansion:
          ev.score = config.init - ev.distance.value_or(0);
          break;
        default: {
          auto dis = data_trace_distance(cg, report.stack, roles.crash_method, c.sig);
          if (dis) {
            ev.score = config.init - *dis;
            ev.distance = dis;
          } else {
            ev.score = config.init - config.floor_delta;
            ev.distance = std::nullopt;
            c.flags.push_back("unreachable-distance");
          }
          break;
        }
      }
      int attach = -1;
      for (const auto& link : ev.chain) {
        int idx = stack_index_of(report.stack, link);
        if (idx >= 0) attach = std::max(attach, idx);
      }
      ev.attach_index = attach;
    }
    auto it = merged.find(c.sig);
    if (it == merged.end()) {
      merged.emplace(c.sig, std::move(c));
    } else {
      Candidate& dst = it->second;
      dst.strategies.insert(c.strategies.begin(), c.strategies.end());
      for (auto& ev : c.evidence) dst.evidence.push_back(std::move(ev));
      for (auto& f : c.flags)
        if (std::find(dst.flags.begin(), dst.flags.end(), f) == dst.flags.end())
          dst.flags.push_back(f);
    }
  }

  std::vector<Candidate> scored;
  for (auto& [sig, c] : merged) {
    double best = -1e18;
    std::optional<int> dist;
    for (const auto& ev : c.evidence) {
      best = std::max(best, ev.score);
      if (ev.distance && (!dist || *ev.distance < *dist)) dist = ev.distance;
    }
    c.score = best;
    c.distance = dist;
    auto [cls, m] = split_member(sig);
    if (!program.in_app_packages(cls, config.package_prefix_len)) {
      c.score -= config.non_app_penalty;
      c.flags.push_back("non-app-package-penalty");
    }
    scored.push_back(std::move(c));
  }

  // stack application frames join with a conservative default score
  for (size_t i = 0; i < report.stack.size(); ++i) {
    const std::string& f = report.stack[i];
    if (!program.is_application_method(f)) continue;
    bool present = false;
    for (const auto& c : scored)
      if (c.sig == f) present = true;
    if (present) continue;
    Candidate c;
    c.sig = f;
    c.score = config.init - config.stack_default_delta;
    c.strategies.insert(Strategy::StackDefault);
    c.distance = static_cast<int>(i);
    Evidence ev;
    ev.strategy = Strategy::StackDefault;
    ev.kind = Evidence::Kind::StackFrame;
    ev.chain = {f};
    ev.score = c.score;
    ev.distance = c.distance;
    ev.attach_index = static_cast<int>(i);
    c.evidence.push_back(std::move(ev));
    scored.push_back(std::move(c));
  }

  std::sort(scored.begin(), scored.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    long da = a.distance ? *a.distance : std::numeric_limits<int>::max();
    long db = b.distance ? *b.distance : std::numeric_limits<int>::max();
    if (da != db) return da < db;
    return a.sig < b.sig;
  });
  ranking.candidates = std::move(scored);
  return ranking;
}

}  // namespace etsx::loc
