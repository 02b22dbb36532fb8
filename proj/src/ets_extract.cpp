#include "etsx/ets_extract.hpp"

#include <algorithm>
#include <deque>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace etsx::ets {

using ir::Atom;
using ir::CondExpr;
using ir::MethodDef;
using ir::Stmt;
using ir::StmtKind;

AnalysisCache::AnalysisCache(const ir::Program& program) : program_(&program) {
  for (const auto& cls : program.classes) {
    for (const auto& m : cls.methods) {
      if (m.body.empty()) continue;
      auto [it, ok] = cfgs_.emplace(m.sig(), ir::build_cfg(m));
      (void)ok;
      defuses_.emplace(m.sig(), ir::DefUse(m, it->second));
    }
  }
}

const ir::Cfg& AnalysisCache::cfg_of(const std::string& sig) const {
  auto it = cfgs_.find(sig);
  if (it == cfgs_.end()) throw Error("no CFG for " + sig);
  return it->second;
}

const ir::DefUse& AnalysisCache::defuse_of(const std::string& sig) const {
  auto it = defuses_.find(sig);
  if (it == defuses_.end()) throw Error("no def-use index for " + sig);
  return it->second;
}

namespace {

bool exception_like(const std::string& type) {
  return type == "Throwable" || ends_with(type, "Exception") || ends_with(type, "Error");
}

// Best-effort type of a throwable variable, following the def chain.
std::string infer_throwable_type(const ir::Program& program, const AnalysisCache& cache,
                                 const MethodDef& method, const std::string& var, int at,
                                 int depth) {
  if (depth <= 0) return "";
  const ir::DefUse& du = cache.defuse_of(method.sig());
  if (!du.knows(var)) return "";
  for (int d : du.defs_reaching(var, at)) {
    if (ir::is_param_def(d)) {
      const auto& p = method.params[static_cast<size_t>(ir::param_loc_of_def(d))];
      if (exception_like(p.type)) return p.type;
      continue;
    }
    if (d < 0) continue;
    const Stmt& st = method.body[static_cast<size_t>(d)];
    switch (st.kind) {
      case StmtKind::Assign:
        if (st.rhs.kind == ir::RhsExpr::Kind::New && exception_like(st.rhs.new_type))
          return st.rhs.new_type;
        if (st.rhs.kind == ir::RhsExpr::Kind::Atom1 && st.rhs.parts[0].is_var()) {
          std::string t = infer_throwable_type(program, cache, method, st.rhs.parts[0].text, d, depth - 1);
          if (!t.empty()) return t;
        }
        break;
      case StmtKind::Catch:
        return st.caught_type;
      case StmtKind::Call: {
        if (const auto* ext = program.find_external(st.callee)) {
          if (!ext->declared_throws.empty()) return ext->declared_throws[0];
        }
        break;
      }
      default: break;
    }
  }
  return "";
}

// ---- message analysis -------------------------------------------------

struct MsgFrame {
  const MethodDef* method;
  // formal parameter name -> (actual atom, call statement id) in the parent
  std::map<std::string, std::pair<Atom, int>> actuals;
  const MsgFrame* parent = nullptr;
};

void append_message_var(const ir::Program&, const AnalysisCache&, const MsgFrame&,
                        const std::string&, int, int, MessagePattern&);

void append_message_atom(const ir::Program& program, const AnalysisCache& cache,
                         const MsgFrame& frame, const Atom& a, int at, int depth,
                         MessagePattern& out) {
  switch (a.kind) {
    case Atom::Kind::Str: out.append_literal(a.text); return;
    case Atom::Kind::Int: out.append_literal(std::to_string(a.value)); return;
    case Atom::Kind::Null: out.append_literal("null"); return;
    case Atom::Kind::Var: append_message_var(program, cache, frame, a.text, at, depth, out); return;
  }
}

void append_message_var(const ir::Program& program, const AnalysisCache& cache,
                        const MsgFrame& frame, const std::string& var, int at, int depth,
                        MessagePattern& out) {
  if (depth <= 0) {
    out.append_wildcard();
    return;
  }
  const ir::DefUse& du = cache.defuse_of(frame.method->sig());
  if (!du.knows(var)) {
    out.append_wildcard();
    return;
  }
  std::vector<int> defs = du.defs_reaching(var, at);
  if (defs.size() != 1) {
    out.append_wildcard();
    return;
  }
  int d = defs[0];
  if (ir::is_param_def(d)) {
    auto it = frame.actuals.find(var);
    if (it != frame.actuals.end() && frame.parent) {
      append_message_atom(program, cache, *frame.parent, it->second.first, it->second.second,
                          depth - 1, out);
    } else {
      out.append_wildcard();
    }
    return;
  }
  if (d < 0) {
    out.append_wildcard();
    return;
  }
  const Stmt& st = frame.method->body[static_cast<size_t>(d)];
  if (st.kind == StmtKind::Assign) {
    const auto& rhs = st.rhs;
    if (rhs.kind == ir::RhsExpr::Kind::Atom1) {
      append_message_atom(program, cache, frame, rhs.parts[0], d, depth, out);
      return;
    }
    if (rhs.kind == ir::RhsExpr::Kind::Chain) {
      bool all_concat = std::all_of(rhs.ops.begin(), rhs.ops.end(),
                                    [](const std::string& o) { return o == "+"; });
      if (all_concat) {
        for (const auto& part : rhs.parts)
          append_message_atom(program, cache, frame, part, d, depth, out);
        return;
      }
    }
  }
  out.append_wildcard();
}

// Resolves the exception variable to its instantiation point, following
// aliasing across method boundaries. Frames live in `storage` so that
// parent pointers stay valid while the message is rendered.
struct Instantiation {
  const MethodDef* method = nullptr;
  int stmt = -1;  // the assigning statement with the New right-hand side
  const MsgFrame* frame = nullptr;
};

bool find_instantiation(const ir::Program& program, const AnalysisCache& cache,
                        std::deque<MsgFrame>& storage, const MsgFrame* frame,
                        const std::string& var, int at, int depth, Instantiation& out) {
  if (depth <= 0) return false;
  const ir::DefUse& du = cache.defuse_of(frame->method->sig());
  if (!du.knows(var)) return false;
  std::vector<int> defs = du.defs_reaching(var, at);
  if (defs.size() != 1) return false;
  int d = defs[0];
  if (d < 0) return false;
  const Stmt& st = frame->method->body[static_cast<size_t>(d)];
  switch (st.kind) {
    case StmtKind::Assign:
      if (st.rhs.kind == ir::RhsExpr::Kind::New) {
        out.method = frame->method;
        out.stmt = d;
        out.frame = frame;
        return true;
      }
      if (st.rhs.kind == ir::RhsExpr::Kind::Atom1 && st.rhs.parts[0].is_var())
        return find_instantiation(program, cache, storage, frame, st.rhs.parts[0].text, d,
                                  depth - 1, out);
      return false;
    case StmtKind::Call: {
      const MethodDef* callee = program.resolve_method(st.callee);
      if (!callee || callee->body.empty()) return false;
      storage.push_back(MsgFrame{});
      MsgFrame* inner = &storage.back();
      inner->method = callee;
      inner->parent = frame;
      for (size_t i = 0; i < callee->params.size() && i < st.args.size(); ++i)
        inner->actuals.emplace(callee->params[i].name, std::make_pair(st.args[i], st.id));
      for (const auto& rs : callee->body) {
        if (rs.kind != StmtKind::Return || !rs.ret_value || !rs.ret_value->is_var()) continue;
        if (find_instantiation(program, cache, storage, inner, rs.ret_value->text, rs.id,
                               depth - 1, out))
          return true;
      }
      return false;
    }
    default: return false;
  }
}

}  // namespace

std::vector<SinkPoint> find_sink_points(const ir::Program& program, const MethodDef& method,
                                        const AnalysisCache& cache, const ExtractConfig& config) {
  std::vector<SinkPoint> out;
  for (const auto& st : method.body) {
    if (st.kind == StmtKind::Throw) {
      out.push_back(SinkPoint{st.id, st.thrown_var, false});
      continue;
    }
    if (st.kind != StmtKind::Call) continue;
    auto [cls, member] = split_member(st.callee);
    bool is_handler =
        std::find(config.handler_methods.begin(), config.handler_methods.end(), member) !=
            config.handler_methods.end() ||
        std::find(config.handler_methods.begin(), config.handler_methods.end(), st.callee) !=
            config.handler_methods.end();
    if (!is_handler) continue;
    for (const auto& a : st.args) {
      if (!a.is_var()) continue;
      if (!infer_throwable_type(program, cache, method, a.text, st.id, 4).empty()) {
        out.push_back(SinkPoint{st.id, a.text, true});
        break;
      }
    }
  }
  return out;  // body order == statement id order
}

ExceptionInfo analyze_exception(const ir::Program& program, const AnalysisCache& cache,
                                const MethodDef& method, const SinkPoint& sink,
                                const ExtractConfig& config) {
  ExceptionInfo info;
  std::deque<MsgFrame> storage;
  storage.push_back(MsgFrame{});
  storage.back().method = &method;
  Instantiation inst;
  if (find_instantiation(program, cache, storage, &storage.front(), sink.exception_var,
                         sink.stmt, config.message_trace_depth, inst)) {
    const Stmt& st = inst.method->body[static_cast<size_t>(inst.stmt)];
    info.type = st.rhs.new_type;
    MessagePattern p;
    for (const auto& arg : st.rhs.new_args)
      append_message_atom(program, cache, *inst.frame, arg, inst.stmt,
                          config.message_trace_depth, p);
    info.message = p;
    return info;
  }
  std::string t = infer_throwable_type(program, cache, method, sink.exception_var, sink.stmt, 4);
  info.type = t.empty() ? "Throwable" : t;
  info.message = MessagePattern::any();
  info.imprecise = true;
  return info;
}

namespace {

// Splits a condition tree at and/or nodes; each resulting subtree is one
// key condition.
void flatten_cond(const CondExpr& c, std::vector<CondExpr>& out) {
  if (c.kind == CondExpr::Kind::And || c.kind == CondExpr::Kind::Or) {
    for (const auto& k : c.kids) flatten_cond(k, out);
  } else {
    out.push_back(c);
  }
}

bool has_cond(const Ets& ets, const CondExpr& c) {
  for (const auto& kc : ets.key_conds)
    if (kc.cond.equal(c)) return true;
  return false;
}

void add_cond(Ets& ets, const CondExpr& c, CondTag tag, int stmt, const ExtractConfig& config,
              std::vector<Seed>& seeds) {
  if (static_cast<int>(ets.key_conds.size()) >= config.key_cond_threshold) return;
  if (has_cond(ets, c)) return;
  ets.key_conds.push_back(KeyCond{c, tag});
  std::vector<std::string> vars;
  c.collect_vars(vars);
  for (const auto& v : vars) {
    if (std::find(ets.key_cond_vars.begin(), ets.key_cond_vars.end(), v) ==
        ets.key_cond_vars.end())
      ets.key_cond_vars.push_back(v);
    seeds.push_back(Seed{v, stmt});
  }
}

// Predecessors in backward-BFS order, nearest first.
std::vector<int> preds_nearest_first(const ir::Cfg& cfg, int stmt) {
  std::vector<int> order;
  std::set<int> seen;
  std::deque<int> work;
  for (int p : cfg.preds[stmt])
    if (seen.insert(p).second) work.push_back(p);
  while (!work.empty()) {
    int cur = work.front();
    work.pop_front();
    order.push_back(cur);
    for (int p : cfg.preds[cur])
      if (seen.insert(p).second) work.push_back(p);
  }
  return order;
}

}  // namespace

void key_conds_and_vars(Ets& ets, const MethodDef& method, const ir::Cfg& cfg, int stmt,
                        CondTag tag, const ExtractConfig& config, std::vector<Seed>& seeds) {
  for (int p : preds_nearest_first(cfg, stmt)) {
    const Stmt& st = method.body[static_cast<size_t>(p)];
    if (!st.is_cond_check()) continue;
    bool via_true = cfg.reaches(st.succs[0], stmt);
    bool via_false = cfg.reaches(st.succs[1], stmt);
    if (!(via_true && !via_false)) continue;  // only checks whose satisfaction leads here
    std::vector<CondExpr> parts;
    flatten_cond(st.cond, parts);
    for (const auto& c : parts) add_cond(ets, c, tag, st.id, config, seeds);
  }
}

void not_return_conds(Ets& ets, const MethodDef& method, const ir::Cfg& cfg, int sink,
                      const ExtractConfig& config, std::vector<Seed>& seeds) {
  if (!ets.key_conds.empty()) return;
  std::vector<int> sink_preds = cfg.transitive_preds(sink);
  std::set<int> sink_pred_set(sink_preds.begin(), sink_preds.end());
  for (const auto& st : method.body) {
    if (st.kind != StmtKind::Return) continue;
    // a return "precedes" the sink when its guard region overlaps the
    // sink's predecessors
    bool related = false;
    for (int p : cfg.preds[st.id])
      if (sink_pred_set.count(p) || p == sink) related = true;
    if (!related) continue;
    key_conds_and_vars(ets, method, cfg, st.id, CondTag::NotReturn, config, seeds);
  }
}

void try_catch_conds(Ets& ets, const ir::Program& program, const AnalysisCache& cache,
                     const MethodDef& method, int sink, const ExtractConfig& config,
                     std::vector<Seed>& seeds) {
  // innermost catch whose body contains the sink
  const Stmt* catch_stmt = nullptr;
  int enclosing = 0;
  for (const auto& st : method.body) {
    if (st.kind != StmtKind::Catch) continue;
    if (std::find(st.catch_body.begin(), st.catch_body.end(), sink) == st.catch_body.end())
      continue;
    ++enclosing;
    if (!catch_stmt || st.catch_body.size() < catch_stmt->catch_body.size()) catch_stmt = &st;
  }
  if (!catch_stmt) return;
  if (enclosing > 1 && !ets.has_flag("nested-catch")) ets.flags.push_back("nested-catch");

  const Stmt* try_stmt = nullptr;
  for (const auto& st : method.body)
    if (st.kind == StmtKind::TryEnter && st.handler == catch_stmt->id) try_stmt = &st;
  if (!try_stmt) return;

  auto add_cond_var = [&](const std::string& v, int at) {
    if (std::find(ets.key_cond_vars.begin(), ets.key_cond_vars.end(), v) ==
        ets.key_cond_vars.end())
      ets.key_cond_vars.push_back(v);
    seeds.push_back(Seed{v, at});
  };

  bool matched = false;
  for (int id : try_stmt->try_block) {
    const Stmt& st = method.body[static_cast<size_t>(id)];
    if (st.kind != StmtKind::Call) continue;
    std::vector<std::string> declared;
    const MethodDef* callee = program.resolve_method(st.callee);
    if (callee)
      declared = callee->declared_throws;
    else if (const auto* ext = program.find_external(st.callee))
      declared = ext->declared_throws;
    bool hit = false;
    for (const auto& t : declared)
      if (program.is_subtype(t, catch_stmt->caught_type)) hit = true;
    if (!hit) continue;
    matched = true;
    for (const auto& a : st.args)
      if (a.is_var()) add_cond_var(a.text, st.id);
    if (!callee || callee->body.empty()) continue;
    // lift the callee's own exception-guarding conditions, actuals
    // substituted for formals
    std::map<std::string, Atom> subst;
    for (size_t i = 0; i < callee->params.size() && i < st.args.size(); ++i)
      subst.emplace(callee->params[i].name, st.args[i]);
    const ir::Cfg& ccfg = cache.cfg_of(callee->sig());
    for (const auto& cs : callee->body) {
      if (cs.kind != StmtKind::Throw) continue;
      Ets sub;
      std::vector<Seed> sub_seeds;
      key_conds_and_vars(sub, *callee, ccfg, cs.id, CondTag::TryCatch, config, sub_seeds);
      for (const auto& kc : sub.key_conds) {
        CondExpr lifted = kc.cond.substitute(subst);
        std::vector<std::string> check;
        lifted.collect_vars(check);
        bool var_lhs_ok = true;
        std::function<void(const CondExpr&)> walk = [&](const CondExpr& c) {
          if (c.kind == CondExpr::Kind::Cmp) {
            if (!c.lhs.is_var()) var_lhs_ok = false;
          } else {
            for (const auto& k : c.kids) walk(k);
          }
        };
        walk(lifted);
        if (!var_lhs_ok) continue;  // actual was a literal; nothing traceable
        if (static_cast<int>(ets.key_conds.size()) >= config.key_cond_threshold) break;
        if (!has_cond(ets, lifted)) {
          ets.key_conds.push_back(KeyCond{lifted, CondTag::TryCatch});
          for (const auto& v : check) add_cond_var(v, st.id);
        }
      }
    }
  }
  if (!matched) {
    // no callee declares a compatible exception: record every variable
    // used in the try block
    for (int id : try_stmt->try_block) {
      const Stmt& st = method.body[static_cast<size_t>(id)];
      for (const auto& v : st.used_vars()) add_cond_var(v, st.id);
    }
    if (!ets.has_flag("coarse-try-catch")) ets.flags.push_back("coarse-try-catch");
  }
}

std::vector<ExternalVar> collect_external_vars(const ir::Program& program,
                                               const AnalysisCache& cache,
                                               const MethodDef& method,
                                               const std::vector<Seed>& seeds,
                                               std::vector<std::string>* flags) {
  const ir::DefUse& du = cache.defuse_of(method.sig());
  std::vector<ExternalVar> out;
  auto emit = [&out](ExternalVar ev) {
    if (std::find(out.begin(), out.end(), ev) == out.end()) out.push_back(std::move(ev));
  };
  auto add_flag = [flags](const std::string& f) {
    if (flags && std::find(flags->begin(), flags->end(), f) == flags->end()) flags->push_back(f);
  };

  struct Item {
    std::string var;
    int stmt;
    std::string root;
  };
  std::deque<Item> work;
  std::set<std::tuple<std::string, std::string, int>> visited;  // (root, var, stmt)
  for (const auto& s : seeds) {
    if (visited.emplace(s.var, s.var, s.stmt).second) work.push_back(Item{s.var, s.stmt, s.var});
  }

  while (!work.empty()) {
    Item item = work.front();
    work.pop_front();
    if (item.var == "this") continue;
    if (!du.knows(item.var)) continue;
    auto push = [&](const std::string& v, int at) {
      if (visited.emplace(item.root, v, at).second) work.push_back(Item{v, at, item.root});
    };
    for (int d : du.defs_reaching(item.var, item.stmt)) {
      if (ir::is_param_def(d)) {
        ExternalVar ev;
        ev.kind = ExternalVar::Kind::Parameter;
        ev.mtd = method.sig();
        ev.loc = ir::param_loc_of_def(d);
        ev.influenced = item.root;
        emit(std::move(ev));
        continue;
      }
      if (d == ir::kThisDef || d == ir::kFieldInitDef) continue;
      if (d < 0) continue;
      const Stmt& st = method.body[static_cast<size_t>(d)];
      switch (st.kind) {
        case StmtKind::Assign: {
          std::vector<std::string> vars;
          st.rhs.collect_vars(vars);
          for (const auto& v : vars) push(v, d);
          break;
        }
        case StmtKind::Call: {
          if (program.resolve_method(st.callee)) {
            for (const auto& a : st.args)
              if (a.is_var()) push(a.text, d);
          } else {
            add_flag("external-influence");
          }
          break;
        }
        case StmtKind::FieldLoad: {
          const ir::FieldDef* fd = program.find_field(st.field);
          if (!(fd && fd->is_final)) {
            ExternalVar ev;
            ev.kind = ExternalVar::Kind::Field;
            ev.field = st.field;
            ev.influenced = item.root;
            emit(std::move(ev));
            push(st.field.qualified(), d);  // trace reaching stores
          }
          break;
        }
        case StmtKind::FieldStore:
          if (st.stored.is_var()) push(st.stored.text, d);
          break;
        default: break;
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const ExternalVar& a, const ExternalVar& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.kind == ExternalVar::Kind::Parameter) {
      if (a.mtd != b.mtd) return a.mtd < b.mtd;
      if (a.loc != b.loc) return a.loc < b.loc;
    } else if (!(a.field == b.field)) {
      return a.field < b.field;
    }
    return a.influenced < b.influenced;
  });
  return out;
}

void trace_key_vars(Ets& ets, const ir::Program& program, const AnalysisCache& cache,
                    const ir::CallGraph& cg, const MethodDef& signaler,
                    const std::vector<ExternalVar>& externals, const ExtractConfig& config) {
  struct Pos {
    std::string mtd;
    int loc;
    std::string influenced;
  };
  std::vector<Pos> frontier;
  std::set<std::pair<std::string, int>> seen;
  auto record = [&](const std::string& mtd, int loc, const std::string& influenced) {
    const MethodDef* m = program.find_method(mtd);
    if (m && m->is_public) {
      KeyVar kv{mtd, loc, influenced};
      if (std::find(ets.key_vars.begin(), ets.key_vars.end(), kv) == ets.key_vars.end())
        ets.key_vars.push_back(kv);
    }
  };

  for (const auto& ev : externals) {
    if (ev.kind != ExternalVar::Kind::Parameter) continue;
    record(signaler.sig(), ev.loc, ev.influenced);
    if (seen.emplace(signaler.sig(), ev.loc).second)
      frontier.push_back(Pos{signaler.sig(), ev.loc, ev.influenced});
  }

  for (int depth = 0; depth < config.interproc_depth && !frontier.empty(); ++depth) {
    std::vector<Pos> next;
    for (const auto& pos : frontier) {
      for (const auto* edge : cg.edges_to(pos.mtd)) {
        const MethodDef* caller = program.find_method(edge->caller);
        if (!caller || caller->body.empty()) continue;
        if (!program.is_framework_method(caller->sig())) continue;
        const Stmt& site = caller->body[static_cast<size_t>(edge->site)];
        if (pos.loc >= static_cast<int>(site.args.size())) continue;
        const Atom& actual = site.args[static_cast<size_t>(pos.loc)];
        if (!actual.is_var()) continue;
        auto roots = collect_external_vars(program, cache, *caller,
                                           {Seed{actual.text, site.id}}, nullptr);
        for (const auto& r : roots) {
          if (r.kind != ExternalVar::Kind::Parameter) continue;
          if (!seen.emplace(caller->sig(), r.loc).second) continue;
          record(caller->sig(), r.loc, pos.influenced);
          next.push_back(Pos{caller->sig(), r.loc, pos.influenced});
        }
      }
    }
    frontier = std::move(next);
  }

  std::sort(ets.key_vars.begin(), ets.key_vars.end(), [](const KeyVar& a, const KeyVar& b) {
    if (a.mtd != b.mtd) return a.mtd < b.mtd;
    if (a.loc != b.loc) return a.loc < b.loc;
    return a.key_cond_var < b.key_cond_var;
  });
}

void collect_key_apis(Ets& ets, const ir::Program& program, const ir::CallGraph& cg,
                      const std::vector<ExternalVar>& externals, const ExtractConfig& config) {
  for (const auto& ev : externals) {
    if (ev.kind != ExternalVar::Kind::Field) continue;
    // methods storing the field directly, any visibility
    std::set<std::string> storers;
    for (const auto& cls : program.classes) {
      if (program.partition.at(cls.name) != ir::Partition::Framework) continue;
      for (const auto& m : cls.methods)
        for (const auto& st : m.body)
          if (st.kind == StmtKind::FieldStore && st.field == ev.field) storers.insert(m.sig());
    }
    if (storers.empty()) continue;
    // reverse BFS over call edges, dpt = 1 at the storer itself
    std::map<std::string, int> dist;
    std::deque<std::string> work;
    for (const auto& s : storers) {
      dist[s] = 0;
      work.push_back(s);
    }
    while (!work.empty()) {
      std::string cur = work.front();
      work.pop_front();
      int d = dist[cur];
      if (d >= config.interproc_depth) continue;
      for (const auto* edge : cg.edges_to(cur)) {
        if (!program.is_framework_method(edge->caller)) continue;
        if (dist.count(edge->caller)) continue;
        dist[edge->caller] = d + 1;
        work.push_back(edge->caller);
      }
    }
    for (const auto& [mtd, d] : dist) {
      const MethodDef* m = program.find_method(mtd);
      if (!m || !m->is_public) continue;
      KeyApi ka{mtd, ev.field.qualified(), ev.influenced, d + 1};
      bool merged = false;
      for (auto& existing : ets.key_apis) {
        if (existing.mtd == ka.mtd && existing.key_field == ka.key_field &&
            existing.key_cond_var == ka.key_cond_var) {
          existing.dpt = std::min(existing.dpt, ka.dpt);
          merged = true;
        }
      }
      if (!merged) ets.key_apis.push_back(std::move(ka));
    }
  }
  std::sort(ets.key_apis.begin(), ets.key_apis.end(), [](const KeyApi& a, const KeyApi& b) {
    if (a.dpt != b.dpt) return a.dpt < b.dpt;
    if (a.mtd != b.mtd) return a.mtd < b.mtd;
    if (a.key_field != b.key_field) return a.key_field < b.key_field;
    return a.key_cond_var < b.key_cond_var;
  });
}

std::vector<Ets> extract_for_signaler(const ir::Program& program, const AnalysisCache& cache,
                                      const ir::CallGraph& cg, const MethodDef& method,
                                      const ExtractConfig& config,
                                      std::vector<std::string>& warnings) {
  std::vector<Ets> out;
  if (method.body.empty()) return out;
  const ir::Cfg& cfg = cache.cfg_of(method.sig());
  for (const auto& sink : find_sink_points(program, method, cache, config)) {
    try {
      Ets ets;
      ets.id.sink = SinkRef{method.sig(), sink.stmt};
      ets.version = program.version;
      ExceptionInfo info = analyze_exception(program, cache, method, sink, config);
      ets.id.type = info.type;
      ets.id.message = info.message;
      if (info.imprecise) ets.flags.push_back("imprecise-message");

      std::vector<Seed> seeds;
      key_conds_and_vars(ets, method, cfg, sink.stmt, CondTag::Basic, config, seeds);
      not_return_conds(ets, method, cfg, sink.stmt, config, seeds);
      try_catch_conds(ets, program, cache, method, sink.stmt, config, seeds);

      auto externals = collect_external_vars(program, cache, method, seeds, &ets.flags);
      trace_key_vars(ets, program, cache, cg, method, externals, config);
      collect_key_apis(ets, program, cg, externals, config);
      out.push_back(std::move(ets));
    } catch (const Error& e) {
      warnings.push_back("sink " + method.sig() + "#" + std::to_string(sink.stmt) + ": " +
                         e.what());
    }
  }
  return out;
}

namespace {

EtsStore extract_all(const ir::Program& program, const ExtractConfig& config, bool parallel) {
  AnalysisCache cache(program);
  ir::CallGraph cg = ir::build_cg(program);

  std::vector<const MethodDef*> signalers;
  for (const auto& cls : program.classes) {
    if (program.partition.at(cls.name) != ir::Partition::Framework) continue;
    for (const auto& m : cls.methods)
      if (!m.body.empty()) signalers.push_back(&m);
  }
  std::sort(signalers.begin(), signalers.end(),
            [](const MethodDef* a, const MethodDef* b) { return a->sig() < b->sig(); });

  std::vector<std::vector<Ets>> results(signalers.size());
  std::vector<std::vector<std::string>> warns(signalers.size());
  int n = static_cast<int>(signalers.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
      try {
        results[static_cast<size_t>(i)] = extract_for_signaler(
            program, cache, cg, *signalers[static_cast<size_t>(i)], config,
            warns[static_cast<size_t>(i)]);
      } catch (const std::exception& e) {
        warns[static_cast<size_t>(i)].push_back(std::string("signaler failed: ") + e.what());
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      try {
        results[static_cast<size_t>(i)] = extract_for_signaler(
            program, cache, cg, *signalers[static_cast<size_t>(i)], config,
            warns[static_cast<size_t>(i)]);
      } catch (const std::exception& e) {
        warns[static_cast<size_t>(i)].push_back(std::string("signaler failed: ") + e.what());
      }
    }
  }

  EtsStore store;
  store.version = program.version;
  for (size_t i = 0; i < results.size(); ++i) {
    for (auto& e : results[i]) store.records.push_back(std::move(e));
    for (auto& w : warns[i]) store.warnings.push_back(std::move(w));
  }
  return store;
}

}  // namespace

EtsStore extract_ets(const ir::Program& program, const ExtractConfig& config) {
  return extract_all(program, config, true);
}

EtsStore extract_ets_serial(const ir::Program& program, const ExtractConfig& config) {
  return extract_all(program, config, false);
}

}  // namespace etsx::ets
