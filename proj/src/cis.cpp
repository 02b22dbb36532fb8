#include "etsx/cis.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

namespace etsx::cis {

using loc::Candidate;
using loc::Evidence;
using loc::Strategy;
using ordered_json = nlohmann::ordered_json;

const char* ep_name(Ep ep) {
  switch (ep) {
    case Ep::EP1: return "EP1";
    case Ep::EP2: return "EP2";
    case Ep::EP3: return "EP3";
    case Ep::EP4: return "EP4";
  }
  return "?";
}

namespace {

Ep ep_of_evidence(const Evidence& ev) {
  switch (ev.kind) {
    case Evidence::Kind::OverridePath: return Ep::EP1;
    case Evidence::Kind::FieldMutation:
    case Evidence::Kind::ObjectMutation: return Ep::EP3;
    case Evidence::Kind::KeyApiChain: return Ep::EP4;
    default: return Ep::EP2;
  }
}

const Evidence* best_evidence(const Candidate& c) {
  const Evidence* best = nullptr;
  for (const auto& ev : c.evidence) {
    if (!best || ev.score > best->score) best = &ev;
  }
  return best;
}

const Evidence* best_evidence_of_ep(const Candidate& c, Ep ep) {
  const Evidence* best = nullptr;
  for (const auto& ev : c.evidence) {
    if (ep_of_evidence(ev) != ep) continue;
    if (!best || ev.score > best->score) best = &ev;
  }
  return best;
}

}  // namespace

Ep classify_ep(const Candidate& candidate, std::vector<std::string>* warnings) {
  std::set<Ep> seen;
  for (const auto& ev : candidate.evidence) {
    if (ev.kind == Evidence::Kind::StackFrame || ev.kind == Evidence::Kind::CgExpansion) continue;
    seen.insert(ep_of_evidence(ev));
  }
  if (seen.empty()) return Ep::EP2;  // stack-default / CG expansion: argument-flow pattern
  if (seen.size() == 1) return *seen.begin();
  const Evidence* best = best_evidence(candidate);
  if (warnings)
    warnings->push_back("conflicting explanation patterns for " + candidate.sig +
                        "; keeping the highest-scored strategy");
  return ep_of_evidence(*best);
}

namespace {

void require_edge(const CisInput& in, const std::string& a, const std::string& b) {
  for (const auto* e : in.cg->edges_from(a))
    if (e->callee == b) return;
  throw Error("broken call chain: no edge " + a + " -> " + b);
}

void validate_chain(const CisInput& in, const std::vector<std::string>& chain) {
  for (size_t i = 0; i + 1 < chain.size(); ++i) require_edge(in, chain[i], chain[i + 1]);
}

// Framework-side passing chain from the crashAPI down to the signaler,
// following the stack frames and actual/formal positions.
std::vector<ChainVar> passing_chain(const CisInput& in) {
  std::vector<ChainVar> out;
  int api_idx = in.roles->crash_api_index;
  const auto& stack = in.report->stack;

  // seed: the keyVar position at the crashAPI, if any
  std::optional<int> loc;
  for (const auto& kv : in.ets->key_vars)
    if (kv.mtd == in.roles->crash_api && !loc) loc = kv.loc;
  const ir::MethodDef* api = in.program->resolve_method(in.roles->crash_api);
  if (!api) return out;
  std::string var;
  if (loc && *loc < static_cast<int>(api->params.size()))
    var = api->params[static_cast<size_t>(*loc)].name;
  out.push_back(ChainVar{in.roles->crash_api, var, loc.value_or(-1)});
  if (var.empty()) return out;

  for (int i = api_idx; i >= 1; --i) {
    const ir::MethodDef* caller = in.program->resolve_method(stack[static_cast<size_t>(i)]);
    const ir::MethodDef* callee = in.program->resolve_method(stack[static_cast<size_t>(i - 1)]);
    if (!caller || !callee) break;
    std::optional<int> next_loc;
    for (const auto& st : caller->body) {
      if (st.kind != ir::StmtKind::Call) continue;
      const ir::MethodDef* target = in.program->resolve_method(st.callee);
      if (!target || target->sig() != callee->sig()) continue;
      for (size_t a = 0; a < st.args.size(); ++a)
        if (st.args[a].is_var() && st.args[a].text == var) next_loc = static_cast<int>(a);
      if (next_loc) break;
    }
    if (!next_loc || *next_loc >= static_cast<int>(callee->params.size())) break;
    var = callee->params[static_cast<size_t>(*next_loc)].name;
    out.push_back(ChainVar{callee->sig(), var, *next_loc});
  }
  return out;
}

std::vector<std::string> stack_segment_from(const CisInput& in, int from_index) {
  std::vector<std::string> out;
  for (int i = from_index; i >= 0; --i)
    out.push_back(in.report->stack[static_cast<size_t>(i)]);
  return out;
}

std::string key_variable_of(const CisInput& in) {
  const ir::MethodDef* api = in.program->resolve_method(in.roles->crash_api);
  for (const auto& kv : in.ets->key_vars) {
    if (kv.mtd != in.roles->crash_api) continue;
    if (api && kv.loc < static_cast<int>(api->params.size()))
      return api->params[static_cast<size_t>(kv.loc)].name;
  }
  // S2-shaped candidates: the crashAPI argument set stands in
  if (api && !api->params.empty()) {
    std::vector<std::string> names;
    for (const auto& p : api->params) names.push_back(p.name);
    return join(names, ", ");
  }
  return "(arguments of " + in.roles->crash_api + ")";
}

}  // namespace

KeyInfo extract_key_elements(const CisInput& in, const Candidate& candidate, Ep ep) {
  KeyInfo info;
  info.ep = ep;
  info.signaler = in.report->stack.front();
  info.crash_api = in.roles->crash_api;
  info.passing_chain = passing_chain(in);

  switch (ep) {
    case Ep::EP1: {
      const Evidence* ev = best_evidence_of_ep(candidate, Ep::EP1);
      if (!ev) throw Error("EP1 candidate without override evidence: " + candidate.sig);
      info.inheritance = ev->chain;  // Sub .. Super (class names)
      if (info.inheritance.size() < 2)
        throw Error("EP1 inheritance path must contain Sub and Super");
      return info;
    }
    case Ep::EP2: {
      info.key_variable = key_variable_of(in);
      const Evidence* ev = best_evidence_of_ep(candidate, Ep::EP2);
      std::vector<std::string> chain;
      std::vector<std::string> annotations;
      if (ev && ev->kind == Evidence::Kind::ValuePassing) {
        chain = ev->chain;
        annotations = ev->vars;
      } else {
        chain = {in.roles->crash_method};
        annotations = {""};
      }
      auto fw = stack_segment_from(in, in.roles->crash_api_index);
      for (size_t i = 0; i < fw.size(); ++i) {
        chain.push_back(fw[i]);
        annotations.push_back(i < info.passing_chain.size() ? info.passing_chain[i].var : "");
      }
      validate_chain(in, chain);
      info.call_chain = std::move(chain);
      info.annotations = std::move(annotations);
      return info;
    }
    case Ep::EP3: {
      info.key_variable = key_variable_of(in);
      const Evidence* ev = best_evidence_of_ep(candidate, Ep::EP3);
      if (!ev) throw Error("EP3 candidate without mutation evidence: " + candidate.sig);
      if (ev->kind == Evidence::Kind::FieldMutation)
        info.modified_field = ev->modified_ref;
      else
        info.modified_object = ev->modified_ref;
      // the stack method that uses the modified value
      info.entry_api = in.roles->crash_method;
      for (const auto& link : ev->chain) {
        for (const auto& f : in.report->stack)
          if (link == f) info.entry_api = f;
      }
      int entry_idx = in.roles->crash_method_index;
      for (size_t i = 0; i < in.report->stack.size(); ++i)
        if (in.report->stack[i] == info.entry_api) entry_idx = static_cast<int>(i);
      info.call_chain = stack_segment_from(in, entry_idx);
      info.annotations.assign(info.call_chain.size(), "");
      // annotate the framework suffix with the passing chain
      for (size_t i = 0; i < info.call_chain.size(); ++i) {
        for (const auto& cv : info.passing_chain)
          if (cv.method == info.call_chain[i]) info.annotations[i] = cv.var;
      }
      validate_chain(in, info.call_chain);
      return info;
    }
    case Ep::EP4: {
      const Evidence* ev = best_evidence_of_ep(candidate, Ep::EP4);
      if (!ev) throw Error("EP4 candidate without keyAPI evidence: " + candidate.sig);
      info.key_api = ev->key_api;
      info.key_field = ev->key_field;
      info.call_chain = ev->chain;  // candidate .. keyAPI
      validate_chain(in, info.call_chain);
      return info;
    }
  }
  throw Error("unreachable");
}

void collect_code_context(const CisInput& in, const Candidate& candidate, Cis& cis) {
  auto add = [&](const std::string& sig) {
    if (cis.app_code.count(sig) || cis.framework_code.count(sig)) return;
    if (std::find(cis.source_unavailable.begin(), cis.source_unavailable.end(), sig) !=
        cis.source_unavailable.end())
      return;
    const ir::MethodDef* m = in.program->resolve_method(sig);
    if (!m || m->source.empty()) {
      cis.source_unavailable.push_back(sig);
      return;
    }
    auto part = in.program->partition_of_class(m->owner);
    if (part && *part == ir::Partition::Application)
      cis.app_code[sig] = m->source;
    else
      cis.framework_code[sig] = m->source;
  };
  for (const auto& f : in.report->stack) add(f);
  for (const auto& kv : in.ets->key_vars) add(kv.mtd);
  for (const auto& ka : in.ets->key_apis) add(ka.mtd);
  add(candidate.sig);
  for (const auto& link : cis.key_info.call_chain) add(link);
  if (!cis.key_info.key_api.empty()) add(cis.key_info.key_api);
}

Cis build_cis(const CisInput& in, const Candidate& candidate) {
  Cis cis;
  cis.candidate = candidate.sig;
  cis.crash_id = in.report->id();
  std::vector<std::string> warnings;
  Ep ep = classify_ep(candidate, &warnings);
  cis.key_info = extract_key_elements(in, candidate, ep);
  collect_code_context(in, candidate, cis);
  for (auto& w : warnings) cis.flags.push_back(std::move(w));
  if (!cis.key_info.modified_field.empty() && !cis.key_info.modified_object.empty())
    cis.flags.push_back("both modified-field and modified-object present; keeping the field");
  return cis;
}

std::vector<size_t> explanation_order(const std::vector<OrderItem>& items) {
  std::vector<size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  auto rank = [](const OrderItem& it) {
    // (group, primary, secondary): keyVar-related patterns before EP4;
    // stack-default supplements come last
    int group = !it.strategy_derived ? 2 : it.ep == Ep::EP4 ? 1 : 0;
    int primary, secondary;
    switch (it.ep) {
      case Ep::EP4:
        primary = it.chain_len;
        secondary = 0;
        break;
      case Ep::EP1:
        primary = it.inherit_depth;
        secondary = 0;
        break;
      default:
        if (it.stack_index >= 0) {
          primary = 0;  // stack methods first, bottom-up by execution recency
          secondary = it.stack_index;
        } else {
          primary = 1;  // off-stack after all stack methods
          secondary = it.attach_index < 0 ? std::numeric_limits<int>::max() : it.attach_index;
        }
        break;
    }
    return std::tuple<int, int, int>(group, primary, secondary);
  };
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    auto ra = rank(items[a]);
    auto rb = rank(items[b]);
    if (ra != rb) return ra < rb;
    return items[a].sig < items[b].sig;
  });
  return order;
}

OrderItem order_item_for(const Candidate& candidate, const KeyInfo& info,
                         const crash::CrashReport& report) {
  OrderItem item;
  item.sig = candidate.sig;
  item.ep = info.ep;
  item.strategy_derived = false;
  for (const auto& ev : candidate.evidence)
    if (ev.kind != loc::Evidence::Kind::StackFrame) item.strategy_derived = true;
  for (size_t i = 0; i < report.stack.size(); ++i)
    if (report.stack[i] == candidate.sig) item.stack_index = static_cast<int>(i);
  int attach = -1;
  for (const auto& ev : candidate.evidence)
    attach = std::max(attach, ev.attach_index);
  item.attach_index = attach;
  item.chain_len = static_cast<int>(info.call_chain.size());
  item.inherit_depth = std::max(0, static_cast<int>(info.inheritance.size()) - 1);
  return item;
}

std::string cis_to_json(const Cis& cis) {
  ordered_json j;
  j["id"] = {{"candidate", cis.candidate}, {"crash", cis.crash_id}};
  j["code"] = {{"application", cis.app_code}, {"framework", cis.framework_code}};
  j["source_unavailable"] = cis.source_unavailable;
  ordered_json ki;
  ki["ep"] = ep_name(cis.key_info.ep);
  ki["signaler"] = cis.key_info.signaler;
  ki["crash_api"] = cis.key_info.crash_api;
  if (!cis.key_info.key_variable.empty()) ki["key_variable"] = cis.key_info.key_variable;
  if (!cis.key_info.modified_field.empty()) ki["modified_field"] = cis.key_info.modified_field;
  if (!cis.key_info.modified_object.empty()) ki["modified_object"] = cis.key_info.modified_object;
  if (!cis.key_info.entry_api.empty()) ki["entry_api"] = cis.key_info.entry_api;
  if (!cis.key_info.key_field.empty()) ki["key_field"] = cis.key_info.key_field;
  if (!cis.key_info.key_api.empty()) ki["key_api"] = cis.key_info.key_api;
  ki["call_chain"] = cis.key_info.call_chain;
  ki["annotations"] = cis.key_info.annotations;
  ki["inheritance"] = cis.key_info.inheritance;
  ordered_json pc = ordered_json::array();
  for (const auto& cv : cis.key_info.passing_chain)
    pc.push_back({{"method", cv.method}, {"var", cv.var}, {"param_loc", cv.param_loc}});
  ki["passing_chain"] = pc;
  j["key_info"] = ki;
  if (cis.constraint) {
    j["constraint"] = {{"anchor", cis.constraint->anchor},
                       {"text", cis.constraint->render()},
                       {"provenance", cis.constraint->provenance}};
  } else {
    j["constraint"] = nullptr;
  }
  j["flags"] = cis.flags;
  return j.dump(2);
}

}  // namespace etsx::cis
