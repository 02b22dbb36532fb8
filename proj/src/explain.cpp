#include "etsx/explain.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace etsx::llm {

using ordered_json = nlohmann::ordered_json;

const char* kSystemPrompt =
    "You are a framework expert who assists with explaining the crash of a framework-based "
    "application. Next, we will provide you with both the crash- and candidate-related "
    "information. According to that as well as basic framework knowledge, your task is to give "
    "a fault explanation to help the developers figure out how the given methods caused the "
    "crash.\n"
    "For each crash, we will provide you with the following information:\n"
    "1. a crash report that includes the exception type, message, and crash stack trace;\n"
    "2. the exception-triggering constraints on the specific framework API.\n"
    "For each buggy candidate method, we will provide you with the following information:\n"
    "1. the code snippet of a crash-triggering candidate method that is detected by a static "
    "analysis tool;\n"
    "2. the information about why the static analyzer identifies the candidate method.\n";

std::string render_chain(const std::vector<std::string>& chain,
                         const std::vector<std::string>& vars) {
  std::string out;
  for (size_t i = 0; i < chain.size(); ++i) {
    if (i) out += " -> ";
    out += chain[i];
    if (i < vars.size() && !vars[i].empty()) out += "[" + vars[i] + "]";
  }
  return out;
}

std::string render_candidate_prompt(const cis::KeyInfo& info) {
  switch (info.ep) {
    case cis::Ep::EP1: {
      if (info.inheritance.size() < 2 || info.signaler.empty())
        throw Error("EP1 rendering requires the inheritance path and the signaler");
      return "The class " + info.inheritance.front() + " extends class " +
             info.inheritance.back() + " but does not override the method " + info.signaler +
             ", which throws an exception unconditionally.";
    }
    case cis::Ep::EP2: {
      if (info.crash_api.empty() || info.key_variable.empty() || info.call_chain.empty())
        throw Error("EP2 rendering requires CrashAPI, KeyVariable, and CallChain");
      return "From the candidate method, wrong values are passed to " + info.crash_api +
             " along the call chain " + render_chain(info.call_chain, info.annotations) +
             ", which causes the variable " + info.key_variable + " in " + info.crash_api +
             " to be unexpected and finally leads to a crash.";
    }
    case cis::Ep::EP3: {
      std::string modified =
          !info.modified_field.empty() ? "field " + info.modified_field
                                       : "object " + info.modified_object;
      if (info.modified_field.empty() && info.modified_object.empty())
        throw Error("EP3 rendering requires ModifiedField or ModifiedObject");
      if (info.entry_api.empty() || info.crash_api.empty() || info.call_chain.empty())
        throw Error("EP3 rendering requires EntryAPI, CrashAPI, and CallChain");
      return "The " + modified + " is used in " + info.entry_api +
             " and then passed along the call chain " +
             render_chain(info.call_chain, info.annotations) + " to the method " +
             info.crash_api + ". The candidate method changes the value of " +
             (!info.modified_field.empty() ? info.modified_field : info.modified_object) +
             " and finally leads to a crash.";
    }
    case cis::Ep::EP4: {
      if (info.key_api.empty() || info.key_field.empty() || info.call_chain.empty() ||
          info.crash_api.empty())
        throw Error("EP4 rendering requires KeyAPI, KeyField, CrashAPI, and CallChain");
      return "The candidate method finally invoked " + info.key_api + " along the call chain " +
             render_chain(info.call_chain, {}) + ", which can affect the value of the field " +
             info.key_field + " in the framework. The method " + info.crash_api +
             " crashes due to the changing of " + info.key_field +
             " making the exception-triggering constraint satisfied.";
    }
  }
  throw Error("unreachable");
}

bool verify_source(const FrameworkConstraint& fc, const ir::Program& program,
                   std::string* reason) {
  const ir::MethodDef* anchor = program.resolve_method(fc.anchor);
  for (const auto& clause : fc.clauses) {
    const auto& ref = clause.ref;
    if (ref.kind == ConstraintRef::Kind::Parameter) {
      if (!anchor) {
        if (reason) *reason = "anchor method " + fc.anchor + " not found";
        return false;
      }
      if (ref.index < 0 || ref.index >= static_cast<int>(anchor->params.size())) {
        if (reason)
          *reason = "parameter index " + std::to_string(ref.index) + " out of range for " +
                    fc.anchor;
        return false;
      }
      const auto& p = anchor->params[static_cast<size_t>(ref.index)];
      if (p.name != ref.name || p.type != ref.type) {
        if (reason)
          *reason = "parameter " + std::to_string(ref.index) + " of " + fc.anchor +
                    " is declared '" + p.type + " " + p.name + "', constraint says '" + ref.type +
                    " " + ref.name + "'";
        return false;
      }
    } else {
      const ir::FieldDef* f = program.find_field(ir::FieldRef{ref.cls, ref.name});
      if (!f) {
        if (reason) *reason = "field " + ref.cls + "." + ref.name + " not declared";
        return false;
      }
      if (f->type != ref.type) {
        if (reason)
          *reason = "field " + ref.cls + "." + ref.name + " is declared '" + f->type +
                    "', constraint says '" + ref.type + "'";
        return false;
      }
    }
  }
  return true;
}

bool verify_static(const FrameworkConstraint& fc, const cis::KeyInfo& info, const ets::Ets& ets,
                   std::string* reason) {
  for (const auto& clause : fc.clauses) {
    const auto& ref = clause.ref;
    if (ref.kind == ConstraintRef::Kind::Parameter) {
      bool on_chain = false;
      for (const auto& cv : info.passing_chain)
        if (cv.method == fc.anchor && cv.param_loc == ref.index) on_chain = true;
      if (!on_chain) {
        if (reason)
          *reason = "parameter " + std::to_string(ref.index) + " of " + fc.anchor +
                    " is not on the collected passing chain";
        return false;
      }
    } else {
      bool known = false;
      for (const auto& ka : ets.key_apis) {
        auto [cls, fld] = split_member(ka.key_field);
        if (cls == ref.cls && fld == ref.name) known = true;
      }
      if (!known) {
        if (reason)
          *reason = "field " + ref.cls + "." + ref.name + " is not a collected key field";
        return false;
      }
    }
  }
  return true;
}

VerifierOutcome run_verifiers(const RawConstraint& raw, const ir::Program& program,
                              const cis::KeyInfo& info, const ets::Ets& ets,
                              FrameworkConstraint* parsed) {
  VerifierOutcome out;
  std::string reason;
  FrameworkConstraint fc;
  out.format = verify_format(raw, &fc, &reason);
  if (!out.format) {
    out.reasons.push_back("format: " + reason);
    // the remaining verifiers are not applicable without a parsed constraint
    out.source = true;
    out.static_ok = true;
    return out;
  }
  if (parsed) *parsed = fc;
  out.source = verify_source(fc, program, &reason);
  if (!out.source) out.reasons.push_back("source: " + reason);
  out.static_ok = verify_static(fc, info, ets, &reason);
  if (!out.static_ok) out.reasons.push_back("static: " + reason);
  return out;
}

const char* constraint_status_name(ConstraintStatus s) {
  switch (s) {
    case ConstraintStatus::Valid: return "valid";
    case ConstraintStatus::Representative: return "representative";
    case ConstraintStatus::None: return "none";
  }
  return "?";
}

namespace {

std::string snippet_of(const ir::Program& program, const std::string& sig) {
  const ir::MethodDef* m = program.resolve_method(sig);
  if (!m || m->source.empty()) return "// source unavailable: " + sig;
  return m->source;
}

const char* kClauseFormatInstruction =
    "Write each clause on its own line in the form <Parameter {index}: {type} {name}> RELATION "
    "value or <Field {class}: {type} {name}> RELATION value, with 0-based parameter indices.";

}  // namespace

std::optional<FrameworkConstraint> extract_constraint(const ExplainContext& ctx,
                                                      const cis::KeyInfo& info, Backend& backend,
                                                      int turn,
                                                      std::vector<ConstraintAttempt>& attempts) {
  const std::string& signaler = ctx.report->stack.front();
  auto request = [&](const std::string& user) {
    BackendRequest req;
    req.system = kSystemPrompt;
    req.user = user;
    // retried turns carry a marker so deterministic backends can vary
    if (turn > 1) req.user += "\n(turn " + std::to_string(turn) + ")";
    return backend.complete(req);
  };

  // stage 1: extract at the signaler
  ConstraintAttempt stage1;
  stage1.turn = turn;
  stage1.stage = "extract";
  std::optional<FrameworkConstraint> current;
  try {
    std::ostringstream user;
    user << "Task: extract-constraint\n"
         << "Exception: " << ctx.report->exception_type << "\n"
         << "Message: " << ctx.report->message << "\n"
         << "The framework method " << signaler << " throws this exception. Source:\n"
         << snippet_of(*ctx.program, signaler) << "\n"
         << "State the constraint that must hold before calling " << signaler
         << " so the exception is not thrown. " << kClauseFormatInstruction;
    stage1.completion = request(user.str());
    auto raw = scan_constraint_text(stage1.completion, signaler);
    if (!raw) {
      stage1.error = "no constraint clauses in completion";
      attempts.push_back(stage1);
      return std::nullopt;
    }
    FrameworkConstraint fc;
    std::string reason;
    if (!verify_format(*raw, &fc, &reason)) {
      // keep the malformed attempt; the caller verifies and records it
      stage1.error = "format: " + reason;
      attempts.push_back(stage1);
      // a malformed extraction cannot be propagated
      FrameworkConstraint bad;
      bad.anchor = signaler;
      bad.provenance = "extracted";
      return std::nullopt;
    }
    fc.provenance = "extracted";
    stage1.parsed = fc;
    current = fc;
  } catch (const BackendFailure& e) {
    stage1.error = e.what();
    attempts.push_back(stage1);
    throw;
  }
  attempts.push_back(stage1);

  // stage 2: propagate along the stack segment signaler -> crashAPI
  for (int i = 1; i <= ctx.roles->crash_api_index; ++i) {
    const std::string& caller = ctx.report->stack[static_cast<size_t>(i)];
    ConstraintAttempt stage;
    stage.turn = turn;
    stage.stage = "propagate:" + caller;
    try {
      std::ostringstream user;
      user << "Task: propagate-constraint\n"
           << "Current constraint on " << current->anchor << ": " << current->render() << "\n"
           << "The method " << caller << " calls " << current->anchor << ". Source:\n"
           << snippet_of(*ctx.program, caller) << "\n"
           << "Rewrite the constraint in terms of " << caller
           << "'s parameters and fields. " << kClauseFormatInstruction;
      stage.completion = request(user.str());
      auto raw = scan_constraint_text(stage.completion, caller);
      if (!raw) {
        stage.error = "no constraint clauses in completion";
        attempts.push_back(stage);
        return std::nullopt;
      }
      FrameworkConstraint fc;
      std::string reason;
      if (!verify_format(*raw, &fc, &reason)) {
        stage.error = "format: " + reason;
        attempts.push_back(stage);
        return std::nullopt;
      }
      fc.provenance = i == ctx.roles->crash_api_index ? "final" : "propagated";
      stage.parsed = fc;
      current = fc;
    } catch (const BackendFailure& e) {
      stage.error = e.what();
      attempts.push_back(stage);
      throw;
    }
    attempts.push_back(stage);
  }
  if (ctx.roles->crash_api_index == 0) current->provenance = "final";
  return current;
}

ConstraintResult validate_with_retry(const ExplainContext& ctx, const cis::KeyInfo& info,
                                     Backend& backend, const PipelineConfig& config) {
  ConstraintResult result;
  if (config.max_turns < 1) throw Error("max_turns must be >= 1");

  struct TurnRecord {
    FrameworkConstraint fc;
    VerifierOutcome outcome;
  };
  std::vector<TurnRecord> turns;
  for (int turn = 1; turn <= config.max_turns; ++turn) {
    std::optional<FrameworkConstraint> fc;
    try {
      fc = extract_constraint(ctx, info, backend, turn, result.attempts);
    } catch (const BackendFailure& e) {
      result.notes.push_back(std::string("backend failure: ") + e.what());
      break;
    }
    if (!fc) {
      result.notes.push_back("turn " + std::to_string(turn) + ": unparseable completion");
      continue;
    }
    RawConstraint raw;
    raw.anchor = fc->anchor;
    for (const auto& c : fc->clauses)
      raw.clauses.push_back(RawClause{c.ref.canonical(), c.relation, c.rhs});
    VerifierOutcome outcome = run_verifiers(raw, *ctx.program, info, *ctx.ets, nullptr);
    ConstraintAttempt final_attempt;
    final_attempt.turn = turn;
    final_attempt.stage = "final";
    final_attempt.parsed = fc;
    final_attempt.outcome = outcome;
    result.attempts.push_back(final_attempt);
    if (outcome.valid()) {
      result.status = ConstraintStatus::Valid;
      result.constraint = fc;
      break;
    }
    turns.push_back(TurnRecord{*fc, outcome});
  }

  if (result.status != ConstraintStatus::Valid) {
    // representative fallback: every produced constraint failed only the
    // static-analysis verifier
    bool only_static = !turns.empty();
    for (const auto& t : turns)
      if (!(t.outcome.format && t.outcome.source && !t.outcome.static_ok)) only_static = false;
    if (only_static) {
      std::vector<std::set<std::string>> var_sets;
      for (const auto& t : turns) var_sets.push_back(t.fc.var_set());
      if (auto idx = pick_representative(var_sets)) {
        FrameworkConstraint rep = turns[*idx].fc;
        rep.provenance = "representative";
        result.status = ConstraintStatus::Representative;
        result.constraint = rep;
        result.notes.push_back("static verifier never passed; representative constraint chosen");
      } else {
        result.notes.push_back("no subset-order upper bound among generated constraints");
      }
    }
  }

  // keyAPI effect summary accompanies keyAPI-related exceptions
  if (!ctx.ets->key_apis.empty() && result.status != ConstraintStatus::None) {
    const auto& ka = ctx.ets->key_apis.front();
    try {
      BackendRequest req;
      req.system = kSystemPrompt;
      std::ostringstream user;
      user << "Task: keyapi-effect\n"
           << "Summarize in one sentence the effect of " << ka.mtd << " on the field "
           << ka.key_field << ". Source:\n"
           << snippet_of(*ctx.program, ka.mtd);
      req.user = user.str();
      result.key_api_effect = trim(backend.complete(req));
    } catch (const BackendFailure& e) {
      result.notes.push_back(std::string("keyAPI effect request failed: ") + e.what());
    }
  }
  return result;
}

ExplanationReport generate_report(const ir::Program& program, const crash::CrashReport& report,
                                  const ets::Ets& ets, const loc::Ranking& ranking,
                                  Backend* backend, const PipelineConfig& config) {
  ExplanationReport out;
  out.exception_type = report.exception_type;
  out.message = report.message;
  out.stack = report.stack;
  out.backend_name = (backend && !config.naive) ? backend->name() : "none";
  out.constraint_status = "none";

  ir::CallGraph cg = ir::build_cg(program);
  crash::StackRoles roles = crash::assign_roles(report, program);
  cis::CisInput cin{&program, &cg, &report, &roles, &ets};

  // top-K candidates by rank, then explanation order
  std::vector<const loc::Candidate*> picked;
  for (const auto& c : ranking.candidates) {
    if (static_cast<int>(picked.size()) >= config.top_k) break;
    picked.push_back(&c);
  }
  if (picked.empty()) {
    out.notes.push_back("no candidates to explain");
    return out;
  }

  std::vector<cis::Cis> cises;
  std::vector<cis::OrderItem> items;
  for (const auto* c : picked) {
    cis::Cis one = cis::build_cis(cin, *c);
    items.push_back(cis::order_item_for(*c, one.key_info, report));
    cises.push_back(std::move(one));
  }
  std::vector<size_t> order = cis::explanation_order(items);

  bool use_backend = backend != nullptr && !config.naive;
  if (use_backend) {
    llm::ExplainContext ctx{&program, &cg, &report, &roles, &ets};
    ConstraintResult cres = validate_with_retry(ctx, cises[order[0]].key_info, *backend, config);
    out.constraint_attempts = cres.attempts;
    out.constraint_status = constraint_status_name(cres.status);
    if (cres.constraint)
      out.constraint_text = "[" + cres.constraint->anchor + "]: " + cres.constraint->render();
    out.key_api_effect = cres.key_api_effect;
    for (const auto& n : cres.notes) out.notes.push_back(n);
  }

  // per-candidate sections in explanation order
  for (size_t idx : order) {
    const loc::Candidate& cand = *picked[idx];
    const cis::Cis& one = cises[idx];
    ReportSection sec;
    sec.sig = cand.sig;
    sec.ep = cis::ep_name(one.key_info.ep);
    auto it = one.app_code.find(cand.sig);
    if (it != one.app_code.end())
      sec.code = it->second;
    else {
      auto fit = one.framework_code.find(cand.sig);
      sec.code = fit != one.framework_code.end() ? fit->second
                                                 : "// source unavailable: " + cand.sig;
    }
    sec.reason = render_candidate_prompt(one.key_info);
    if (use_backend) {
      try {
        BackendRequest req;
        req.system = kSystemPrompt;
        std::ostringstream user;
        user << "Task: candidate-explanation\n"
             << "Candidate method: " << cand.sig << "\n"
             << "Code:\n" << sec.code << "\n"
             << "Reason: " << sec.reason << "\n"
             << "Crash: " << report.exception_type << ": " << report.message << "\n"
             << "Explain why this method is a likely buggy candidate for the crash.";
        req.user = user.str();
        sec.explanation = backend->complete(req);
        sec.source = "backend";
      } catch (const BackendFailure& e) {
        sec.explanation = sec.reason;
        sec.source = "template";
        out.notes.push_back("section " + cand.sig + " degraded to template: " + e.what());
      }
    } else {
      sec.explanation = sec.reason;
      sec.source = "template";
    }
    out.sections.push_back(std::move(sec));
  }

  // global explanation combines every candidate context
  if (use_backend) {
    try {
      BackendRequest req;
      req.system = kSystemPrompt;
      std::ostringstream user;
      user << "Task: global-explanation\n"
           << "Exception: " << report.exception_type << "\n"
           << "Message: " << report.message << "\n"
           << "Stack:";
      for (const auto& f : report.stack) user << " " << f;
      user << "\n";
      if (!out.constraint_text.empty()) user << "Framework constraint: " << out.constraint_text << "\n";
      for (size_t i = 0; i < out.sections.size(); ++i) {
        user << "Candidate " << (i + 1) << ": " << out.sections[i].sig << "\n"
             << "Reason: " << out.sections[i].reason << "\n";
      }
      user << "Explain how the candidate methods contributed to the crash.";
      req.user = user.str();
      out.global_explanation = backend->complete(req);
      out.global_source = "backend";
    } catch (const BackendFailure& e) {
      std::string fallback;
      for (const auto& s : out.sections) fallback += s.sig + ": " + s.reason + "\n";
      out.global_explanation = fallback;
      out.global_source = "template";
      out.notes.push_back(std::string("global explanation degraded to template: ") + e.what());
    }
  } else {
    std::string fallback;
    for (const auto& s : out.sections) fallback += s.sig + ": " + s.reason + "\n";
    out.global_explanation = fallback;
    out.global_source = "template";
  }
  return out;
}

std::string report_to_text(const ExplanationReport& r) {
  std::ostringstream os;
  os << "Exception Type: " << r.exception_type << "\n";
  os << "Message: " << r.message << "\n";
  os << "Stack Trace: " << join(r.stack, ", ") << "\n";
  if (!r.constraint_text.empty())
    os << "Framework Constraint: " << r.constraint_text << "\n";
  if (r.key_api_effect) os << "KeyAPI Effect: " << *r.key_api_effect << "\n";
  os << std::string(72, '-') << "\n";
  os << "Global Explanation:\n" << r.global_explanation << "\n";
  for (size_t i = 0; i < r.sections.size(); ++i) {
    const auto& s = r.sections[i];
    os << std::string(72, '-') << "\n";
    os << "Candidate Method " << (i + 1) << ": " << s.sig << "\n";
    os << "Method Code:\n" << s.code;
    if (!ends_with(s.code, "\n")) os << "\n";
    os << "Explanation: " << s.explanation << "\n";
  }
  os << std::string(72, '-') << "\n";
  os << "Provenance: backend=" << r.backend_name << " constraint=" << r.constraint_status;
  for (const auto& s : r.sections) os << " " << s.sig << "[" << s.ep << "," << s.source << "]";
  os << "\n";
  return os.str();
}

std::string report_to_json(const ExplanationReport& r) {
  ordered_json j;
  j["exception_type"] = r.exception_type;
  j["message"] = r.message;
  j["stack"] = r.stack;
  j["framework_constraint"] = r.constraint_text;
  j["constraint_status"] = r.constraint_status;
  j["key_api_effect"] = r.key_api_effect ? ordered_json(*r.key_api_effect) : ordered_json(nullptr);
  j["global_explanation"] = r.global_explanation;
  j["global_source"] = r.global_source;
  ordered_json sections = ordered_json::array();
  for (const auto& s : r.sections) {
    ordered_json sec;
    sec["sig"] = s.sig;
    sec["ep"] = s.ep;
    sec["code"] = s.code;
    sec["reason"] = s.reason;
    sec["explanation"] = s.explanation;
    sec["source"] = s.source;
    sections.push_back(sec);
  }
  j["candidates"] = sections;
  ordered_json prov;
  prov["backend"] = r.backend_name;
  ordered_json attempts = ordered_json::array();
  for (const auto& a : r.constraint_attempts) {
    ordered_json at;
    at["turn"] = a.turn;
    at["stage"] = a.stage;
    at["constraint"] = a.parsed ? ordered_json(a.parsed->render()) : ordered_json(nullptr);
    if (a.stage == "final") {
      at["format"] = a.outcome.format;
      at["source"] = a.outcome.source;
      at["static"] = a.outcome.static_ok;
      at["reasons"] = a.outcome.reasons;
    }
    if (!a.error.empty()) at["error"] = a.error;
    attempts.push_back(at);
  }
  prov["constraint_attempts"] = attempts;
  j["provenance"] = prov;
  j["notes"] = r.notes;
  return j.dump(2);
}

}  // namespace etsx::llm
