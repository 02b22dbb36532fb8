#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etsx/cis.hpp"
#include "etsx/constraint.hpp"
#include "etsx/crash.hpp"
#include "etsx/ets.hpp"
#include "etsx/llm_backend.hpp"
#include "etsx/localizer.hpp"

namespace etsx::llm {

extern const char* kSystemPrompt;

// "a -> b -> c" with variable annotations bracketed ("a[x] -> b[y]").
std::string render_chain(const std::vector<std::string>& chain,
                         const std::vector<std::string>& vars);

// EP template with every placeholder substituted; throws when a required
// element is missing.
std::string render_candidate_prompt(const cis::KeyInfo& info);

struct VerifierOutcome {
  bool format = false;
  bool source = false;
  bool static_ok = false;
  std::vector<std::string> reasons;
  bool valid() const { return format && source && static_ok; }
};

// Declared parameter (by index) and field types/names must match the
// program.
bool verify_source(const FrameworkConstraint& fc, const ir::Program& program,
                   std::string* reason);

// Parameter refs must sit on the crashAPI->signaler passing chain at the
// anchor; field refs must be statically collected key fields.
bool verify_static(const FrameworkConstraint& fc, const cis::KeyInfo& info, const ets::Ets& ets,
                   std::string* reason);

VerifierOutcome run_verifiers(const RawConstraint& raw, const ir::Program& program,
                              const cis::KeyInfo& info, const ets::Ets& ets,
                              FrameworkConstraint* parsed);

struct PipelineConfig {
  int max_turns = 3;
  int top_k = 5;
  bool naive = false;
};

struct ConstraintAttempt {
  int turn = 0;
  std::string stage;  // extract | propagate:<sig> | final
  std::string completion;
  std::optional<FrameworkConstraint> parsed;
  VerifierOutcome outcome;
  std::string error;
};

enum class ConstraintStatus { Valid, Representative, None };
const char* constraint_status_name(ConstraintStatus s);

struct ConstraintResult {
  ConstraintStatus status = ConstraintStatus::None;
  std::optional<FrameworkConstraint> constraint;
  std::vector<ConstraintAttempt> attempts;
  std::optional<std::string> key_api_effect;
  std::vector<std::string> notes;
};

struct ExplainContext {
  const ir::Program* program;
  const ir::CallGraph* cg;
  const crash::CrashReport* report;
  const crash::StackRoles* roles;
  const ets::Ets* ets;
};

// One pass of the two-stage pipeline: extract at the signaler, then
// propagate along the stack segment down to the crashAPI.
std::optional<FrameworkConstraint> extract_constraint(const ExplainContext& ctx,
                                                      const cis::KeyInfo& info, Backend& backend,
                                                      int turn,
                                                      std::vector<ConstraintAttempt>& attempts);

ConstraintResult validate_with_retry(const ExplainContext& ctx, const cis::KeyInfo& info,
                                     Backend& backend, const PipelineConfig& config);

struct ReportSection {
  std::string sig;
  std::string ep;
  std::string code;
  std::string reason;       // EP template rendering
  std::string explanation;  // backend text, or the reason when degraded
  std::string source;       // backend | template
};

struct ExplanationReport {
  std::string exception_type;
  std::string message;
  std::vector<std::string> stack;
  std::string constraint_text;    // empty unless valid or representative
  std::string constraint_status;  // valid | representative | none
  std::optional<std::string> key_api_effect;
  std::string global_explanation;
  std::string global_source;  // backend | template
  std::vector<ReportSection> sections;
  std::string backend_name;  // "none" in naive mode
  std::vector<std::string> notes;
  std::vector<ConstraintAttempt> constraint_attempts;  // provenance appendix
};

// backend == nullptr or config.naive renders templates only.
ExplanationReport generate_report(const ir::Program& program, const crash::CrashReport& report,
                                  const ets::Ets& ets, const loc::Ranking& ranking,
                                  Backend* backend, const PipelineConfig& config = {});

std::string report_to_text(const ExplanationReport& report);
std::string report_to_json(const ExplanationReport& report);

}  // namespace etsx::llm
