#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etsx/constraint.hpp"
#include "etsx/crash.hpp"
#include "etsx/ets.hpp"
#include "etsx/localizer.hpp"

namespace etsx::cis {

enum class Ep { EP1, EP2, EP3, EP4 };
const char* ep_name(Ep ep);

// One hop of the framework-side variable passing chain
// (crashAPI -> ... -> signaler).
struct ChainVar {
  std::string method;
  std::string var;
  int param_loc = -1;  // -1 for locals
};

struct KeyInfo {
  Ep ep = Ep::EP2;
  std::string signaler;
  std::string crash_api;
  std::string key_variable;    // EP2/EP3
  std::string modified_field;  // EP3 (at most one of field/object)
  std::string modified_object;
  std::string entry_api;  // EP3
  std::string key_field;  // EP4
  std::string key_api;    // EP4
  std::vector<std::string> call_chain;   // CallChain_Crash / CallChain_KeyAPI
  std::vector<std::string> annotations;  // variable per chain node (value chains)
  std::vector<std::string> inheritance;  // EP1: Sub .. Super
  std::vector<ChainVar> passing_chain;   // crashAPI -> signaler positions
};

struct Cis {
  std::string candidate;
  std::string crash_id;
  std::map<std::string, std::string> app_code;
  std::map<std::string, std::string> framework_code;
  std::vector<std::string> source_unavailable;
  KeyInfo key_info;
  std::optional<llm::FrameworkConstraint> constraint;
  std::vector<std::string> flags;
};

struct CisInput {
  const ir::Program* program;
  const ir::CallGraph* cg;
  const crash::CrashReport* report;
  const crash::StackRoles* roles;
  const ets::Ets* ets;
};

// S1 -> EP1; S3 value-passing -> EP2; S3 mutation -> EP3; S4 -> EP4;
// S2 (and stack defaults) -> EP2 over the crashAPI argument set.
Ep classify_ep(const loc::Candidate& candidate, std::vector<std::string>* warnings = nullptr);

// Required elements for the candidate's pattern; emitted chains are
// validated edge-contiguous against the call graph.
KeyInfo extract_key_elements(const CisInput& in, const loc::Candidate& candidate, Ep ep);

// Snippets for stack methods, ETS-related framework methods, and
// candidate-related methods; missing sources are flagged, never fatal.
void collect_code_context(const CisInput& in, const loc::Candidate& candidate, Cis& cis);

Cis build_cis(const CisInput& in, const loc::Candidate& candidate);

// Explanation ordering (independent of ranking scores).
struct OrderItem {
  std::string sig;
  Ep ep = Ep::EP2;
  bool strategy_derived = true;  // stack-default supplements order last
  int stack_index = -1;          // -1 when off-stack
  int attach_index = -1;         // stack method the chain connects to
  int chain_len = 0;             // EP4: length of CallChain_KeyAPI
  int inherit_depth = 0;         // EP1
};
std::vector<size_t> explanation_order(const std::vector<OrderItem>& items);

OrderItem order_item_for(const loc::Candidate& candidate, const KeyInfo& info,
                         const crash::CrashReport& report);

std::string cis_to_json(const Cis& cis);

}  // namespace etsx::cis
