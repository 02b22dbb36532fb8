#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "etsx/callgraph.hpp"
#include "etsx/crash.hpp"
#include "etsx/ets.hpp"
#include "etsx/ir.hpp"

namespace etsx::loc {

enum class Strategy { S1, S2, S3, S4, StackDefault };
const char* strategy_name(Strategy s);

struct LocateConfig {
  double init = 100.0;
  double non_app_penalty = 3.0;
  double stack_default_delta = 50.0;  // stack-default score = init - delta
  double floor_delta = 60.0;          // unreachable-distance score = init - delta
  int package_prefix_len = 2;
  int caller_cap = 10;  // stop tracing callers past this fan-in
  int trace_depth = 5;  // inter-procedural hops for data tracing

  // ablation switches (eval harness)
  bool only_s2 = false;        // b3
  bool no_key_var = false;     // b4
  bool no_key_api = false;     // b5
  bool no_call_filter = false; // b6
  bool pure_cg = false;        // b1
  int pure_cg_depth = 5;
};

struct Evidence {
  Strategy strategy = Strategy::StackDefault;
  enum class Kind {
    OverridePath,    // S1: inheritance chain candidate-class .. signaler-class
    ValuePassing,    // S2/S3: def chain into the crash site
    FieldMutation,   // S3: candidate stores a field on the chain
    ObjectMutation,  // S3: candidate mutates an object passed to the crashAPI
    KeyApiChain,     // S4: call chain candidate .. keyAPI
    CgExpansion,     // b1 ablation
    StackFrame
  };
  Kind kind = Kind::StackFrame;
  std::vector<std::string> chain;  // method sigs, candidate first
  std::vector<std::string> vars;   // variable annotations aligned with chain
  std::string modified_ref;        // field/object name for mutation kinds
  std::string key_api;
  std::string key_field;
  int dpt = 0;
  std::optional<ets::KeyVar> key_var;
  double score = 0.0;
  std::optional<int> distance;
  int attach_index = -1;  // stack frame the chain connects to
};

struct Candidate {
  std::string sig;
  double score = 0.0;
  std::set<Strategy> strategies;
  std::optional<int> distance;
  std::vector<Evidence> evidence;
  std::vector<std::string> flags;
};

struct Ranking {
  std::vector<Candidate> candidates;  // descending score; ties by distance, then sig
  std::vector<std::string> warnings;
};

const Candidate* find_candidate(const Ranking& r, const std::string& sig);

struct LocateInput {
  const ir::Program* program;
  const ir::CallGraph* cg;
  const crash::CrashReport* report;
  const crash::StackRoles* roles;
  const ets::Ets* ets;
};

std::vector<Candidate> strategy_s1(const LocateInput& in, const LocateConfig& config);
std::vector<Candidate> strategy_s2(const LocateInput& in, const LocateConfig& config);
std::vector<Candidate> strategy_s3(const LocateInput& in, const LocateConfig& config,
                                   std::vector<std::string>& warnings);
std::vector<Candidate> strategy_s4(const LocateInput& in, const LocateConfig& config);

// Distance of a data-traced candidate: min over stack methods f_j of
// hops(candidate, f_j) + hops(f_j, crashMethod).
std::optional<int> data_trace_distance(const ir::CallGraph& cg,
                                       const std::vector<std::string>& stack,
                                       const std::string& crash_method, const std::string& sig);

Ranking locate(const ir::Program& program, const crash::CrashReport& report, const ets::Ets& ets,
               const LocateConfig& config = {});

}  // namespace etsx::loc
