#pragma once

#include <map>
#include <string>
#include <vector>

#include "etsx/callgraph.hpp"
#include "etsx/cfg.hpp"
#include "etsx/defuse.hpp"
#include "etsx/ets.hpp"
#include "etsx/ir.hpp"

namespace etsx::ets {

struct ExtractConfig {
  int key_cond_threshold = 3;   // cap on |keyConds| per ETS
  int interproc_depth = 5;      // bound for keyVar/keyAPI fixpoints
  int message_trace_depth = 4;  // bound for inter-procedural message tracing
  std::vector<std::string> handler_methods = {"log_throwable"};
};

// Shared per-method CFG + def-use, built once and then read-only.
class AnalysisCache {
public:
  explicit AnalysisCache(const ir::Program& program);
  const ir::Cfg& cfg_of(const std::string& sig) const;
  const ir::DefUse& defuse_of(const std::string& sig) const;
  const ir::Program& program() const { return *program_; }

private:
  const ir::Program* program_;
  std::map<std::string, ir::Cfg> cfgs_;
  std::map<std::string, ir::DefUse> defuses_;
};

struct SinkPoint {
  int stmt = -1;
  std::string exception_var;
  bool via_handler = false;
};

// throw statements plus calls passing a throwable-typed variable to a
// configured handler method; ordered by statement id.
std::vector<SinkPoint> find_sink_points(const ir::Program& program, const ir::MethodDef& method,
                                        const AnalysisCache& cache, const ExtractConfig& config);

struct ExceptionInfo {
  std::string type;
  MessagePattern message;
  bool imprecise = false;  // instantiation point unresolvable
};
ExceptionInfo analyze_exception(const ir::Program& program, const AnalysisCache& cache,
                                const ir::MethodDef& method, const SinkPoint& sink,
                                const ExtractConfig& config);

// A key-condition-variable use site; the external-variable worklist
// starts from these.
struct Seed {
  std::string var;
  int stmt = -1;
};

// Condition checks among the CFG predecessors of `stmt` whose satisfied
// branch leads to it; conjuncts/disjuncts contribute separately, capped
// at the configured threshold.
void key_conds_and_vars(Ets& ets, const ir::MethodDef& method, const ir::Cfg& cfg, int stmt,
                        CondTag tag, const ExtractConfig& config, std::vector<Seed>& seeds);

// Guarding conditions of return statements preceding the sink; only runs
// when the basic pass found nothing.
void not_return_conds(Ets& ets, const ir::MethodDef& method, const ir::Cfg& cfg, int sink,
                      const ExtractConfig& config, std::vector<Seed>& seeds);

// keyCondVars and lifted conditions for sinks inside a catch block.
void try_catch_conds(Ets& ets, const ir::Program& program, const AnalysisCache& cache,
                     const ir::MethodDef& method, int sink, const ExtractConfig& config,
                     std::vector<Seed>& seeds);

struct ExternalVar {
  enum class Kind { Parameter, Field };
  Kind kind = Kind::Parameter;
  std::string mtd;    // Parameter: method sig
  int loc = -1;       // Parameter: 0-based location
  ir::FieldRef field; // Field
  std::string influenced;  // the key condition variable this origin reaches

  bool operator==(const ExternalVar&) const = default;
};

// Worklist closure over use-def chains from the seeds; final fields are
// excluded.
std::vector<ExternalVar> collect_external_vars(const ir::Program& program,
                                               const AnalysisCache& cache,
                                               const ir::MethodDef& method,
                                               const std::vector<Seed>& seeds,
                                               std::vector<std::string>* flags = nullptr);

void trace_key_vars(Ets& ets, const ir::Program& program, const AnalysisCache& cache,
                    const ir::CallGraph& cg, const ir::MethodDef& signaler,
                    const std::vector<ExternalVar>& externals, const ExtractConfig& config);

void collect_key_apis(Ets& ets, const ir::Program& program, const ir::CallGraph& cg,
                      const std::vector<ExternalVar>& externals, const ExtractConfig& config);

std::vector<Ets> extract_for_signaler(const ir::Program& program, const AnalysisCache& cache,
                                      const ir::CallGraph& cg, const ir::MethodDef& method,
                                      const ExtractConfig& config,
                                      std::vector<std::string>& warnings);

// Whole-program extraction over the framework partition. The parallel
// driver splits signalers across OpenMP threads; assembly order is
// (class, method, stmt) either way.
EtsStore extract_ets(const ir::Program& program, const ExtractConfig& config = {});
EtsStore extract_ets_serial(const ir::Program& program, const ExtractConfig& config = {});

}  // namespace etsx::ets
