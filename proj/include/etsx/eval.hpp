#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "etsx/ets_extract.hpp"
#include "etsx/explain.hpp"
#include "etsx/llm_backend.hpp"
#include "etsx/localizer.hpp"
#include "etsx/metrics.hpp"

namespace etsx::eval {

// One corpus case: a directory holding program.mir, crash.txt, truth.json.
struct LabeledCase {
  std::string name;
  std::string dir;
  std::string truth;     // ground-truth buggy method sig
  std::string category;  // A | B | C-coded
};

std::vector<LabeledCase> load_corpus(const std::string& corpus_dir);

struct EvalConfig {
  std::string ablate;           // "", b1..b7
  std::string backend = "mock"; // mock | replay | remote | none
  std::string mock_rules_path;
  std::string cassette_path;
  std::string out_dir;          // artifacts written here when non-empty
  std::string fixed_version;    // b7: the single store version to keep
  int miss_floor = 20;
  loc::LocateConfig locate;
  ets::ExtractConfig extract;
  llm::PipelineConfig pipeline;
};

// Applies an ablation flag (b1..b7) onto the config switches.
void apply_ablation(EvalConfig& config);

struct EvalRun {
  MetricsSummary metrics;
  std::vector<std::string> warnings;
  // deterministic artifact blobs keyed by relative path, also written to
  // out_dir when configured
  std::vector<std::pair<std::string, std::string>> artifacts;
};

EvalRun run_corpus(const std::string& corpus_dir, const EvalConfig& config, bool parallel = true);

}  // namespace etsx::eval
