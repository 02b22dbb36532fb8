#include "etsx/eval.hpp"

#include <algorithm>
#include <filesystem>

#include "etsx/ir_parse.hpp"
#include "etsx/ranking_io.hpp"
#include "json.hpp"

namespace etsx::eval {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<LabeledCase> load_corpus(const std::string& corpus_dir) {
  std::vector<LabeledCase> cases;
  if (!fs::is_directory(corpus_dir)) throw Error("corpus directory not found: " + corpus_dir);
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(corpus_dir))
    if (entry.is_directory()) dirs.push_back(entry.path().string());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    fs::path p(dir);
    if (!fs::exists(p / "program.mir") || !fs::exists(p / "crash.txt") ||
        !fs::exists(p / "truth.json"))
      continue;
    LabeledCase c;
    c.name = p.filename().string();
    c.dir = dir;
    json truth = json::parse(read_file((p / "truth.json").string()));
    c.truth = truth.at("buggy_method").get<std::string>();
    c.category = truth.value("category", "A");
    cases.push_back(std::move(c));
  }
  if (cases.empty()) throw Error("no valid cases under " + corpus_dir);
  return cases;
}

void apply_ablation(EvalConfig& config) {
  const std::string& a = config.ablate;
  if (a.empty()) return;
  if (a == "b1")
    config.locate.pure_cg = true;
  else if (a == "b2")
    config.extract.key_cond_threshold = 1 << 20;
  else if (a == "b3")
    config.locate.only_s2 = true;
  else if (a == "b4")
    config.locate.no_key_var = true;
  else if (a == "b5")
    config.locate.no_key_api = true;
  else if (a == "b6")
    config.locate.no_call_filter = true;
  else if (a == "b7")
    ;  // single-version store selection happens at match time
  else
    throw Error("unknown ablation '" + a + "' (b1..b7)");
}

namespace {

struct CaseArtifacts {
  CaseOutcome outcome;
  std::vector<std::pair<std::string, std::string>> files;  // relpath -> content
  std::vector<std::string> warnings;
};

CaseArtifacts run_case(const LabeledCase& lc, const EvalConfig& config,
                       llm::Backend* backend) {
  CaseArtifacts art;
  art.outcome.name = lc.name;
  art.outcome.category = lc.category;
  try {
    fs::path dir(lc.dir);
    ir::Program program = ir::parse_program(read_file((dir / "program.mir").string()));
    crash::CrashReport report =
        crash::parse_crash_report(read_file((dir / "crash.txt").string()), program);

    // stores: either shipped with the case, or extracted from its program
    std::vector<ets::EtsStore> stores;
    fs::path store_dir = dir / "stores";
    if (fs::is_directory(store_dir)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(store_dir))
        if (e.path().extension() == ".ets") files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) stores.push_back(ets::load_store(f));
      if (config.ablate == "b7" && stores.size() > 1) {
        std::string keep = config.fixed_version;
        std::vector<ets::EtsStore> kept;
        for (auto& s : stores)
          if ((keep.empty() && kept.empty()) || (s.version && *s.version == keep))
            kept.push_back(std::move(s));
        if (!kept.empty()) stores = std::move(kept);
        stores.resize(1);
      }
    } else {
      stores.push_back(ets::extract_ets_serial(program, config.extract));
    }

    crash::MatchResult match = crash::best_match_ets(report, stores);
    loc::Ranking ranking = loc::locate(program, report, match.ets, config.locate);

    std::vector<std::string> sigs;
    for (const auto& c : ranking.candidates) sigs.push_back(c.sig);
    art.outcome.rank = rank_of(sigs, lc.truth);
    art.outcome.candidate_count = static_cast<int>(sigs.size());

    art.files.emplace_back("ranking.json",
                           loc::ranking_to_json(report, match.ets, ranking));
    if (backend) {
      llm::ExplanationReport er =
          llm::generate_report(program, report, match.ets, ranking, backend, config.pipeline);
      art.files.emplace_back("report.txt", llm::report_to_text(er));
      art.files.emplace_back("report.json", llm::report_to_json(er));
    }
  } catch (const std::exception& e) {
    art.outcome.failed = true;
    art.outcome.error = e.what();
    art.warnings.push_back(lc.name + ": " + e.what());
  }
  return art;
}

}  // namespace

EvalRun run_corpus(const std::string& corpus_dir, const EvalConfig& config_in, bool parallel) {
  EvalConfig config = config_in;
  apply_ablation(config);
  std::vector<LabeledCase> cases = load_corpus(corpus_dir);

  std::shared_ptr<llm::Backend> backend;
  if (config.backend != "none")
    backend = llm::make_backend(config.backend, config.mock_rules_path, config.cassette_path);

  std::vector<CaseArtifacts> results(cases.size());
  int n = static_cast<int>(cases.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i)
      results[static_cast<size_t>(i)] =
          run_case(cases[static_cast<size_t>(i)], config, backend.get());
  } else {
    for (int i = 0; i < n; ++i)
      results[static_cast<size_t>(i)] =
          run_case(cases[static_cast<size_t>(i)], config, backend.get());
  }

  EvalRun run;
  std::vector<CaseOutcome> outcomes;
  for (size_t i = 0; i < results.size(); ++i) {
    outcomes.push_back(results[i].outcome);
    for (auto& w : results[i].warnings) run.warnings.push_back(std::move(w));
    for (auto& [rel, content] : results[i].files)
      run.artifacts.emplace_back("cases/" + cases[i].name + "/" + rel, std::move(content));
  }
  run.metrics = summarize(std::move(outcomes), config.miss_floor);
  run.artifacts.emplace_back("metrics.json", metrics_to_json(run.metrics));
  run.artifacts.emplace_back("metrics.txt", metrics_to_table(run.metrics));

  if (!config.out_dir.empty()) {
    for (const auto& [rel, content] : run.artifacts)
      write_file((fs::path(config.out_dir) / rel).string(), content);
  }
  return run;
}

}  // namespace etsx::eval
