#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "etsx/ets_extract.hpp"
#include "etsx/eval.hpp"
#include "etsx/explain.hpp"
#include "etsx/ir_parse.hpp"
#include "etsx/ranking_io.hpp"

namespace fs = std::filesystem;
using namespace etsx;

namespace {

ir::Program load_program(const std::string& path) {
  return ir::parse_program(read_file(path));
}

std::vector<ets::EtsStore> load_stores(const std::string& dir_or_file) {
  std::vector<ets::EtsStore> stores;
  if (fs::is_directory(dir_or_file)) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir_or_file))
      if (e.path().extension() == ".ets") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) stores.push_back(ets::load_store(f));
  } else {
    stores.push_back(ets::load_store(dir_or_file));
  }
  if (stores.empty()) throw Error("no .ets stores under " + dir_or_file);
  return stores;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"etsx - exception-thrown-summary crash fault localization"};
  app.require_subcommand(1);

  // extract
  auto* cmd_extract = app.add_subcommand("extract", "extract ETSs from framework code");
  std::string ex_framework, ex_out, ex_handlers;
  int ex_threshold = 3;
  bool ex_serial = false;
  cmd_extract->add_option("--framework", ex_framework, "mini-IR program file")->required();
  cmd_extract->add_option("--out", ex_out, "output ETS store path")->required();
  cmd_extract->add_option("--handlers", ex_handlers, "handler-method list file (one per line)");
  cmd_extract->add_option("--key-cond-threshold", ex_threshold, "keyCond cap (default 3)");
  cmd_extract->add_flag("--serial", ex_serial, "disable the parallel driver");

  // match
  auto* cmd_match = app.add_subcommand("match", "match a crash report to an ETS");
  std::string m_report, m_stores, m_program, m_version;
  cmd_match->add_option("--report", m_report, "crash report file")->required();
  cmd_match->add_option("--stores", m_stores, "ETS store file or directory")->required();
  cmd_match->add_option("--program", m_program, "mini-IR program file")->required();
  cmd_match->add_option("--version", m_version, "framework version label");

  // locate
  auto* cmd_locate = app.add_subcommand("locate", "rank buggy-method candidates");
  std::string l_program, l_report, l_store, l_out, l_version;
  cmd_locate->add_option("--program", l_program, "mini-IR program file")->required();
  cmd_locate->add_option("--report", l_report, "crash report file")->required();
  cmd_locate->add_option("--ets-store", l_store, "ETS store file or directory")->required();
  cmd_locate->add_option("--out", l_out, "ranking JSON output path")->required();
  cmd_locate->add_option("--version", l_version, "framework version label");

  // cis
  auto* cmd_cis = app.add_subcommand("cis", "build candidate information summaries");
  std::string c_ranking, c_program, c_out;
  int c_top_k = 5;
  cmd_cis->add_option("--ranking", c_ranking, "ranking JSON from locate")->required();
  cmd_cis->add_option("--program", c_program, "mini-IR program file")->required();
  cmd_cis->add_option("--out", c_out, "output directory")->required();
  cmd_cis->add_option("--top-k", c_top_k, "candidates to summarize (default 5)");

  // explain
  auto* cmd_explain = app.add_subcommand("explain", "generate the explanation report");
  std::string e_ranking, e_program, e_out, e_backend = "mock", e_rules, e_cassette;
  bool e_naive = false;
  int e_top_k = 5, e_max_turns = 3;
  cmd_explain->add_option("--ranking", e_ranking, "ranking JSON from locate")->required();
  cmd_explain->add_option("--program", e_program, "mini-IR program file")->required();
  cmd_explain->add_option("--out", e_out, "output directory")->required();
  cmd_explain->add_option("--backend", e_backend, "mock|replay|remote");
  cmd_explain->add_option("--mock-rules", e_rules, "mock backend rules JSON");
  cmd_explain->add_option("--cassette", e_cassette, "replay cassette path");
  cmd_explain->add_option("--top-k", e_top_k, "candidates to explain (default 5)");
  cmd_explain->add_option("--max-turns", e_max_turns, "constraint retry turns (default 3)");
  cmd_explain->add_flag("--naive", e_naive, "template-only report, no backend calls");

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "run a labeled corpus and compute metrics");
  std::string v_corpus, v_out, v_ablate, v_backend = "mock", v_rules, v_cassette, v_version;
  bool v_serial = false;
  cmd_eval->add_option("--corpus", v_corpus, "corpus directory")->required();
  cmd_eval->add_option("--out", v_out, "output directory")->required();
  cmd_eval->add_option("--ablate", v_ablate, "ablation b1..b7");
  cmd_eval->add_option("--backend", v_backend, "mock|replay|remote|none");
  cmd_eval->add_option("--mock-rules", v_rules, "mock backend rules JSON");
  cmd_eval->add_option("--cassette", v_cassette, "replay cassette path");
  cmd_eval->add_option("--fixed-version", v_version, "b7: store version to keep");
  cmd_eval->add_flag("--serial", v_serial, "disable the parallel worker pool");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_extract) {
      ir::Program program = load_program(ex_framework);
      ets::ExtractConfig config;
      config.key_cond_threshold = ex_threshold;
      if (!ex_handlers.empty()) {
        config.handler_methods.clear();
        for (const auto& line : split(read_file(ex_handlers), '\n')) {
          std::string t = trim(line);
          if (!t.empty() && t[0] != '#') config.handler_methods.push_back(t);
        }
      }
      ets::EtsStore store =
          ex_serial ? ets::extract_ets_serial(program, config) : ets::extract_ets(program, config);
      ets::save_store(store, ex_out);
      std::cout << "extracted " << store.records.size() << " ETS record(s) -> " << ex_out << "\n";
      for (const auto& w : store.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }
    if (*cmd_match) {
      ir::Program program = load_program(m_program);
      crash::CrashReport report = crash::parse_crash_report(read_file(m_report), program);
      auto stores = load_stores(m_stores);
      std::optional<std::string> ver;
      if (!m_version.empty()) ver = m_version;
      crash::MatchResult match = crash::best_match_ets(report, stores, ver);
      crash::StackRoles roles = crash::assign_roles(report, program);
      std::cout << "matched ETS: " << ets::serialize_ets_record(match.ets) << "\n";
      std::cout << "ets_type: " << ets::ets_type_name(ets::classify_ets(match.ets)) << "\n";
      // parameter locations print 1-based here; the store keeps them 0-based
      for (const auto& kv : match.ets.key_vars)
        std::cout << "keyVar: ⟨" << kv.mtd << ", " << (kv.loc + 1) << ", "
                  << kv.key_cond_var << "⟩\n";
      for (const auto& ka : match.ets.key_apis)
        std::cout << "keyAPI: ⟨" << ka.mtd << ", " << ka.key_field << ", "
                  << ka.key_cond_var << ", " << ka.dpt << "⟩\n";
      std::cout << "roles: signaler=" << roles.signaler << " crashAPI=" << roles.crash_api
                << " crashMethod=" << roles.crash_method << " entry=" << roles.entry << "\n";
      for (const auto& n : match.notes) std::cout << "note: " << n << "\n";
      return 0;
    }
    if (*cmd_locate) {
      ir::Program program = load_program(l_program);
      crash::CrashReport report = crash::parse_crash_report(read_file(l_report), program);
      auto stores = load_stores(l_store);
      std::optional<std::string> ver;
      if (!l_version.empty()) ver = l_version;
      crash::MatchResult match = crash::best_match_ets(report, stores, ver);
      loc::Ranking ranking = loc::locate(program, report, match.ets);
      write_file(l_out, loc::ranking_to_json(report, match.ets, ranking));
      std::cout << "ranked " << ranking.candidates.size() << " candidate(s) -> " << l_out << "\n";
      for (const auto& w : ranking.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }
    if (*cmd_cis) {
      ir::Program program = load_program(c_program);
      loc::RankingBundle bundle = loc::ranking_from_json(read_file(c_ranking));
      ir::CallGraph cg = ir::build_cg(program);
      crash::StackRoles roles = crash::assign_roles(bundle.report, program);
      cis::CisInput cin{&program, &cg, &bundle.report, &roles, &bundle.ets};
      int k = 0;
      for (const auto& cand : bundle.ranking.candidates) {
        if (k >= c_top_k) break;
        cis::Cis one = cis::build_cis(cin, cand);
        std::string name = cand.sig;
        std::replace(name.begin(), name.end(), '.', '_');
        write_file((fs::path(c_out) / (std::to_string(k + 1) + "_" + name + ".json")).string(),
                   cis::cis_to_json(one));
        ++k;
      }
      std::cout << "wrote " << k << " CIS file(s) -> " << c_out << "\n";
      return 0;
    }
    if (*cmd_explain) {
      ir::Program program = load_program(e_program);
      loc::RankingBundle bundle = loc::ranking_from_json(read_file(e_ranking));
      std::shared_ptr<llm::Backend> backend;
      if (!e_naive) backend = llm::make_backend(e_backend, e_rules, e_cassette);
      llm::PipelineConfig config;
      config.naive = e_naive;
      config.top_k = e_top_k;
      config.max_turns = e_max_turns;
      llm::ExplanationReport report = llm::generate_report(program, bundle.report, bundle.ets,
                                                           bundle.ranking, backend.get(), config);
      write_file((fs::path(e_out) / "report.txt").string(), llm::report_to_text(report));
      write_file((fs::path(e_out) / "report.json").string(), llm::report_to_json(report));
      std::cout << "explanation report -> " << e_out << "\n";
      return 0;
    }
    if (*cmd_eval) {
      eval::EvalConfig config;
      config.ablate = v_ablate;
      config.backend = v_backend;
      config.mock_rules_path = v_rules;
      config.cassette_path = v_cassette;
      config.fixed_version = v_version;
      config.out_dir = v_out;
      eval::EvalRun run = eval::run_corpus(v_corpus, config, !v_serial);
      std::cout << eval::metrics_to_table(run.metrics);
      for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
