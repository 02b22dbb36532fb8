#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace etsx::eval {

struct CaseOutcome {
  std::string name;
  std::string category;        // A | B | C-coded
  std::optional<int> rank;     // 1-based rank of the ground truth
  int candidate_count = 0;
  bool failed = false;
  std::string error;
};

// 1-based rank of `truth` among the candidate signatures, or nullopt.
std::optional<int> rank_of(const std::vector<std::string>& ranking_sigs,
                           const std::string& truth);

// Sum of ranks; a miss contributes max(candidate_count + 1, miss_floor).
long rank_sum(const std::vector<CaseOutcome>& cases, int miss_floor = 20);

// Mean reciprocal rank; misses contribute 0. Errors on an empty corpus.
double mrr(const std::vector<CaseOutcome>& cases);

struct Bucket {
  int cases = 0;
  int found = 0;
  int r1 = 0, r5 = 0, r10 = 0;
  double mrr = 0.0;
  long rank_sum = 0;
  double candi_avg = 0.0;
};

struct MetricsSummary {
  Bucket overall;
  std::map<std::string, Bucket> per_category;
  std::vector<CaseOutcome> cases;
};

MetricsSummary summarize(std::vector<CaseOutcome> cases, int miss_floor = 20);

std::string metrics_to_json(const MetricsSummary& m);
std::string metrics_to_table(const MetricsSummary& m);  // aligned columns

}  // namespace etsx::eval
