#include "etsx/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "etsx/common.hpp"
#include "json.hpp"

namespace etsx::eval {

using ordered_json = nlohmann::ordered_json;

std::optional<int> rank_of(const std::vector<std::string>& ranking_sigs,
                           const std::string& truth) {
  for (size_t i = 0; i < ranking_sigs.size(); ++i)
    if (ranking_sigs[i] == truth) return static_cast<int>(i) + 1;
  return std::nullopt;
}

long rank_sum(const std::vector<CaseOutcome>& cases, int miss_floor) {
  long sum = 0;
  for (const auto& c : cases) {
    if (c.rank)
      sum += *c.rank;
    else
      sum += std::max(c.candidate_count + 1, miss_floor);
  }
  return sum;
}

double mrr(const std::vector<CaseOutcome>& cases) {
  if (cases.empty()) throw Error("MRR over an empty corpus");
  double sum = 0.0;
  for (const auto& c : cases)
    if (c.rank) sum += 1.0 / static_cast<double>(*c.rank);
  return sum / static_cast<double>(cases.size());
}

namespace {

Bucket bucket_of(const std::vector<CaseOutcome>& cases, int miss_floor) {
  Bucket b;
  b.cases = static_cast<int>(cases.size());
  long candi_total = 0;
  for (const auto& c : cases) {
    candi_total += c.candidate_count;
    if (!c.rank) continue;
    ++b.found;
    if (*c.rank <= 1) ++b.r1;
    if (*c.rank <= 5) ++b.r5;
    if (*c.rank <= 10) ++b.r10;
  }
  b.mrr = cases.empty() ? 0.0 : mrr(cases);
  b.rank_sum = rank_sum(cases, miss_floor);
  b.candi_avg = cases.empty() ? 0.0
                              : static_cast<double>(candi_total) / static_cast<double>(cases.size());
  return b;
}

double pct(int num, int den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ordered_json bucket_json(const Bucket& b) {
  ordered_json j;
  j["cases"] = b.cases;
  j["found"] = b.found;
  j["r@1"] = b.r1;
  j["r@5"] = b.r5;
  j["r@10"] = b.r10;
  j["r@1_pct"] = pct(b.r1, b.cases);
  j["r@5_pct"] = pct(b.r5, b.cases);
  j["r@10_pct"] = pct(b.r10, b.cases);
  j["mrr"] = b.mrr;
  j["rank_sum"] = b.rank_sum;
  j["candi_avg"] = b.candi_avg;
  return j;
}

}  // namespace

MetricsSummary summarize(std::vector<CaseOutcome> cases, int miss_floor) {
  std::sort(cases.begin(), cases.end(),
            [](const CaseOutcome& a, const CaseOutcome& b) { return a.name < b.name; });
  MetricsSummary m;
  m.overall = bucket_of(cases, miss_floor);
  std::map<std::string, std::vector<CaseOutcome>> by_cat;
  for (const auto& c : cases) by_cat[c.category].push_back(c);
  for (const auto& [cat, cs] : by_cat) m.per_category[cat] = bucket_of(cs, miss_floor);
  m.cases = std::move(cases);
  return m;
}

std::string metrics_to_json(const MetricsSummary& m) {
  ordered_json j;
  j["overall"] = bucket_json(m.overall);
  ordered_json cats = ordered_json::object();
  for (const auto& [cat, b] : m.per_category) cats[cat] = bucket_json(b);
  j["per_category"] = cats;
  ordered_json cases = ordered_json::array();
  for (const auto& c : m.cases) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["category"] = c.category;
    cj["rank"] = c.rank ? ordered_json(*c.rank) : ordered_json(nullptr);
    cj["candidates"] = c.candidate_count;
    if (c.failed) cj["error"] = c.error;
    cases.push_back(cj);
  }
  j["cases"] = cases;
  return j.dump(2);
}

std::string metrics_to_table(const MetricsSummary& m) {
  std::ostringstream os;
  auto row = [&os](const std::string& label, const Bucket& b) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %6d %6d %6d %6d %6d %8.4f %9ld %9.2f\n", label.c_str(),
                  b.cases, b.found, b.r1, b.r5, b.r10, b.mrr, b.rank_sum, b.candi_avg);
    os << buf;
  };
  os << "bucket        cases  found    R@1    R@5   R@10      MRR   RankSum  CandiAvg\n";
  row("overall", m.overall);
  for (const auto& [cat, b] : m.per_category) row(cat, b);
  return os.str();
}

}  // namespace etsx::eval
