#include "doctest.h"
#include "etsx/common.hpp"
#include "etsx/metrics.hpp"

using namespace etsx;
using namespace etsx::eval;

namespace {

CaseOutcome outcome(const std::string& name, std::optional<int> rank, int candi,
                    const std::string& cat = "A") {
  CaseOutcome c;
  c.name = name;
  c.category = cat;
  c.rank = rank;
  c.candidate_count = candi;
  return c;
}

}  // namespace

TEST_CASE("rank_of basics") {
  std::vector<std::string> sigs = {"a.M.x", "a.M.y", "a.M.z"};
  CHECK(rank_of(sigs, "a.M.x") == 1);
  CHECK(rank_of(sigs, "a.M.y") == 2);
  CHECK(rank_of(sigs, "a.M.q") == std::nullopt);
  std::vector<std::string> six = {"m1", "m2", "m3", "m4", "m5", "m6"};
  CHECK(rank_of(six, "m2") == 2);
}

TEST_CASE("rank_sum substitutes max(candiSize+1, 20) for misses") {
  CHECK(rank_sum({outcome("a", 1, 3), outcome("b", 2, 3), outcome("c", 3, 3)}) == 6);
  CHECK(rank_sum({outcome("a", std::nullopt, 6)}) == 20);
  CHECK(rank_sum({outcome("a", std::nullopt, 25)}) == 26);
  SUBCASE("boundary cases around the default floor") {
    CHECK(rank_sum({outcome("a", std::nullopt, 19)}) == 20);
    CHECK(rank_sum({outcome("a", std::nullopt, 20)}) == 21);
    CHECK(rank_sum({outcome("a", std::nullopt, 21)}) == 22);
  }
}

TEST_CASE("mrr arithmetic") {
  CHECK(mrr({outcome("a", 1, 1), outcome("b", 1, 1)}) == doctest::Approx(1.0));
  CHECK(mrr({outcome("a", 1, 2), outcome("b", 2, 2)}) == doctest::Approx(0.75));
  double got = mrr({outcome("a", 1, 9), outcome("b", 2, 9), outcome("c", 4, 9),
                    outcome("d", std::nullopt, 9)});
  CHECK(got == doctest::Approx(0.4375).epsilon(1e-12));
  CHECK_THROWS_AS(mrr({}), Error);
}

TEST_CASE("mrr over identical ranks r equals 1/r") {
  for (int r = 1; r <= 8; ++r) {
    std::vector<CaseOutcome> cases;
    for (int i = 0; i < 5; ++i) cases.push_back(outcome("c" + std::to_string(i), r, 10));
    CHECK(mrr(cases) == doctest::Approx(1.0 / r).epsilon(1e-12));
  }
}

TEST_CASE("summaries: recall is monotone in N and categories are split out") {
  std::vector<CaseOutcome> cases = {
      outcome("a", 1, 4, "A"),    outcome("b", 3, 6, "A"),
      outcome("c", 7, 12, "B"),   outcome("d", std::nullopt, 2, "B"),
      outcome("e", 11, 15, "C-coded"),
  };
  MetricsSummary m = summarize(cases);
  CHECK(m.overall.cases == 5);
  CHECK(m.overall.found == 4);
  CHECK(m.overall.r1 <= m.overall.r5);
  CHECK(m.overall.r5 <= m.overall.r10);
  CHECK(m.overall.r1 == 1);
  CHECK(m.overall.r5 == 2);
  CHECK(m.overall.r10 == 3);
  CHECK(m.per_category.at("A").cases == 2);
  CHECK(m.per_category.at("B").found == 1);
  CHECK(m.per_category.at("C-coded").r10 == 0);
  CHECK(m.overall.rank_sum == 1 + 3 + 7 + 20 + 11);
  CHECK(m.overall.candi_avg == doctest::Approx((4 + 6 + 12 + 2 + 15) / 5.0));

  SUBCASE("JSON and table renderings carry the headline numbers") {
    std::string j = metrics_to_json(m);
    CHECK(j.find("\"rank_sum\": 42") != std::string::npos);
    std::string t = metrics_to_table(m);
    CHECK(t.find("overall") != std::string::npos);
    CHECK(t.find("C-coded") != std::string::npos);
  }
}
