#pragma once

#include <string>

#include "etsx/crash.hpp"
#include "etsx/ets.hpp"
#include "etsx/localizer.hpp"

namespace etsx::loc {

// Self-contained ranking JSON: crash report, matched ETS, candidates with
// full evidence. Round-trips for the cis/explain CLI surfaces.
std::string ranking_to_json(const crash::CrashReport& report, const ets::Ets& ets,
                            const Ranking& ranking);

struct RankingBundle {
  crash::CrashReport report;
  ets::Ets ets;
  Ranking ranking;
};

RankingBundle ranking_from_json(const std::string& text);

}  // namespace etsx::loc
