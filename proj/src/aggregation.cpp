// Copyright 2026 The dynorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dynorm/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dynorm {
namespace {

void require_coherent(const WeightedProfile& profile) {
  ValidationReport report = validate_profile(profile);
  if (!report.coherent()) throw ProfileError(std::move(report));
}

// Groups alternatives by score into descending tiers, keeping universe order
// inside each tier. `less` compares score values.
template <typename Score, typename Less>
std::vector<std::vector<AlternativeId>> tiers_by_score(
    const std::vector<AlternativeId>& universe,
    const std::map<AlternativeId, Score>& scores, Less less) {
  std::vector<AlternativeId> order = universe;
  std::stable_sort(order.begin(), order.end(),
                   [&](const AlternativeId& a, const AlternativeId& b) {
                     return less(scores.at(b), scores.at(a));
                   });
  std::vector<std::vector<AlternativeId>> tiers;
  for (const auto& id : order) {
    if (!tiers.empty() && !less(scores.at(id), scores.at(tiers.back().front())) &&
        !less(scores.at(tiers.back().front()), scores.at(id))) {
      tiers.back().push_back(id);
    } else {
      tiers.push_back({id});
    }
  }
  // Restore universe order within tiers (stable_sort already guarantees it,
  // since equal scores preserve input order).
  return tiers;
}

}  // namespace

std::string to_string(Rule rule) {
  switch (rule) {
    case Rule::borda:
      return "borda";
    case Rule::ranked_pairs:
      return "ranked-pairs";
    case Rule::elo:
      return "elo";
    case Rule::plurality:
      return "plurality";
  }
  return "unknown";
}

std::optional<Rule> rule_from_string(const std::string& name) {
  if (name == "borda") return Rule::borda;
  if (name == "ranked-pairs") return Rule::ranked_pairs;
  if (name == "elo") return Rule::elo;
  if (name == "plurality") return Rule::plurality;
  return std::nullopt;
}

const std::vector<AlternativeId>& AggregateOrdering::top_tier() const {
  if (ranking.empty()) {
    throw std::logic_error("ordering over an empty universe has no top tier");
  }
  return ranking.front();
}

int AggregateOrdering::position(const AlternativeId& id) const {
  for (int i = 0; i < static_cast<int>(ranking.size()); ++i) {
    for (const auto& a : ranking[i]) {
      if (a == id) return i;
    }
  }
  throw std::invalid_argument("alternative '" + id + "' not in ordering");
}

bool AggregateOrdering::strictly_above(const AlternativeId& a,
                                       const AlternativeId& b) const {
  return position(a) < position(b);
}

int borda_score(const AlternativeId& alt, const PreferenceSet& pset) {
  const int mine = pset.tier_of(alt);
  int better = 0;
  int worse = 0;
  const auto& tiers = pset.tiers();
  for (int t = 0; t < static_cast<int>(tiers.size()); ++t) {
    if (t < mine) better += static_cast<int>(tiers[t].size());
    if (t > mine) worse += static_cast<int>(tiers[t].size());
  }
  return worse - better;
}

AggregateOrdering weighted_borda(const WeightedProfile& profile,
                                 TraceLevel trace) {
  require_coherent(profile);
  AggregateOrdering out;
  out.rule = Rule::borda;

  std::map<AlternativeId, Rational> totals;
  for (const auto& id : profile.universe()) totals.emplace(id, Rational(0));
  for (std::size_t i = 0; i < profile.entries().size(); ++i) {
    const auto& entry = profile.entries()[i];
    for (const auto& id : profile.universe()) {
      const int b = borda_score(id, entry.set);
      totals[id] += entry.weight * Rational(b);
      if (trace == TraceLevel::full) {
        out.trace.push_back({"borda-term",
                             {{"alternative", id},
                              {"entry", std::to_string(i)},
                              {"weight", entry.weight.to_string()},
                              {"borda", std::to_string(b)}}});
      }
    }
  }
  for (const auto& [id, score] : totals) {
    out.scores.emplace(id, ScoreValue::of(score));
  }
  out.ranking = tiers_by_score(profile.universe(), totals,
                               [](const Rational& a, const Rational& b) {
                                 return a < b;
                               });
  return out;
}

PairTieBreak lexicographic_pair_order() {
  return [](const std::pair<AlternativeId, AlternativeId>& a,
            const std::pair<AlternativeId, AlternativeId>& b) {
    return a < b;
  };
}

AggregateOrdering ranked_pairs(const WeightedProfile& profile,
                               PairTieBreak tie_break, TraceLevel trace) {
  const TallyMatrix tally = pairwise_tally(profile);
  const auto& universe = tally.universe();
  const int n = static_cast<int>(universe.size());

  struct Victory {
    int winner;
    int loser;
    Rational margin;
  };
  std::vector<Victory> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Rational m = tally.margin(universe[i], universe[j]);
      if (m.sign() > 0) {
        pairs.push_back({i, j, m});
      } else if (m.sign() < 0) {
        pairs.push_back({j, i, -m});
      }
      // Exactly tied pairings generate no lockable pair.
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [&](const Victory& a, const Victory& b) {
                     if (a.margin != b.margin) return b.margin < a.margin;
                     return tie_break({universe[a.winner], universe[a.loser]},
                                      {universe[b.winner], universe[b.loser]});
                   });

  std::vector<std::vector<bool>> locked(n, std::vector<bool>(n, false));
  auto reaches = [&](int from, int to) {
    std::vector<int> stack{from};
    std::vector<bool> seen(n, false);
    seen[from] = true;
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      if (cur == to) return true;
      for (int next = 0; next < n; ++next) {
        if (locked[cur][next] && !seen[next]) {
          seen[next] = true;
          stack.push_back(next);
        }
      }
    }
    return false;
  };

  AggregateOrdering out;
  out.rule = Rule::ranked_pairs;
  for (const auto& pair : pairs) {
    const bool cyclic = reaches(pair.loser, pair.winner);
    if (!cyclic) locked[pair.winner][pair.loser] = true;
    if (trace == TraceLevel::full) {
      out.trace.push_back({cyclic ? "skipped-pair" : "locked-pair",
                           {{"winner", universe[pair.winner]},
                            {"loser", universe[pair.loser]},
                            {"margin", pair.margin.to_string()}}});
    }
  }

  // Layered topological order: peel all current sources as one tier. A
  // locked edge always places its loser in a strictly later tier.
  std::vector<bool> placed(n, false);
  int remaining = n;
  while (remaining > 0) {
    std::vector<AlternativeId> tier;
    std::vector<int> tier_idx;
    for (int i = 0; i < n; ++i) {
      if (placed[i]) continue;
      bool source = true;
      for (int j = 0; j < n; ++j) {
        if (!placed[j] && locked[j][i]) {
          source = false;
          break;
        }
      }
      if (source) {
        tier.push_back(universe[i]);
        tier_idx.push_back(i);
      }
    }
    for (int i : tier_idx) placed[i] = true;
    remaining -= static_cast<int>(tier.size());
    out.ranking.push_back(std::move(tier));
  }

  const int height = static_cast<int>(out.ranking.size());
  for (int t = 0; t < height; ++t) {
    for (const auto& id : out.ranking[t]) {
      out.scores.emplace(id, ScoreValue::of(Rational(height - 1 - t)));
    }
  }
  return out;
}

double elo_expected(double r_self, double r_opponent) {
  return 1.0 / (1.0 + std::pow(10.0, (r_opponent - r_self) / 400.0));
}

EloState elo_update(EloState state, const AlternativeId& winner,
                    const AlternativeId& loser, double score_s) {
  auto w = state.ratings.find(winner);
  auto l = state.ratings.find(loser);
  if (w == state.ratings.end() || l == state.ratings.end()) {
    throw std::invalid_argument("elo_update on untracked alternative");
  }
  const double expected = elo_expected(w->second, l->second);
  const double delta = state.k_factor * (score_s - expected);
  w->second += delta;
  l->second -= delta;
  return state;
}

AggregateOrdering elo_rank(const WeightedProfile& profile, double k_factor,
                           double initial, TraceLevel trace) {
  require_coherent(profile);
  EloState state;
  state.k_factor = k_factor;
  for (const auto& id : profile.universe()) state.ratings[id] = initial;

  AggregateOrdering out;
  out.rule = Rule::elo;
  for (const auto& entry : profile.entries()) {
    const auto& tiers = entry.set.tiers();
    const double s = entry.weight.to_double();
    for (std::size_t hi = 0; hi < tiers.size(); ++hi) {
      for (std::size_t lo = hi + 1; lo < tiers.size(); ++lo) {
        for (const auto& x : tiers[hi]) {
          for (const auto& y : tiers[lo]) {
            if (trace == TraceLevel::full) {
              out.trace.push_back(
                  {"elo-update",
                   {{"winner", x},
                    {"loser", y},
                    {"score", std::to_string(s)},
                    {"expected", std::to_string(elo_expected(
                                     state.ratings.at(x),
                                     state.ratings.at(y)))}}});
            }
            state = elo_update(std::move(state), x, y, s);
          }
        }
      }
    }
  }
  for (const auto& [id, rating] : state.ratings) {
    out.scores.emplace(id, ScoreValue::of(rating));
  }
  out.ranking = tiers_by_score(profile.universe(), state.ratings,
                               [](double a, double b) { return a < b; });
  return out;
}

AggregateOrdering plurality_winner(const WeightedProfile& profile,
                                   TraceLevel trace) {
  AggregateOrdering out;
  out.rule = Rule::plurality;
  std::map<AlternativeId, Rational> totals;
  for (const auto& id : profile.universe()) totals.emplace(id, Rational(0));
  for (const auto& entry : profile.entries()) {
    if (entry.set.tiers().empty()) continue;
    const auto& top = entry.set.tiers().front();
    const Rational share =
        entry.weight / Rational(static_cast<std::int64_t>(top.size()));
    for (const auto& id : top) {
      auto it = totals.find(id);
      if (it != totals.end()) it->second += share;
    }
    if (trace == TraceLevel::full) {
      std::string tops;
      for (const auto& id : top) {
        if (!tops.empty()) tops += ",";
        tops += id;
      }
      out.trace.push_back({"top-tier-votes",
                           {{"alternatives", tops},
                            {"share", share.to_string()}}});
    }
  }
  for (const auto& [id, score] : totals) {
    out.scores.emplace(id, ScoreValue::of(score));
  }
  out.ranking = tiers_by_score(profile.universe(), totals,
                               [](const Rational& a, const Rational& b) {
                                 return a < b;
                               });
  return out;
}

AggregateOrdering aggregate(const WeightedProfile& profile, Rule rule,
                            const AggregateOptions& options) {
  switch (rule) {
    case Rule::borda:
      return weighted_borda(profile, options.trace);
    case Rule::ranked_pairs:
      return ranked_pairs(profile, lexicographic_pair_order(), options.trace);
    case Rule::elo:
      return elo_rank(profile, options.elo_k_factor, options.elo_initial,
                      options.trace);
    case Rule::plurality:
      return plurality_winner(profile, options.trace);
  }
  throw std::invalid_argument("unknown rule");
}

}  // namespace dynorm
