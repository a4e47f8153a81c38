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

#ifndef DYNORM_AGGREGATION_HPP_
#define DYNORM_AGGREGATION_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynorm/preference.hpp"
#include "dynorm/rational.hpp"

namespace dynorm {

enum class Rule { borda, ranked_pairs, elo, plurality };

std::string to_string(Rule rule);
std::optional<Rule> rule_from_string(const std::string& name);

// A per-alternative score that is either an exact rational (borda,
// ranked-pairs, plurality) or a real (elo).
struct ScoreValue {
  bool exact = true;
  Rational q;
  double x = 0.0;

  static ScoreValue of(const Rational& value) { return {true, value, 0.0}; }
  static ScoreValue of(double value) { return {false, Rational(0), value}; }
  double as_double() const { return exact ? q.to_double() : x; }

  friend bool operator==(const ScoreValue& a, const ScoreValue& b) {
    if (a.exact != b.exact) return false;
    return a.exact ? a.q == b.q : a.x == b.x;
  }
};

// One step of rule provenance: a locked/skipped pair for ranked pairs, a
// per-entry score term for borda, a rating update for elo.
struct TraceEvent {
  std::string kind;
  std::map<std::string, std::string> fields;
};

struct AggregateOrdering {
  Rule rule = Rule::borda;
  // Tiers from most to least preferred; alternatives sharing a tier are
  // equally preferable. Within a tier, universe order.
  std::vector<std::vector<AlternativeId>> ranking;
  std::map<AlternativeId, ScoreValue> scores;
  std::vector<TraceEvent> trace;

  const std::vector<AlternativeId>& top_tier() const;
  // Tier index of `id`; throws if absent.
  int position(const AlternativeId& id) const;
  bool strictly_above(const AlternativeId& a, const AlternativeId& b) const;

  friend bool operator==(const AggregateOrdering& a,
                         const AggregateOrdering& b) {
    return a.rule == b.rule && a.ranking == b.ranking && a.scores == b.scores;
  }
};

// Trace construction is skipped under `none`; audits use that path.
enum class TraceLevel { none, full };

// (#alternatives strictly worse than alt) - (#alternatives strictly better),
// same-tier alternatives counting toward neither. Throws if alt is absent.
int borda_score(const AlternativeId& alt, const PreferenceSet& pset);

AggregateOrdering weighted_borda(const WeightedProfile& profile,
                                 TraceLevel trace = TraceLevel::full);

// Order applied among victorious pairs of equal margin; (winner, loser) id
// pairs. Must be a strict weak ordering for determinism.
using PairTieBreak =
    std::function<bool(const std::pair<AlternativeId, AlternativeId>&,
                       const std::pair<AlternativeId, AlternativeId>&)>;
PairTieBreak lexicographic_pair_order();

// Tideman's method: sorts victorious pairs by descending margin, locks each
// into a directed graph unless it would create a cycle, and returns the
// layered topological order of the locked graph (pairwise-unconstrained
// alternatives share a tier). Scores are tier heights.
AggregateOrdering ranked_pairs(const WeightedProfile& profile,
                               PairTieBreak tie_break =
                                   lexicographic_pair_order(),
                               TraceLevel trace = TraceLevel::full);

struct EloState {
  std::map<AlternativeId, double> ratings;
  double k_factor = 32.0;
};

// Expected score of a player rated r_self against r_opponent:
// 1 / (1 + 10^((r_opponent - r_self) / 400)).
double elo_expected(double r_self, double r_opponent);

// Applies one dispute: the winner gains k * (score_s - expected) and the
// loser loses exactly the same amount, so the rating sum is conserved.
EloState elo_update(EloState state, const AlternativeId& winner,
                    const AlternativeId& loser, double score_s = 1.0);

// Expands each entry into a win per strictly-ordered pair, with the entry
// weight as the score S of the win, and folds elo_update over them in input
// order. Entry order matters; this fold is sequential by contract.
AggregateOrdering elo_rank(const WeightedProfile& profile,
                           double k_factor = 32.0, double initial = 1000.0,
                           TraceLevel trace = TraceLevel::full);

// Scores each alternative by the weight of entries whose top tier contains
// it, split equally across a tied top tier.
AggregateOrdering plurality_winner(const WeightedProfile& profile,
                                   TraceLevel trace = TraceLevel::full);

struct AggregateOptions {
  double elo_k_factor = 32.0;
  double elo_initial = 1000.0;
  TraceLevel trace = TraceLevel::full;
};

// Dispatch by rule with default parameters; used by audits and the CLI.
AggregateOrdering aggregate(const WeightedProfile& profile, Rule rule,
                            const AggregateOptions& options = {});

}  // namespace dynorm

#endif  // DYNORM_AGGREGATION_HPP_
