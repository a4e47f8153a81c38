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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dynorm/aggregation.hpp"
#include "dynorm/audit.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dynorm;
using testutil::strict;

namespace {

std::vector<std::vector<AlternativeId>> ranking_of(
    const AggregateOrdering& ordering) {
  return ordering.ranking;
}

}  // namespace

TEST_CASE("borda score counts worse minus better, ties count neither") {
  CHECK(borda_score("A", strict({"A", "B", "C", "D"})) == 3);
  CHECK(borda_score("D", strict({"A", "B", "C", "D"})) == -3);
  CHECK(borda_score("C", PreferenceSet({{"C", "D"}, {"B"}, {"A"}})) == 2);
  CHECK(borda_score("D", PreferenceSet({{"C", "D"}, {"B"}, {"A"}})) == 2);
  CHECK(borda_score("B", PreferenceSet({{"C", "D"}, {"B"}, {"A"}})) == -1);
  CHECK(borda_score("X", PreferenceSet({{"X"}})) == 0);
  CHECK_THROWS_AS(borda_score("Z", strict({"A", "B"})),
                  std::invalid_argument);
}

TEST_CASE("weighted borda on the five-set election gives the printed "
          "scores") {
  const auto ordering = weighted_borda(testutil::election_32());
  CHECK(ranking_of(ordering) ==
        std::vector<std::vector<AlternativeId>>{{"D"}, {"C"}, {"B"}, {"A"}});
  CHECK(ordering.scores.at("D").q == Rational(3, 4));
  CHECK(ordering.scores.at("C").q == Rational(0));
  CHECK(ordering.scores.at("B").q == Rational(-1, 4));
  CHECK(ordering.scores.at("A").q == Rational(-1, 2));
}

TEST_CASE("weighted borda on the pre-update election matches the oracle") {
  const auto profile = testutil::election_24();
  const auto ordering = weighted_borda(profile);
  CHECK(ordering.scores.at("A").q == Rational(1, 2));
  CHECK(ordering.scores.at("B").q == Rational(1, 3));
  CHECK(ordering.scores.at("D").q == Rational(-1, 6));
  CHECK(ordering.scores.at("C").q == Rational(-2, 3));
  CHECK(ranking_of(ordering) ==
        std::vector<std::vector<AlternativeId>>{{"A"}, {"B"}, {"D"}, {"C"}});
  for (const auto& id : profile.universe()) {
    CHECK(ordering.scores.at(id).q == oracles::brute_borda(profile, id));
  }
}

TEST_CASE("single-entry profile returns its own ordering with raw scores") {
  WeightedProfile profile({"A", "B", "C"},
                          {{strict({"B", "A", "C"}), Rational(1)}});
  const auto ordering = weighted_borda(profile);
  CHECK(ranking_of(ordering) ==
        std::vector<std::vector<AlternativeId>>{{"B"}, {"A"}, {"C"}});
  CHECK(ordering.scores.at("B").q == Rational(2));
  CHECK(ordering.scores.at("A").q == Rational(0));
  CHECK(ordering.scores.at("C").q == Rational(-2));
}

TEST_CASE("borda scores sum to zero exactly on random coherent profiles") {
  for (long trial = 0; trial < 500; ++trial) {
    auto rng = trial_rng(17, trial);
    const auto profile = random_profile(5, 6, rng);
    const auto ordering = weighted_borda(profile);
    Rational sum(0);
    for (const auto& [id, score] : ordering.scores) sum += score.q;
    CHECK(sum == Rational(0));
  }
}

TEST_CASE("ranked pairs locks the 100-voter election into A > B > C") {
  const auto ordering = ranked_pairs(testutil::election_70_20_10());
  CHECK(ranking_of(ordering) ==
        std::vector<std::vector<AlternativeId>>{{"A"}, {"B"}, {"C"}});
}

TEST_CASE("ranked pairs on the pre-update election elects D") {
  const auto ordering = ranked_pairs(testutil::election_24());
  CHECK(ranking_of(ordering) ==
        std::vector<std::vector<AlternativeId>>{{"D"}, {"A"}, {"B"}, {"C"}});
  // Two pairs create cycles and are skipped.
  int skipped = 0;
  for (const auto& event : ordering.trace) {
    if (event.kind == "skipped-pair") ++skipped;
  }
  CHECK(skipped == 2);
}

TEST_CASE("two-alternative ranked pairs puts the majority winner first") {
  WeightedProfile profile({"A", "B"},
                          {{strict({"B", "A"}), Rational(3, 5)},
                           {strict({"A", "B"}), Rational(2, 5)}});
  const auto ordering = ranked_pairs(profile);
  CHECK(ordering.top_tier() == std::vector<AlternativeId>{"B"});
}

TEST_CASE("ranked pairs output is a topological order of the locked graph") {
  for (long trial = 0; trial < 300; ++trial) {
    auto rng = trial_rng(19, trial);
    const auto profile = random_profile(5, 5, rng);
    const auto ordering = ranked_pairs(profile);
    for (const auto& event : ordering.trace) {
      if (event.kind != "locked-pair") continue;
      CHECK(ordering.strictly_above(event.fields.at("winner"),
                                    event.fields.at("loser")));
    }
  }
}

TEST_CASE("ranked pairs places a condorcet winner alone at the top") {
  for (long trial = 0; trial < 300; ++trial) {
    auto rng = trial_rng(23, trial);
    const auto profile = random_profile(4, 5, rng);
    const auto winner = condorcet_winner(pairwise_tally(profile));
    if (!winner) continue;
    const auto ordering = ranked_pairs(profile);
    CHECK(ordering.top_tier() == std::vector<AlternativeId>{*winner});
  }
}

TEST_CASE("elo expected score matches the closed form") {
  CHECK(elo_expected(1600, 1000) == doctest::Approx(0.9693).epsilon(1e-4));
  CHECK(elo_expected(1000, 1000) == 0.5);
  CHECK(elo_expected(1000, 1400) == doctest::Approx(1.0 / 11.0));
}

TEST_CASE("elo update reproduces the 1600-vs-1000 example") {
  EloState state;
  state.ratings = {{"A", 1600.0}, {"B", 1000.0}};
  state.k_factor = 32.0;
  const auto updated = elo_update(state, "A", "B");
  CHECK(updated.ratings.at("A") == doctest::Approx(1600.98).epsilon(1e-5));
  // The printed 999.01 rounds the same value the update computes here.
  CHECK(updated.ratings.at("B") == doctest::Approx(999.02).epsilon(1e-5));
  CHECK(updated.ratings.at("A") + updated.ratings.at("B") ==
        doctest::Approx(2600.0).epsilon(1e-12));
}

TEST_CASE("elo update conserves the rating sum exactly") {
  EloState state;
  state.ratings = {{"A", 1234.5}, {"B", 987.6}};
  const double before = state.ratings.at("A") + state.ratings.at("B");
  for (int i = 0; i < 50; ++i) {
    state = elo_update(std::move(state), i % 2 ? "A" : "B",
                       i % 2 ? "B" : "A", 0.7);
  }
  CHECK(state.ratings.at("A") + state.ratings.at("B") == before);
}

TEST_CASE("elo draw at equal ratings changes nothing") {
  EloState state;
  state.ratings = {{"A", 1000.0}, {"B", 1000.0}};
  const auto updated = elo_update(state, "A", "B", 0.5);
  CHECK(updated.ratings.at("A") == 1000.0);
  CHECK(updated.ratings.at("B") == 1000.0);
}

TEST_CASE("elo win at equal ratings transfers half the K-factor") {
  EloState state;
  state.ratings = {{"A", 1000.0}, {"B", 1000.0}};
  const auto updated = elo_update(state, "A", "B");
  CHECK(updated.ratings.at("A") == 1016.0);
  CHECK(updated.ratings.at("B") == 984.0);
}

TEST_CASE("elo update on an untracked alternative throws") {
  EloState state;
  state.ratings = {{"A", 1000.0}};
  CHECK_THROWS_AS(elo_update(state, "A", "Z"), std::invalid_argument);
}

TEST_CASE("elo rank: one ballot puts the winner above the loser") {
  WeightedProfile profile({"A", "B"}, {{strict({"A", "B"}), Rational(1)}});
  const auto ordering = elo_rank(profile);
  CHECK(ordering.scores.at("A").x > ordering.scores.at("B").x);
}

TEST_CASE("elo rank puts the condorcet winner of the 100-voter election on "
          "top") {
  const auto ordering = elo_rank(testutil::election_70_20_10());
  CHECK(ordering.top_tier() == std::vector<AlternativeId>{"A"});
  CHECK(condorcet_winner(pairwise_tally(testutil::election_70_20_10())) ==
        AlternativeId("A"));
}

TEST_CASE("elo rank of an empty profile is one shared tier at the initial "
          "rating") {
  WeightedProfile profile({"A", "B", "C"}, {});
  const auto ordering = elo_rank(profile, 32.0, 1000.0);
  CHECK(ordering.ranking ==
        std::vector<std::vector<AlternativeId>>{{"A", "B", "C"}});
  for (const auto& [id, score] : ordering.scores) CHECK(score.x == 1000.0);
}

TEST_CASE("plurality scores the 100-voter election by top-tier weight") {
  const auto ordering = plurality_winner(testutil::election_70_20_10());
  CHECK(ordering.top_tier() == std::vector<AlternativeId>{"A"});
  CHECK(ordering.scores.at("A").q == Rational(7, 10));
  CHECK(ordering.scores.at("B").q == Rational(1, 5));
  CHECK(ordering.scores.at("C").q == Rational(1, 10));
}

TEST_CASE("plurality splits a tied top tier evenly") {
  WeightedProfile profile(
      {"C", "D"}, {{PreferenceSet({{"C", "D"}}), Rational(1)}});
  const auto ordering = plurality_winner(profile);
  CHECK(ordering.scores.at("C").q == Rational(1, 2));
  CHECK(ordering.scores.at("D").q == Rational(1, 2));
  CHECK(ordering.ranking ==
        std::vector<std::vector<AlternativeId>>{{"C", "D"}});
}

TEST_CASE("plurality reports a two-way tie for equal-weight opposed tops") {
  WeightedProfile profile({"A", "B"},
                          {{strict({"A", "B"}), Rational(1, 2)},
                           {strict({"B", "A"}), Rational(1, 2)}});
  const auto ordering = plurality_winner(profile);
  CHECK(ordering.ranking ==
        std::vector<std::vector<AlternativeId>>{{"A", "B"}});
}

TEST_CASE("all rules reject an incoherent profile except plurality, which "
          "has no error path") {
  WeightedProfile bad({"A", "B"}, {{strict({"A", "B"}), Rational(1, 2)}});
  CHECK_THROWS_AS(weighted_borda(bad), ProfileError);
  CHECK_THROWS_AS(ranked_pairs(bad), ProfileError);
  CHECK_THROWS_AS(elo_rank(bad), ProfileError);
  CHECK_NOTHROW(plurality_winner(bad));
}

TEST_CASE("rankings are always consistent with scores") {
  for (long trial = 0; trial < 200; ++trial) {
    auto rng = trial_rng(29, trial);
    const auto profile = random_profile(4, 5, rng);
    for (Rule rule :
         {Rule::borda, Rule::ranked_pairs, Rule::elo, Rule::plurality}) {
      const auto ordering = aggregate(profile, rule, {});
      for (std::size_t i = 0; i + 1 < ordering.ranking.size(); ++i) {
        const double upper = ordering.scores.at(ordering.ranking[i][0]).as_double();
        const double lower =
            ordering.scores.at(ordering.ranking[i + 1][0]).as_double();
        CHECK(upper > lower);
      }
    }
  }
}

TEST_CASE("rules are neutral under relabeling") {
  const std::map<AlternativeId, AlternativeId> rename = {
      {"A", "Q"}, {"B", "P"}, {"C", "R"}, {"D", "S"}};
  for (long trial = 0; trial < 100; ++trial) {
    auto rng = trial_rng(31, trial);
    const auto profile = random_profile(4, 4, rng);
    const auto renamed = profile.relabeled(rename);
    for (Rule rule : {Rule::borda, Rule::elo, Rule::plurality}) {
      const auto a = aggregate(profile, rule, {});
      const auto b = aggregate(renamed, rule, {});
      for (const auto& [id, score] : a.scores) {
        const auto& other = b.scores.at(rename.at(id));
        if (score.exact) {
          CHECK(score.q == other.q);
        } else {
          CHECK(score.x == other.x);
        }
      }
    }
    // Ranked pairs is neutral whenever no two victorious pairs share a
    // margin; the documented lexicographic tie-break is label-sensitive.
    const auto rp = ranked_pairs(profile);
    std::set<std::string> margins;
    bool distinct = true;
    for (const auto& event : rp.trace) {
      if (!margins.insert(event.fields.at("margin")).second) {
        distinct = false;
      }
    }
    if (distinct) {
      const auto rp_renamed = ranked_pairs(renamed);
      for (const auto& [id, score] : rp.scores) {
        CHECK(score.q == rp_renamed.scores.at(rename.at(id)).q);
      }
    }
  }
}
