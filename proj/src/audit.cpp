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

#include "dynorm/audit.hpp"

#include <algorithm>
#include <set>

namespace dynorm {
namespace {

// Common denominator for exact-rationalized random weights. Coarse enough
// that rescaled products stay far from int64 limits.
constexpr std::int64_t kWeightGrid = 1 << 20;

constexpr AggregateOptions kAuditOptions{32.0, 1000.0, TraceLevel::none};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::set<AlternativeId> as_set(const std::vector<AlternativeId>& ids) {
  return {ids.begin(), ids.end()};
}

// Tier-by-tier equality ignoring order inside a tier.
bool same_tier_structure(const std::vector<std::vector<AlternativeId>>& a,
                         const std::vector<std::vector<AlternativeId>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (as_set(a[i]) != as_set(b[i])) return false;
  }
  return true;
}

std::vector<AlternativeId> letter_universe(int n) {
  std::vector<AlternativeId> universe;
  for (int i = 0; i < n; ++i) {
    universe.push_back(std::string(1, static_cast<char>('A' + i)));
  }
  return universe;
}

}  // namespace

std::string to_string(AuditOutcome outcome) {
  switch (outcome) {
    case AuditOutcome::holds:
      return "holds";
    case AuditOutcome::violated:
      return "violated";
    case AuditOutcome::not_applicable:
      return "not-applicable";
  }
  return "unknown";
}

std::mt19937_64 trial_rng(std::uint64_t seed, long trial) {
  return std::mt19937_64(
      splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial))));
}

PreferenceSet random_preference_set(const std::vector<AlternativeId>& universe,
                                    std::mt19937_64& rng) {
  std::vector<AlternativeId> order = universe;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  std::vector<std::vector<AlternativeId>> tiers;
  std::bernoulli_distribution boundary(0.5);
  for (const auto& id : order) {
    if (tiers.empty() || boundary(rng)) {
      tiers.push_back({id});
    } else {
      tiers.back().push_back(id);
    }
  }
  return PreferenceSet(std::move(tiers));
}

WeightedProfile random_profile(int n_alternatives, int n_sets,
                               std::mt19937_64& rng) {
  const auto universe = letter_universe(n_alternatives);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> raw(n_sets);
  double total = 0.0;
  for (auto& x : raw) {
    x = expo(rng);
    total += x;
  }
  std::vector<std::int64_t> grid(n_sets);
  std::int64_t used = 0;
  std::size_t largest = 0;
  for (int i = 0; i < n_sets; ++i) {
    grid[i] = std::max<std::int64_t>(
        1, std::llround(raw[i] / total * kWeightGrid));
    used += grid[i];
    if (grid[i] > grid[largest]) largest = i;
  }
  grid[largest] += kWeightGrid - used;  // exact sum, largest share absorbs

  std::vector<ProfileEntry> entries;
  entries.reserve(n_sets);
  for (int i = 0; i < n_sets; ++i) {
    entries.push_back(
        {random_preference_set(universe, rng), Rational(grid[i], kWeightGrid)});
  }
  return WeightedProfile(universe, std::move(entries));
}

ProfileEntry random_added_entry(const std::vector<AlternativeId>& universe,
                                std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> pick(kWeightGrid / 16,
                                                   kWeightGrid / 2);
  return {random_preference_set(universe, rng),
          Rational(pick(rng), kWeightGrid)};
}

AuditVerdict audit_participation_update(Rule rule,
                                        const WeightedProfile& profile,
                                        const ProfileEntry& added) {
  AuditVerdict verdict;
  verdict.criterion = "participation";
  verdict.rule = rule;

  const AggregateOrdering before = aggregate(profile, rule, kAuditOptions);
  const WeightedProfile updated = profile.with_added_entry(added);
  const AggregateOrdering after = aggregate(updated, rule, kAuditOptions);

  const auto w0 = as_set(before.top_tier());
  const auto w1 = as_set(after.top_tier());

  auto fill_witness = [&]() {
    AuditWitness witness;
    witness.profile = profile;
    witness.added = added;
    witness.ordering_before = before;
    witness.profile_after = updated;
    witness.ordering_after = after;
    verdict.witness = std::move(witness);
  };

  if (w0 == w1) {
    verdict.outcome = AuditOutcome::holds;
    return verdict;
  }
  std::vector<AlternativeId> dropped;
  std::set_difference(w0.begin(), w0.end(), w1.begin(), w1.end(),
                      std::back_inserter(dropped));
  if (dropped.empty()) {
    // Old winners all still win; the top tier only grew.
    verdict.outcome = AuditOutcome::holds;
    return verdict;
  }
  bool favored_dropped = true;
  for (const auto& x : dropped) {
    for (const auto& y : w1) {
      if (!added.set.strictly_prefers(x, y)) {
        favored_dropped = false;
        break;
      }
    }
    if (!favored_dropped) break;
  }
  if (favored_dropped) {
    verdict.outcome = AuditOutcome::violated;
    fill_witness();
  } else {
    verdict.outcome = AuditOutcome::not_applicable;
  }
  return verdict;
}

AuditVerdict search_participation_violation(Rule rule, int n_alternatives,
                                            int n_sets, long trials,
                                            std::uint64_t seed) {
  for (long trial = 0; trial < trials; ++trial) {
    auto rng = trial_rng(seed, trial);
    const WeightedProfile profile =
        random_profile(n_alternatives, n_sets, rng);
    const ProfileEntry added = random_added_entry(profile.universe(), rng);
    AuditVerdict verdict = audit_participation_update(rule, profile, added);
    if (verdict.outcome == AuditOutcome::violated) {
      verdict.trials = trial + 1;
      return verdict;
    }
  }
  AuditVerdict verdict;
  verdict.criterion = "participation";
  verdict.rule = rule;
  verdict.outcome = AuditOutcome::holds;
  verdict.trials = trials;
  return verdict;
}

std::pair<AuditVerdict, AuditVerdict> audit_condorcet_consistency(
    Rule rule, long trials, std::uint64_t seed, int n_alternatives,
    int n_sets) {
  AuditVerdict loser_verdict;
  loser_verdict.criterion = "condorcet-loser";
  loser_verdict.rule = rule;
  loser_verdict.outcome = AuditOutcome::holds;
  loser_verdict.trials = trials;

  AuditVerdict winner_verdict;
  winner_verdict.criterion = "condorcet-winner";
  winner_verdict.rule = rule;
  winner_verdict.outcome = AuditOutcome::holds;
  winner_verdict.trials = trials;

  bool loser_open = true;
  bool winner_open = true;
  for (long trial = 0; trial < trials && (loser_open || winner_open);
       ++trial) {
    auto rng = trial_rng(seed, trial);
    const WeightedProfile profile =
        random_profile(n_alternatives, n_sets, rng);
    const TallyMatrix tally = pairwise_tally(profile);
    const auto loser = condorcet_loser(tally);
    const auto winner = condorcet_winner(tally);
    if (!loser && !winner) continue;

    const AggregateOrdering ordering = aggregate(profile, rule, kAuditOptions);
    if (loser_open && loser) {
      const auto top = as_set(ordering.top_tier());
      if (top.count(*loser)) {
        loser_verdict.outcome = AuditOutcome::violated;
        loser_verdict.trials = trial + 1;
        AuditWitness witness;
        witness.profile = profile;
        witness.focus = *loser;
        witness.ordering_before = ordering;
        loser_verdict.witness = std::move(witness);
        loser_open = false;
      }
    }
    if (winner_open && winner) {
      const auto bottom = as_set(ordering.ranking.back());
      if (bottom.count(*winner)) {
        winner_verdict.outcome = AuditOutcome::violated;
        winner_verdict.trials = trial + 1;
        AuditWitness witness;
        witness.profile = profile;
        witness.focus = *winner;
        witness.ordering_before = ordering;
        winner_verdict.witness = std::move(witness);
        winner_open = false;
      }
    }
  }
  return {loser_verdict, winner_verdict};
}

AuditVerdict audit_iia(Rule rule, const WeightedProfile& profile,
                       const AlternativeId& removed) {
  if (profile.universe().size() < 3) {
    throw std::invalid_argument("IIA audit needs at least 3 alternatives");
  }
  AuditVerdict verdict;
  verdict.criterion = "iia";
  verdict.rule = rule;

  const AggregateOrdering before = aggregate(profile, rule, kAuditOptions);
  const auto top = as_set(before.top_tier());
  if (top.count(removed)) {
    verdict.outcome = AuditOutcome::not_applicable;
    return verdict;
  }
  const WeightedProfile reduced = profile.without_alternative(removed);
  const AggregateOrdering after = aggregate(reduced, rule, kAuditOptions);

  bool flipped = false;
  const auto& survivors = reduced.universe();
  for (std::size_t i = 0; i < survivors.size() && !flipped; ++i) {
    for (std::size_t j = i + 1; j < survivors.size() && !flipped; ++j) {
      const auto& x = survivors[i];
      const auto& y = survivors[j];
      if ((before.strictly_above(x, y) && after.strictly_above(y, x)) ||
          (before.strictly_above(y, x) && after.strictly_above(x, y))) {
        flipped = true;
      }
    }
  }
  if (flipped) {
    verdict.outcome = AuditOutcome::violated;
    AuditWitness witness;
    witness.profile = profile;
    witness.removed = removed;
    witness.ordering_before = before;
    witness.profile_after = reduced;
    witness.ordering_after = after;
    verdict.witness = std::move(witness);
  } else {
    verdict.outcome = AuditOutcome::holds;
  }
  return verdict;
}

AuditVerdict search_iia_violation(Rule rule, long trials, std::uint64_t seed,
                                  int n_alternatives, int n_sets) {
  AuditVerdict verdict;
  verdict.criterion = "iia";
  verdict.rule = rule;
  verdict.outcome = AuditOutcome::holds;
  verdict.trials = trials;
  if (n_alternatives < 3) return verdict;  // nothing removable

  for (long trial = 0; trial < trials; ++trial) {
    auto rng = trial_rng(seed, trial);
    const WeightedProfile profile =
        random_profile(n_alternatives, n_sets, rng);
    std::uniform_int_distribution<int> pick(0, n_alternatives - 1);
    const AlternativeId removed = profile.universe()[pick(rng)];
    AuditVerdict candidate = audit_iia(rule, profile, removed);
    if (candidate.outcome == AuditOutcome::violated) {
      candidate.trials = trial + 1;
      return candidate;
    }
  }
  return verdict;
}

bool revalidate(const AuditVerdict& verdict) {
  if (!verdict.witness) return true;
  const AuditWitness& witness = *verdict.witness;
  const AggregateOrdering before =
      aggregate(witness.profile, verdict.rule, kAuditOptions);
  if (!(before == witness.ordering_before)) return false;
  if (witness.profile_after && witness.ordering_after) {
    const AggregateOrdering after =
        aggregate(*witness.profile_after, verdict.rule, kAuditOptions);
    if (!(after == *witness.ordering_after)) return false;
  }
  if (witness.added) {
    // The stored updated profile must be the rescaled union.
    const WeightedProfile rebuilt =
        witness.profile.with_added_entry(*witness.added);
    const AggregateOrdering after =
        aggregate(rebuilt, verdict.rule, kAuditOptions);
    if (!witness.ordering_after || !(after == *witness.ordering_after)) {
      return false;
    }
  }
  return true;
}

std::vector<int> dictatorship_probe(Rule rule, long trials,
                                    std::uint64_t seed, int n_alternatives,
                                    int n_sets) {
  std::vector<bool> alive(n_sets, true);
  for (long trial = 0; trial < trials; ++trial) {
    auto rng = trial_rng(seed, trial);
    const WeightedProfile profile =
        random_profile(n_alternatives, n_sets, rng);
    const AggregateOrdering ordering =
        aggregate(profile, rule, kAuditOptions);
    for (int i = 0; i < n_sets; ++i) {
      if (alive[i] && !same_tier_structure(profile.entries()[i].set.tiers(),
                                           ordering.ranking)) {
        alive[i] = false;
      }
    }
  }
  std::vector<int> dictators;
  for (int i = 0; i < n_sets; ++i) {
    if (alive[i]) dictators.push_back(i);
  }
  return dictators;
}

}  // namespace dynorm
