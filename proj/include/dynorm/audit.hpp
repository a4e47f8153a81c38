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

#ifndef DYNORM_AUDIT_HPP_
#define DYNORM_AUDIT_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynorm/aggregation.hpp"
#include "dynorm/preference.hpp"

namespace dynorm {

enum class AuditOutcome { holds, violated, not_applicable };

std::string to_string(AuditOutcome outcome);

// Everything needed to re-check a verdict independently: the profile(s) the
// rule ran on and the orderings it produced. `added` is set for
// participation audits, `removed` for IIA, `focus` for the Condorcet
// winner/loser whose placement was checked.
struct AuditWitness {
  WeightedProfile profile;
  std::optional<ProfileEntry> added;
  std::optional<AlternativeId> removed;
  std::optional<AlternativeId> focus;
  AggregateOrdering ordering_before;
  std::optional<WeightedProfile> profile_after;
  std::optional<AggregateOrdering> ordering_after;
};

struct AuditVerdict {
  std::string criterion;
  Rule rule = Rule::borda;
  AuditOutcome outcome = AuditOutcome::holds;
  long trials = 1;
  std::optional<AuditWitness> witness;
};

// Adds `added` to the profile (rescaling existing weights to keep the sum
// at 1) and compares winners. Violated when support favoring the old winner
// dethrones it: the top tiers differ and the added set strictly prefers
// every dropped winner to every new winner. Holds when the old winners all
// stay winners; not-applicable when the added set did not favor them.
AuditVerdict audit_participation_update(Rule rule,
                                        const WeightedProfile& profile,
                                        const ProfileEntry& added);

// Randomized search for a participation violation over profiles of
// `n_alternatives` x `n_sets`. Each trial draws its randomness from
// (seed, trial index), so results are reproducible and order-independent.
// Returns the first violated verdict, outcome `holds` after `trials` misses.
AuditVerdict search_participation_violation(Rule rule, int n_alternatives,
                                            int n_sets, long trials,
                                            std::uint64_t seed);

// Over random profiles possessing a Condorcet loser (first verdict) or
// winner (second), checks the loser is never ranked first and the winner
// never last. Counterexamples are returned as witnesses.
std::pair<AuditVerdict, AuditVerdict> audit_condorcet_consistency(
    Rule rule, long trials, std::uint64_t seed, int n_alternatives,
    int n_sets);

// Recomputes the ordering with `removed` deleted from every tier; violated
// when some surviving pair's strict order flips. Removing a current winner
// is not-applicable. Requires a universe of at least 3.
AuditVerdict audit_iia(Rule rule, const WeightedProfile& profile,
                       const AlternativeId& removed);

// Randomized IIA search over random profiles and non-winning removals.
// Vacuously holds below 3 alternatives.
AuditVerdict search_iia_violation(Rule rule, long trials, std::uint64_t seed,
                                  int n_alternatives, int n_sets);

// Re-runs the rule on the stored witness and confirms the verdict
// reproduces exactly. True for witness-free verdicts.
bool revalidate(const AuditVerdict& verdict);

// Entry indices that matched the output ordering on every sampled profile;
// an empty result means no single set dictates the rule.
std::vector<int> dictatorship_probe(Rule rule, long trials,
                                    std::uint64_t seed, int n_alternatives,
                                    int n_sets);

// Deterministic per-trial generator stream.
std::mt19937_64 trial_rng(std::uint64_t seed, long trial);

// Uniform random total preorder: shuffled universe with random tier splits.
PreferenceSet random_preference_set(const std::vector<AlternativeId>& universe,
                                    std::mt19937_64& rng);

// Random coherent profile; weights drawn from a symmetric Dirichlet and
// snapped to an exact common-denominator grid so they sum to exactly 1.
WeightedProfile random_profile(int n_alternatives, int n_sets,
                               std::mt19937_64& rng);

// Random candidate addition with weight in [1/16, 1/2].
ProfileEntry random_added_entry(const std::vector<AlternativeId>& universe,
                                std::mt19937_64& rng);

}  // namespace dynorm

#endif  // DYNORM_AUDIT_HPP_
