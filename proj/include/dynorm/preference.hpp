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

#ifndef DYNORM_PREFERENCE_HPP_
#define DYNORM_PREFERENCE_HPP_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynorm/rational.hpp"

namespace dynorm {

using AlternativeId = std::string;

// A total preorder over alternatives, stored as ordered tiers. Alternatives
// in an earlier tier are strictly preferred to those in later tiers;
// alternatives sharing a tier are mutually indifferent. Empty tiers are
// dropped at construction. Duplicate or missing alternatives (relative to
// some universe) are representable here and reported by validate_profile.
class PreferenceSet {
 public:
  PreferenceSet() = default;
  explicit PreferenceSet(std::vector<std::vector<AlternativeId>> tiers);

  const std::vector<std::vector<AlternativeId>>& tiers() const {
    return tiers_;
  }

  bool contains(const AlternativeId& id) const;
  // Index of the tier holding `id`; throws std::invalid_argument if absent.
  int tier_of(const AlternativeId& id) const;
  bool strictly_prefers(const AlternativeId& a, const AlternativeId& b) const;
  bool indifferent(const AlternativeId& a, const AlternativeId& b) const;

  std::vector<AlternativeId> alternatives() const;

  // Copy with `id` deleted from every tier (tiers left empty are dropped).
  PreferenceSet without(const AlternativeId& id) const;
  // Copy with every alternative renamed through `mapping`.
  PreferenceSet relabeled(
      const std::map<AlternativeId, AlternativeId>& mapping) const;

  friend bool operator==(const PreferenceSet& a, const PreferenceSet& b) {
    return a.tiers_ == b.tiers_;
  }

 private:
  std::vector<std::vector<AlternativeId>> tiers_;
  std::map<AlternativeId, int> tier_index_;
};

struct ProfileEntry {
  PreferenceSet set;
  Rational weight;
};

// A collection of preference sets with credence weights over a shared
// universe of alternatives. Coherence (every weight nonnegative, weights
// summing to exactly 1, every set a complete ordering of the universe) is
// checked by validate_profile, never enforced at construction.
class WeightedProfile {
 public:
  WeightedProfile() = default;
  WeightedProfile(std::vector<AlternativeId> universe,
                  std::vector<ProfileEntry> entries);

  const std::vector<AlternativeId>& universe() const { return universe_; }
  const std::vector<ProfileEntry>& entries() const { return entries_; }

  WeightedProfile relabeled(
      const std::map<AlternativeId, AlternativeId>& mapping) const;

  // New profile with existing weights rescaled by (1 - added.weight) and
  // `added` appended, preserving the proportions of the original entries.
  WeightedProfile with_added_entry(const ProfileEntry& added) const;

  // New profile with `id` removed from the universe and from every tier.
  WeightedProfile without_alternative(const AlternativeId& id) const;

 private:
  std::vector<AlternativeId> universe_;
  std::vector<ProfileEntry> entries_;
};

struct Violation {
  std::string criterion;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool coherent() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks a profile against the coherence criteria and reports every defect.
// Never throws; an empty-entry profile is accepted as vacuously coherent.
ValidationReport validate_profile(const WeightedProfile& profile);

// Thrown by operations whose precondition is a coherent profile.
class ProfileError : public std::runtime_error {
 public:
  explicit ProfileError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// Whether tied weight is kept out of both supports (default) or credited
// half to each side. Either way support[x][y] + support[y][x] + tied[x][y]
// sums to the total weight for every unordered pair.
enum class TieHandling { keep_separate, split_evenly };

// Weighted head-to-head support between all ordered pairs of alternatives.
class TallyMatrix {
 public:
  TallyMatrix() = default;
  TallyMatrix(std::vector<AlternativeId> universe, TieHandling ties);

  const std::vector<AlternativeId>& universe() const { return universe_; }
  const Rational& support(const AlternativeId& x,
                          const AlternativeId& y) const;
  const Rational& tied(const AlternativeId& x, const AlternativeId& y) const;
  Rational margin(const AlternativeId& x, const AlternativeId& y) const;

  void add_support(const AlternativeId& x, const AlternativeId& y,
                   const Rational& w);
  void add_tied(const AlternativeId& x, const AlternativeId& y,
                const Rational& w);

 private:
  int index_of(const AlternativeId& id) const;

  std::vector<AlternativeId> universe_;
  std::map<AlternativeId, int> index_;
  std::vector<std::vector<Rational>> support_;
  std::vector<std::vector<Rational>> tied_;
};

// Accumulates weighted pairwise support. Throws ProfileError when the
// profile is incoherent.
TallyMatrix pairwise_tally(const WeightedProfile& profile,
                           TieHandling ties = TieHandling::keep_separate);

// The alternative beating every other head-to-head strictly, if one exists.
// A one-alternative universe yields that alternative vacuously.
std::optional<AlternativeId> condorcet_winner(const TallyMatrix& tally);

// The alternative losing every head-to-head strictly, if one exists. Never
// reported for universes with fewer than two alternatives.
std::optional<AlternativeId> condorcet_loser(const TallyMatrix& tally);

}  // namespace dynorm

#endif  // DYNORM_PREFERENCE_HPP_
