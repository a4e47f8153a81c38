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

#include "dynorm/preference.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <utility>

namespace dynorm {

PreferenceSet::PreferenceSet(std::vector<std::vector<AlternativeId>> tiers) {
  for (auto& tier : tiers) {
    if (tier.empty()) continue;
    tiers_.push_back(std::move(tier));
  }
  for (int i = 0; i < static_cast<int>(tiers_.size()); ++i) {
    for (const auto& id : tiers_[i]) {
      tier_index_.emplace(id, i);  // first occurrence wins on duplicates
    }
  }
}

bool PreferenceSet::contains(const AlternativeId& id) const {
  return tier_index_.count(id) != 0;
}

int PreferenceSet::tier_of(const AlternativeId& id) const {
  auto it = tier_index_.find(id);
  if (it == tier_index_.end()) {
    throw std::invalid_argument("alternative '" + id +
                                "' not in preference set");
  }
  return it->second;
}

bool PreferenceSet::strictly_prefers(const AlternativeId& a,
                                     const AlternativeId& b) const {
  return tier_of(a) < tier_of(b);
}

bool PreferenceSet::indifferent(const AlternativeId& a,
                                const AlternativeId& b) const {
  return tier_of(a) == tier_of(b);
}

std::vector<AlternativeId> PreferenceSet::alternatives() const {
  std::vector<AlternativeId> out;
  for (const auto& tier : tiers_) {
    out.insert(out.end(), tier.begin(), tier.end());
  }
  return out;
}

PreferenceSet PreferenceSet::without(const AlternativeId& id) const {
  std::vector<std::vector<AlternativeId>> tiers;
  for (const auto& tier : tiers_) {
    std::vector<AlternativeId> kept;
    for (const auto& a : tier) {
      if (a != id) kept.push_back(a);
    }
    tiers.push_back(std::move(kept));
  }
  return PreferenceSet(std::move(tiers));
}

PreferenceSet PreferenceSet::relabeled(
    const std::map<AlternativeId, AlternativeId>& mapping) const {
  std::vector<std::vector<AlternativeId>> tiers;
  for (const auto& tier : tiers_) {
    std::vector<AlternativeId> renamed;
    for (const auto& a : tier) {
      auto it = mapping.find(a);
      renamed.push_back(it == mapping.end() ? a : it->second);
    }
    tiers.push_back(std::move(renamed));
  }
  return PreferenceSet(std::move(tiers));
}

WeightedProfile::WeightedProfile(std::vector<AlternativeId> universe,
                                 std::vector<ProfileEntry> entries)
    : universe_(std::move(universe)), entries_(std::move(entries)) {}

WeightedProfile WeightedProfile::relabeled(
    const std::map<AlternativeId, AlternativeId>& mapping) const {
  std::vector<AlternativeId> universe;
  for (const auto& id : universe_) {
    auto it = mapping.find(id);
    universe.push_back(it == mapping.end() ? id : it->second);
  }
  std::vector<ProfileEntry> entries;
  for (const auto& entry : entries_) {
    entries.push_back({entry.set.relabeled(mapping), entry.weight});
  }
  return WeightedProfile(std::move(universe), std::move(entries));
}

WeightedProfile WeightedProfile::with_added_entry(
    const ProfileEntry& added) const {
  const Rational keep = Rational(1) - added.weight;
  std::vector<ProfileEntry> entries;
  entries.reserve(entries_.size() + 1);
  for (const auto& entry : entries_) {
    entries.push_back({entry.set, entry.weight * keep});
  }
  entries.push_back(added);
  return WeightedProfile(universe_, std::move(entries));
}

WeightedProfile WeightedProfile::without_alternative(
    const AlternativeId& id) const {
  std::vector<AlternativeId> universe;
  for (const auto& a : universe_) {
    if (a != id) universe.push_back(a);
  }
  std::vector<ProfileEntry> entries;
  for (const auto& entry : entries_) {
    entries.push_back({entry.set.without(id), entry.weight});
  }
  return WeightedProfile(std::move(universe), std::move(entries));
}

std::string ValidationReport::to_string() const {
  if (coherent()) return "coherent";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i > 0) out << "; ";
    out << violations[i].criterion << ": " << violations[i].detail;
  }
  return out.str();
}

ProfileError::ProfileError(ValidationReport report)
    : std::runtime_error("incoherent profile: " + report.to_string()),
      report_(std::move(report)) {}

ValidationReport validate_profile(const WeightedProfile& profile) {
  ValidationReport report;
  std::set<AlternativeId> universe_set;
  for (const auto& id : profile.universe()) {
    if (id.empty()) {
      report.violations.push_back({"alternative-id", "empty alternative id"});
    }
    if (!universe_set.insert(id).second) {
      report.violations.push_back(
          {"universe-uniqueness", "duplicate alternative '" + id + "'"});
    }
  }

  Rational total(0);
  for (std::size_t i = 0; i < profile.entries().size(); ++i) {
    const auto& entry = profile.entries()[i];
    const std::string where = "entry " + std::to_string(i);
    if (entry.weight.sign() < 0) {
      report.violations.push_back(
          {"kolmogorov-nonnegative",
           where + " has negative weight " + entry.weight.to_string()});
    }
    total += entry.weight;

    std::set<AlternativeId> seen;
    for (const auto& tier : entry.set.tiers()) {
      for (const auto& id : tier) {
        if (!universe_set.count(id)) {
          report.violations.push_back(
              {"universe-membership",
               where + " ranks unknown alternative '" + id + "'"});
        }
        if (!seen.insert(id).second) {
          report.violations.push_back(
              {"single-occurrence",
               where + " ranks '" + id + "' more than once"});
        }
      }
    }
    for (const auto& id : universe_set) {
      if (!seen.count(id)) {
        report.violations.push_back(
            {"completeness", where + " omits alternative '" + id + "'"});
      }
    }
  }

  // An empty entry list is accepted; otherwise weights must sum to exactly 1.
  if (!profile.entries().empty() && total != Rational(1)) {
    report.violations.push_back(
        {"kolmogorov-sum", "weights sum to " + total.to_string() + ", not 1"});
  }
  return report;
}

TallyMatrix::TallyMatrix(std::vector<AlternativeId> universe, TieHandling)
    : universe_(std::move(universe)) {
  const int n = static_cast<int>(universe_.size());
  for (int i = 0; i < n; ++i) index_.emplace(universe_[i], i);
  support_.assign(n, std::vector<Rational>(n, Rational(0)));
  tied_.assign(n, std::vector<Rational>(n, Rational(0)));
}

int TallyMatrix::index_of(const AlternativeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw std::invalid_argument("alternative '" + id + "' not in tally");
  }
  return it->second;
}

const Rational& TallyMatrix::support(const AlternativeId& x,
                                     const AlternativeId& y) const {
  return support_[index_of(x)][index_of(y)];
}

const Rational& TallyMatrix::tied(const AlternativeId& x,
                                  const AlternativeId& y) const {
  return tied_[index_of(x)][index_of(y)];
}

Rational TallyMatrix::margin(const AlternativeId& x,
                             const AlternativeId& y) const {
  return support(x, y) - support(y, x);
}

void TallyMatrix::add_support(const AlternativeId& x, const AlternativeId& y,
                              const Rational& w) {
  support_[index_of(x)][index_of(y)] += w;
}

void TallyMatrix::add_tied(const AlternativeId& x, const AlternativeId& y,
                           const Rational& w) {
  const int i = index_of(x);
  const int j = index_of(y);
  tied_[i][j] += w;
  tied_[j][i] += w;
}

TallyMatrix pairwise_tally(const WeightedProfile& profile, TieHandling ties) {
  ValidationReport report = validate_profile(profile);
  if (!report.coherent()) throw ProfileError(std::move(report));

  TallyMatrix tally(profile.universe(), ties);
  const auto& universe = profile.universe();
  const Rational half(1, 2);
  for (const auto& entry : profile.entries()) {
    for (std::size_t i = 0; i < universe.size(); ++i) {
      for (std::size_t j = i + 1; j < universe.size(); ++j) {
        const auto& x = universe[i];
        const auto& y = universe[j];
        if (entry.set.strictly_prefers(x, y)) {
          tally.add_support(x, y, entry.weight);
        } else if (entry.set.strictly_prefers(y, x)) {
          tally.add_support(y, x, entry.weight);
        } else if (ties == TieHandling::split_evenly) {
          tally.add_support(x, y, entry.weight * half);
          tally.add_support(y, x, entry.weight * half);
        } else {
          tally.add_tied(x, y, entry.weight);
        }
      }
    }
  }
  return tally;
}

std::optional<AlternativeId> condorcet_winner(const TallyMatrix& tally) {
  const auto& universe = tally.universe();
  if (universe.empty()) return std::nullopt;
  for (const auto& x : universe) {
    bool beats_all = true;
    for (const auto& y : universe) {
      if (x == y) continue;
      if (!(tally.support(x, y) > tally.support(y, x))) {
        beats_all = false;
        break;
      }
    }
    if (beats_all) return x;
  }
  return std::nullopt;
}

std::optional<AlternativeId> condorcet_loser(const TallyMatrix& tally) {
  const auto& universe = tally.universe();
  if (universe.size() < 2) return std::nullopt;
  for (const auto& x : universe) {
    bool loses_all = true;
    for (const auto& y : universe) {
      if (x == y) continue;
      if (!(tally.support(y, x) > tally.support(x, y))) {
        loses_all = false;
        break;
      }
    }
    if (loses_all) return x;
  }
  return std::nullopt;
}

}  // namespace dynorm
