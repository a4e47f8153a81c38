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

#ifndef DYNORM_IO_HPP_
#define DYNORM_IO_HPP_

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynorm/aggregation.hpp"
#include "dynorm/audit.hpp"
#include "dynorm/gridworld.hpp"
#include "dynorm/preference.hpp"
#include "dynorm/reward.hpp"

namespace dynorm {

using OrderedJson = nlohmann::ordered_json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Profile file format:
//   {"universe": ["A", "B"],
//    "entries": [{"weight": "8/24", "tiers": [["A"], ["B"]]}]}
// Weights are exact "p/q" strings or decimals. Decimal weights are
// rationalized to within 1e-9 and, when their sum lands within 1e-9 of 1,
// renormalized to sum to exactly 1.
WeightedProfile profile_from_json(const nlohmann::json& j);
WeightedProfile load_profile(const std::string& path);
OrderedJson profile_to_json(const WeightedProfile& profile);

OrderedJson ordering_to_json(const AggregateOrdering& ordering);
OrderedJson verdict_to_json(const AuditVerdict& verdict);

// CSV rows: context_id,chosen_id,rejected_id[,weight]. Lines starting with
// '#' and an optional header row are skipped. Throws ParseError listing the
// offending line numbers when any row is malformed.
std::vector<ComparisonRecord> comparisons_from_csv(std::istream& in);
std::vector<ComparisonRecord> load_comparisons(const std::string& path);

OrderedJson strengths_to_json(const StrengthTable& table);

// Candidate list: [{"id": "a", "helpful_score": 0.9, "harm_score": 0.1}].
std::vector<GateCandidate> candidates_from_json(const nlohmann::json& j);
std::vector<GateCandidate> load_candidates(const std::string& path);
OrderedJson gate_report_to_json(const GateReport& report);

struct DiscountSweep {
  double from = 0.9;
  double to = 0.99;
  double step = 0.02;
};

// One gridworld run, or a batch when sigma_sweep / discount_sweep are given.
struct GridworldJob {
  ExperimentConfig config;
  std::vector<double> sigma_sweep;
  std::optional<DiscountSweep> discount_sweep;
};

GridworldJob gridworld_job_from_json(const nlohmann::json& j);
GridworldJob load_gridworld_job(const std::string& path);

OrderedJson metrics_to_json(const ExperimentConfig& config,
                            const Metrics& metrics);
OrderedJson trace_to_json(const EpisodeTrace& trace);

}  // namespace dynorm

#endif  // DYNORM_IO_HPP_
