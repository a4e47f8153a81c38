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

#ifndef DYNORM_REWARD_HPP_
#define DYNORM_REWARD_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dynorm {

// One ranked comparison: `chosen` was preferred to `rejected` for `context`.
struct ComparisonRecord {
  std::string context_id;
  std::string chosen_id;
  std::string rejected_id;
  double weight = 1.0;

  ComparisonRecord(std::string context, std::string chosen,
                   std::string rejected, double w = 1.0);
};

// Fitted pairwise-comparison strengths. Strengths are strictly positive and
// normalized to geometric mean 1 (the model is scale invariant, so one gauge
// has to be fixed for outputs to be comparable).
struct StrengthTable {
  std::vector<std::string> items;              // first-appearance order
  std::map<std::string, double> strengths;
  double log_likelihood = 0.0;
  std::vector<double> ll_history;              // one value per MM iteration
  int iterations = 0;
};

// Fits strengths by minorization-maximization. `pseudo` phantom wins are
// added symmetrically to every pair, keeping strengths finite on degenerate
// all-wins data. The log-likelihood (of the smoothed counts) is
// non-decreasing at every iteration.
StrengthTable fit_bradley_terry(const std::vector<ComparisonRecord>& data,
                                int max_iters = 200, double tol = 1e-10,
                                double pseudo = 0.5);

// s_k / (s_k + s_j). Defined as 0.5 for k == j.
double bt_win_probability(const StrengthTable& strengths,
                          const std::string& k, const std::string& j);

// Tabular softmax policy over a small (context, output) grid. Exact
// log-probabilities, so every objective below is finite-difference checkable.
class CategoricalPolicy {
 public:
  CategoricalPolicy() = default;
  CategoricalPolicy(std::vector<std::string> contexts,
                    std::vector<std::string> outputs,
                    std::vector<std::vector<double>> logits);

  static CategoricalPolicy uniform(std::vector<std::string> contexts,
                                   std::vector<std::string> outputs);

  const std::vector<std::string>& contexts() const { return contexts_; }
  const std::vector<std::string>& outputs() const { return outputs_; }

  int context_index(const std::string& context) const;  // throws if missing
  int output_index(const std::string& output) const;

  double logit(int ci, int oi) const { return logits_[ci][oi]; }
  void set_logit(int ci, int oi, double v) { logits_[ci][oi] = v; }
  void add_to_logit(int ci, int oi, double v) { logits_[ci][oi] += v; }

  double log_prob(int ci, int oi) const;
  double log_prob(const std::string& context, const std::string& output) const;
  std::vector<double> probabilities(int ci) const;

  // True when the other policy has identical context and output vocabularies.
  bool same_support(const CategoricalPolicy& other) const;

 private:
  std::vector<std::string> contexts_;
  std::vector<std::string> outputs_;
  std::vector<std::vector<double>> logits_;
  std::map<std::string, int> context_index_;
  std::map<std::string, int> output_index_;
};

// Weighted mean over the batch of -log sigmoid(beta * (delta_c - delta_r)),
// where delta_y = log pi(y|x) - log pi_ref(y|x). Always >= 0; equals ln 2
// when policy == reference or beta == 0.
double dpo_loss(const CategoricalPolicy& policy,
                const CategoricalPolicy& reference,
                const std::vector<ComparisonRecord>& batch, double beta);

// One gradient-descent step on dpo_loss with respect to the policy logits.
// For a single-record batch the chosen/rejected log-probability margin never
// decreases.
CategoricalPolicy dpo_step(const CategoricalPolicy& policy,
                           const CategoricalPolicy& reference,
                           const std::vector<ComparisonRecord>& batch,
                           double beta, double step_size);

// KL(policy(.|context) || reference(.|context)) by direct summation.
double kl_divergence(const CategoricalPolicy& policy,
                     const CategoricalPolicy& reference,
                     const std::string& context);

// Sum over contexts of expected reward under the policy minus
// beta * KL(policy || reference).
double kl_penalized_objective(
    const CategoricalPolicy& policy, const CategoricalPolicy& reference,
    const std::map<std::pair<std::string, std::string>, double>& rewards,
    double beta);

// Gradient of the objective above with respect to the policy logits,
// in [context][output] layout.
std::vector<std::vector<double>> kl_penalized_gradient(
    const CategoricalPolicy& policy, const CategoricalPolicy& reference,
    const std::map<std::pair<std::string, std::string>, double>& rewards,
    double beta);

struct RewardPair {
  double r_h = 0.0;      // helpfulness reward
  double r_c = 0.0;      // constraint / guardrail reward
  double sigma = 0.5;    // scaling factor in [0, 1]
};

enum class ConstraintVariant { sum, sigma_on_c, sigma_on_h, sigma_offset };

std::string to_string(ConstraintVariant variant);
std::optional<ConstraintVariant> constraint_variant_from_string(
    const std::string& name);

// sum: r_h + r_c; sigma-on-c: r_h + sigma * r_c; sigma-on-h:
// r_c + sigma * r_h; sigma-offset: (r_h + r_c) + sigma.
double constrained_reward(const RewardPair& pair, ConstraintVariant variant);
double constrained_loss(const RewardPair& pair, ConstraintVariant variant);

struct GateCandidate {
  std::string id;
  double helpful_score = 0.0;
  double harm_score = 0.0;
};

struct GateReport {
  std::string selected_id;
  bool safety_protocol = false;      // no candidate survived the gate
  std::vector<std::string> blocked;  // ids over the harm threshold, sorted
  int survivors = 0;
};

// Best-of-n selection with a guardrail: candidates whose harm score exceeds
// `harm_threshold` are discarded; among survivors the highest helpful score
// wins, ties broken by lexicographically smallest id. When nothing survives
// the fallback id is returned with the safety-protocol flag set.
GateReport rejection_gate(const std::vector<GateCandidate>& candidates,
                          double harm_threshold, const std::string& fallback);

}  // namespace dynorm

#endif  // DYNORM_REWARD_HPP_
