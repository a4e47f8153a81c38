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

#include "dynorm/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dynorm {
namespace {

double log_sigmoid(double z) {
  // -softplus(-z), stable on both tails.
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace

ComparisonRecord::ComparisonRecord(std::string context, std::string chosen,
                                   std::string rejected, double w)
    : context_id(std::move(context)),
      chosen_id(std::move(chosen)),
      rejected_id(std::move(rejected)),
      weight(w) {
  if (chosen_id == rejected_id) {
    throw std::invalid_argument("comparison with chosen == rejected ('" +
                                chosen_id + "')");
  }
  if (!(weight >= 0.0)) {
    throw std::invalid_argument("comparison weight must be >= 0");
  }
}

StrengthTable fit_bradley_terry(const std::vector<ComparisonRecord>& data,
                                int max_iters, double tol, double pseudo) {
  if (data.empty()) {
    throw std::invalid_argument("cannot fit strengths from no comparisons");
  }
  if (!(pseudo > 0.0)) {
    throw std::invalid_argument("pseudo-count must be > 0");
  }

  StrengthTable table;
  std::map<std::string, int> index;
  auto intern = [&](const std::string& id) {
    auto [it, inserted] = index.emplace(id, table.items.size());
    if (inserted) table.items.push_back(id);
    return it->second;
  };
  for (const auto& record : data) {
    intern(record.chosen_id);
    intern(record.rejected_id);
  }
  const int n = static_cast<int>(table.items.size());

  // Win counts with symmetric phantom wins on every pair.
  std::vector<std::vector<double>> wins(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) wins[i][j] = pseudo;
    }
  }
  for (const auto& record : data) {
    wins[index[record.chosen_id]][index[record.rejected_id]] += record.weight;
  }

  std::vector<double> total_wins(n, 0.0);
  std::vector<std::vector<double>> matches(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      total_wins[i] += wins[i][j];
      matches[i][j] = wins[i][j] + wins[j][i];
    }
  }

  std::vector<double> s(n, 1.0);
  auto log_likelihood = [&]() {
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && wins[i][j] > 0.0) {
          ll += wins[i][j] * std::log(s[i] / (s[i] + s[j]));
        }
      }
    }
    return ll;
  };
  auto renormalize = [&]() {
    double log_geo = 0.0;
    for (double v : s) log_geo += std::log(v);
    const double scale = std::exp(log_geo / n);
    for (double& v : s) v /= scale;
  };

  std::vector<double> next(n, 1.0);
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int i = 0; i < n; ++i) {
      double ratio = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i != j) ratio += matches[i][j] / (s[i] + s[j]);
      }
      next[i] = ratio > 0.0 ? total_wins[i] / ratio : s[i];
    }
    double max_rel = 0.0;
    for (int i = 0; i < n; ++i) {
      max_rel = std::max(max_rel, std::fabs(next[i] - s[i]) / s[i]);
    }
    s.swap(next);
    renormalize();
    table.ll_history.push_back(log_likelihood());
    table.iterations = iter + 1;
    if (max_rel < tol) break;
  }
  if (table.ll_history.empty()) table.ll_history.push_back(log_likelihood());

  for (int i = 0; i < n; ++i) table.strengths[table.items[i]] = s[i];
  table.log_likelihood = table.ll_history.back();
  return table;
}

double bt_win_probability(const StrengthTable& strengths, const std::string& k,
                          const std::string& j) {
  auto ki = strengths.strengths.find(k);
  auto ji = strengths.strengths.find(j);
  if (ki == strengths.strengths.end() || ji == strengths.strengths.end()) {
    throw std::invalid_argument("unknown item in win-probability query");
  }
  if (k == j) return 0.5;
  return ki->second / (ki->second + ji->second);
}

CategoricalPolicy::CategoricalPolicy(std::vector<std::string> contexts,
                                     std::vector<std::string> outputs,
                                     std::vector<std::vector<double>> logits)
    : contexts_(std::move(contexts)),
      outputs_(std::move(outputs)),
      logits_(std::move(logits)) {
  if (logits_.size() != contexts_.size()) {
    throw std::invalid_argument("one logit row per context required");
  }
  for (const auto& row : logits_) {
    if (row.size() != outputs_.size()) {
      throw std::invalid_argument("one logit per output required");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("logits must be finite");
      }
    }
  }
  for (std::size_t i = 0; i < contexts_.size(); ++i) {
    context_index_.emplace(contexts_[i], static_cast<int>(i));
  }
  for (std::size_t i = 0; i < outputs_.size(); ++i) {
    output_index_.emplace(outputs_[i], static_cast<int>(i));
  }
}

CategoricalPolicy CategoricalPolicy::uniform(std::vector<std::string> contexts,
                                             std::vector<std::string> outputs) {
  std::vector<std::vector<double>> logits(
      contexts.size(), std::vector<double>(outputs.size(), 0.0));
  return CategoricalPolicy(std::move(contexts), std::move(outputs),
                           std::move(logits));
}

int CategoricalPolicy::context_index(const std::string& context) const {
  auto it = context_index_.find(context);
  if (it == context_index_.end()) {
    throw std::invalid_argument("unknown context '" + context + "'");
  }
  return it->second;
}

int CategoricalPolicy::output_index(const std::string& output) const {
  auto it = output_index_.find(output);
  if (it == output_index_.end()) {
    throw std::invalid_argument("unknown output '" + output + "'");
  }
  return it->second;
}

double CategoricalPolicy::log_prob(int ci, int oi) const {
  return logits_[ci][oi] - log_sum_exp(logits_[ci]);
}

double CategoricalPolicy::log_prob(const std::string& context,
                                   const std::string& output) const {
  return log_prob(context_index(context), output_index(output));
}

std::vector<double> CategoricalPolicy::probabilities(int ci) const {
  const double lse = log_sum_exp(logits_[ci]);
  std::vector<double> out(outputs_.size());
  for (std::size_t oi = 0; oi < outputs_.size(); ++oi) {
    out[oi] = std::exp(logits_[ci][oi] - lse);
  }
  return out;
}

bool CategoricalPolicy::same_support(const CategoricalPolicy& other) const {
  return contexts_ == other.contexts_ && outputs_ == other.outputs_;
}

namespace {

void require_same_support(const CategoricalPolicy& policy,
                          const CategoricalPolicy& reference) {
  if (!policy.same_support(reference)) {
    throw std::invalid_argument(
        "policy and reference must share contexts and outputs");
  }
}

}  // namespace

double dpo_loss(const CategoricalPolicy& policy,
                const CategoricalPolicy& reference,
                const std::vector<ComparisonRecord>& batch, double beta) {
  require_same_support(policy, reference);
  if (batch.empty()) {
    throw std::invalid_argument("dpo_loss over an empty batch");
  }
  if (beta < 0.0) {
    throw std::invalid_argument("beta must be >= 0");
  }
  double total = 0.0;
  double total_weight = 0.0;
  for (const auto& record : batch) {
    const int ci = policy.context_index(record.context_id);
    const int c = policy.output_index(record.chosen_id);
    const int r = policy.output_index(record.rejected_id);
    const double delta_c = policy.log_prob(ci, c) - reference.log_prob(ci, c);
    const double delta_r = policy.log_prob(ci, r) - reference.log_prob(ci, r);
    total += record.weight * (-log_sigmoid(beta * (delta_c - delta_r)));
    total_weight += record.weight;
  }
  if (total_weight == 0.0) {
    throw std::invalid_argument("dpo_loss batch has zero total weight");
  }
  return total / total_weight;
}

CategoricalPolicy dpo_step(const CategoricalPolicy& policy,
                           const CategoricalPolicy& reference,
                           const std::vector<ComparisonRecord>& batch,
                           double beta, double step_size) {
  require_same_support(policy, reference);
  if (!(step_size >= 0.0)) {
    throw std::invalid_argument("step_size must be >= 0");
  }
  double total_weight = 0.0;
  for (const auto& record : batch) total_weight += record.weight;
  if (batch.empty() || total_weight == 0.0) {
    throw std::invalid_argument("dpo_step over an empty batch");
  }

  // d(-log sigmoid(z))/dz = -sigmoid(-z); the softmax terms of the two
  // log-ratios cancel, leaving gradient mass only on the chosen and
  // rejected logits of each record's context.
  CategoricalPolicy next = policy;
  for (const auto& record : batch) {
    const int ci = policy.context_index(record.context_id);
    const int c = policy.output_index(record.chosen_id);
    const int r = policy.output_index(record.rejected_id);
    const double delta_c = policy.log_prob(ci, c) - reference.log_prob(ci, c);
    const double delta_r = policy.log_prob(ci, r) - reference.log_prob(ci, r);
    const double z = beta * (delta_c - delta_r);
    const double d_loss_dz = -sigmoid(-z) * (record.weight / total_weight);
    next.add_to_logit(ci, c, -step_size * d_loss_dz * beta);
    next.add_to_logit(ci, r, step_size * d_loss_dz * beta);
  }
  return next;
}

double kl_divergence(const CategoricalPolicy& policy,
                     const CategoricalPolicy& reference,
                     const std::string& context) {
  require_same_support(policy, reference);
  const int ci = policy.context_index(context);
  double kl = 0.0;
  for (std::size_t oi = 0; oi < policy.outputs().size(); ++oi) {
    const double lp = policy.log_prob(ci, static_cast<int>(oi));
    const double lq = reference.log_prob(ci, static_cast<int>(oi));
    kl += std::exp(lp) * (lp - lq);
  }
  return std::max(kl, 0.0);  // clamp -0.0 noise from identical policies
}

double kl_penalized_objective(
    const CategoricalPolicy& policy, const CategoricalPolicy& reference,
    const std::map<std::pair<std::string, std::string>, double>& rewards,
    double beta) {
  require_same_support(policy, reference);
  if (beta < 0.0) {
    throw std::invalid_argument("beta must be >= 0");
  }
  double objective = 0.0;
  for (const auto& context : policy.contexts()) {
    const int ci = policy.context_index(context);
    const auto probs = policy.probabilities(ci);
    double expected = 0.0;
    for (std::size_t oi = 0; oi < policy.outputs().size(); ++oi) {
      auto it = rewards.find({context, policy.outputs()[oi]});
      const double r = it == rewards.end() ? 0.0 : it->second;
      expected += probs[oi] * r;
    }
    objective += expected - beta * kl_divergence(policy, reference, context);
  }
  return objective;
}

std::vector<std::vector<double>> kl_penalized_gradient(
    const CategoricalPolicy& policy, const CategoricalPolicy& reference,
    const std::map<std::pair<std::string, std::string>, double>& rewards,
    double beta) {
  require_same_support(policy, reference);
  std::vector<std::vector<double>> grad(
      policy.contexts().size(),
      std::vector<double>(policy.outputs().size(), 0.0));
  for (std::size_t ci = 0; ci < policy.contexts().size(); ++ci) {
    const auto& context = policy.contexts()[ci];
    const auto probs = policy.probabilities(static_cast<int>(ci));
    double expected = 0.0;
    double kl = 0.0;
    std::vector<double> r(policy.outputs().size(), 0.0);
    std::vector<double> log_ratio(policy.outputs().size(), 0.0);
    for (std::size_t oi = 0; oi < policy.outputs().size(); ++oi) {
      auto it = rewards.find({context, policy.outputs()[oi]});
      r[oi] = it == rewards.end() ? 0.0 : it->second;
      expected += probs[oi] * r[oi];
      log_ratio[oi] =
          policy.log_prob(static_cast<int>(ci), static_cast<int>(oi)) -
          reference.log_prob(static_cast<int>(ci), static_cast<int>(oi));
      kl += probs[oi] * log_ratio[oi];
    }
    for (std::size_t oi = 0; oi < policy.outputs().size(); ++oi) {
      grad[ci][oi] =
          probs[oi] * ((r[oi] - expected) - beta * (log_ratio[oi] - kl));
    }
  }
  return grad;
}

std::string to_string(ConstraintVariant variant) {
  switch (variant) {
    case ConstraintVariant::sum:
      return "sum";
    case ConstraintVariant::sigma_on_c:
      return "sigma-on-c";
    case ConstraintVariant::sigma_on_h:
      return "sigma-on-h";
    case ConstraintVariant::sigma_offset:
      return "sigma-offset";
  }
  return "unknown";
}

std::optional<ConstraintVariant> constraint_variant_from_string(
    const std::string& name) {
  if (name == "sum") return ConstraintVariant::sum;
  if (name == "sigma-on-c") return ConstraintVariant::sigma_on_c;
  if (name == "sigma-on-h") return ConstraintVariant::sigma_on_h;
  if (name == "sigma-offset") return ConstraintVariant::sigma_offset;
  return std::nullopt;
}

double constrained_reward(const RewardPair& pair, ConstraintVariant variant) {
  if (pair.sigma < 0.0 || pair.sigma > 1.0) {
    throw std::invalid_argument("sigma must lie in [0, 1]");
  }
  switch (variant) {
    case ConstraintVariant::sum:
      return pair.r_h + pair.r_c;
    case ConstraintVariant::sigma_on_c:
      return pair.r_h + pair.sigma * pair.r_c;
    case ConstraintVariant::sigma_on_h:
      return pair.r_c + pair.sigma * pair.r_h;
    case ConstraintVariant::sigma_offset:
      return (pair.r_h + pair.r_c) + pair.sigma;
  }
  throw std::invalid_argument("unknown constraint variant");
}

double constrained_loss(const RewardPair& pair, ConstraintVariant variant) {
  return -constrained_reward(pair, variant);
}

GateReport rejection_gate(const std::vector<GateCandidate>& candidates,
                          double harm_threshold, const std::string& fallback) {
  GateReport report;
  const GateCandidate* best = nullptr;
  for (const auto& candidate : candidates) {
    if (candidate.harm_score > harm_threshold) {
      report.blocked.push_back(candidate.id);
      continue;
    }
    ++report.survivors;
    if (best == nullptr || candidate.helpful_score > best->helpful_score ||
        (candidate.helpful_score == best->helpful_score &&
         candidate.id < best->id)) {
      best = &candidate;
    }
  }
  std::sort(report.blocked.begin(), report.blocked.end());
  if (best == nullptr) {
    report.selected_id = fallback;
    report.safety_protocol = true;
  } else {
    report.selected_id = best->id;
  }
  return report;
}

}  // namespace dynorm
