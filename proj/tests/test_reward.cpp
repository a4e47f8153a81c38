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

#include <algorithm>
#include <cmath>
#include <random>

#include "dynorm/reward.hpp"

using namespace dynorm;

namespace {

CategoricalPolicy random_policy(int contexts, int outputs,
                                std::mt19937_64& rng) {
  std::vector<std::string> cs;
  std::vector<std::string> os;
  for (int i = 0; i < contexts; ++i) cs.push_back("c" + std::to_string(i));
  for (int i = 0; i < outputs; ++i) os.push_back("y" + std::to_string(i));
  std::normal_distribution<double> gauss(0.0, 1.5);
  std::vector<std::vector<double>> logits(contexts,
                                          std::vector<double>(outputs));
  for (auto& row : logits) {
    for (auto& v : row) v = gauss(rng);
  }
  return CategoricalPolicy(cs, os, logits);
}

std::vector<ComparisonRecord> random_batch(const CategoricalPolicy& policy,
                                           int size, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_c(
      0, static_cast<int>(policy.contexts().size()) - 1);
  std::uniform_int_distribution<int> pick_o(
      0, static_cast<int>(policy.outputs().size()) - 1);
  std::vector<ComparisonRecord> batch;
  while (static_cast<int>(batch.size()) < size) {
    const int c = pick_o(rng);
    const int r = pick_o(rng);
    if (c == r) continue;
    batch.emplace_back(policy.contexts()[pick_c(rng)], policy.outputs()[c],
                       policy.outputs()[r]);
  }
  return batch;
}

}  // namespace

TEST_CASE("comparison records refuse chosen == rejected") {
  CHECK_THROWS_AS(ComparisonRecord("q", "a", "a"), std::invalid_argument);
  CHECK_THROWS_AS(ComparisonRecord("q", "a", "b", -1.0),
                  std::invalid_argument);
}

TEST_CASE("perfectly symmetric data fits equal strengths") {
  std::vector<ComparisonRecord> data;
  for (int i = 0; i < 5; ++i) {
    data.emplace_back("q", "A", "B");
    data.emplace_back("q", "B", "A");
  }
  const auto table = fit_bradley_terry(data);
  CHECK(table.strengths.at("A") ==
        doctest::Approx(table.strengths.at("B")).epsilon(1e-9));
  CHECK(bt_win_probability(table, "A", "B") ==
        doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("planted strengths 4:2:1 are recovered from sampled comparisons") {
  const std::vector<std::string> items = {"a", "b", "c"};
  const std::vector<double> strengths = {4.0, 2.0, 1.0};
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ComparisonRecord> data;
  while (static_cast<int>(data.size()) < 10000) {
    const int i = pick(rng);
    const int j = pick(rng);
    if (i == j) continue;
    const double p = strengths[i] / (strengths[i] + strengths[j]);
    if (unit(rng) < p) {
      data.emplace_back("q", items[i], items[j]);
    } else {
      data.emplace_back("q", items[j], items[i]);
    }
  }
  const auto table = fit_bradley_terry(data);
  CHECK(table.strengths.at("a") > table.strengths.at("b"));
  CHECK(table.strengths.at("b") > table.strengths.at("c"));
  // The planted win probability 4/(4+2) should be approximately recovered.
  CHECK(bt_win_probability(table, "a", "b") ==
        doctest::Approx(2.0 / 3.0).epsilon(0.05));
}

TEST_CASE("one-sided data stays finite through the pseudo-count prior") {
  std::vector<ComparisonRecord> data;
  for (int i = 0; i < 20; ++i) data.emplace_back("q", "A", "B");
  const auto table = fit_bradley_terry(data, 200, 1e-10, 0.5);
  CHECK(std::isfinite(table.strengths.at("A")));
  CHECK(std::isfinite(table.strengths.at("B")));
  CHECK(table.strengths.at("A") > table.strengths.at("B"));
}

TEST_CASE("log-likelihood never decreases across MM iterations") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int run = 0; run < 50; ++run) {
    std::vector<ComparisonRecord> data;
    const int records = 5 + static_cast<int>(rng() % 40);
    while (static_cast<int>(data.size()) < records) {
      const int i = pick(rng);
      const int j = pick(rng);
      if (i == j) continue;
      data.emplace_back("q", "i" + std::to_string(i), "i" + std::to_string(j));
    }
    const auto table = fit_bradley_terry(data);
    for (std::size_t k = 1; k < table.ll_history.size(); ++k) {
      CHECK(table.ll_history[k] >= table.ll_history[k - 1] - 1e-12);
    }
  }
}

TEST_CASE("strengths are normalized to geometric mean one") {
  std::vector<ComparisonRecord> data = {{"q", "A", "B"}, {"q", "B", "C"},
                                        {"q", "A", "C"}, {"q", "C", "A"}};
  const auto table = fit_bradley_terry(data);
  double log_sum = 0.0;
  for (const auto& [id, s] : table.strengths) log_sum += std::log(s);
  CHECK(log_sum == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("empty data is an error") {
  CHECK_THROWS_AS(fit_bradley_terry({}), std::invalid_argument);
}

TEST_CASE("win probabilities are complementary and defined on the diagonal") {
  std::vector<ComparisonRecord> data = {{"q", "A", "B"}, {"q", "B", "A"},
                                        {"q", "A", "B"}};
  const auto table = fit_bradley_terry(data);
  CHECK(bt_win_probability(table, "A", "B") +
            bt_win_probability(table, "B", "A") ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bt_win_probability(table, "A", "A") == 0.5);
  CHECK_THROWS_AS(bt_win_probability(table, "A", "Z"), std::invalid_argument);
}

TEST_CASE("explicit strengths 3:1 give a 0.75 win probability") {
  StrengthTable table;
  table.items = {"k", "j"};
  table.strengths = {{"k", 3.0}, {"j", 1.0}};
  CHECK(bt_win_probability(table, "k", "j") == 0.75);
}

TEST_CASE("dpo loss at the reference is ln 2 for any batch and beta") {
  std::mt19937_64 rng(7);
  const auto reference = random_policy(3, 4, rng);
  const auto batch = random_batch(reference, 6, rng);
  for (double beta : {0.0, 0.1, 1.0, 5.0}) {
    CHECK(dpo_loss(reference, reference, batch, beta) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  // beta = 0 flattens the loss to ln 2 even away from the reference.
  const auto other = random_policy(3, 4, rng);
  CHECK(dpo_loss(other, reference, batch, 0.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("dpo loss matches a direct evaluation at log-ratio margin 2") {
  const std::vector<std::string> contexts = {"x"};
  const std::vector<std::string> outputs = {"c", "r", "z"};
  const auto reference = CategoricalPolicy::uniform(contexts, outputs);
  // Normalizers cancel in the loss, so the logit gap is the margin.
  CategoricalPolicy policy(contexts, outputs, {{1.0, -1.0, 0.0}});
  const std::vector<ComparisonRecord> batch = {{"x", "c", "r"}};
  CHECK(dpo_loss(policy, reference, batch, 1.0) ==
        doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("dpo loss is nonnegative") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto policy = random_policy(2, 3, rng);
    const auto reference = random_policy(2, 3, rng);
    const auto batch = random_batch(policy, 4, rng);
    CHECK(dpo_loss(policy, reference, batch, 0.7) >= 0.0);
  }
}

TEST_CASE("a dpo step raises the single-record margin and zero step size "
          "changes nothing") {
  std::mt19937_64 rng(13);
  const auto reference = random_policy(2, 4, rng);
  const std::vector<ComparisonRecord> batch = {{"c0", "y1", "y3"}};
  const auto margin = [&](const CategoricalPolicy& p) {
    return p.log_prob("c0", "y1") - p.log_prob("c0", "y3");
  };
  CategoricalPolicy policy = reference;
  double previous = margin(policy);
  for (int step = 0; step < 25; ++step) {
    policy = dpo_step(policy, reference, batch, 0.8, 0.5);
    const double current = margin(policy);
    CHECK(current > previous);
    previous = current;
  }
  const auto frozen = dpo_step(policy, reference, batch, 0.8, 0.0);
  CHECK(margin(frozen) == margin(policy));
}

TEST_CASE("dpo analytic gradient matches central finite differences") {
  std::mt19937_64 rng(17);
  for (int instance = 0; instance < 20; ++instance) {
    const auto policy = random_policy(3, 4, rng);
    const auto reference = random_policy(3, 4, rng);
    const auto batch = random_batch(policy, 5, rng);
    const double beta = 0.5 + (instance % 3) * 0.5;
    const double step = 1.0;

    // Recover the analytic gradient from a single step's logit changes.
    const auto stepped = dpo_step(policy, reference, batch, beta, step);
    for (int ci = 0; ci < 3; ++ci) {
      for (int oi = 0; oi < 4; ++oi) {
        const double analytic =
            -(stepped.logit(ci, oi) - policy.logit(ci, oi)) / step;
        const double h = 1e-5;
        CategoricalPolicy plus = policy;
        plus.set_logit(ci, oi, policy.logit(ci, oi) + h);
        CategoricalPolicy minus = policy;
        minus.set_logit(ci, oi, policy.logit(ci, oi) - h);
        const double numeric = (dpo_loss(plus, reference, batch, beta) -
                                dpo_loss(minus, reference, batch, beta)) /
                               (2.0 * h);
        const double scale = std::max(1e-8, std::fabs(numeric));
        CHECK(std::fabs(analytic - numeric) / std::max(scale, 1e-3) < 1e-5);
      }
    }
  }
}

TEST_CASE("dpo rejects unknown outputs and empty batches") {
  std::mt19937_64 rng(19);
  const auto policy = random_policy(2, 3, rng);
  const auto reference = random_policy(2, 3, rng);
  CHECK_THROWS_AS(
      dpo_loss(policy, reference, {{"c0", "nope", "y1"}}, 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(dpo_loss(policy, reference, {}, 1.0),
                  std::invalid_argument);
  const auto mismatched = random_policy(2, 4, rng);
  CHECK_THROWS_AS(dpo_loss(policy, mismatched, {{"c0", "y0", "y1"}}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("kl divergence is zero at equality and positive elsewhere") {
  std::mt19937_64 rng(23);
  const auto policy = random_policy(2, 4, rng);
  CHECK(kl_divergence(policy, policy, "c0") == 0.0);
  const auto other = random_policy(2, 4, rng);
  CHECK(kl_divergence(policy, other, "c0") > 0.0);

  // Direct-summation oracle in long double.
  long double expected = 0.0L;
  const int ci = policy.context_index("c0");
  const auto p = policy.probabilities(ci);
  const auto q = other.probabilities(ci);
  for (std::size_t i = 0; i < p.size(); ++i) {
    expected += static_cast<long double>(p[i]) *
                (std::log(static_cast<long double>(p[i])) -
                 std::log(static_cast<long double>(q[i])));
  }
  CHECK(kl_divergence(policy, other, "c0") ==
        doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
}

TEST_CASE("kl-penalized objective reduces to expected reward at the "
          "reference") {
  std::mt19937_64 rng(29);
  const auto reference = random_policy(2, 3, rng);
  std::map<std::pair<std::string, std::string>, double> rewards;
  double expected = 0.0;
  for (const auto& context : reference.contexts()) {
    const auto probs = reference.probabilities(reference.context_index(context));
    for (std::size_t oi = 0; oi < reference.outputs().size(); ++oi) {
      const double r = static_cast<double>((rng() % 100)) / 50.0 - 1.0;
      rewards[{context, reference.outputs()[oi]}] = r;
      expected += probs[oi] * r;
    }
  }
  CHECK(kl_penalized_objective(reference, reference, rewards, 0.5) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the objective strictly decreases in beta away from the "
          "reference") {
  std::mt19937_64 rng(31);
  const auto policy = random_policy(1, 3, rng);
  const auto reference = random_policy(1, 3, rng);
  std::map<std::pair<std::string, std::string>, double> rewards = {
      {{"c0", "y0"}, 1.0}};
  const double lo = kl_penalized_objective(policy, reference, rewards, 0.1);
  const double mid = kl_penalized_objective(policy, reference, rewards, 1.0);
  const double hi = kl_penalized_objective(policy, reference, rewards, 10.0);
  CHECK(lo > mid);
  CHECK(mid > hi);
}

TEST_CASE("kl gradient matches finite differences") {
  std::mt19937_64 rng(37);
  const auto policy = random_policy(2, 3, rng);
  const auto reference = random_policy(2, 3, rng);
  std::map<std::pair<std::string, std::string>, double> rewards;
  for (const auto& context : policy.contexts()) {
    for (const auto& output : policy.outputs()) {
      rewards[{context, output}] =
          static_cast<double>((rng() % 100)) / 50.0 - 1.0;
    }
  }
  const auto grad = kl_penalized_gradient(policy, reference, rewards, 0.3);
  for (int ci = 0; ci < 2; ++ci) {
    for (int oi = 0; oi < 3; ++oi) {
      const double h = 1e-6;
      CategoricalPolicy plus = policy;
      plus.set_logit(ci, oi, policy.logit(ci, oi) + h);
      CategoricalPolicy minus = policy;
      minus.set_logit(ci, oi, policy.logit(ci, oi) - h);
      const double numeric =
          (kl_penalized_objective(plus, reference, rewards, 0.3) -
           kl_penalized_objective(minus, reference, rewards, 0.3)) /
          (2.0 * h);
      CHECK(std::fabs(grad[ci][oi] - numeric) <
            1e-6 * std::max(1.0, std::fabs(numeric)));
    }
  }
}

TEST_CASE("gradient ascent on a three-armed bandit concentrates on the "
          "rewarded output") {
  const auto reference = CategoricalPolicy::uniform({"c0"}, {"y0", "y1", "y2"});
  std::map<std::pair<std::string, std::string>, double> rewards = {
      {{"c0", "y0"}, 1.0}, {{"c0", "y1"}, 0.0}, {{"c0", "y2"}, 0.0}};
  const double beta = 0.1;
  CategoricalPolicy policy = reference;
  double objective = kl_penalized_objective(policy, reference, rewards, beta);
  double step = 1.0;
  for (int iter = 0; iter < 100; ++iter) {
    const auto grad = kl_penalized_gradient(policy, reference, rewards, beta);
    CategoricalPolicy candidate = policy;
    for (int oi = 0; oi < 3; ++oi) {
      candidate.add_to_logit(0, oi, step * grad[0][oi]);
    }
    const double next =
        kl_penalized_objective(candidate, reference, rewards, beta);
    if (next > objective) {
      // Accepted steps must be monotone in the objective.
      CHECK(next > objective);
      policy = candidate;
      objective = next;
    } else {
      step *= 0.5;
    }
  }
  const double p0 = std::exp(policy.log_prob("c0", "y0"));
  const double ref0 = std::exp(reference.log_prob("c0", "y0"));
  CHECK(p0 > ref0);
  CHECK(p0 > 0.5);
}

TEST_CASE("constrained reward variants") {
  RewardPair pair{2.0, -5.0, 0.0};
  CHECK(constrained_reward(pair, ConstraintVariant::sigma_on_c) == 2.0);
  pair.sigma = 1.0;
  CHECK(constrained_reward(pair, ConstraintVariant::sigma_on_c) == -3.0);
  CHECK(constrained_reward(pair, ConstraintVariant::sigma_on_c) ==
        constrained_reward(pair, ConstraintVariant::sum));
  RewardPair mild{2.0, -1.0, 0.5};
  CHECK(constrained_reward(mild, ConstraintVariant::sigma_on_c) == 1.5);
  CHECK(constrained_reward(mild, ConstraintVariant::sigma_on_h) == 0.0);
  CHECK(constrained_reward(mild, ConstraintVariant::sigma_offset) == 1.5);
  CHECK(constrained_loss(mild, ConstraintVariant::sum) == -1.0);
  RewardPair bad{0.0, 0.0, 1.5};
  CHECK_THROWS_AS(constrained_reward(bad, ConstraintVariant::sum),
                  std::invalid_argument);
}

TEST_CASE("shifting every helpful reward by a constant never changes the "
          "argmax") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RewardPair> pairs(5);
    for (auto& p : pairs) {
      p = {unit(rng), unit(rng), 0.5};
    }
    const double shift = unit(rng);
    for (ConstraintVariant variant :
         {ConstraintVariant::sum, ConstraintVariant::sigma_on_c,
          ConstraintVariant::sigma_on_h, ConstraintVariant::sigma_offset}) {
      int best = 0;
      int best_shifted = 0;
      for (int i = 1; i < 5; ++i) {
        if (constrained_reward(pairs[i], variant) >
            constrained_reward(pairs[best], variant)) {
          best = i;
        }
        RewardPair a = pairs[i];
        RewardPair b = pairs[best_shifted];
        a.r_h += shift;
        b.r_h += shift;
        if (constrained_reward(a, variant) > constrained_reward(b, variant)) {
          best_shifted = i;
        }
      }
      CHECK(best == best_shifted);
    }
  }
}

TEST_CASE("rejection gate blocks, selects, and falls back") {
  const std::vector<GateCandidate> pair = {{"a", 0.9, 0.8}, {"b", 0.7, 0.1}};
  const auto chosen = rejection_gate(pair, 0.5, "fallback");
  CHECK(chosen.selected_id == "b");
  CHECK(!chosen.safety_protocol);
  CHECK(chosen.blocked == std::vector<std::string>{"a"});

  const auto all_blocked = rejection_gate(
      {{"a", 0.9, 0.9}, {"b", 0.7, 0.8}}, 0.5, "safe-reply");
  CHECK(all_blocked.selected_id == "safe-reply");
  CHECK(all_blocked.safety_protocol);
  CHECK(all_blocked.survivors == 0);

  const auto open = rejection_gate(
      pair, std::numeric_limits<double>::infinity(), "fallback");
  CHECK(open.selected_id == "a");

  const auto empty = rejection_gate({}, 0.5, "fallback");
  CHECK(empty.safety_protocol);
}

TEST_CASE("gate output is invariant under candidate permutation") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GateCandidate> candidates;
    for (int i = 0; i < 6; ++i) {
      candidates.push_back(
          {"cand" + std::to_string(i), unit(rng), unit(rng)});
    }
    // Force some helpful-score ties to exercise the id tie-break.
    candidates[3].helpful_score = candidates[1].helpful_score;
    const auto baseline = rejection_gate(candidates, 0.5, "fb");
    std::shuffle(candidates.begin(), candidates.end(), rng);
    const auto shuffled = rejection_gate(candidates, 0.5, "fb");
    CHECK(baseline.selected_id == shuffled.selected_id);
    CHECK(baseline.safety_protocol == shuffled.safety_protocol);
    CHECK(baseline.blocked == shuffled.blocked);
  }
}
