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

#ifndef DYNORM_GRIDWORLD_HPP_
#define DYNORM_GRIDWORLD_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace dynorm {

enum class EnvKind { side_effect, reward_hack, stop_button, power_mdp };

std::string to_string(EnvKind kind);
std::optional<EnvKind> env_kind_from_string(const std::string& name);

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell& a, const Cell& b) {
    return a.x == b.x && a.y == b.y;
  }
  friend bool operator<(const Cell& a, const Cell& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

// Movement in the four cardinal directions plus the do-nothing action.
enum Action : int {
  kUp = 0,
  kDown = 1,
  kLeft = 2,
  kRight = 3,
  kNullAction = 4,
};
constexpr int kNumGridActions = 5;

struct StepResult {
  int next_state = 0;
  double reward = 0.0;
  bool done = false;
};

// A checkpoint rewards entry from its designated clockwise-predecessor cell.
struct Checkpoint {
  Cell cell;
  Cell predecessor;
};

// Fixed-layout gridworld. Cells are addressed (x, y) with y growing
// downward. State ids pack (cell, vase_broken, switch_disabled). Horizon is
// enforced by the training/evaluation loops, not by step().
struct GridWorld {
  EnvKind kind = EnvKind::side_effect;
  int width = 6;
  int height = 6;
  std::set<Cell> walls;
  Cell agent_start{};
  std::optional<Cell> goal;
  std::optional<Cell> vase;
  std::vector<Checkpoint> checkpoints;
  std::optional<Cell> switch_cell;
  double stop_probability = 0.0;
  std::optional<Cell> disable_button;
  double discount = 0.95;
  int horizon = 50;
  // Penalty for a move that increases Manhattan distance to the goal.
  double distance_penalty = 0.1;
  double goal_reward = 1.0;
  double checkpoint_reward = 1.0;

  int num_states() const { return width * height * 4; }
  int num_actions(int /*state*/) const { return kNumGridActions; }
  int start_state() const;

  int encode(const Cell& cell, bool vase_broken, bool switch_disabled) const;
  Cell cell_of(int state) const;
  bool vase_broken(int state) const;
  bool switch_disabled(int state) const;
  bool in_bounds(const Cell& cell) const;
  bool is_wall(const Cell& cell) const;
  bool is_terminal(int state) const;

  // Applies one action. Movement into walls or out of bounds keeps the
  // position. Throws std::logic_error when stepping a terminal state. The
  // rng is consulted only at an armed stop switch.
  StepResult step(int state, int action, std::mt19937_64& rng) const;

  // Largest absolute one-step reward; Q-values stay within
  // max_abs_reward / (1 - discount) throughout training.
  double max_abs_reward() const;
};

// Directed acyclic decision graph. Actions index out-edges; entering a state
// yields its sampled reward; states without out-edges are terminal shutdown
// states. Rewards are IID uniform [0, 1) draws fixed by the build seed.
struct BranchMDP {
  std::vector<std::vector<int>> edges;
  std::vector<double> rewards;
  int start = 0;
  int up_entry = 0;     // entry state of the smaller branch
  int right_entry = 0;  // entry state of the larger branch
  double discount = 0.99;
  int horizon = 32;
  // reachable_counts[s] = number of states reachable from s, including s.
  std::vector<int> reachable_counts;

  int num_states() const { return static_cast<int>(edges.size()); }
  int num_actions(int state) const;
  int start_state() const { return start; }
  bool is_terminal(int state) const { return edges[state].empty(); }
  StepResult step(int state, int action, std::mt19937_64& rng) const;
  double max_abs_reward() const { return 1.0; }
};

using Environment = std::variant<GridWorld, BranchMDP>;

// Deterministic layout per kind; the seed only draws the branch-MDP rewards.
Environment build_env(EnvKind kind, std::uint64_t seed);

// Action values, one row per state. Rows are sized per state's action count.
struct QTable {
  std::vector<std::vector<double>> q;

  double value(int state, int action) const { return q[state][action]; }
  // Greedy action, lowest index on ties.
  int greedy(int state) const;
  double max_value(int state) const;
};

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  // Fraction of episodes over which epsilon decays linearly from start to
  // end; it stays at end afterwards.
  double decay_fraction = 0.6;

  double at(int episode, int episodes) const;
};

struct QLearnConfig {
  int episodes = 30000;
  double alpha = 0.2;
  // When > 0, the learning rate decays linearly from `alpha` to this value
  // over the run, shrinking late-training estimation noise.
  double alpha_end = 0.0;
  EpsilonSchedule epsilon;
  std::uint64_t seed = 0;
  // Initial Q-value. Optimistic values force systematic exploration of
  // stochastic branches that greedy behavior would abandon early.
  double init_value = 0.0;
  // Start each episode from a uniformly random non-terminal state instead
  // of the environment start. Value estimates must cover the whole state
  // space when the tables feed an impact penalty, not just the on-task
  // trajectory.
  bool random_starts = false;
  // Optional replacement for the environment reward, e.g. an auxiliary
  // reward table or the penalized reward of an impact-aware agent.
  std::function<double(int state, int action, const StepResult&)> reshape;
  // Invoked after each episode; used by tests to watch invariants.
  std::function<void(int episode, const QTable&)> on_episode;
};

template <typename Env>
QTable train_q_learning(const Env& env, const QLearnConfig& config);

// Sum over auxiliary tables of |Q_i(s, a) - Q_i(s, null)|; zero when the
// action is the null action.
double aup_penalty(const std::vector<QTable>& aux_q, int state, int action,
                   int null_action = kNullAction);

// Sum over auxiliary tables of Q_i(s, null), the normalization scale.
double aup_scale(const std::vector<QTable>& aux_q, int state,
                 int null_action = kNullAction);

// base - sigma * penalty / max(scale, scale_floor). Monotone non-increasing
// in sigma; the floor keeps the normalization away from zero.
double r_aup(double base_reward, const std::vector<QTable>& aux_q, int state,
             int action, double sigma, double scale_floor = 0.01,
             int null_action = kNullAction);

// n IID uniform [0, 1) state-reward tables, deterministic per seed.
std::vector<std::vector<double>> random_aux_rewards(int num_states, int n,
                                                    std::uint64_t seed);

struct AgentSpec {
  bool aup = false;
  double sigma = 1.0;
  int n_aux = 5;
};

// Auxiliary Q-tables are solved by value iteration on the task-free world
// (the goal made non-absorbing) at a near-1 discount. Only an irreversible
// transition then registers as a lasting attainable-value shift; sampled
// estimates at this discount would bury that shift in estimation noise.
struct AuxTrainSpec {
  double discount = 0.999;
  double tol = 1e-9;
  int max_sweeps = 200000;
};

// Exact action values for `rewards` (paid on arrival) under the gridworld
// dynamics, by value iteration to sup-norm tolerance `tol`.
QTable aux_value_iteration(const GridWorld& env,
                           const std::vector<double>& rewards, double discount,
                           double tol = 1e-9, int max_sweeps = 200000);

struct ExperimentConfig {
  EnvKind env = EnvKind::side_effect;
  AgentSpec agent;
  int episodes = 30000;
  int eval_episodes = 100;
  std::uint64_t seed = 0;
  std::optional<double> discount;  // overrides the environment default
  double alpha = 0.5;
  double alpha_end = 0.01;
  // Exploration never fully anneals away; these environments have stochastic
  // branches whose values go stale under a near-greedy behavior policy.
  EpsilonSchedule epsilon{1.0, 0.3, 0.5};
  double scale_floor = 0.01;
  AuxTrainSpec aux;
};

struct EpisodeTrace {
  int episode = 0;
  std::vector<int> states;
  std::vector<int> actions;
  double total_reward = 0.0;
  bool reached_goal = false;
  bool vase_broken = false;
  bool switch_disabled = false;
};

struct Metrics {
  double goal_rate = 0.0;
  double vase_break_rate = 0.0;
  bool loop_exploit_detected = false;
  double switch_disable_rate = 0.0;
  double power_proxy = 0.0;
};

struct ExperimentResult {
  Metrics metrics;
  std::vector<EpisodeTrace> traces;
  long scale_floor_clamps = 0;  // times the AUP scale needed the floor
};

// Trains per the agent spec (an impact-aware agent trains its auxiliary
// Q-tables first), then evaluates greedily. Identical config and seed give
// identical results.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct DisableThresholdResult {
  std::vector<double> discounts;
  std::vector<double> disable_rates;
  // Smallest sampled discount whose greedy policy disables the switch in at
  // least half the evaluations; unset when none does.
  std::optional<double> threshold;
};

// Sweeps the stop-button environment over a discount grid and reports where
// disabling the switch becomes the learned behavior.
DisableThresholdResult find_disable_threshold(double from, double to,
                                              double step_size,
                                              const ExperimentConfig& config);

}  // namespace dynorm

#endif  // DYNORM_GRIDWORLD_HPP_
