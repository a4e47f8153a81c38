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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynorm/aggregation.hpp"
#include "dynorm/audit.hpp"
#include "dynorm/gridworld.hpp"
#include "dynorm/io.hpp"
#include "dynorm/preference.hpp"
#include "dynorm/reward.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;

bool verbose() {
  const char* level = std::getenv("DYNORM_LOG");
  if (level == nullptr) return false;
  const std::string value(level);
  return !value.empty() && value != "0" && value != "quiet";
}

void log_note(const std::string& message) {
  if (verbose()) std::cerr << "[dynorm] " << message << "\n";
}

// Reports go to stdout or --out; stderr stays reserved for diagnostics.
void emit(const dynorm::OrderedJson& payload, const std::string& out_path) {
  const std::string text = payload.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw dynorm::ParseError("cannot write '" + out_path + "'");
  out << text;
}

struct AggregateArgs {
  std::string input;
  std::string rule;
  double k_factor = 32.0;
  double initial = 1000.0;
  std::string out;
};

int run_aggregate(const AggregateArgs& args) {
  const auto rule = dynorm::rule_from_string(args.rule);
  if (!rule) {
    std::cerr << "unknown rule '" << args.rule << "'\n";
    return kExitUsage;
  }
  const dynorm::WeightedProfile profile = dynorm::load_profile(args.input);
  const dynorm::ValidationReport report = dynorm::validate_profile(profile);
  if (!report.coherent()) {
    std::cerr << "profile rejected: " << report.to_string() << "\n";
    return kExitUsage;
  }
  dynorm::AggregateOptions options;
  options.elo_k_factor = args.k_factor;
  options.elo_initial = args.initial;
  const auto ordering = dynorm::aggregate(profile, *rule, options);
  emit(dynorm::ordering_to_json(ordering), args.out);
  return kExitOk;
}

struct AuditArgs {
  std::string rule;
  std::string criterion;
  long trials = 1000;
  std::uint64_t seed = 0;
  int alternatives = 4;
  int sets = 5;
  std::string out;
};

int run_audit(const AuditArgs& args) {
  const auto rule = dynorm::rule_from_string(args.rule);
  if (!rule) {
    std::cerr << "unknown rule '" << args.rule << "'\n";
    return kExitUsage;
  }
  dynorm::AuditVerdict verdict;
  if (args.criterion == "participation") {
    verdict = dynorm::search_participation_violation(
        *rule, args.alternatives, args.sets, args.trials, args.seed);
  } else if (args.criterion == "condorcet-loser") {
    verdict = dynorm::audit_condorcet_consistency(*rule, args.trials,
                                                  args.seed, args.alternatives,
                                                  args.sets)
                  .first;
  } else if (args.criterion == "condorcet-winner") {
    verdict = dynorm::audit_condorcet_consistency(*rule, args.trials,
                                                  args.seed, args.alternatives,
                                                  args.sets)
                  .second;
  } else if (args.criterion == "iia") {
    verdict = dynorm::search_iia_violation(*rule, args.trials, args.seed,
                                           args.alternatives, args.sets);
  } else {
    std::cerr << "unknown criterion '" << args.criterion << "'\n";
    return kExitUsage;
  }
  log_note("audit outcome: " + dynorm::to_string(verdict.outcome) + " after " +
           std::to_string(verdict.trials) + " trials");
  // A found violation is a finding, not a failure.
  emit(dynorm::verdict_to_json(verdict), args.out);
  return kExitOk;
}

struct FitBtArgs {
  std::string input;
  int max_iters = 200;
  double tol = 1e-10;
  double pseudo = 0.5;
  std::string out;
};

int run_fit_bt(const FitBtArgs& args) {
  const auto records = dynorm::load_comparisons(args.input);
  if (records.empty()) {
    std::cerr << "no comparison rows in '" << args.input << "'\n";
    return kExitUsage;
  }
  const auto table = dynorm::fit_bradley_terry(records, args.max_iters,
                                               args.tol, args.pseudo);
  emit(dynorm::strengths_to_json(table), args.out);
  return kExitOk;
}

struct DpoDemoArgs {
  double beta = 0.5;
  double step_size = 0.5;
  int steps = 50;
  std::string out;
};

// A single-context toy instance optimized from its own reference, so the
// first reported loss is exactly ln 2.
int run_dpo_demo(const DpoDemoArgs& args) {
  const std::vector<std::string> contexts = {"c0"};
  const std::vector<std::string> outputs = {"y_plus", "y_minus", "y_other"};
  const auto reference = dynorm::CategoricalPolicy::uniform(contexts, outputs);
  dynorm::CategoricalPolicy policy = reference;
  const std::vector<dynorm::ComparisonRecord> batch = {
      {"c0", "y_plus", "y_minus"}};

  dynorm::OrderedJson series = dynorm::OrderedJson::array();
  for (int step = 0; step <= args.steps; ++step) {
    const double loss = dynorm::dpo_loss(policy, reference, batch, args.beta);
    const double margin = policy.log_prob("c0", "y_plus") -
                          policy.log_prob("c0", "y_minus");
    dynorm::OrderedJson point;
    point["step"] = step;
    point["loss"] = loss;
    point["margin"] = margin;
    series.push_back(std::move(point));
    if (step < args.steps) {
      policy = dynorm::dpo_step(policy, reference, batch, args.beta,
                                args.step_size);
    }
  }
  dynorm::OrderedJson out;
  out["beta"] = args.beta;
  out["step_size"] = args.step_size;
  out["series"] = std::move(series);
  emit(out, args.out);
  return kExitOk;
}

struct GateArgs {
  std::string input;
  double threshold = 0.5;
  std::string fallback = "fallback";
  std::string out;
};

int run_gate(const GateArgs& args) {
  const auto candidates = dynorm::load_candidates(args.input);
  const auto report =
      dynorm::rejection_gate(candidates, args.threshold, args.fallback);
  emit(dynorm::gate_report_to_json(report), args.out);
  return kExitOk;
}

struct GridworldArgs {
  std::string config;
  std::string out;
  std::string trace_path;
  std::string traj_csv_path;
};

void write_traces(const std::string& path,
                  const std::vector<dynorm::EpisodeTrace>& traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dynorm::ParseError("cannot write '" + path + "'");
  for (const auto& trace : traces) {
    out << dynorm::trace_to_json(trace).dump() << "\n";
  }
}

void write_trajectory_csv(const std::string& path,
                          const dynorm::Environment& env,
                          const std::vector<dynorm::EpisodeTrace>& traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dynorm::ParseError("cannot write '" + path + "'");
  out << "episode,step,state,x,y,action\n";
  const auto* grid = std::get_if<dynorm::GridWorld>(&env);
  for (const auto& trace : traces) {
    for (std::size_t i = 0; i < trace.states.size(); ++i) {
      const int state = trace.states[i];
      out << trace.episode << "," << i << "," << state << ",";
      if (grid != nullptr) {
        const auto cell = grid->cell_of(state);
        out << cell.x << "," << cell.y;
      } else {
        out << ",";
      }
      out << ",";
      if (i < trace.actions.size()) out << trace.actions[i];
      out << "\n";
    }
  }
}

int run_gridworld(const GridworldArgs& args) {
  const dynorm::GridworldJob job = dynorm::load_gridworld_job(args.config);

  if (job.discount_sweep) {
    const auto sweep = *job.discount_sweep;
    const auto result = dynorm::find_disable_threshold(
        sweep.from, sweep.to, sweep.step, job.config);
    dynorm::OrderedJson out;
    out["env"] = dynorm::to_string(dynorm::EnvKind::stop_button);
    out["seed"] = job.config.seed;
    out["discounts"] = result.discounts;
    out["disable_rates"] = result.disable_rates;
    if (result.threshold) {
      out["disable_emergence_discount"] = *result.threshold;
    } else {
      out["disable_emergence_discount"] = nullptr;
    }
    emit(out, args.out);
    return kExitOk;
  }

  if (!job.sigma_sweep.empty()) {
    dynorm::OrderedJson records = dynorm::OrderedJson::array();
    for (double sigma : job.sigma_sweep) {
      dynorm::ExperimentConfig point = job.config;
      point.agent.aup = true;
      point.agent.sigma = sigma;
      log_note("running sigma = " + std::to_string(sigma));
      const auto result = dynorm::run_experiment(point);
      records.push_back(dynorm::metrics_to_json(point, result.metrics));
    }
    dynorm::OrderedJson out;
    out["records"] = std::move(records);
    emit(out, args.out);
    return kExitOk;
  }

  const auto result = dynorm::run_experiment(job.config);
  if (result.scale_floor_clamps > 0) {
    log_note("impact scale hit the floor " +
             std::to_string(result.scale_floor_clamps) + " times");
  }
  if (!args.trace_path.empty()) write_traces(args.trace_path, result.traces);
  if (!args.traj_csv_path.empty()) {
    const auto env = dynorm::build_env(job.config.env, job.config.seed);
    write_trajectory_csv(args.traj_csv_path, env, result.traces);
  }
  emit(dynorm::metrics_to_json(job.config, result.metrics), args.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dynorm: ordinal preference aggregation, social-choice audits, "
      "preference-based reward fitting, and impact-aware gridworld agents"};
  app.require_subcommand(1);

  AggregateArgs aggregate_args;
  auto* aggregate =
      app.add_subcommand("aggregate", "aggregate a weighted profile");
  aggregate->add_option("--in", aggregate_args.input, "profile JSON file")
      ->required();
  aggregate
      ->add_option("--rule", aggregate_args.rule,
                   "borda | ranked-pairs | elo | plurality")
      ->required();
  aggregate->add_option("--k-factor", aggregate_args.k_factor,
                        "elo K-factor");
  aggregate->add_option("--initial", aggregate_args.initial,
                        "elo initial rating");
  aggregate->add_option("--out", aggregate_args.out, "output path");

  AuditArgs audit_args;
  auto* audit =
      app.add_subcommand("audit", "audit a rule against a criterion");
  audit->add_option("--rule", audit_args.rule, "rule under audit")->required();
  audit
      ->add_option("--criterion", audit_args.criterion,
                   "participation | condorcet-winner | condorcet-loser | iia")
      ->required();
  audit->add_option("--trials", audit_args.trials, "number of random trials");
  audit->add_option("--seed", audit_args.seed, "random seed");
  audit->add_option("--alternatives", audit_args.alternatives,
                    "alternatives per random profile (<= 5)");
  audit->add_option("--sets", audit_args.sets,
                    "preference sets per random profile (<= 6)");
  audit->add_option("--out", audit_args.out, "output path");

  FitBtArgs fit_args;
  auto* fit_bt =
      app.add_subcommand("fit-bt", "fit pairwise-comparison strengths");
  fit_bt->add_option("--in", fit_args.input, "comparison CSV file")
      ->required();
  fit_bt->add_option("--max-iters", fit_args.max_iters, "iteration cap");
  fit_bt->add_option("--tol", fit_args.tol, "relative convergence tolerance");
  fit_bt->add_option("--pseudo", fit_args.pseudo,
                     "symmetric phantom wins per pair");
  fit_bt->add_option("--out", fit_args.out, "output path");

  DpoDemoArgs dpo_args;
  auto* dpo_demo = app.add_subcommand(
      "dpo-demo", "run the toy direct-preference-optimization loop");
  dpo_demo->add_option("--beta", dpo_args.beta, "log-ratio scale");
  dpo_demo->add_option("--step-size", dpo_args.step_size,
                       "gradient step size");
  dpo_demo->add_option("--steps", dpo_args.steps, "number of steps");
  dpo_demo->add_option("--out", dpo_args.out, "output path");

  GateArgs gate_args;
  auto* gate =
      app.add_subcommand("gate", "select a candidate behind the guardrail");
  gate->add_option("--in", gate_args.input, "candidates JSON file")
      ->required();
  gate->add_option("--threshold", gate_args.threshold,
                   "maximum tolerated harm score")
      ->required();
  gate->add_option("--fallback", gate_args.fallback,
                   "id returned when nothing survives");
  gate->add_option("--out", gate_args.out, "output path");

  GridworldArgs grid_args;
  auto* gridworld =
      app.add_subcommand("gridworld", "train and evaluate a gridworld agent");
  gridworld->add_option("--config", grid_args.config, "experiment JSON config")
      ->required();
  gridworld->add_option("--out", grid_args.out, "output path");
  gridworld->add_option("--trace", grid_args.trace_path,
                        "write per-episode traces as JSON lines");
  gridworld->add_option("--traj-csv", grid_args.traj_csv_path,
                        "write evaluated trajectories as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(aggregate)) return run_aggregate(aggregate_args);
    if (app.got_subcommand(audit)) return run_audit(audit_args);
    if (app.got_subcommand(fit_bt)) return run_fit_bt(fit_args);
    if (app.got_subcommand(dpo_demo)) return run_dpo_demo(dpo_args);
    if (app.got_subcommand(gate)) return run_gate(gate_args);
    if (app.got_subcommand(gridworld)) return run_gridworld(grid_args);
  } catch (const dynorm::ProfileError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const dynorm::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
