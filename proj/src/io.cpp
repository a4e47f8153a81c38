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

#include "dynorm/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace dynorm {
namespace {

constexpr double kWeightSumTolerance = 1e-9;

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

Rational weight_from_json(const nlohmann::json& j, bool* was_decimal) {
  if (j.is_string()) {
    auto parsed = Rational::parse(j.get<std::string>());
    if (!parsed) {
      throw ParseError("bad rational weight '" + j.get<std::string>() + "'");
    }
    return *parsed;
  }
  if (j.is_number()) {
    *was_decimal = true;
    return Rational::from_decimal(j.get<double>());
  }
  throw ParseError("weight must be a \"p/q\" string or a number");
}

PreferenceSet tiers_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("tiers must be an array of arrays");
  std::vector<std::vector<AlternativeId>> tiers;
  for (const auto& tier : j) {
    if (!tier.is_array()) throw ParseError("each tier must be an array");
    std::vector<AlternativeId> ids;
    for (const auto& id : tier) {
      if (!id.is_string()) throw ParseError("alternative ids must be strings");
      ids.push_back(id.get<std::string>());
    }
    tiers.push_back(std::move(ids));
  }
  return PreferenceSet(std::move(tiers));
}

OrderedJson tiers_to_json(const std::vector<std::vector<AlternativeId>>& tiers) {
  OrderedJson out = OrderedJson::array();
  for (const auto& tier : tiers) {
    out.push_back(tier);
  }
  return out;
}

OrderedJson score_to_json(const ScoreValue& score) {
  if (score.exact) return score.q.to_string();
  return score.x;
}

OrderedJson entry_to_json(const ProfileEntry& entry) {
  OrderedJson out;
  out["weight"] = entry.weight.to_string();
  out["tiers"] = tiers_to_json(entry.set.tiers());
  return out;
}

}  // namespace

WeightedProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("profile must be a JSON object");
  if (!j.contains("universe") || !j["universe"].is_array()) {
    throw ParseError("profile needs a \"universe\" array");
  }
  std::vector<AlternativeId> universe;
  for (const auto& id : j["universe"]) {
    if (!id.is_string()) throw ParseError("alternative ids must be strings");
    universe.push_back(id.get<std::string>());
  }
  std::vector<ProfileEntry> entries;
  bool any_decimal = false;
  if (j.contains("entries")) {
    if (!j["entries"].is_array()) {
      throw ParseError("\"entries\" must be an array");
    }
    for (const auto& entry : j["entries"]) {
      if (!entry.is_object() || !entry.contains("weight") ||
          !entry.contains("tiers")) {
        throw ParseError("each entry needs \"weight\" and \"tiers\"");
      }
      bool was_decimal = false;
      Rational weight = weight_from_json(entry["weight"], &was_decimal);
      any_decimal |= was_decimal;
      entries.push_back({tiers_from_json(entry["tiers"]), weight});
    }
  }
  if (any_decimal && !entries.empty()) {
    Rational total(0);
    for (const auto& entry : entries) total += entry.weight;
    if (total != Rational(1) &&
        std::fabs(total.to_double() - 1.0) <= kWeightSumTolerance &&
        total.sign() > 0) {
      for (auto& entry : entries) entry.weight /= total;
    }
  }
  return WeightedProfile(std::move(universe), std::move(entries));
}

WeightedProfile load_profile(const std::string& path) {
  return profile_from_json(load_json_file(path));
}

OrderedJson profile_to_json(const WeightedProfile& profile) {
  OrderedJson out;
  out["universe"] = profile.universe();
  OrderedJson entries = OrderedJson::array();
  for (const auto& entry : profile.entries()) {
    entries.push_back(entry_to_json(entry));
  }
  out["entries"] = std::move(entries);
  return out;
}

OrderedJson ordering_to_json(const AggregateOrdering& ordering) {
  OrderedJson out;
  out["rule"] = to_string(ordering.rule);
  out["ranking"] = tiers_to_json(ordering.ranking);
  OrderedJson scores = OrderedJson::object();
  for (const auto& [id, score] : ordering.scores) {
    scores[id] = score_to_json(score);
  }
  out["scores"] = std::move(scores);
  OrderedJson trace = OrderedJson::array();
  for (const auto& event : ordering.trace) {
    OrderedJson e;
    e["kind"] = event.kind;
    for (const auto& [key, value] : event.fields) {
      e[key] = value;
    }
    trace.push_back(std::move(e));
  }
  out["trace"] = std::move(trace);
  return out;
}

OrderedJson verdict_to_json(const AuditVerdict& verdict) {
  OrderedJson out;
  out["criterion"] = verdict.criterion;
  out["rule"] = to_string(verdict.rule);
  out["trials"] = verdict.trials;
  out["outcome"] = to_string(verdict.outcome);
  if (verdict.witness) {
    const AuditWitness& witness = *verdict.witness;
    OrderedJson w;
    w["profile"] = profile_to_json(witness.profile);
    if (witness.added) w["added"] = entry_to_json(*witness.added);
    if (witness.removed) w["removed"] = *witness.removed;
    if (witness.focus) w["focus"] = *witness.focus;
    w["ordering_before"] = ordering_to_json(witness.ordering_before);
    if (witness.profile_after) {
      w["profile_after"] = profile_to_json(*witness.profile_after);
    }
    if (witness.ordering_after) {
      w["ordering_after"] = ordering_to_json(*witness.ordering_after);
    }
    out["witness"] = std::move(w);
  }
  return out;
}

std::vector<ComparisonRecord> comparisons_from_csv(std::istream& in) {
  std::vector<ComparisonRecord> records;
  std::vector<int> bad_lines;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line_number == 1 && line.rfind("context_id", 0) == 0) continue;

    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() < 3 || fields.size() > 4) {
      bad_lines.push_back(line_number);
      continue;
    }
    double weight = 1.0;
    if (fields.size() == 4) {
      try {
        std::size_t used = 0;
        weight = std::stod(fields[3], &used);
        if (used != fields[3].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        bad_lines.push_back(line_number);
        continue;
      }
    }
    try {
      records.emplace_back(fields[0], fields[1], fields[2], weight);
    } catch (const std::invalid_argument&) {
      bad_lines.push_back(line_number);
    }
  }
  if (!bad_lines.empty()) {
    std::ostringstream msg;
    msg << "malformed comparison rows at line";
    if (bad_lines.size() > 1) msg << "s";
    for (std::size_t i = 0; i < bad_lines.size(); ++i) {
      msg << (i == 0 ? " " : ", ") << bad_lines[i];
    }
    throw ParseError(msg.str());
  }
  return records;
}

std::vector<ComparisonRecord> load_comparisons(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return comparisons_from_csv(in);
}

OrderedJson strengths_to_json(const StrengthTable& table) {
  OrderedJson out;
  out["items"] = table.items;
  OrderedJson strengths = OrderedJson::object();
  for (const auto& item : table.items) {
    strengths[item] = table.strengths.at(item);
  }
  out["strengths"] = std::move(strengths);
  out["log_likelihood"] = table.log_likelihood;
  out["iterations"] = table.iterations;
  return out;
}

std::vector<GateCandidate> candidates_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("candidates must be a JSON array");
  std::vector<GateCandidate> out;
  for (const auto& c : j) {
    if (!c.is_object() || !c.contains("id") || !c.contains("helpful_score") ||
        !c.contains("harm_score")) {
      throw ParseError(
          "each candidate needs \"id\", \"helpful_score\", \"harm_score\"");
    }
    if (!c["id"].is_string() || !c["helpful_score"].is_number() ||
        !c["harm_score"].is_number()) {
      throw ParseError("bad candidate field types");
    }
    out.push_back({c["id"].get<std::string>(),
                   c["helpful_score"].get<double>(),
                   c["harm_score"].get<double>()});
  }
  return out;
}

std::vector<GateCandidate> load_candidates(const std::string& path) {
  return candidates_from_json(load_json_file(path));
}

OrderedJson gate_report_to_json(const GateReport& report) {
  OrderedJson out;
  out["selected"] = report.selected_id;
  out["safety_protocol"] = report.safety_protocol;
  out["survivors"] = report.survivors;
  out["blocked"] = report.blocked;
  return out;
}

GridworldJob gridworld_job_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  GridworldJob job;
  if (!j.contains("env") || !j["env"].is_string()) {
    throw ParseError("config needs an \"env\" name");
  }
  auto kind = env_kind_from_string(j["env"].get<std::string>());
  if (!kind) throw ParseError("unknown env '" + j["env"].get<std::string>() + "'");
  job.config.env = *kind;

  if (j.contains("agent")) {
    const std::string agent = j["agent"].get<std::string>();
    if (agent == "vanilla") {
      job.config.agent.aup = false;
    } else if (agent == "aup") {
      job.config.agent.aup = true;
    } else {
      throw ParseError("unknown agent '" + agent + "'");
    }
  }
  if (j.contains("sigma")) job.config.agent.sigma = j["sigma"].get<double>();
  if (j.contains("n_aux")) job.config.agent.n_aux = j["n_aux"].get<int>();
  if (j.contains("episodes")) job.config.episodes = j["episodes"].get<int>();
  if (j.contains("eval_episodes")) {
    job.config.eval_episodes = j["eval_episodes"].get<int>();
  }
  if (j.contains("seed")) job.config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("discount")) {
    job.config.discount = j["discount"].get<double>();
  }
  if (j.contains("alpha")) job.config.alpha = j["alpha"].get<double>();
  if (j.contains("alpha_end")) {
    job.config.alpha_end = j["alpha_end"].get<double>();
  }
  if (j.contains("epsilon_start")) {
    job.config.epsilon.start = j["epsilon_start"].get<double>();
  }
  if (j.contains("epsilon_end")) {
    job.config.epsilon.end = j["epsilon_end"].get<double>();
  }
  if (j.contains("scale_floor")) {
    job.config.scale_floor = j["scale_floor"].get<double>();
  }
  if (j.contains("aux_discount")) {
    job.config.aux.discount = j["aux_discount"].get<double>();
  }
  if (j.contains("sigma_sweep")) {
    if (!j["sigma_sweep"].is_array()) {
      throw ParseError("\"sigma_sweep\" must be an array of numbers");
    }
    for (const auto& s : j["sigma_sweep"]) {
      job.sigma_sweep.push_back(s.get<double>());
    }
  }
  if (j.contains("sweep_discount")) {
    const auto& sweep = j["sweep_discount"];
    if (!sweep.is_object() || !sweep.contains("from") ||
        !sweep.contains("to") || !sweep.contains("step")) {
      throw ParseError("\"sweep_discount\" needs from/to/step");
    }
    job.discount_sweep = DiscountSweep{sweep["from"].get<double>(),
                                       sweep["to"].get<double>(),
                                       sweep["step"].get<double>()};
  }
  return job;
}

GridworldJob load_gridworld_job(const std::string& path) {
  return gridworld_job_from_json(load_json_file(path));
}

OrderedJson metrics_to_json(const ExperimentConfig& config,
                            const Metrics& metrics) {
  OrderedJson out;
  out["env"] = to_string(config.env);
  out["agent"] = config.agent.aup ? "aup" : "vanilla";
  if (config.agent.aup) {
    out["sigma"] = config.agent.sigma;
    out["n_aux"] = config.agent.n_aux;
  }
  out["episodes"] = config.episodes;
  out["eval_episodes"] = config.eval_episodes;
  out["seed"] = config.seed;
  if (config.discount) out["discount"] = *config.discount;
  OrderedJson m;
  m["goal_rate"] = metrics.goal_rate;
  m["vase_break_rate"] = metrics.vase_break_rate;
  m["loop_exploit_detected"] = metrics.loop_exploit_detected;
  m["switch_disable_rate"] = metrics.switch_disable_rate;
  m["power_proxy"] = metrics.power_proxy;
  out["metrics"] = std::move(m);
  return out;
}

OrderedJson trace_to_json(const EpisodeTrace& trace) {
  OrderedJson out;
  out["episode"] = trace.episode;
  out["states"] = trace.states;
  out["actions"] = trace.actions;
  out["total_reward"] = trace.total_reward;
  out["reached_goal"] = trace.reached_goal;
  out["vase_broken"] = trace.vase_broken;
  out["switch_disabled"] = trace.switch_disabled;
  return out;
}

}  // namespace dynorm
