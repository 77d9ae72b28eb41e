#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "safactor/annealer.hpp"
#include "safactor/biguint.hpp"
#include "safactor/search.hpp"

namespace safactor {

using json = nlohmann::json;

// Everything one invocation needs: the target, search policy, annealing
// parameters and campaign settings.
struct RunConfig {
  BigUint target;
  std::string target_text;
  SearchPolicy policy;
  AnnealParams params;
  std::string hint_text;
  std::uint64_t repeat = 1;
};

inline std::string_view to_string(Schedule s) { return s == Schedule::interleaved ? "interleaved" : "sequential"; }
inline std::string_view to_string(TaskOrder o) { return o == TaskOrder::heuristic ? "heuristic" : "lexicographic"; }

inline Schedule parse_schedule(std::string_view s) {
  if (s == "interleaved") return Schedule::interleaved;
  if (s == "sequential") return Schedule::sequential;
  throw std::invalid_argument("unknown schedule '" + std::string(s) + "'");
}

inline TaskOrder parse_order(std::string_view s) {
  if (s == "heuristic") return TaskOrder::heuristic;
  if (s == "lexicographic") return TaskOrder::lexicographic;
  throw std::invalid_argument("unknown task order '" + std::string(s) + "'");
}

// Parses a decimal target; rejects anything that is not an integer >= 2.
inline BigUint parse_target(const std::string& text) {
  BigUint n = BigUint::from_decimal(text);
  if (n < BigUint{2}) throw std::invalid_argument("N must be >= 2, got " + text);
  return n;
}

// Applies keys from a JSON config object. Unknown keys are an error.
inline void apply_config_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "seed") {
      cfg.policy.master_seed = v.get<std::uint64_t>();
    } else if (key == "workers") {
      cfg.policy.worker_count = v.get<std::size_t>();
    } else if (key == "semiprime") {
      cfg.policy.semiprime_mode = v.get<bool>();
    } else if (key == "hint") {
      cfg.hint_text = v.get<std::string>();
    } else if (key == "schedule") {
      cfg.policy.schedule = parse_schedule(v.get<std::string>());
    } else if (key == "order") {
      cfg.policy.order = parse_order(v.get<std::string>());
    } else if (key == "deadline") {
      cfg.policy.deadline_seconds = v.get<double>();
    } else if (key == "fc") {
      cfg.params.cooling_factor = v.get<double>();
    } else if (key == "t0") {
      cfg.params.initial_temperature = v.get<double>();
    } else if (key == "k") {
      cfg.params.boltzmann_k = v.get<Energy>();
    } else if (key == "m") {
      cfg.params.configs_scale = v.get<std::uint64_t>();
    } else if (key == "na") {
      cfg.params.max_steps = v.get<std::uint64_t>();
    } else if (key == "cost") {
      cfg.params.cost = CostFunction{parse_cost_kind(v.get<std::string>())};
    } else if (key == "bad_move_fraction") {
      cfg.params.bad_move_fraction = v.get<double>();
    } else if (key == "revert_patience") {
      cfg.params.revert_patience = v.get<std::uint64_t>();
    } else if (key == "popcount_filter") {
      cfg.params.enforce_product_popcount = v.get<bool>();
    } else if (key == "literal_metropolis") {
      cfg.params.literal_metropolis = v.get<bool>();
    } else if (key == "freeze_odd") {
      cfg.params.freeze_odd_digit = v.get<bool>();
    } else if (key == "repeat") {
      cfg.repeat = v.get<std::uint64_t>();
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
}

// Final consistency checks before any work starts.
inline void validate_config(RunConfig& cfg) {
  cfg.params.validate();
  if (cfg.policy.worker_count < 1) throw std::invalid_argument("workers must be >= 1");
  if (cfg.repeat < 1) throw std::invalid_argument("repeat must be >= 1");
  if (cfg.policy.deadline_seconds && !(*cfg.policy.deadline_seconds > 0)) {
    throw std::invalid_argument("deadline must be positive");
  }
  cfg.policy.hint = cfg.hint_text.empty() ? std::nullopt : std::optional{SearchHint::parse(cfg.hint_text)};
}

inline json params_json(const RunConfig& cfg) {
  const AnnealParams& p = cfg.params;
  json j;
  j["fc"] = p.cooling_factor;
  j["t0"] = p.start_temperature();
  j["k"] = p.boltzmann_k ? json(*p.boltzmann_k) : json(nullptr);
  j["m"] = p.configs_scale;
  j["na"] = p.max_steps;
  j["cost"] = std::string(to_string(p.cost.kind));
  j["bad_move_fraction"] = p.bad_move_fraction ? json(*p.bad_move_fraction) : json(nullptr);
  j["revert_patience"] = p.revert_patience ? json(*p.revert_patience) : json(nullptr);
  j["popcount_filter"] = p.enforce_product_popcount;
  j["literal_metropolis"] = p.literal_metropolis;
  j["freeze_odd"] = p.freeze_odd_digit;
  j["workers"] = cfg.policy.worker_count;
  j["schedule"] = std::string(to_string(cfg.policy.schedule));
  j["order"] = std::string(to_string(cfg.policy.order));
  j["hint"] = cfg.hint_text.empty() ? json(nullptr) : json(cfg.hint_text);
  j["deadline"] = cfg.policy.deadline_seconds ? json(*cfg.policy.deadline_seconds) : json(nullptr);
  return j;
}

inline json tree_json(const FactorTree& t) {
  json j;
  j["value"] = t.value.to_decimal();
  if (t.is_leaf()) {
    j["kind"] = std::string(to_string(t.kind));
  } else {
    j["children"] = json::array();
    for (const auto& c : t.children) j["children"].push_back(tree_json(c));
  }
  return j;
}

inline json decimal_list(const std::vector<BigUint>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(x.to_decimal());
  return out;
}

// Sum of N*_a over every annealing split in the run.
inline std::uint64_t total_steps_used(const Factorization& f) {
  std::uint64_t total = 0;
  for (const auto& s : f.splits) total += s.steps_used;
  return total;
}

// One "run" record. Re-verifies that the leaves multiply back to N.
inline json run_record(const RunConfig& cfg, const Factorization& f) {
  BigUint product{1};
  f.tree.for_each_leaf([&](const FactorTree& leaf) { product = product * leaf.value; });
  if (product != cfg.target) throw std::logic_error("factor tree leaves do not multiply to N");

  json j;
  j["record"] = "run";
  j["N"] = cfg.target.to_decimal();
  j["n"] = cfg.target.bit_length();
  j["mode"] = cfg.policy.semiprime_mode ? "semiprime" : "full";
  j["seed"] = cfg.policy.master_seed;
  j["params"] = params_json(cfg);
  j["complete"] = f.tree.complete();
  j["factors"] = decimal_list(f.tree.leaves(LeafKind::prime));
  j["failed"] = decimal_list(f.tree.leaves(LeafKind::failed));
  j["unsplit"] = decimal_list(f.tree.leaves(LeafKind::unsplit));
  j["tree"] = tree_json(f.tree);
  j["splits"] = json::array();
  for (const auto& s : f.splits) {
    j["splits"].push_back({{"value", s.value.to_decimal()},
                           {"a", s.a.to_decimal()},
                           {"b", s.b.to_decimal()},
                           {"task",
                            {{"a", s.task.a}, {"b", s.task.b}, {"a1", s.task.a_ones}, {"b1", s.task.b_ones},
                             {"index", s.task.index}}},
                           {"steps_used", s.steps_used},
                           {"configurations", s.winner_configurations},
                           {"depth", s.depth}});
  }
  j["steps_used"] = total_steps_used(f);
  j["configurations_tried"] = f.configurations_tried;
  j["timed_out"] = f.timed_out;
  j["wall_time_s"] = f.wall_seconds;
  return j;
}

// Mean and sample standard deviation; std is null below two samples.
inline std::pair<json, json> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {nullptr, nullptr};
  double sum = 0;
  for (const double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, nullptr};
  double ss = 0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

// Summary over "run" records; N*_a and time statistics use successful runs only.
inline json summary_record(const std::vector<json>& runs) {
  std::vector<double> steps;
  std::vector<double> seconds;
  std::vector<double> minutes;
  for (const auto& r : runs) {
    if (!r.at("complete").get<bool>()) continue;
    steps.push_back(static_cast<double>(r.at("steps_used").get<std::uint64_t>()));
    seconds.push_back(r.at("wall_time_s").get<double>());
    minutes.push_back(r.at("wall_time_s").get<double>() / 60.0);
  }
  json j;
  j["record"] = "summary";
  j["N"] = runs.empty() ? json(nullptr) : runs.front().at("N");
  j["repeat"] = runs.size();
  j["successes"] = steps.size();
  j["success_rate"] = runs.empty() ? 0.0 : static_cast<double>(steps.size()) / static_cast<double>(runs.size());
  std::tie(j["steps_used_mean"], j["steps_used_std"]) = mean_std(steps);
  std::tie(j["wall_time_s_mean"], j["wall_time_s_std"]) = mean_std(seconds);
  std::tie(j["wall_time_min_mean"], j["wall_time_min_std"]) = mean_std(minutes);
  return j;
}

inline std::string human_summary(const json& run) {
  std::string s = "N=" + run.at("N").get<std::string>() + " (" + std::to_string(run.at("n").get<std::size_t>()) +
                  " bits): ";
  s += run.at("complete").get<bool>() ? "complete" : "INCOMPLETE";
  s += " factors=[";
  bool first = true;
  for (const auto& f : run.at("factors")) {
    if (!first) s += ", ";
    s += f.get<std::string>();
    first = false;
  }
  s += "]";
  if (!run.at("failed").empty()) s += " failed=" + run.at("failed").dump();
  if (!run.at("unsplit").empty()) s += " unsplit=" + run.at("unsplit").dump();
  s += " steps_used=" + std::to_string(run.at("steps_used").get<std::uint64_t>());
  s += " configurations=" + std::to_string(run.at("configurations_tried").get<std::uint64_t>());
  char buf[64];
  std::snprintf(buf, sizeof buf, " time=%.3fs", run.at("wall_time_s").get<double>());
  s += buf;
  return s;
}

// Runs the factorization `cfg.repeat` times with seeds seed, seed+1, ...
// Writes JSONL to `out` and a human summary to `err`. Returns the process
// exit status: 0 when every run is complete, 1 otherwise.
inline int run_campaign(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<json> runs;
  for (std::uint64_t j = 0; j < cfg.repeat; ++j) {
    RunConfig rc = cfg;
    rc.policy.master_seed = cfg.policy.master_seed + j;
    const Factorization f = factorize(rc.target, rc.policy, rc.params);
    json rec = run_record(rc, f);
    out << rec.dump() << '\n';
    err << human_summary(rec) << '\n';
    runs.push_back(std::move(rec));
  }
  if (cfg.repeat > 1) {
    const json summary = summary_record(runs);
    out << summary.dump() << '\n';
    err << "summary: " << summary.dump() << '\n';
  }
  out.flush();
  for (const auto& r : runs) {
    if (!r.at("complete").get<bool>()) return 1;
  }
  return 0;
}

inline int run_factor(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunConfig single = cfg;
  single.repeat = 1;
  return run_campaign(single, out, err);
}

// Scaling bound and task count for an n-digit target.
inline json scaling_record(std::size_t n, const SearchPolicy& policy, const AnnealParams& params) {
  json j;
  j["record"] = "scaling";
  j["n"] = n;
  j["na"] = params.max_steps;
  j["m"] = params.configs_scale;
  j["estimate"] = scaling_estimate(n, params.max_steps, params.configs_scale).to_decimal();
  j["task_count"] = enumerate_tasks(n, policy).size();
  return j;
}

}  // namespace safactor
