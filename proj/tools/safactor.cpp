// safactor: factor integers by simulated annealing over binary digits.
//
//   safactor factor <N> [options]      factor N, one JSON line per run
//   safactor scaling <n> [options]     work bound and task count for n digits
//
// Exit status: 0 complete factorization, 1 incomplete, 2 usage error.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "safactor/report.hpp"

namespace {

constexpr int kUsageError = 2;

struct FactorFlags {
  std::string number;
  bool semiprime = false;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  double fc = 0;
  double t0 = 0;
  safactor::Energy k = 0;
  std::uint64_t m = 0;
  std::uint64_t na = 0;
  std::string cost;
  double bad_move_fraction = 0;
  std::uint64_t revert_patience = 0;
  bool no_popcount_filter = false;
  std::string hint;
  std::uint64_t repeat = 1;
  std::string config;
  bool literal_metropolis = false;
  bool freeze_odd = false;
  std::string schedule;
  std::string order;
  double deadline = 0;
};

void add_search_options(CLI::App& cmd, FactorFlags& f) {
  cmd.add_option("--seed", f.seed, "Master seed");
  cmd.add_option("--workers", f.workers, "Worker threads");
  cmd.add_option("--fc", f.fc, "Cooling factor F_c in (0,1)");
  cmd.add_option("--t0", f.t0, "Initial temperature (default: F_c)");
  cmd.add_option("--k", f.k, "Boltzmann-like constant (default: maximum energy)");
  cmd.add_option("--m", f.m, "Per-step budget scale: M * max(a,b) proposals");
  cmd.add_option("--na", f.na, "Annealing steps N_a");
  cmd.add_option("--cost", f.cost, "Digit weight: linear or quadratic");
  cmd.add_option("--bad-move-fraction", f.bad_move_fraction, "Largest allowed relative energy drop");
  cmd.add_option("--revert-patience", f.revert_patience, "Proposals before reverting a bad move");
  cmd.add_flag("--no-popcount-filter", f.no_popcount_filter, "Do not require popcount(A*B) = popcount(N)");
  cmd.add_option("--hint", f.hint, "Restrict cells, e.g. a=29,b=29,a1=15,b1=14");
  cmd.add_option("--config", f.config, "JSON config file (flags override it)");
  cmd.add_flag("--literal-metropolis", f.literal_metropolis, "Accept every downhill move (literal acceptance rule)");
  cmd.add_flag("--freeze-odd", f.freeze_odd, "Pin the lowest digit of both factors for odd N");
  cmd.add_option("--schedule", f.schedule, "interleaved or sequential");
  cmd.add_option("--order", f.order, "heuristic or lexicographic");
  cmd.add_option("--deadline", f.deadline, "Wall-clock cap per run, seconds");
}

// Defaults, then the config file, then explicitly given flags.
safactor::RunConfig build_config(const CLI::App& cmd, const FactorFlags& f) {
  safactor::RunConfig cfg;
  if (!f.config.empty()) safactor::apply_config_json(cfg, safactor::load_config_file(f.config));
  auto given = [&](const char* name) {
    const CLI::Option* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--semiprime")) cfg.policy.semiprime_mode = true;
  if (given("--seed")) cfg.policy.master_seed = f.seed;
  if (given("--workers")) cfg.policy.worker_count = f.workers;
  if (given("--fc")) cfg.params.cooling_factor = f.fc;
  if (given("--t0")) cfg.params.initial_temperature = f.t0;
  if (given("--k")) cfg.params.boltzmann_k = f.k;
  if (given("--m")) cfg.params.configs_scale = f.m;
  if (given("--na")) cfg.params.max_steps = f.na;
  if (given("--cost")) cfg.params.cost = safactor::CostFunction{safactor::parse_cost_kind(f.cost)};
  if (given("--bad-move-fraction")) cfg.params.bad_move_fraction = f.bad_move_fraction;
  if (given("--revert-patience")) cfg.params.revert_patience = f.revert_patience;
  if (given("--no-popcount-filter")) cfg.params.enforce_product_popcount = false;
  if (given("--hint")) cfg.hint_text = f.hint;
  if (given("--repeat")) cfg.repeat = f.repeat;
  if (given("--literal-metropolis")) cfg.params.literal_metropolis = true;
  if (given("--freeze-odd")) cfg.params.freeze_odd_digit = true;
  if (given("--schedule")) cfg.policy.schedule = safactor::parse_schedule(f.schedule);
  if (given("--order")) cfg.policy.order = safactor::parse_order(f.order);
  if (given("--deadline")) cfg.policy.deadline_seconds = f.deadline;
  if (!f.number.empty()) {
    cfg.target_text = f.number;
    cfg.target = safactor::parse_target(f.number);
  }
  safactor::validate_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integer factorization by simulated annealing"};
  app.require_subcommand(1);

  FactorFlags factor_flags;
  auto* factor = app.add_subcommand("factor", "Factor N and emit JSON lines");
  factor->add_option("N", factor_flags.number, "Number to factor (decimal)")->required();
  factor->add_flag("--semiprime", factor_flags.semiprime, "Stop after the first split");
  factor->add_option("--repeat", factor_flags.repeat, "Independent runs with seeds seed, seed+1, ...");
  add_search_options(*factor, factor_flags);

  FactorFlags scaling_flags;
  std::size_t digits = 0;
  auto* scaling = app.add_subcommand("scaling", "Print the work bound and cell count for n-digit targets");
  scaling->add_option("n", digits, "Binary digit count of N")->required();
  add_search_options(*scaling, scaling_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (*factor) {
      const safactor::RunConfig cfg = build_config(*factor, factor_flags);
      return safactor::run_campaign(cfg, std::cout, std::cerr);
    }
    const safactor::RunConfig cfg = build_config(*scaling, scaling_flags);
    if (digits < 2) throw std::invalid_argument("n must be >= 2");
    std::cout << safactor::scaling_record(digits, cfg.policy, cfg.params).dump() << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad config value: " << e.what() << '\n';
    return kUsageError;
  }
}
