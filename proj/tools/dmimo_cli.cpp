// Command-line driver: scenario validation, policy training, evaluation,
// and parameter sweeps with reproducible seeds and CSV output.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmimo/harness.hpp"
#include "dmimo/policy.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/scenario.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::string scheme = "all";
  std::string out_dir = ".";
  int frames = 5000;
  int train_frames = 2000;
  std::uint64_t seed = 1;
  int workers = 1;
  bool strict_deterministic = false;
  std::string sweep_param;
  std::string sweep_values;
  std::vector<std::string> policy_paths;
  dmimo::AscentConfig ascent;
};

std::vector<dmimo::Scheme> selected_schemes(const std::string& scheme) {
  if (scheme == "all")
    return {dmimo::Scheme::BdPt, dmimo::Scheme::Tdma, dmimo::Scheme::PtOnly};
  return {dmimo::scheme_from_name(scheme)};
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty sweep value list");
  return out;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << body;
}

std::string stamp_line(const dmimo::Scenario& s, const Options& opt) {
  std::ostringstream line;
  line << "# config_hash=" << dmimo::scenario_hash(s) << " seed=" << opt.seed
       << " schemes=" << opt.scheme << " version=" << kVersion << "\n";
  return line.str();
}

void write_manifest(const std::string& path, const dmimo::Scenario& s,
                    const Options& opt, const std::string& command) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = dmimo::scenario_hash(s);
  j["seed"] = opt.seed;
  j["schemes"] = opt.scheme;
  j["version"] = kVersion;
  write_text(path, j.dump(2) + "\n");
}

int cmd_validate(const Options& opt) {
  const dmimo::Scenario s = dmimo::load_scenario(opt.config_path);
  const dmimo::ScenarioStats stats =
      dmimo::compute_scenario_stats(s, opt.ascent.cmax_frames);
  std::cout << "scenario: " << opt.config_path << "\n"
            << "hash: " << dmimo::scenario_hash(s) << "\n"
            << "base stations: " << s.num_bs() << ", users: " << s.num_users()
            << "\n";
  for (int n = 0; n < s.num_users(); ++n) {
    std::cout << "user " << n << ": theta=" << stats.theta[n]
              << " /nat, load=" << stats.cbar[n]
              << " nats/frame, C_max=" << stats.cmax[n]
              << " nats/frame, fraction=" << stats.priority.fractions[n] << "\n";
  }
  std::cout << "priority order:";
  for (int u : stats.priority.order) std::cout << " " << u;
  std::cout << "\n";
  return kExitOk;
}

int cmd_train(const Options& opt) {
  const dmimo::Scenario s = dmimo::load_scenario(opt.config_path);
  const dmimo::ScenarioStats stats =
      dmimo::compute_scenario_stats(s, opt.ascent.cmax_frames);
  bool any_infeasible = false;
  for (dmimo::Scheme scheme : selected_schemes(opt.scheme)) {
    std::vector<std::string> log;
    const dmimo::DualState policy = dmimo::train_dual(
        s, stats, scheme, opt.ascent, dmimo::mix_seed(opt.seed, 1), &log);
    const std::string tag = dmimo::scheme_name(scheme);
    dmimo::save_policy(opt.out_dir + "/policy_" + tag + ".json", policy);

    std::ostringstream csv;
    csv << stamp_line(s, opt) << "iteration,max_slack";
    for (int n = 1; n <= s.num_users(); ++n) csv << ",lambda_" << n;
    csv << "\n";
    for (const std::string& line : log) csv << line << "\n";
    write_text(opt.out_dir + "/convergence_" + tag + ".csv", csv.str());

    std::cout << tag << ": "
              << (policy.status == dmimo::TrainStatus::Converged ? "converged"
                  : policy.status == dmimo::TrainStatus::Infeasible
                      ? "infeasible"
                      : "iteration limit")
              << " after " << policy.iterations
              << " iterations, max binding slack " << policy.max_binding_slack
              << "\n";
    if (!policy.feasible()) any_infeasible = true;
  }
  write_manifest(opt.out_dir + "/train_manifest.json", s, opt, "train");
  return any_infeasible ? kExitInfeasible : kExitOk;
}

int cmd_evaluate(const Options& opt) {
  const dmimo::Scenario s = dmimo::load_scenario(opt.config_path);
  const dmimo::ScenarioStats stats =
      dmimo::compute_scenario_stats(s, opt.ascent.cmax_frames);
  const std::string hash = dmimo::scenario_hash(s);

  std::vector<std::string> paths = opt.policy_paths;
  if (paths.empty())
    for (dmimo::Scheme scheme : selected_schemes(opt.scheme))
      paths.push_back(opt.out_dir + "/policy_" + dmimo::scheme_name(scheme) +
                      ".json");

  dmimo::SimOptions sim;
  sim.workers = opt.strict_deterministic ? 1 : opt.workers;

  std::ostringstream csv;
  csv << stamp_line(s, opt) << "scheme,L_bar,L_bar_se,area,area_se";
  for (int n = 1; n <= s.num_users(); ++n) csv << ",slack_" << n;
  for (int n = 1; n <= s.num_users(); ++n) csv << ",mean_rate_" << n;
  csv << ",feasible\n";
  csv.precision(10);

  for (const std::string& path : paths) {
    const dmimo::DualState policy = dmimo::load_policy(path);
    if (policy.scenario_hash != hash)
      throw std::invalid_argument("policy '" + path +
                                  "' was trained on a different scenario (hash " +
                                  policy.scenario_hash + " != " + hash + ")");
    const dmimo::Metrics m = dmimo::run_simulation(
        s, stats, policy, opt.frames, dmimo::mix_seed(opt.seed, 2), sim);
    csv << dmimo::scheme_name(policy.scheme) << "," << m.avg_bs_usage << ","
        << m.bs_usage_se << "," << m.avg_area << "," << m.area_se;
    for (double v : m.per_user_slack) csv << "," << v;
    for (double v : m.per_user_mean_rate) csv << "," << v;
    csv << "," << (policy.feasible() ? 1 : 0) << "\n";
  }
  write_text(opt.out_dir + "/metrics.csv", csv.str());
  std::cout << csv.str();
  write_manifest(opt.out_dir + "/evaluate_manifest.json", s, opt, "evaluate");
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  if (opt.sweep_param.empty() || opt.sweep_values.empty())
    throw std::invalid_argument("sweep requires --sweep-param and --sweep-values");
  const dmimo::Scenario s = dmimo::load_scenario(opt.config_path);
  const std::vector<double> values = parse_values(opt.sweep_values);

  dmimo::SimOptions sim;
  sim.workers = opt.strict_deterministic ? 1 : opt.workers;

  const std::vector<dmimo::SweepRow> rows =
      dmimo::sweep(s, selected_schemes(opt.scheme), opt.sweep_param, values,
                   opt.ascent, opt.seed, opt.frames, sim);
  const std::string body =
      stamp_line(s, opt) + dmimo::sweep_csv(rows, s.num_users());
  write_text(opt.out_dir + "/sweep.csv", body);
  std::cout << body;
  write_manifest(opt.out_dir + "/sweep_manifest.json", s, opt, "sweep");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed MIMO base-station selection simulator"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "scenario config file (JSON)")
        ->required();
    cmd->add_option("--scheme", opt.scheme,
                    "bdpt | tdma | ptonly | all (default all)");
    cmd->add_option("--frames", opt.frames, "evaluation frames");
    cmd->add_option("--train-frames", opt.ascent.training_frames,
                    "training frames per ascent iteration");
    cmd->add_option("--cmax-frames", opt.ascent.cmax_frames,
                    "Monte-Carlo frames for the C_max estimate");
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--workers", opt.workers, "evaluation worker threads");
    cmd->add_flag("--strict-deterministic", opt.strict_deterministic,
                  "force fixed-order serial reduction");
    cmd->add_option("--step0", opt.ascent.step0, "dual ascent base step size");
    cmd->add_option("--tolerance", opt.ascent.tolerance,
                    "dual ascent slack tolerance");
    cmd->add_option("--max-iterations", opt.ascent.max_iterations,
                    "dual ascent iteration cap");
    cmd->add_option("--lambda-cap", opt.ascent.lambda_cap,
                    "multiplier divergence cap");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
  CLI::App* train = app.add_subcommand("train", "train dual multipliers");
  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate trained policies");
  CLI::App* sweep = app.add_subcommand("sweep", "train + evaluate over a grid");
  for (CLI::App* cmd : {validate, train, evaluate, sweep}) add_common(cmd);
  evaluate->add_option("--policy", opt.policy_paths,
                       "policy file(s); default <out>/policy_<scheme>.json");
  sweep->add_option("--sweep-param", opt.sweep_param, "load | kappa");
  sweep->add_option("--sweep-values", opt.sweep_values,
                    "comma-separated grid values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(opt);
    if (app.got_subcommand(train)) return cmd_train(opt);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(opt);
    if (app.got_subcommand(sweep)) return cmd_sweep(opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical/internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
