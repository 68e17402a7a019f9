#include "goe_cli/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "goe/agents.hpp"
#include "goe/cmdp.hpp"
#include "goe/config.hpp"
#include "goe/env_server.hpp"
#include "goe/error.hpp"
#include "goe/estimation.hpp"
#include "goe/policies.hpp"
#include "goe/simulator.hpp"

#ifndef GOE_VERSION
#define GOE_VERSION "0.0.0"
#endif

namespace goe::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "goecomm-out";
  std::optional<std::uint64_t> seed;
  std::string axis;
  std::string values;
  std::string agent = "sa";
  std::string role = "sa";
  std::string check_map;
  std::string log_path;
  bool trace = false;
  int verbosity = 0;
};

class Session {
 public:
  Session(const Options& opt, std::ostream& out, std::ostream& err) : opt_(opt), out_(out), err_(err) {}

  SimConfig load() const {
    SimConfig config = load_config(opt_.config_path);
    if (opt_.seed) config.seed = *opt_.seed;
    return config;
  }

  void open_out_dir() const { fs::create_directories(opt_.out_dir); }

  void write_file(const std::string& name, const std::string& format, const std::string& body) {
    const fs::path path = fs::path(opt_.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << body;
    artifacts_.push_back({{"name", name}, {"format", format}, {"version", 1}});
    if (opt_.verbosity > 0) err_ << "wrote " << path.string() << '\n';
  }

  void write_manifest(const std::string& verb, const SimConfig& config) {
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(config);
    const nlohmann::json manifest = {
        {"tool", "goecomm"},       {"version", GOE_VERSION}, {"verb", verb},
        {"config_hash", hash.str()}, {"seed", config.seed},  {"config", to_json(config)},
        {"artifacts", artifacts_},
    };
    const fs::path path = fs::path(opt_.out_dir) / "manifest.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << manifest.dump(2) << '\n';
  }

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  const Options& opt() const { return opt_; }

 private:
  const Options& opt_;
  std::ostream& out_;
  std::ostream& err_;
  nlohmann::json artifacts_ = nlohmann::json::array();
};

AgentRole parse_agent(const std::string& name) {
  try {
    return agent_role_from_string(name);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

struct Solved {
  AgentSolutions fitted;
  std::shared_ptr<const PolicySolution> solution;
};

Solved solve_agent(const SimConfig& config, AgentRole agent) {
  Engine engine(config);
  EstimationLog log;
  run_estimation_horizon(engine, log);
  Solved s{fit_agents(config, log, agent == AgentRole::sa, agent == AgentRole::aa), nullptr};
  s.solution = agent == AgentRole::sa ? s.fitted.sa : s.fitted.aa;
  return s;
}

nlohmann::json lookup_map(const SimConfig& config, AgentRole agent, const PolicySolution& sol) {
  if (agent == AgentRole::sa)
    return sa_lookup_map(sol, SaEncoder(config.source_levels), UsefulnessLevels::source(config.source_levels));
  return aa_lookup_map(sol, AaEncoder(config.received_levels, config.goe.delta_max, config.goe.lateness_cap()),
                       UsefulnessLevels::received(config.received_levels));
}

void print_threshold_report(std::ostream& out, const ThresholdReport& report) {
  for (const auto& axis : report.axes) {
    out << "  axis " << axis.axis << (axis.threshold_structured ? " (threshold-structured)" : " (not threshold-structured)")
        << '\n';
    if (axis.thresholds.size() > 12) continue;
    for (std::size_t k = 0; k < axis.thresholds.size(); ++k) {
      out << "    " << axis.line_labels[k] << ": ";
      if (axis.thresholds[k])
        out << *axis.thresholds[k];
      else
        out << "inf";
      out << '\n';
    }
  }
}

int cmd_solve(Session& s) {
  const SimConfig config = s.load();
  const AgentRole agent = parse_agent(s.opt().agent);
  const Solved solved = solve_agent(config, agent);
  const PolicySolution& sol = *solved.solution;

  if (!s.opt().check_map.empty()) {
    std::ifstream f(s.opt().check_map);
    if (!f) throw ConfigError("cannot open lookup map: " + s.opt().check_map);
    nlohmann::json map;
    try {
      map = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("lookup map is not valid JSON: ") + e.what());
    }
    if (map.value("agent", "") != to_string(agent)) throw ConfigError("lookup map was exported for another agent");
    const auto bad = lookup_map_mismatches(map, sol);
    s.out() << "checked " << map.at("cells").size() << " cells, " << bad.size() << " mismatches\n";
    for (std::size_t c : bad) s.out() << "  mismatch at state " << c << '\n';
    return bad.empty() ? kExitOk : kExitRuntime;
  }

  auto& out = s.out();
  out << "agent " << to_string(agent) << ": " << sol.policy_low.size() << " states\n";
  out << std::setprecision(8) << "mu* = " << sol.multiplier << "\neta = " << sol.mix_prob
      << "\ndeterministic = " << (sol.deterministic() ? "yes" : "no") << "\nbisection steps = "
      << sol.report.bisection_steps << ", value-iteration sweeps = " << sol.report.vi_iterations
      << "\ncost(pi-) = " << sol.report.cost_low << ", cost(pi+) = " << sol.report.cost_high
      << ", mixture cost = " << sol.report.mixture_cost << '\n';

  ThresholdReport report_low;
  ThresholdReport report_high;
  if (agent == AgentRole::sa) {
    const SaEncoder enc(config.source_levels);
    out << "policy (i: E=0 E=1 | pi- / pi+)\n";
    for (std::size_t i = 0; i < config.source_levels; ++i) {
      const std::size_t s0 = enc.encode({i, 0});
      const std::size_t s1 = enc.encode({i, 1});
      out << "  " << std::setw(2) << i + 1 << ": " << sol.policy_low[s0] << ' ' << sol.policy_low[s1] << " / "
          << sol.policy_high[s0] << ' ' << sol.policy_high[s1] << '\n';
    }
    report_low = extract_sa_thresholds(sol.policy_low, enc);
    report_high = extract_sa_thresholds(sol.policy_high, enc);
  } else {
    const AaEncoder enc(config.received_levels, config.goe.delta_max, config.goe.lateness_cap());
    out << "policy (state: pi- / pi+), acting states only\n";
    for (std::size_t st = 0; st < enc.size(); ++st) {
      if (sol.policy_low[st] || sol.policy_high[st])
        out << "  " << enc.label(st) << ": " << sol.policy_low[st] << " / " << sol.policy_high[st] << '\n';
    }
    report_low = extract_aa_thresholds(sol.policy_low, enc);
    report_high = extract_aa_thresholds(sol.policy_high, enc);
  }
  out << "thresholds pi-\n";
  print_threshold_report(out, report_low);
  out << "thresholds pi+\n";
  print_threshold_report(out, report_high);

  s.open_out_dir();
  nlohmann::json doc = to_json(sol);
  doc["agent"] = to_string(agent);
  doc["thresholds_low"] = to_json(report_low);
  doc["thresholds_high"] = to_json(report_high);
  s.write_file("solution_" + std::string(to_string(agent)) + ".json", "goe.policy_solution", doc.dump(2) + "\n");
  s.write_manifest("solve", config);
  return kExitOk;
}

int cmd_export_map(Session& s) {
  const SimConfig config = s.load();
  const AgentRole agent = parse_agent(s.opt().agent);
  const Solved solved = solve_agent(config, agent);
  s.open_out_dir();
  const std::string name = "lookup_map_" + std::string(to_string(agent)) + ".json";
  s.write_file(name, "goe.lookup_map", lookup_map(config, agent, *solved.solution).dump(2) + "\n");
  s.write_manifest("export-map", config);
  s.out() << "wrote " << (fs::path(s.opt().out_dir) / name).string() << '\n';
  return kExitOk;
}

int cmd_simulate(Session& s) {
  const SimConfig config = s.load();
  s.open_out_dir();
  std::ostringstream trace;
  const RunResult result = run(config, s.opt().trace ? &trace : nullptr);
  const Metrics& m = result.metrics;

  std::ostringstream metrics;
  write_metrics_header(metrics);
  write_metrics_row(metrics, m);
  s.write_file("metrics.csv", "goe.metrics_csv", metrics.str());

  std::ostringstream series;
  series << "slot,avg_cumulative_effectiveness\n" << std::setprecision(10);
  for (const auto& [slot, value] : m.effectiveness_series) series << slot << ',' << value << '\n';
  s.write_file("series.csv", "goe.series_csv", series.str());
  s.write_file("estimates.json", "goe.estimated_pmfs", to_json(result.estimates).dump(2) + "\n");
  if (s.opt().trace) s.write_file("trace.csv", "goe.trace_csv", trace.str());
  s.write_manifest("simulate", config);

  auto& out = s.out();
  out << std::setprecision(6) << "policy pair " << m.policy_pair << ", seed " << m.seed << '\n'
      << "avg effectiveness " << m.avg_effectiveness << " (overall " << m.overall_effectiveness << ")\n"
      << "avg GoE " << m.avg_goe << "\ntx rate " << m.tx_rate << ", reception rate " << m.reception_rate
      << ", action rate " << m.action_rate << ", query rate " << m.query_rate << '\n';
  for (const auto& w : m.warnings) s.err() << "warning: " << w << '\n';
  return kExitOk;
}

int cmd_sweep(Session& s) {
  SimConfig config = s.load();
  SweepAxis axis;
  std::vector<double> values;
  try {
    axis = sweep_axis_from_string(s.opt().axis);
    values = parse_values(s.opt().values);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  const auto rows = sweep(config, axis, values);
  std::ostringstream csv;
  write_metrics_header(csv);
  std::size_t failures = 0;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      ++failures;
      s.err() << "run " << row.metrics.policy_pair << " at " << to_string(axis) << "=" << row.metrics.axis_value
              << " seed " << row.metrics.seed << " failed: " << row.error << '\n';
      continue;
    }
    write_metrics_row(csv, row.metrics);
  }
  s.open_out_dir();
  const std::string name = "sweep_" + std::string(to_string(axis)) + ".csv";
  s.write_file(name, "goe.metrics_csv", csv.str());
  s.write_manifest("sweep", config);
  s.out() << "wrote " << rows.size() - failures << " rows to " << (fs::path(s.opt().out_dir) / name).string() << '\n';
  return failures ? kExitRuntime : kExitOk;
}

int cmd_estimate(Session& s) {
  const SimConfig config = s.load();
  const auto source_levels = UsefulnessLevels::source(config.source_levels);
  const auto received_levels = UsefulnessLevels::received(config.received_levels);
  const auto target_levels = UsefulnessLevels::target(config.target_levels);

  EstimationLog log;
  if (!s.opt().log_path.empty()) {
    std::ifstream f(s.opt().log_path);
    if (!f) throw ConfigError("cannot open log: " + s.opt().log_path);
    log = read_log_csv(f, source_levels, received_levels);
  } else {
    Engine engine(config);
    run_estimation_horizon(engine, log);
  }
  const EstimatedPmfs pmfs = estimate_all(log, source_levels, received_levels, target_levels);

  s.open_out_dir();
  if (s.opt().log_path.empty()) {
    std::ostringstream csv;
    write_log_csv(csv, log, source_levels, received_levels);
    s.write_file("estimation_log.csv", "goe.estimation_log_csv", csv.str());
  }
  s.write_file("estimates.json", "goe.estimated_pmfs", to_json(pmfs).dump(2) + "\n");
  s.write_manifest("estimate", config);

  auto& out = s.out();
  out << std::setprecision(5) << "slots " << log.size() << ", Pr(E-ACK=1) " << pmfs.pr_eack[1] << "\nq:";
  for (double q : pmfs.q) out << ' ' << q;
  out << "\ntarget pmf:";
  for (double p : pmfs.target_pmf) out << ' ' << p;
  out << '\n';
  for (const auto& w : pmfs.warnings) s.err() << "warning: " << w << '\n';
  return kExitOk;
}

int cmd_env_serve(Session& s, std::istream& in) {
  const SimConfig config = s.load();
  const AgentRole role = parse_agent(s.opt().role);
  return env_serve(config, role, in, s.out());
}

}  // namespace

std::vector<double> parse_values(const std::string& spec) {
  const auto number = [](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::logic_error&) {
      throw ParameterError("bad number in --values: '" + text + "'");
    }
    if (used != text.size()) throw ParameterError("bad number in --values: '" + text + "'");
    return v;
  };

  std::vector<double> values;
  const auto range = spec.find("..");
  if (range != std::string::npos) {
    const double lo = number(spec.substr(0, range));
    std::string rest = spec.substr(range + 2);
    double step = 1.0;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = number(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const double hi = number(rest);
    if (!(step > 0.0) || hi < lo) throw ParameterError("range in --values must be ascending with a positive step");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) {
      // Round to 12 digits so 0.1-steps print as typed.
      const double v = lo + static_cast<double>(k) * step;
      values.push_back(std::round(v * 1e12) / 1e12);
    }
    return values;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(number(item));
  if (values.empty()) throw ParameterError("--values is empty");
  return values;
}

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Goal-oriented push/pull status-update simulator and CMDP solver", "goecomm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GOE_VERSION);
  Options opt;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Simulation config (JSON)")->required();
    sub->add_option("--out", opt.out_dir, "Output directory");
    sub->add_option("--seed", opt.seed, "Seed override");
    sub->add_flag("-v,--verbose", opt.verbosity, "Verbose output");
  };
  const auto agent_check = CLI::IsMember({"sa", "aa"});

  CLI::App* solve = app.add_subcommand("solve", "Estimate, build, and solve one agent's CMDP");
  common(solve);
  solve->add_option("--agent", opt.agent, "Agent to solve")->check(agent_check);
  solve->add_option("--check-map", opt.check_map, "Verify an exported lookup map against a fresh solve");

  CLI::App* simulate = app.add_subcommand("simulate", "Run the estimation and decision horizons");
  common(simulate);
  simulate->add_flag("--trace", opt.trace, "Also write the per-slot trace");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Repeat the simulation over one parameter axis");
  common(sweep_cmd);
  sweep_cmd->add_option("--axis", opt.axis, "theta_max, goe_target, c_max, tx_rate, query_rate, e_horizon")->required();
  sweep_cmd->add_option("--values", opt.values, "Comma list or a..b[:step]")->required();

  CLI::App* estimate = app.add_subcommand("estimate", "Fit the estimation-horizon pmfs");
  common(estimate);
  estimate->add_option("--log", opt.log_path, "Existing log CSV (slot,v,v_hat,eack)");

  CLI::App* export_map = app.add_subcommand("export-map", "Write the lookup map of a solved agent");
  common(export_map);
  export_map->add_option("--agent", opt.agent, "Agent to export")->check(agent_check);

  CLI::App* serve = app.add_subcommand("env-serve", "Serve one agent's environment over stdio JSON lines");
  common(serve);
  serve->add_option("--role", opt.role, "Agent played by the client")->check(agent_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << GOE_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  Session session(opt, out, err);
  try {
    if (solve->parsed()) return cmd_solve(session);
    if (simulate->parsed()) return cmd_simulate(session);
    if (sweep_cmd->parsed()) return cmd_sweep(session);
    if (estimate->parsed()) return cmd_estimate(session);
    if (export_map->parsed()) return cmd_export_map(session);
    if (serve->parsed()) return cmd_env_serve(session, in);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitConfig;
}

}  // namespace goe::cli
