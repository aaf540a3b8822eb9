// Experiment runner: single optimization runs and figure-style sweeps over
// user count, UAV height, surface count or element count. Outputs are
// machine-readable (JSON solution dumps and long-format CSV).

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uavlc/errors.hpp"
#include "uavlc/model.hpp"
#include "uavlc/orchestrator.hpp"
#include "uavlc/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uavlc;

namespace {

Scenario stripped(const Scenario& s) {
  Scenario t = s;
  t.ris_list.resize(2, 0);
  return t;
}

json solution_to_json(const Scenario& s, const RunTrace& tr, const std::string& scheme,
                      std::uint64_t seed) {
  const Solution& sol = tr.final;
  json out;
  out["scheme"] = scheme;
  out["seed"] = seed;
  out["total_power_w"] = tr.objectives.back();
  out["outer_iters"] = tr.outer_iters;
  out["converged"] = tr.converged;

  const FeasibilityReport rep = check_feasibility(s, sol);
  out["feasible"] = rep.feasible(1e-6);
  out["min_slack"] = rep.min_slack;

  json dep = json::array();
  for (int i = 0; i < sol.deployment.cols(); ++i)
    dep.push_back({sol.deployment(0, i), sol.deployment(1, i)});
  out["solution"]["deployment"] = dep;
  json phases = json::array();
  for (int l = 0; l < sol.phases.theta.rows(); ++l) {
    json row = json::array();
    for (int m = 0; m < sol.phases.theta.cols(); ++m)
      row.push_back(sol.phases.theta(l, m));
    phases.push_back(row);
  }
  out["solution"]["phases"] = phases;
  json uassoc = json::array();
  for (int j = 0; j < sol.assoc.user_assoc.cols(); ++j) {
    int owner = 0;
    for (int i = 0; i < sol.assoc.user_assoc.rows(); ++i)
      if (sol.assoc.user_assoc(i, j)) owner = i;
    uassoc.push_back(owner);
  }
  out["solution"]["user_assoc"] = uassoc;
  json rassoc = json::array();
  for (int l = 0; l < sol.assoc.ris_assoc.cols(); ++l) {
    int owner = 0;
    for (int i = 0; i < sol.assoc.ris_assoc.rows(); ++i)
      if (sol.assoc.ris_assoc(i, l)) owner = i;
    rassoc.push_back(owner);
  }
  out["solution"]["ris_assoc"] = rassoc;
  out["solution"]["powers"] =
      std::vector<double>(sol.powers.data(), sol.powers.data() + sol.powers.size());

  out["trace"]["objectives"] = tr.objectives;
  json blocks = json::array();
  for (const auto& pass : tr.block_objectives) {
    json p = json::array();
    for (const auto& [name, value] : pass)
      p.push_back({{"block", name}, {"objective", value}});
    blocks.push_back(p);
  }
  out["trace"]["blocks"] = blocks;
  out["failures"] = tr.failures;
  return out;
}

struct CellResult {
  double power = std::numeric_limits<double>::quiet_NaN();
  double runtime = 0.0;
  int outer_iters = 0;
  bool feasible = false;
  bool solver_failure = false;
};

CellResult run_cell(const Scenario& s, Scheme scheme, std::uint64_t seed) {
  CellResult cell;
  RunConfig cfg;
  cfg.scheme = scheme;
  cfg.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const RunTrace tr = run(s, cfg);
    cell.runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cell.power = tr.objectives.back();
    cell.outer_iters = tr.outer_iters;
    cell.solver_failure = !tr.failures.empty();
    const Scenario eval = scheme == Scheme::NoRis ? stripped(s) : s;
    cell.feasible =
        check_feasibility(eval, tr.final).feasible(1e-6) && std::isfinite(cell.power);
  } catch (const std::exception&) {
    cell.runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return cell;
}

int cmd_run_once(const std::string& scenario_path, const std::string& scheme_arg,
                 std::uint64_t seed, const std::string& out_dir) {
  const Scenario s = load_scenario(scenario_path);
  const Scheme scheme = parse_scheme(scheme_arg);
  fs::create_directories(out_dir);

  RunConfig cfg;
  cfg.scheme = scheme;
  cfg.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  RunTrace tr;
  try {
    tr = run(s, cfg);
  } catch (const NoCoverage& e) {
    std::cerr << "no coverage: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleChannel& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const Scenario eval = scheme == Scheme::NoRis ? stripped(s) : s;
  const json sol = solution_to_json(eval, tr, scheme_name(scheme), seed);
  std::ofstream(fs::path(out_dir) / "solution.json") << sol.dump(2) << "\n";

  std::ofstream csv(fs::path(out_dir) / "summary.csv");
  csv << "scheme,seed,total_power_W,outer_iters,runtime_s,feasible\n";
  const bool feasible = sol["feasible"].get<bool>();
  csv << scheme_name(scheme) << "," << seed << "," << tr.objectives.back() << ","
      << tr.outer_iters << "," << runtime << "," << (feasible ? "true" : "false") << "\n";

  if (!tr.failures.empty()) {
    for (const auto& f : tr.failures) std::cerr << "solver failure: " << f << "\n";
    return 3;
  }
  if (!feasible) {
    std::cerr << "final solution failed the feasibility check\n";
    return 2;
  }
  return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& sweep_var,
              const std::vector<double>& values, const std::vector<std::string>& schemes,
              int seeds, const std::string& out_dir) {
  const Scenario base = load_scenario(scenario_path);
  fs::create_directories(out_dir);

  struct Cell {
    double value;
    Scheme scheme;
    std::string scheme_str;
    std::uint64_t seed;
    CellResult result;
  };
  std::vector<Cell> cells;
  for (double v : values) {
    for (const std::string& sc : schemes) {
      for (int seed = 0; seed < seeds; ++seed) {
        cells.push_back({v, parse_scheme(sc), sc, static_cast<std::uint64_t>(seed), {}});
      }
    }
  }

  // Independent cells; a single writer collects the results afterwards.
  parallel_for(static_cast<int>(cells.size()), [&](int idx) {
    Cell& cell = cells[idx];
    RandomCounts counts;
    Scenario tmpl = base;
    if (sweep_var == "users") {
      counts.users = static_cast<int>(std::lround(cell.value));
    } else if (sweep_var == "height") {
      tmpl.uav_altitude = cell.value;
    } else if (sweep_var == "ris-count") {
      counts.ris = static_cast<int>(std::lround(cell.value));
    } else {
      counts.elements = static_cast<int>(std::lround(cell.value));
    }
    const Scenario s = random_scenario(tmpl, cell.seed, counts);
    cell.result = run_cell(s, cell.scheme, cell.seed);
  });

  std::ofstream csv(fs::path(out_dir) / "sweep.csv");
  csv << "sweep_var,value,scheme,seed,total_power_W,runtime_s,feasible\n";
  for (const Cell& c : cells) {
    csv << sweep_var << "," << c.value << "," << c.scheme_str << "," << c.seed << ","
        << c.result.power << "," << c.result.runtime << ","
        << (c.result.feasible ? "true" : "false") << "\n";
  }

  std::ofstream plot(fs::path(out_dir) / "plotdata.csv");
  plot << "sweep_var,value,scheme,mean_total_power_W,seeds\n";
  for (double v : values) {
    for (const std::string& sc : schemes) {
      double sum = 0.0;
      int n = 0;
      for (const Cell& c : cells) {
        if (c.value == v && c.scheme_str == sc && c.result.feasible) {
          sum += c.result.power;
          ++n;
        }
      }
      plot << sweep_var << "," << v << "," << sc << ","
           << (n ? sum / n : std::numeric_limits<double>::quiet_NaN()) << "," << n << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmit-power minimization for surface-assisted optical UAV networks"};
  app.require_subcommand(1);

  std::string scenario_path, scheme = "scheme1-dual", out_dir = "out";
  std::uint64_t seed = 0;

  CLI::App* once = app.add_subcommand("run-once", "One optimization run");
  once->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  once->add_option("--scheme", scheme, "Optimization scheme");
  once->add_option("--seed", seed, "Random seed");
  once->add_option("--out", out_dir, "Output directory");

  std::string sweep_var;
  std::string values_arg, schemes_arg = "scheme1-dual,scheme2-greedy,no-ris";
  int seeds = 20;
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one scenario parameter");
  sweep->add_option("--scenario", scenario_path, "Base scenario JSON file")->required();
  sweep->add_option("--sweep", sweep_var, "One of: users, height, ris-count, elements")
      ->required()
      ->check(CLI::IsMember({"users", "height", "ris-count", "elements"}));
  sweep->add_option("--values", values_arg, "Comma-separated sweep values")->required();
  sweep->add_option("--schemes", schemes_arg, "Comma-separated scheme names");
  sweep->add_option("--seeds", seeds, "Random drops per cell (seeds 0..n-1)");
  sweep->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  auto split = [](const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t comma = text.find(',', start);
      if (comma == std::string::npos) {
        parts.push_back(text.substr(start));
        break;
      }
      parts.push_back(text.substr(start, comma - start));
      start = comma + 1;
    }
    return parts;
  };

  try {
    if (once->parsed()) {
      return cmd_run_once(scenario_path, scheme, seed, out_dir);
    }
    std::vector<double> values;
    for (const std::string& v : split(values_arg)) values.push_back(std::stod(v));
    return cmd_sweep(scenario_path, sweep_var, values, split(schemes_arg), seeds, out_dir);
  } catch (const SchemaError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
