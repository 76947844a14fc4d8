#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rigiditylab/scenario.hpp"

namespace rl = rigiditylab;

namespace {

struct Options {
  std::string scenario_path;
  std::string output;
  std::string csv;
  int threads = 0;
  unsigned long long seed = 0;
  double tol = 0.0;
  double rank_tol = 0.0;
  double max_spin = 0.0;
  int radius = 0;
  int weight_bound = 0;
  int alpha = 0;
  int probe_size = 0;
};

void add_common_options(CLI::App* cmd, Options& o) {
  cmd->add_option("scenario", o.scenario_path, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", o.output, "Write the JSON report to this file instead of stdout");
  cmd->add_option("--csv", o.csv, "Write the tabular payload as CSV to this file");
  cmd->add_option("--threads", o.threads, "Worker thread count (0 = hardware)");
  cmd->add_option("--seed", o.seed, "Override the scenario seed");
  cmd->add_option("--tol", o.tol, "Override params/tol");
  cmd->add_option("--rank-tol", o.rank_tol, "Override params/rank_tol");
  cmd->add_option("--max-spin", o.max_spin, "Override params/max_spin");
  cmd->add_option("--radius", o.radius, "Override params/radius");
  cmd->add_option("--weight-bound", o.weight_bound, "Override params/weight_bound");
  cmd->add_option("--alpha", o.alpha, "Override params/alpha");
  cmd->add_option("--probe-size", o.probe_size, "Override params/probe_size");
}

int resolve_threads(CLI::App* leaf, const Options& o) {
  if (leaf->count("--threads")) {
    if (o.threads < 0) throw rl::ValidationError("threads", "expected a nonnegative integer");
    return o.threads;
  }
  const char* env = std::getenv("RIGIDITYLAB_THREADS");
  if (!env || *env == '\0') return 0;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0 || v > 4096)
    throw rl::ValidationError("RIGIDITYLAB_THREADS", "expected a nonnegative integer");
  return int(v);
}

rl::Json load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rl::ValidationError("file", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return rl::Json::parse(buf.str());
  } catch (const rl::Json::parse_error& e) {
    throw rl::ValidationError("file", std::string("malformed JSON: ") + e.what());
  }
}

rl::Json& params_object(rl::Json& scenario) {
  if (!scenario.contains("params")) scenario["params"] = rl::Json::object();
  rl::Json& params = scenario["params"];
  if (!params.is_object()) throw rl::ValidationError("params", "expected an object");
  return params;
}

void write_file(const std::string& path, const std::string& field, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rl::ValidationError(field, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw rl::ValidationError(field, "failed writing '" + path + "'");
}

int run_task(CLI::App* leaf, const std::string& task, Options& o) {
  rl::thread_count() = resolve_threads(leaf, o);

  rl::Json scenario = load_scenario(o.scenario_path);
  if (!scenario.is_object()) throw rl::ValidationError("scenario", "expected a JSON object");
  if (scenario.contains("task")) {
    if (!scenario["task"].is_string() || scenario["task"].get<std::string>() != task)
      throw rl::ValidationError("task", "scenario task does not match the '" + task + "' subcommand");
  } else {
    scenario["task"] = task;
  }
  if (leaf->count("--seed")) scenario["seed"] = o.seed;
  if (leaf->count("--tol")) params_object(scenario)["tol"] = o.tol;
  if (leaf->count("--rank-tol")) params_object(scenario)["rank_tol"] = o.rank_tol;
  if (leaf->count("--max-spin")) params_object(scenario)["max_spin"] = o.max_spin;
  if (leaf->count("--radius")) params_object(scenario)["radius"] = o.radius;
  if (leaf->count("--weight-bound")) params_object(scenario)["weight_bound"] = o.weight_bound;
  if (leaf->count("--alpha")) params_object(scenario)["alpha"] = o.alpha;
  if (leaf->count("--probe-size")) params_object(scenario)["probe_size"] = o.probe_size;

  auto start = std::chrono::steady_clock::now();
  rl::Report report = rl::run_scenario(scenario);
  auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);

  std::string text = rl::render_report(report);
  std::string csv_text;
  bool want_csv = leaf->count("--csv") > 0;
  if (want_csv) {
    if (rl::has_table(report.task)) {
      csv_text = rl::render_csv(report);
    } else {
      std::cerr << "warning: task '" << report.task << "' has no tabular payload; --csv skipped\n";
      want_csv = false;
    }
  }

  if (o.output.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(o.output, "output", text);
  }
  if (want_csv) write_file(o.csv, "csv", csv_text);
  std::cerr << report.task << ": completed in " << elapsed.count() << " ms\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cohomological rigidity toolkit for finitely presented group actions"};
  app.require_subcommand(1);
  Options o;

  std::vector<std::pair<CLI::App*, std::string>> leaves;
  auto leaf = [&](CLI::App* parent, const char* name, const char* desc, const std::string& task) {
    CLI::App* cmd = parent->add_subcommand(name, desc);
    add_common_options(cmd, o);
    leaves.emplace_back(cmd, task);
    return cmd;
  };

  leaf(&app, "check", "Verify that a representation satisfies the relators", "check");
  leaf(&app, "cohomology", "Dimensions and ranks of the presentation complex", "cohomology");
  leaf(&app, "split", "Splitting operators and residual of the complex", "split");
  CLI::App* tame = app.add_subcommand("tame", "Graded-norm fits and degree probes");
  tame->require_subcommand(1);
  leaf(tame, "fit", "Fit tame constants to gap data", "tame-fit");
  leaf(tame, "probe", "Estimate the tameness degree of an operator", "tame-probe");
  CLI::App* gap = app.add_subcommand("gap", "Spectral gap estimates");
  gap->require_subcommand(1);
  leaf(gap, "sweep", "Gap bounds across an irreducible family", "gap-sweep");
  leaf(&app, "net", "Word-ball covering radii in SU(2)", "net");
  leaf(&app, "averaging", "Averaging-operator lower bound certificate", "averaging");
  leaf(&app, "torus", "Diophantine gap scan for a torus element", "torus");
  CLI::App* rigidity = app.add_subcommand("rigidity", "Conjugacy solver and deformation families");
  rigidity->require_subcommand(1);
  leaf(rigidity, "solve", "Newton solver for the conjugacy equation", "rigidity-solve");
  leaf(rigidity, "deform", "Sample a centralizer deformation family", "rigidity-deform");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& [cmd, task] : leaves)
      if (cmd->parsed()) return run_task(cmd, task, o);
    std::cerr << "validation error at task: no subcommand selected\n";
    return 2;
  } catch (const rl::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const rl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
