// treemio: build, solve and verify MIP formulations of tree ensembles.
//
// Exit codes: 0 success, 1 solve not optimal or verification failed,
// 2 usage / input error, 3 constraints requested on an x-family formulation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treemio/treemio.hpp"

namespace {

using namespace treemio;

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnsupported = 3;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TREEMIO_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(std::string("TREEMIO_SEED is not an integer: ") + env);
    }
  }
  return kDefaultSeed;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

FormulationKind kind_arg(const std::string& name) {
  auto k = parse_kind(name);
  if (!k) throw CLI::ValidationError("--kind", "unknown formulation '" + name + "'");
  return *k;
}

std::string kind_list() {
  std::string s;
  for (FormulationKind k : kAllKinds) s += std::string(s.empty() ? "" : "|") + to_string(k);
  return s;
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(12);
  o << v;
  return o.str();
}

// ---------------------------------------------------------------------------

int cmd_build(const std::string& path, const std::string& kind_name, const BuildOptions& opts,
              const std::string& out) {
  FormulationKind kind = kind_arg(kind_name);
  TreeEnsemble ens = parse_ensemble(read_file(path));
  MipModel model = build(kind, ens, opts);
  write_output(out, write_lp(model));
  ModelStats st = model_stats(model);
  std::ostream& log = (out.empty() || out == "-") ? std::cerr : std::cout;
  log << "formulation: " << to_string(kind) << "\n"
      << "constraints: " << st.num_constraints << "\n"
      << "variables: " << st.num_variables << "\n"
      << "binaries: " << st.num_binaries << "\n"
      << "nonzeros: " << st.num_nonzeros << "\n";
  return 0;
}

int cmd_solve(const std::string& path, const std::string& kind_name, const BuildOptions& opts, bool relaxed,
              bool minimize, const std::string& objective, const std::vector<std::string>& constraints,
              double time_limit) {
  FormulationKind kind = kind_arg(kind_name);
  TreeEnsemble ens = parse_ensemble(read_file(path));
  std::vector<FeatureRow> rows;
  for (const std::string& c : constraints) rows.push_back(parse_feature_row(c, ens.num_features));
  MipModel model = build(kind, ens, opts);
  if (!rows.empty()) model = attach_constraints(std::move(model), rows);
  if (!objective.empty()) {
    std::vector<Term> terms;
    for (const auto& [name, c] : parse_linear_expr(objective)) terms.push_back({model.id(name), c});
    model = set_objective(std::move(model), minimize ? ObjSense::Minimize : ObjSense::Maximize, std::move(terms));
  } else if (minimize) {
    model = set_objective(std::move(model), ObjectiveKind::MinY);
  }
  SolverConfig cfg;
  cfg.time_limit_s = time_limit;
  SolveResult r = relaxed ? solve_lp(relax(model), cfg) : solve_mip(model, cfg);
  std::cout << "status: " << to_string(r.status) << "\n";
  if (r.has_solution()) {
    std::cout << "objective: " << fmt(r.objective) << "\n";
    for (std::size_t j : model.with_role(Role::W)) {
      std::cout << model.variable(j).name << ": " << fmt(r.values[j]) << "\n";
    }
    if (relaxed) {
      for (Role role : {Role::Z, Role::X, Role::Arc}) {
        for (std::size_t j : model.with_role(role)) {
          std::cout << model.variable(j).name << ": " << fmt(r.values[j]) << "\n";
        }
      }
    }
  }
  if (relaxed) {
    std::cout << "iterations: " << r.iterations << "\n";
  } else {
    std::cout << "nodes: " << r.node_count << "\n";
    if (std::isfinite(r.best_bound)) std::cout << "best_bound: " << fmt(r.best_bound) << "\n";
  }
  return r.optimal() ? 0 : kExitFail;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, bool json) {
  SuiteResult r = run_suite(suite, seed);
  if (json) {
    nlohmann::json checks = nlohmann::json::array();
    for (const Check& c : r.checks) checks.push_back({{"label", c.label}, {"pass", c.pass}, {"detail", c.detail}});
    std::cout << nlohmann::json{{"suite", r.name}, {"pass", r.pass()}, {"seconds", r.seconds}, {"checks", checks}}.dump(2)
              << "\n";
  } else {
    for (const Check& c : r.checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.label;
      if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
      std::cout << "\n";
    }
    std::cout << r.name << ": " << (r.pass() ? "PASS" : "FAIL") << " in " << fmt(r.seconds) << " s\n";
  }
  return r.pass() ? 0 : kExitFail;
}

std::string gnuplot_script(const std::string& summary_csv) {
  return "# Solve time (geometric mean) by formulation and ensemble size.\n"
         "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set logscale y\n"
         "set xlabel 'trees'\n"
         "set ylabel 'geometric mean solve time (ms)'\n"
         "plot for [k in 'misic bigm union_ext projected facet expset elbow expset_elbow'] '" +
         summary_csv + "' using 2:(strcol(3) eq k ? $7 : 1/0) with linespoints title k\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-integer formulations of decision-tree ensembles"};
  app.require_subcommand(1);

  std::string path, kind_name = "projected", out;
  BuildOptions opts;

  auto* build_cmd = app.add_subcommand("build", "Write the LP file of one formulation and print its size");
  build_cmd->add_option("ensemble", path, "Ensemble JSON file")->required();
  build_cmd->add_option("-k,--kind", kind_name, kind_list())->required();
  build_cmd->add_option("-o,--output", out, "LP file (default stdout)");
  build_cmd->add_option("--big-m", opts.bigm.fixed_m, "Uniform big-M constant (default: per-row tight)");

  bool relaxed = false, minimize = false;
  std::vector<std::string> constraints;
  double time_limit = 0.0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one formulation; the default objective is max y");
  solve_cmd->add_option("ensemble", path, "Ensemble JSON file")->required();
  solve_cmd->add_option("-k,--kind", kind_name, kind_list())->required();
  solve_cmd->add_flag("--relax", relaxed, "Solve the LP relaxation");
  solve_cmd->add_flag("--minimize", minimize, "Minimize instead of maximize");
  std::string objective;
  solve_cmd->add_option("--objective", objective, "Linear objective over model variables (default y)");
  solve_cmd->add_option("-c,--constraint", constraints, "Side constraint over w, e.g. \"w1 + 2*w2 <= 3\"");
  solve_cmd->add_option("--time-limit", time_limit, "Seconds (0: none)");
  solve_cmd->add_option("--big-m", opts.bigm.fixed_m, "Uniform big-M constant (default: per-row tight)");

  std::string suite;
  std::uint64_t seed = 0;
  bool json = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run a verification suite");
  verify_cmd->add_option("suite", suite, "ideal|containment|tu|sharp|lemma2|examples|oracle|gaps|sizes")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kSuiteNames), std::end(kSuiteNames))));
  verify_cmd->add_option("--seed", seed, "Base seed (default TREEMIO_SEED or built-in)");
  verify_cmd->add_flag("--json", json, "JSON report");

  BenchGrid grid;
  std::vector<std::string> bench_kinds;
  std::string summarize_path, summary_out, gnuplot_out;
  auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark grid and write CSV rows");
  bench_cmd->add_option("--d", grid.d, "Feature counts")->delimiter(',');
  bench_cmd->add_option("--T", grid.T, "Tree counts")->delimiter(',');
  bench_cmd->add_option("--depth", grid.depth, "Maximum tree depth");
  bench_cmd->add_option("--seeds", grid.seeds, "Seeds per grid cell");
  bench_cmd->add_option("--samples", grid.samples, "Training rows per instance");
  bench_cmd->add_option("--seed", seed, "Base seed (default TREEMIO_SEED or built-in)");
  bench_cmd->add_option("--kinds", bench_kinds, "Formulations (default all)")->delimiter(',');
  bench_cmd->add_option("--time-limit", grid.time_limit_s, "Seconds per solve");
  bench_cmd->add_option("-o,--output", out, "CSV file (default stdout)");
  bench_cmd->add_option("--summarize", summarize_path, "Summarize an existing bench CSV instead of running");
  bench_cmd->add_option("--summary-output", summary_out, "Summary CSV file (default stdout)");
  bench_cmd->add_option("--gnuplot", gnuplot_out, "Also write a gnuplot script for the summary CSV");

  auto* gen_cmd = app.add_subcommand("gen", "Emit ensemble JSON");
  gen_cmd->require_subcommand(1);
  std::string fixture_name;
  auto* gen_fixture = gen_cmd->add_subcommand("fixture", "Reference fixture by name");
  gen_fixture->add_option("name", fixture_name, "ex1|ex2|ex3|ex4|fig3a|fig3b|elbow_segment")->required();
  gen_fixture->add_option("-o,--output", out, "JSON file (default stdout)");
  int gd = 2, gT = 4, gdepth = 3, gsamples = 32;
  auto* gen_forest = gen_cmd->add_subcommand("forest", "Random forest on noisy triangle data");
  gen_forest->add_option("--d", gd, "Features");
  gen_forest->add_option("--T", gT, "Trees");
  gen_forest->add_option("--depth", gdepth, "Maximum depth");
  gen_forest->add_option("--samples", gsamples, "Training rows");
  gen_forest->add_option("--seed", seed, "Seed (default TREEMIO_SEED or built-in)");
  gen_forest->add_option("-o,--output", out, "JSON file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const bool seed_given = (verify_cmd->parsed() && verify_cmd->count("--seed")) ||
                            (bench_cmd->parsed() && bench_cmd->count("--seed")) ||
                            (gen_forest->parsed() && gen_forest->count("--seed"));
    if (!seed_given) seed = default_seed();

    if (build_cmd->parsed()) return cmd_build(path, kind_name, opts, out);
    if (solve_cmd->parsed()) return cmd_solve(path, kind_name, opts, relaxed, minimize, objective, constraints, time_limit);
    if (verify_cmd->parsed()) return cmd_verify(suite, seed, json);
    if (bench_cmd->parsed()) {
      if (!summarize_path.empty()) {
        std::ifstream in(summarize_path);
        if (!in) throw Error("cannot read '" + summarize_path + "'");
        std::string text = std::string(kSummaryHeader) + "\n";
        for (const BenchSummary& s : summarize(parse_bench_csv(in), grid.time_limit_s)) text += to_csv_line(s) + "\n";
        write_output(summary_out, text);
        if (!gnuplot_out.empty()) write_output(gnuplot_out, gnuplot_script(summary_out.empty() ? "summary.csv" : summary_out));
        return 0;
      }
      if (!bench_kinds.empty()) {
        grid.kinds.clear();
        for (const std::string& k : bench_kinds) grid.kinds.push_back(kind_arg(k));
      }
      grid.base_seed = seed;
      std::ofstream file;
      std::ostream* sink = &std::cout;
      if (!out.empty() && out != "-") {
        file.open(out);
        if (!file) throw Error("cannot write '" + out + "'");
        sink = &file;
      }
      *sink << kBenchHeader << "\n";
      run_bench(grid, [&](const BenchRow& r) { *sink << to_csv_line(r) << "\n" << std::flush; });
      return 0;
    }
    if (gen_fixture->parsed()) {
      write_output(out, to_json_text(reference_fixture(fixture_name).ensemble) + "\n");
      return 0;
    }
    if (gen_forest->parsed()) {
      write_output(out, to_json_text(make_random_forest(gd, gT, gdepth, seed, gsamples)) + "\n");
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedFormulation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
