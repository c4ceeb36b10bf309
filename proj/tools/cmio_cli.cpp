// Command-line front end: simulate, select, validate, bench.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "cmio/bench.hpp"
#include "cmio/cmio.hpp"
#include "cmio/dataset.hpp"
#include "cmio/graph.hpp"
#include "cmio/graph_io.hpp"
#include "cmio/report.hpp"
#include "cmio/rng.hpp"
#include "cmio/sem.hpp"

namespace {

// Usage problems (bad flags, missing inputs, unknown names) exit with 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("no such file: " + path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Writes to `path`, or stdout when it is empty.
template <class F>
void emit(const std::string& path, F write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct SolverFlags {
  std::size_t restarts = 50;
  std::size_t max_iterations = 1000;
  double step_factor = 1.0;
  std::string policy = "near_full";
  std::size_t depth = 2;
  std::size_t all_subsets = 12;
  bool bonferroni = false;
  bool no_selection_adjust = false;
  bool literal_conditioning = false;
  std::size_t max_k = 0;

  void add(CLI::App* app) {
    app->add_option("--restarts", restarts, "Solver starts per k")->capture_default_str();
    app->add_option("--max-iterations", max_iterations, "Solver iteration cap per start")->capture_default_str();
    app->add_option("--step-factor", step_factor, "L as a multiple of the top Gram eigenvalue (>= 1)")
        ->capture_default_str();
    app->add_option("--ci-policy", policy, "literal | near_full")->capture_default_str();
    app->add_option("--ci-depth", depth, "Members dropped from the support for near_full")->capture_default_str();
    app->add_option("--ci-all-subsets", all_subsets,
                    "literal: test every subset while the support has at most this many members")
        ->capture_default_str();
    app->add_flag("--bonferroni", bonferroni, "Bonferroni-correct the tests for each candidate");
    app->add_flag("--no-selection-adjust", no_selection_adjust,
                  "Use the raw p-value of the added covariate given the full previous support");
    app->add_flag("--no-treatment-in-cond", literal_conditioning,
                  "Leave the treatment out of the conditioning sets");
    app->add_option("--max-k", max_k, "Largest k to try (0 = min(p, n - 4))");
  }

  cmio::CmioOptions options(double alpha, std::uint64_t seed) const {
    cmio::CmioOptions o;
    o.alpha = alpha;
    o.solver.restarts = restarts;
    o.solver.max_iterations = max_iterations;
    o.solver.step_factor = step_factor;
    o.solver.seed = seed;
    o.policy = cmio::parse_ci_policy(policy);
    o.complement_depth = depth;
    o.all_subsets_limit = all_subsets;
    o.bonferroni = bonferroni;
    o.selection_adjusted = !no_selection_adjust;
    o.condition_on_treatment = !literal_conditioning;
    if (max_k > 0) o.max_k = max_k;
    return o;
  }
};

cmio::LinearSem load_model(int case_id, const std::string& model_path) {
  if (!model_path.empty()) {
    require_file(model_path);
    return cmio::read_sem_file(model_path);
  }
  if (case_id < 1 || case_id > 3) throw UsageError("--case must be 1, 2 or 3");
  return cmio::case_model(case_id);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal covariate selection by constrained best-subset regression"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample a dataset from a model file or a simulation design");
  int sim_case = 0;
  std::string sim_model, sim_out, sim_hide;
  std::size_t sim_n = 200;
  std::uint64_t sim_seed = cmio::kDefaultSeed;
  auto* sim_case_opt = sim->add_option("--case", sim_case, "Simulation design 1, 2 or 3");
  sim->add_option("--model", sim_model, "Model file (edge list with directives)")->excludes(sim_case_opt);
  sim->add_option("--n", sim_n, "Rows")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--hide", sim_hide, "Comma-separated nodes to drop from the output");
  sim->add_option("--out", sim_out, "Output CSV (stdout when omitted)");

  // select
  auto* sel = app.add_subcommand("select", "Select an adjustment set from data");
  std::string sel_data, sel_t, sel_y, sel_alg = "alg1", sel_out;
  double sel_alpha = 0.05;
  std::uint64_t sel_seed = cmio::kDefaultSeed;
  SolverFlags sel_flags;
  sel->add_option("--data", sel_data, "Dataset CSV")->required();
  sel->add_option("--treatment", sel_t, "Treatment column (default: from header)");
  sel->add_option("--outcome", sel_y, "Outcome column (default: from header)");
  sel->add_option("--alpha", sel_alpha, "Significance level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sel->add_option("--algorithm", sel_alg, "alg1 (no hidden confounders) | alg2 (hidden variables)")
      ->capture_default_str();
  sel->add_option("--seed", sel_seed, "Solver seed")->capture_default_str();
  sel->add_option("--out", sel_out, "Report JSON (stdout when omitted)");
  sel_flags.add(sel);

  // validate
  auto* val = app.add_subcommand("validate", "Check an adjustment set against a graph");
  std::string val_graph, val_t, val_y, val_set;
  val->add_option("--graph", val_graph, "Edge-list file")->required();
  val->add_option("--treatment", val_t, "Treatment node (default: from file)");
  val->add_option("--outcome", val_y, "Outcome node (default: from file)");
  val->add_option("--set", val_set, "Comma-separated adjustment set")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Monte-Carlo study of the selection methods");
  int b_case = 1;
  std::string b_model, b_methods = "cmio", b_out, b_table, b_box;
  std::size_t b_n = 200, b_reps = 100;
  std::uint64_t b_seed = cmio::kDefaultSeed;
  double b_alpha = 0.05;
  bool b_table1 = false, b_timings = false;
  SolverFlags b_flags;
  bench->add_option("--case", b_case, "Simulation design 1, 2 or 3")->capture_default_str();
  bench->add_option("--model", b_model, "Model file instead of a design");
  bench->add_option("--n", b_n, "Rows per replicate")->capture_default_str();
  bench->add_option("--replicates", b_reps, "Replicates")->capture_default_str();
  bench->add_option("--methods", b_methods,
                    "Comma list of cmio, cmio_latent, target_oracle, full_z, t_xy_unconstrained")
      ->capture_default_str();
  bench->add_option("--seed", b_seed, "Random seed")->capture_default_str();
  bench->add_option("--alpha", b_alpha, "Significance level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  bench->add_option("--out", b_out, "Metrics CSV (stdout when omitted)");
  bench->add_option("--table", b_table, "Also write the text table here");
  bench->add_option("--boxplot", b_box, "Also write effect-estimate quartiles here");
  bench->add_flag("--table1", b_table1, "Run the five scenarios of the simulation study (ignores --case/--n)");
  bench->add_flag("--timings", b_timings, "Include seconds per replicate in the CSV");
  b_flags.add(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      if (sim_case == 0 && sim_model.empty()) throw UsageError("simulate needs --case or --model");
      cmio::LinearSem m = load_model(sim_case, sim_model);
      if (!sim_hide.empty()) {
        const auto h = split_list(sim_hide);
        m = cmio::hide(m, cmio::NodeSet(h.begin(), h.end()));
      }
      if (sim_n < 1) throw UsageError("--n must be positive");
      const auto d = cmio::sample(m, sim_n, sim_seed);
      emit(sim_out, [&](std::ostream& o) { cmio::write_csv(o, d); });
    } else if (*sel) {
      require_file(sel_data);
      const auto alg = cmio::parse_algorithm(sel_alg);
      cmio::Dataset d = cmio::read_csv_file(sel_data);
      if (!sel_t.empty() || !sel_y.empty())
        d = d.with_roles(sel_t.empty() ? d.name(d.treatment()) : sel_t, sel_y.empty() ? d.name(d.outcome()) : sel_y);
      const auto rep = cmio::run_selection(d, alg, sel_flags.options(sel_alpha, sel_seed));
      emit(sel_out, [&](std::ostream& o) { o << cmio::report_json(rep); });
    } else if (*val) {
      require_file(val_graph);
      const auto file = cmio::read_edge_list_file(val_graph);
      const std::string x = !val_t.empty() ? val_t : file.treatment.value_or("");
      const std::string y = !val_y.empty() ? val_y : file.outcome.value_or("");
      if (x.empty() || y.empty()) throw UsageError("validate needs --treatment and --outcome");
      const auto dag = file.to_dag();
      const auto items = split_list(val_set);
      const cmio::NodeSet z(items.begin(), items.end());
      for (const auto& v : z) dag.index_of(v);
      const bool ok = cmio::is_valid_adjustment(dag, x, y, z);
      std::cout << (ok ? "valid" : "invalid") << '\n';
      try {
        const auto ev = cmio::evaluate_selection(dag, x, y, z);
        std::cout << "set_difference " << ev.set_difference << "\ncontains_target "
                  << (ev.contains_target ? "true" : "false") << '\n';
      } catch (const std::invalid_argument&) {
        // No parent-set target when other nodes descend from x or y.
      }
    } else if (*bench) {
      std::vector<cmio::Method> methods;
      for (const auto& m : split_list(b_methods)) methods.push_back(cmio::parse_method(m));
      const auto opts = b_flags.options(b_alpha, b_seed);
      std::vector<cmio::BenchReport> reports;
      if (b_table1) {
        const std::pair<int, std::size_t> scenarios[] = {{1, 200}, {1, 1000}, {2, 200}, {2, 1000}, {3, 50}};
        for (std::size_t i = 0; i < std::size(scenarios); ++i) {
          cmio::BenchSpec spec;
          spec.case_id = scenarios[i].first;
          spec.n = scenarios[i].second;
          spec.replicates = b_reps;
          spec.methods = methods;
          spec.options = opts;
          spec.seed = cmio::child_seed(b_seed, i);
          reports.push_back(cmio::run_bench(spec));
        }
      } else {
        cmio::BenchSpec spec;
        if (!b_model.empty()) {
          require_file(b_model);
          spec.model = cmio::read_sem_file(b_model);
        } else if (b_case < 1 || b_case > 3) {
          throw UsageError("--case must be 1, 2 or 3");
        }
        spec.case_id = b_case;
        spec.n = b_n;
        spec.replicates = b_reps;
        spec.methods = methods;
        spec.options = opts;
        spec.seed = b_seed;
        reports.push_back(cmio::run_bench(spec));
      }
      emit(b_out, [&](std::ostream& o) {
        for (std::size_t i = 0; i < reports.size(); ++i) {
          std::ostringstream buf;
          cmio::write_bench_csv(buf, reports[i], b_timings);
          std::string s = buf.str();
          if (i > 0) s = s.substr(s.find('\n') + 1);  // one header only
          o << s;
        }
      });
      if (!b_table.empty()) emit(b_table, [&](std::ostream& o) { cmio::write_bench_table(o, reports); });
      else if (!b_out.empty()) cmio::write_bench_table(std::cerr, reports);
      if (!b_box.empty())
        emit(b_box, [&](std::ostream& o) {
          for (const auto& r : reports) cmio::write_boxplot_csv(o, cmio::boxplot_data(r));
        });
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
