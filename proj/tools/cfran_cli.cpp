// cfran: command line front end for the cell-free finite-blocklength toolkit.
//
// Subcommands map one-to-one onto the harness runners plus two small
// utilities (a standalone RRU grouping run and a rate calculator). Every
// experiment run writes three files under --out:
//   <name>.csv            result table, stable byte layout
//   <name>.json           same table with metadata, machine friendly
//   <name>.manifest.json  resolved spec + hash/seed/version; feeding this
//                         file back via --config reproduces the same table
//
// Exit codes: 0 ok, 1 bad config/arguments, 2 degenerate geometry, 3 anything
// else (numerics, I/O).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cfran/association.hpp"
#include "cfran/channel.hpp"
#include "cfran/errors.hpp"
#include "cfran/fbl.hpp"
#include "cfran/harness.hpp"
#include "cfran/rng.hpp"
#include "cfran/scenario.hpp"

using json = nlohmann::json;
using namespace cfran;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// options shared by the four experiment subcommands and `preset`
struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  int workers = -1;  // -1 = leave the spec's value alone
  bool quiet = false;
};

void add_run_options(CLI::App* cmd, RunOptions& opt, bool with_config) {
  if (with_config) {
    cmd->add_option("--config", opt.config_path, "experiment spec JSON (or a manifest from a previous run)")
        ->required();
  }
  cmd->add_option("--set", opt.overrides,
                  "override a spec field, dotted.path=value (e.g. config.num_ues=30); "
                  "applied after the file loads, before validation");
  cmd->add_option("--out", opt.out_dir, "output directory; all files land under it");
  cmd->add_option("--workers", opt.workers, "worker thread cap (0 = all cores)");
  cmd->add_flag("--quiet", opt.quiet, "suppress the summary line");
}

// a manifest wraps the spec under a "spec" key next to run metadata; unwrap
// so reruns from manifests need no special casing
std::string unwrap_manifest(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  if (doc.is_object() && doc.contains("spec")) return doc["spec"].dump();
  return text;
}

ResultTable dispatch(const std::string& runner, const ExperimentSpec& spec) {
  if (runner == "validate-bounds") return run_bound_validation(spec);
  if (runner == "sweep") return run_se_sweep(spec);
  if (runner == "error-sweep") return run_error_sweep(spec);
  if (runner == "compare-assoc") return run_association_comparison(spec);
  throw ConfigError("unknown runner '" + runner + "'");
}

int run_experiment(const std::string& runner, std::string spec_text, const RunOptions& opt) {
  for (const auto& kv : opt.overrides) spec_text = apply_override(spec_text, kv);

  std::string file_runner;
  ExperimentSpec spec = load_spec(spec_text, &file_runner);
  if (!file_runner.empty() && file_runner != runner) {
    throw ConfigError("spec names runner '" + file_runner + "' but the subcommand is '" +
                      runner + "'");
  }
  if (opt.workers >= 0) spec.workers = opt.workers;

  ResultTable table = dispatch(runner, spec);

  std::filesystem::create_directories(opt.out_dir);
  std::string name = spec.output_path.empty() ? runner : spec.output_path;
  std::string base = (std::filesystem::path(opt.out_dir) / name).string();
  table.write(base);

  json manifest;
  manifest["command"] = runner;
  manifest["config_hash"] = table.config_hash;
  manifest["master_seed"] = table.master_seed;
  manifest["version"] = table.version;
  manifest["spec"] = json::parse(spec_to_json(spec, runner));
  std::ofstream mf(base + ".manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";

  if (!opt.quiet) {
    std::cout << "wrote " << base << ".csv, " << base << ".json, " << base
              << ".manifest.json (" << table.rows.size() << " rows)\n";
  }
  return 0;
}

int cmd_run(const std::string& runner, const RunOptions& opt) {
  return run_experiment(runner, unwrap_manifest(slurp(opt.config_path)), opt);
}

int cmd_preset(const std::string& name, const RunOptions& opt, bool dump) {
  std::string runner = preset_runner(name);
  std::string text = spec_to_json(preset_spec(name), runner);
  if (dump) {
    for (const auto& kv : opt.overrides) text = apply_override(text, kv);
    std::cout << json::parse(text).dump(2) << "\n";
    return 0;
  }
  return run_experiment(runner, text, opt);
}

struct AssociateOptions {
  std::string config_path;
  std::string algorithm = "graphcolor";
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  long long trial = 0;
  bool quiet = false;
};

// one grouping run on one sampled geometry, written out for inspection; uses
// the same per-trial streams as the harness so trial T here matches trial T
// of an experiment with the same scenario config
int cmd_associate(const AssociateOptions& opt) {
  std::string text = slurp(opt.config_path);
  for (const auto& kv : opt.overrides) text = apply_override(text, kv);
  ScenarioConfig config = load_config(text);

  RngStream geometry_stream = derive_stream(config.master_seed, opt.trial, "geometry");
  Geometry geometry = generate_geometry(config, geometry_stream);

  Partition partition;
  double final_delta = 0.0;
  if (opt.algorithm == "graphcolor") {
    GroupingKnobs knobs;
    knobs.tabu = config.tabu;
    knobs.delta_init = config.delta_init;
    knobs.bisect_max_iters = config.bisect_max_iters;
    partition = graph_color_associate(geometry, config.area_side, config.num_edus, knobs,
                                      derive_seed(config.master_seed, opt.trial, "grouping"),
                                      &final_delta);
  } else if (opt.algorithm == "kmeans") {
    partition = kmeans_pp(geometry.rru_positions, config.num_edus, config.area_side,
                          config.kmeans_restarts,
                          derive_seed(config.master_seed, opt.trial, "grouping"));
  } else {
    throw ConfigError("unknown algorithm '" + opt.algorithm + "' (want graphcolor or kmeans)");
  }

  std::filesystem::create_directories(opt.out_dir);
  std::filesystem::path out(opt.out_dir);

  json part;
  part["algorithm"] = opt.algorithm;
  part["config_hash"] = config_hash(config);
  part["master_seed"] = config.master_seed;
  part["trial"] = opt.trial;
  part["num_edus"] = config.num_edus;
  part["group_of"] = partition.group_of;
  part["groups"] = partition.groups;
  if (opt.algorithm == "graphcolor") part["final_delta"] = final_delta;
  std::ofstream pf(out / "partition.json", std::ios::binary);
  pf << part.dump(2) << "\n";

  // edge list of the conflict graph the coloring ran on; kmeans has no
  // distance threshold, so fall back to the configured starting delta
  double graph_delta = opt.algorithm == "graphcolor" ? final_delta : config.delta_init;
  ConflictGraph graph = build_conflict_graph(geometry, graph_delta, config.area_side);
  std::ofstream gf(out / "conflict-graph.csv", std::ios::binary);
  gf << "# delta_fraction=" << format_g(graph.delta) << "\n";
  gf << "rru_a,rru_b\n";
  for (int a = 0; a < graph.nodes(); ++a) {
    for (int b : graph.adj[static_cast<size_t>(a)]) {
      if (a < b) gf << a << "," << b << "\n";
    }
  }

  if (!opt.quiet) {
    std::cout << "wrote " << (out / "partition.json").string() << ", "
              << (out / "conflict-graph.csv").string() << " (" << graph.edge_count()
              << " edges)\n";
  }
  return 0;
}

struct FblCalcOptions {
  std::vector<double> gammas;
  double n = 100.0;
  double eps = 1e-5;
  double target = -1.0;  // <0 = rate mode
  bool bare_dispersion = false;
};

// rate mode prints the achievable sum spectral efficiency for the given
// SINRs; with --target it inverts the approximation and prints the error
// probability at which that sum rate is met
int cmd_fbl_calc(const FblCalcOptions& opt) {
  if (opt.target >= 0.0) {
    double eps = 0.0;
    try {
      eps = solve_error_prob(opt.gammas, opt.n, opt.target, opt.bare_dispersion);
    } catch (const std::domain_error& e) {
      // a target above capacity is a bad request, not an internal failure
      throw ConfigError(e.what());
    }
    std::cout << format_g(eps) << "\n";
    return 0;
  }
  FblParams params;
  params.n = opt.n;
  params.eps = opt.eps;
  params.bare_dispersion = opt.bare_dispersion;
  std::cout << format_g(sum_fbl_rate(opt.gammas, params).rate) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell-free RAN uplink spectral efficiency toolkit (finite blocklength)"};
  app.name("cfran");  // keep --help output independent of the invocation path
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "print help for every subcommand");

  RunOptions vb_opt, sw_opt, es_opt, ca_opt, pr_opt;
  AssociateOptions as_opt;
  FblCalcOptions fb_opt;
  std::string preset_name;
  bool preset_dump = false;

  CLI::App* vb = app.add_subcommand("validate-bounds",
                                    "Monte Carlo vs closed-form SE bound quadruple");
  add_run_options(vb, vb_opt, true);

  CLI::App* sw = app.add_subcommand("sweep", "spectral efficiency sweep over config axes");
  add_run_options(sw, sw_opt, true);

  CLI::App* es = app.add_subcommand("error-sweep",
                                    "error probability at a target SE over config axes");
  add_run_options(es, es_opt, true);

  CLI::App* ca = app.add_subcommand("compare-assoc",
                                    "paired graph-coloring vs k-means grouping comparison");
  add_run_options(ca, ca_opt, true);

  CLI::App* pr = app.add_subcommand("preset", "run a named figure-replication preset");
  pr->add_option("name", preset_name, "preset name, e.g. fig3a (see README for the list)")
      ->required();
  pr->add_flag("--dump", preset_dump, "print the resolved spec JSON instead of running");
  add_run_options(pr, pr_opt, false);

  CLI::App* as = app.add_subcommand("associate",
                                    "group RRUs into EDU clusters for one sampled geometry");
  as->add_option("--config", as_opt.config_path, "scenario config JSON")->required();
  as->add_option("--algorithm", as_opt.algorithm, "graphcolor or kmeans")
      ->check(CLI::IsMember({"graphcolor", "kmeans"}));
  as->add_option("--trial", as_opt.trial, "trial index selecting the geometry draw");
  as->add_option("--set", as_opt.overrides, "override a config field, dotted.path=value");
  as->add_option("--out", as_opt.out_dir, "output directory");
  as->add_flag("--quiet", as_opt.quiet, "suppress the summary line");

  CLI::App* fb = app.add_subcommand("fbl-calc",
                                    "finite-blocklength rate/error calculator");
  fb->add_option("--gamma", fb_opt.gammas, "per-UE SINR values (linear scale)")
      ->required()
      ->expected(1, -1);
  fb->add_option("--n", fb_opt.n, "blocklength in channel uses");
  fb->add_option("--eps", fb_opt.eps, "target error probability");
  fb->add_option("--target", fb_opt.target,
                 "sum SE target; when set, solve for the error probability instead");
  fb->add_flag("--bare-dispersion", fb_opt.bare_dispersion,
               "use the per-UE dispersion without the joint cross term");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (vb->parsed()) return cmd_run("validate-bounds", vb_opt);
    if (sw->parsed()) return cmd_run("sweep", sw_opt);
    if (es->parsed()) return cmd_run("error-sweep", es_opt);
    if (ca->parsed()) return cmd_run("compare-assoc", ca_opt);
    if (pr->parsed()) return cmd_preset(preset_name, pr_opt, preset_dump);
    if (as->parsed()) return cmd_associate(as_opt);
    if (fb->parsed()) return cmd_fbl_calc(fb_opt);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const UnsupportedConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DegenerateGeometry& e) {
    std::cerr << "degenerate geometry: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
