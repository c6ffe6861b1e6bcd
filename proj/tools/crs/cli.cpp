#include "crs/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crs/allocation.hpp"
#include "crs/bipartite_schemes.hpp"
#include "crs/error.hpp"
#include "crs/evaluation.hpp"
#include "crs/gw_tree.hpp"
#include "crs/io.hpp"

#ifndef CRS_VERSION
#define CRS_VERSION "dev"
#endif

namespace crs::cli {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Globals {
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> trials;
  unsigned threads = 1;
  std::string format = "json";
};

struct SchemeFlags {
  std::string scheme = "rbg";
  std::string step6 = "exact";
  std::size_t degree_cap = kDefaultDegreeCap;
  std::uint64_t calibration_samples = 100'000;
  double calibration_slack = 0.01;
  std::optional<std::uint64_t> calibration_seed;

  SchemeOptions options(const Globals& g) const {
    SchemeOptions o;
    o.degree_cap = degree_cap;
    o.step6 = parse_step6_mode(step6);
    o.calibration_samples = calibration_samples;
    o.calibration_slack = calibration_slack;
    o.calibration_seed = calibration_seed.value_or(g.seed);
    o.threads = g.threads;
    return o;
  }

  json modes() const {
    json m = {{"step6", step6}, {"degree_cap", degree_cap}};
    if (step6 == "calibrated") {
      m["calibration_samples"] = calibration_samples;
      m["calibration_slack"] = calibration_slack;
      m["calibration_seed"] = calibration_seed ? json(*calibration_seed) : json("seed");
    }
    return m;
  }
};

class Run {
 public:
  Run(std::string command, const Globals& g) : command_(std::move(command)), globals_(g), start_(Clock::now()) {}

  json manifest(const std::string& hash, std::uint64_t trials, const std::string& scheme, json modes) const {
    const double wall = std::chrono::duration<double>(Clock::now() - start_).count();
    return {{"command", command_},
            {"instance_hash", hash},
            {"seed", globals_.seed},
            {"trials", trials},
            {"scheme", scheme},
            {"modes", std::move(modes)},
            {"version", CRS_VERSION},
            {"wall_time_s", wall}};
  }

 private:
  std::string command_;
  Globals globals_;
  Clock::time_point start_;
};

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_null()) return "";
  return v.dump();
}

/// Rows of flat objects as CSV with the first row's keys as header; the
/// identifying columns come first.
void write_csv(std::ostream& out, const json& rows) {
  if (rows.empty()) return;
  std::vector<std::string> keys;
  for (const char* lead : {"edge", "x"}) {
    if (rows.front().contains(lead)) keys.push_back(lead);
  }
  for (const auto& [k, v] : rows.front().items()) {
    if (!v.is_structured() && std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << keys[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      out << (i ? "," : "") << (row.contains(keys[i]) ? csv_cell(row[keys[i]]) : "");
    }
    out << "\n";
  }
}

/// JSON report, or in CSV mode the table under `table` (a single row of the
/// report's scalar fields when `table` is empty).
void emit(std::ostream& out, const Globals& g, const json& report, const std::string& table = {}) {
  if (g.format != "csv") {
    out << report.dump(2) << "\n";
    return;
  }
  if (!table.empty()) {
    write_csv(out, report.at(table));
    return;
  }
  json row = json::object();
  for (const auto& [k, v] : report.items()) {
    if (!v.is_structured()) row[k] = v;
  }
  write_csv(out, json::array({row}));
}

json violations_json(const std::vector<Violation>& vs) {
  json out = json::array();
  for (const auto& v : vs) {
    out.push_back({{"kind", v.kind == Violation::Kind::weight_out_of_range ? "weight_out_of_range" : "vertex_overloaded"},
                   {"index", v.index},
                   {"magnitude", v.magnitude},
                   {"message", v.message()}});
  }
  return out;
}

json constants_json() {
  const auto l = solve_lambda();
  const auto c = compute_constants();
  return {{"lambda", l.lambda},
          {"ks_prob", l.ks_prob},
          {"max_match_density", l.max_match_density},
          {"beta", c.beta},
          {"gamma", c.gamma},
          {"simple_factor", c.simple_factor},
          {"two_stage_factor", c.two_stage_factor}};
}

std::vector<EdgeId> parse_edge_list(const std::string& text) {
  std::vector<EdgeId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InputError("--probe: \"" + item + "\" is not an edge id");
    out.push_back(static_cast<EdgeId>(v));
  }
  return out;
}

json error_json(const std::string& kind, const std::exception& e) {
  return {{"error", kind}, {"message", e.what()}};
}

void add_scheme_flags(CLI::App* cmd, SchemeFlags& f, bool with_scheme) {
  if (with_scheme) {
    cmd->add_option("--scheme", f.scheme, "simple, two-stage, rbg or karp-sipser")
        ->check(CLI::IsMember({"simple", "two-stage", "rbg", "karp-sipser", "ks"}));
  }
  cmd->add_option("--step6", f.step6, "Final-stage rule of the rbg scheme")
      ->check(CLI::IsMember({"exact", "calibrated", "uniform"}));
  cmd->add_option("--degree-cap", f.degree_cap, "Largest local ground set");
  cmd->add_option("--calibration-samples", f.calibration_samples, "Samples for calibrated step 6");
  cmd->add_option("--calibration-slack", f.calibration_slack, "Target reduction for calibrated step 6");
  cmd->add_option("--calibration-seed", f.calibration_seed, "Calibration seed (defaults to --seed)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contention resolution schemes for matchings", "crs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--trials", g.trials, "Number of trials");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.set_version_flag("--version", std::string(CRS_VERSION));

  std::function<int()> action;
  std::string instance_path;
  SchemeFlags sf;

  auto* validate_cmd = app.add_subcommand("validate", "Check an instance for weight and load violations");
  validate_cmd->add_option("--instance", instance_path, "Instance JSON")->required();
  validate_cmd->callback([&] {
    action = [&] {
      Run run("validate", g);
      const auto fm = load_instance(instance_path);
      const auto vs = validate(fm);
      double max_load = 0.0;
      for (VertexId v = 0; v < fm.graph().vertex_count(); ++v) max_load = std::max(max_load, fm.load(v));
      json report = {{"vertices", fm.graph().vertex_count()},
                     {"edges", fm.graph().edge_count()},
                     {"bipartite", fm.graph().has_bipartition()},
                     {"triangle_free", is_triangle_free(fm.graph())},
                     {"max_load", max_load},
                     {"valid", vs.empty()},
                     {"violations", violations_json(vs)}};
      report["manifest"] = run.manifest(instance_hash(fm), 0, "", json::object());
      emit(out, g, report, g.format == "csv" ? "violations" : "");
      return vs.empty() ? kOk : kInputError;
    };
  });

  auto* complete = app.add_subcommand("complete", "Pad every vertex load up to 1 with dummy edges");
  complete->add_option("--instance", instance_path, "Instance JSON")->required();
  complete->callback([&] {
    action = [&] {
      Run run("complete", g);
      const auto fm = load_instance(instance_path);
      const auto c = complete_loads(fm);
      json report = {{"original_vertices", c.original_vertex_count},
                     {"original_edges", c.original_edge_count},
                     {"dummy_edges", c.dummy_count()},
                     {"instance", instance_to_json(c.instance)}};
      report["manifest"] = run.manifest(instance_hash(fm), 0, "", json::object());
      emit(out, g, report);
      return kOk;
    };
  });

  auto* sample = app.add_subcommand("sample", "Draw realized edge sets R(x)");
  sample->add_option("--instance", instance_path, "Instance JSON")->required();
  sample->callback([&] {
    action = [&] {
      Run run("sample", g);
      const auto fm = load_instance(instance_path);
      const std::uint64_t trials = g.trials.value_or(1);
      json rows = json::array();
      for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(g.seed, t);
        rows.push_back({{"trial", t}, {"edges", sample_r(fm, rng).ids()}});
      }
      json report = {{"samples", rows}};
      report["manifest"] = run.manifest(instance_hash(fm), trials, "", json::object());
      emit(out, g, report);
      return kOk;
    };
  });

  bool emit_matchings = false;
  auto* run_scheme = app.add_subcommand("run-scheme", "Run a scheme on sampled realized sets");
  run_scheme->add_option("--instance", instance_path, "Instance JSON")->required();
  run_scheme->add_flag("--emit-matchings", emit_matchings, "Include every matching in the report");
  add_scheme_flags(run_scheme, sf, true);
  run_scheme->callback([&] {
    action = [&] {
      Run run("run-scheme", g);
      const auto fm = load_instance(instance_path);
      const auto scheme = make_scheme(sf.scheme, fm, sf.options(g));
      const std::uint64_t trials = g.trials.value_or(1);
      const auto& c = scheme->completion();
      const std::size_t m = c.original_edge_count;
      std::vector<Matching> matchings(trials);
      std::vector<std::vector<std::uint8_t>> present(trials);
      std::vector<std::uint8_t> valid(trials, 1);
      for_each_trial(trials, g.threads, [&](std::uint64_t t, unsigned) {
        RngStream rng(g.seed, t);
        const RealizedSet r = sample_r(c.instance, rng);
        const Matching full = scheme->run_full(r, rng);
        bool ok = is_matching(c.instance.graph().view(), full);
        for (EdgeId e : full) ok = ok && r.contains(e);
        valid[t] = ok;
        present[t].assign(r.flags().begin(), r.flags().begin() + static_cast<std::ptrdiff_t>(m));
        for (EdgeId e : full) {
          if (!c.is_dummy(e)) matchings[t].push_back(e);
        }
      });
      std::vector<std::uint64_t> in_r(m, 0), selected(m, 0);
      std::uint64_t invalid = 0, total = 0;
      for (std::uint64_t t = 0; t < trials; ++t) {
        invalid += !valid[t];
        total += matchings[t].size();
        for (EdgeId e = 0; e < m; ++e) in_r[e] += present[t][e];
        for (EdgeId e : matchings[t]) ++selected[e];
      }
      json edges = json::array();
      for (EdgeId e = 0; e < m; ++e) {
        edges.push_back({{"edge", e},
                         {"x", fm.x(e)},
                         {"present", in_r[e]},
                         {"selected", selected[e]},
                         {"conditional", in_r[e] ? static_cast<double>(selected[e]) / static_cast<double>(in_r[e]) : 0.0}});
      }
      json report = {{"edges", edges},
                     {"mean_size", trials ? static_cast<double>(total) / static_cast<double>(trials) : 0.0},
                     {"invalid_matchings", invalid},
                     {"unknown_subsets", scheme->unknown_subsets()}};
      if (emit_matchings) report["matchings"] = matchings;
      report["manifest"] = run.manifest(instance_hash(fm), trials, scheme->name(), sf.modes());
      emit(out, g, report, "edges");
      return invalid ? kInfeasible : kOk;
    };
  });

  std::string probe;
  auto* evaluate = app.add_subcommand("evaluate", "Planted-edge Monte Carlo balancedness");
  evaluate->add_option("--instance", instance_path, "Instance JSON")->required();
  evaluate->add_option("--probe", probe, "Comma-separated edge ids (default: every edge with x > 0)");
  add_scheme_flags(evaluate, sf, true);
  evaluate->callback([&] {
    action = [&] {
      Run run("evaluate", g);
      const auto fm = load_instance(instance_path);
      const auto scheme = make_scheme(sf.scheme, fm, sf.options(g));
      const auto probes = parse_edge_list(probe);
      const std::uint64_t trials = g.trials.value_or(100'000);
      const auto rep = mc_balancedness(*scheme, trials, g.seed, g.threads, probes);
      json edges = json::array();
      for (const auto& e : rep.edges) {
        edges.push_back({{"edge", e.edge},
                         {"x", e.x},
                         {"trials", e.trials},
                         {"present", e.present},
                         {"selected", e.selected},
                         {"estimate", e.estimate},
                         {"standard_error", e.standard_error},
                         {"ci_low", e.ci.low},
                         {"ci_high", e.ci.high}});
      }
      json report = {{"scheme", rep.scheme},
                     {"seed", rep.seed},
                     {"instance_hash", instance_hash(fm)},
                     {"edges", edges},
                     {"min_estimate", rep.min_estimate},
                     {"min_ci_low", rep.min_ci_low},
                     {"invalid_matchings", rep.invalid_matchings},
                     {"unknown_subsets", rep.unknown_subsets}};
      report["manifest"] = run.manifest(instance_hash(fm), trials, scheme->name(), sf.modes());
      emit(out, g, report, "edges");
      return rep.invalid_matchings ? kInfeasible : kOk;
    };
  });

  auto* exact = app.add_subcommand("exact-evaluate", "Exact balancedness by full enumeration");
  exact->add_option("--instance", instance_path, "Instance JSON")->required();
  add_scheme_flags(exact, sf, true);
  exact->callback([&] {
    action = [&] {
      Run run("exact-evaluate", g);
      const auto fm = load_instance(instance_path);
      const auto scheme = make_scheme(sf.scheme, fm, sf.options(g));
      json edges = json::array();
      double worst = 1.0;
      for (const auto& e : exact_balancedness(*scheme)) {
        edges.push_back({{"edge", e.edge}, {"x", e.x}, {"probability", e.probability}, {"exact", e.conditional}});
        worst = std::min(worst, e.conditional);
      }
      json report = {{"scheme", scheme->name()}, {"edges", edges}, {"min_exact", worst}};
      report["manifest"] = run.manifest(instance_hash(fm), 0, scheme->name(), sf.modes());
      emit(out, g, report, "edges");
      return kOk;
    };
  });

  std::size_t node_cap = kDefaultNodeCap;
  std::size_t probe_n = 0;
  std::size_t probe_edges = 3;
  std::uint64_t probe_trials = 10'000;
  auto* gw = app.add_subcommand("gw-experiment", "Karp-Sipser on the two-rooted Poisson(1) tree process");
  gw->add_option("--node-cap", node_cap, "Truncate trees above this many vertices");
  gw->add_option("--probe-n", probe_n, "Also compare R(x) components on uniform K_{n,n} with the tree process");
  gw->add_option("--probe-edges", probe_edges, "Largest tree size (edges) in the component probe");
  gw->add_option("--probe-trials", probe_trials, "Trials of the component probe");
  gw->callback([&] {
    action = [&] {
      Run run("gw-experiment", g);
      const std::uint64_t trials = g.trials.value_or(1'000'000);
      const auto rep = estimate_root_edge_prob(trials, g.seed, g.threads, node_cap);
      const auto l = solve_lambda();
      json report = {{"lambda", l.lambda},
                     {"target", rep.target},
                     {"estimate", rep.estimate},
                     {"ci_low", rep.ci.low},
                     {"ci_high", rep.ci.high},
                     {"truncated", rep.truncated},
                     {"used", rep.used},
                     {"selected", rep.selected}};
      json modes = {{"node_cap", node_cap}};
      if (probe_n > 0) {
        const auto fm = gen_uniform_knn(probe_n);
        const auto cp = component_distribution_probe(fm, 0, enumerate_marked_trees(probe_edges), probe_trials,
                                                     g.seed, g.threads);
        json rows = json::array();
        for (const auto& r : cp.rows) {
          rows.push_back({{"tree", r.code}, {"gw_probability", r.gw_probability}, {"count", r.count},
                          {"frequency", r.frequency}, {"gap", r.gap}});
        }
        report["component_probe"] = {{"n", probe_n}, {"trials", cp.trials}, {"cyclic", cp.cyclic},
                                      {"larger", cp.larger}, {"max_gap", cp.max_gap}, {"rows", rows}};
        modes["probe_n"] = probe_n;
        modes["probe_edges"] = probe_edges;
        modes["probe_trials"] = probe_trials;
      }
      report["manifest"] = run.manifest("", trials, "karp-sipser", modes);
      emit(out, g, report);
      return kOk;
    };
  });

  std::size_t density_n = 1000;
  bool skip_max = false;
  auto* density = app.add_subcommand("density", "Karp-Sipser and maximum matching sizes on R(x)");
  density->add_option("--n", density_n, "Side of the uniform K_{n,n} (ignored with --instance)");
  density->add_option("--instance", instance_path, "Instance JSON instead of K_{n,n}");
  density->add_flag("--no-max", skip_max, "Skip maximum matchings");
  density->callback([&] {
    action = [&] {
      Run run("density", g);
      const auto fm = instance_path.empty() ? gen_uniform_knn(density_n) : load_instance(instance_path);
      const std::uint64_t trials = g.trials.value_or(50);
      const auto rep = density_experiment(fm, trials, g.seed, g.threads, !skip_max);
      const double per_side = static_cast<double>(fm.graph().vertex_count()) / 2.0;
      json report = {{"vertices", rep.vertices},
                     {"mean_ks", rep.mean_ks},
                     {"ks_per_vertex", rep.ks_per_vertex},
                     {"ks_per_side", rep.mean_ks / per_side},
                     {"target_per_vertex", rep.target_per_vertex},
                     {"target_per_side", 2.0 * rep.target_per_vertex},
                     {"max_computed", rep.max_computed}};
      if (rep.max_computed) {
        report["mean_max"] = rep.mean_max;
        report["max_per_vertex"] = rep.max_per_vertex;
        report["mean_gap"] = rep.mean_gap;
        report["gap_per_side"] = rep.mean_gap / per_side;
      }
      json modes = {{"max_matching", !skip_max}};
      if (instance_path.empty()) modes["n"] = density_n;
      report["manifest"] = run.manifest(instance_path.empty() ? "" : instance_hash(fm), trials, "karp-sipser", modes);
      emit(out, g, report);
      return kOk;
    };
  });

  auto* lem = app.add_subcommand("lem-bound", "Check the one-vertex inequality on random weight vectors");
  lem->callback([&] {
    action = [&] {
      Run run("lem-bound", g);
      const std::uint64_t trials = g.trials.value_or(100'000);
      const auto rep = check_lem_bound(trials, g.seed);
      json report = {{"samples", rep.samples}, {"violations", rep.violations}, {"min_slack", rep.min_slack},
                     {"worst", rep.worst}};
      report["manifest"] = run.manifest("", trials, "", json::object());
      emit(out, g, report);
      return rep.violations ? kInfeasible : kOk;
    };
  });

  std::vector<std::string> matrix_paths;
  std::size_t birkhoff_n = 0, birkhoff_k = 3, birkhoff_count = 5;
  auto* conj = app.add_subcommand("conjecture-probe", "Expected maximum matching of R(A) against the uniform matrix");
  conj->add_option("--matrix", matrix_paths, "CSV matrix file (repeatable)");
  conj->add_option("--birkhoff-n", birkhoff_n, "Generate random n x n Birkhoff combinations instead");
  conj->add_option("--birkhoff-k", birkhoff_k, "Permutation matrices per generated matrix");
  conj->add_option("--birkhoff-count", birkhoff_count, "Generated matrices");
  conj->callback([&] {
    action = [&] {
      Run run("conjecture-probe", g);
      std::vector<DoublyStochasticMatrix> mats;
      std::string hash;
      for (const auto& p : matrix_paths) {
        mats.push_back(load_matrix_csv(p));
        hash += hex64(fnv1a64(json(std::vector<double>(mats.back().entries().begin(), mats.back().entries().end())).dump()));
      }
      if (birkhoff_n > 0) {
        for (std::size_t i = 0; i < birkhoff_count; ++i) {
          RngStream rng = RngStream(g.seed, i).derive(0xb1c0);
          mats.push_back(gen_birkhoff(birkhoff_n, birkhoff_k, rng));
        }
      }
      if (mats.empty()) throw InputError("conjecture-probe needs --matrix or --birkhoff-n");
      const std::uint64_t trials = g.trials.value_or(10'000);
      const auto rep = conjecture_probe(mats, trials, g.seed, g.threads);
      auto row_json = [](const ConjectureRow& r) {
        return json{{"index", r.index}, {"mean", r.mean}, {"standard_error", r.standard_error},
                    {"ci_low", r.ci.low}, {"ci_high", r.ci.high}, {"flagged", r.flagged}};
      };
      json rows = json::array();
      for (const auto& r : rep.rows) rows.push_back(row_json(r));
      json report = {{"n", rep.n}, {"uniform", row_json(rep.uniform)}, {"rows", rows}, {"flags", rep.flags}};
      json modes = json::object();
      if (birkhoff_n > 0) modes = {{"birkhoff_n", birkhoff_n}, {"birkhoff_k", birkhoff_k}, {"birkhoff_count", birkhoff_count}};
      report["manifest"] = run.manifest(hash.empty() ? "" : hex64(fnv1a64(hash)), trials, "max-matching", modes);
      emit(out, g, report, "rows");
      return kOk;
    };
  });

  std::optional<std::uint64_t> roundings;
  auto* allocate = app.add_subcommand("allocate", "Solve the configuration LP and round it item by item");
  allocate->add_option("--instance", instance_path, "Allocation JSON")->required();
  allocate->add_option("--roundings", roundings, "Number of roundings (overrides --trials)");
  add_scheme_flags(allocate, sf, false);
  allocate->callback([&] {
    action = [&] {
      Run run("allocate", g);
      const auto inst = load_allocation(instance_path);
      const auto sol = solve_config_lp(inst);
      const std::uint64_t n = roundings.value_or(g.trials.value_or(10'000));
      const auto rep = evaluate_rounding(inst, sol, n, g.seed, g.threads, sf.options(g));
      json columns = json::array();
      for (std::size_t c = 0; c < inst.cells(); ++c) {
        for (ItemMask b = 0; b < sol.x[c].size(); ++b) {
          if (sol.x[c][b] <= 0.0) continue;
          json bundle = json::array();
          for (std::size_t a = 0; a < inst.item_count(); ++a) {
            if ((b >> a) & 1u) bundle.push_back(inst.items[a]);
          }
          columns.push_back({{"s", c / inst.n}, {"t", c % inst.n}, {"bundle", bundle}, {"x", sol.x[c][b]}});
        }
      }
      json modes = sf.modes();
      json used = json::array();
      for (auto m : rep.modes) used.push_back(to_string(m));
      modes["item_step6"] = used;
      json report = {{"lp_objective", sol.objective},
                     {"lp_max_violation", sol.max_violation()},
                     {"lp_columns", columns},
                     {"roundings", rep.roundings},
                     {"mean_welfare", rep.mean_welfare},
                     {"standard_error", rep.standard_error},
                     {"mean_realized_value", rep.mean_realized_value},
                     {"ratio", rep.ratio},
                     {"unknown_subsets", rep.unknown_subsets}};
      report["manifest"] = run.manifest(allocation_hash(inst), n, "rbg", modes);
      emit(out, g, report);
      return kOk;
    };
  });

  auto* constants = app.add_subcommand("constants", "Print the numeric constants");
  constants->callback([&] {
    action = [&] {
      Run run("constants", g);
      json report = constants_json();
      report["manifest"] = run.manifest("", 0, "", json::object());
      emit(out, g, report);
      return kOk;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    return action();
  } catch (const DegreeCapExceeded& e) {
    json j = error_json("DegreeCapExceeded", e);
    j["vertex"] = e.vertex();
    j["degree"] = e.degree();
    j["cap"] = e.cap();
    err << j.dump() << "\n";
    return kInfeasible;
  } catch (const Infeasible& e) {
    json j = error_json("Infeasible", e);
    j["witness"] = e.witness();
    j["hit_probability"] = e.hit_probability();
    j["target_sum"] = e.target_sum();
    err << j.dump() << "\n";
    return kInfeasible;
  } catch (const CalibrationInsufficient& e) {
    err << error_json("CalibrationInsufficient", e).dump() << "\n";
    return kInfeasible;
  } catch (const AssertionFailure& e) {
    err << error_json("AssertionFailure", e).dump() << "\n";
    return kInfeasible;
  } catch (const InputError& e) {
    err << error_json("InputError", e).dump() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << error_json("Error", e).dump() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << error_json("Unexpected", e).dump() << "\n";
    return kUnexpected;
  }
}

}  // namespace crs::cli
