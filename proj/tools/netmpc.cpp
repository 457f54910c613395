#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "netmpc/admissible_set.hpp"
#include "netmpc/config.hpp"
#include "netmpc/simulation.hpp"
#include "netmpc/table_cache.hpp"

namespace {

using namespace netmpc;

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInadmissible = 4;

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::trunc);
  if (!f || !(f << content))
    throw std::runtime_error("cannot write " + path);
}

RunConfig load_or_exit(const std::string& path) {
  try {
    return load_config(path);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    std::exit(kExitBadConfig);
  }
}

SynthesisTables tables_for(const SynthesisParams& sp, const std::string& cache,
                           bool quiet = false) {
  if (!cache.empty()) {
    if (auto hit = try_load_tables(cache, sp)) {
      if (!quiet) std::cout << "cache hit: " << cache << "\n";
      return std::move(*hit);
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  SynthesisTables tables = synthesize(sp);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (!quiet) {
    std::printf("synthesized %zu keys in %.1f s\n", tables.entries.size(),
                secs);
    for (const auto& [key, entry] : tables.entries)
      std::printf("  h_tilde=%d support=0x%x constraints=%d rows\n", key.first,
                  key.second, entry.constraints.system.rows());
  }
  if (!cache.empty()) save_tables(tables, cache);
  return tables;
}

Variant variant_from_name(const std::string& name) {
  if (name == "stochastic") return Variant::Stochastic;
  if (name == "deterministic") return Variant::DeterministicBuffered;
  if (name == "lqr") return Variant::Lqr;
  if (name == "unconstrained") return Variant::UnconstrainedStochastic;
  throw std::invalid_argument("unknown variant: " + name);
}

/// Tables matching the controller variant (the buffered baseline runs on its
/// own single-age synthesis).
SynthesisTables tables_for_variant(const RunConfig& cfg, Variant v,
                                   const std::string& cache) {
  SynthesisParams sp = cfg.synthesis_params();
  if (v == Variant::DeterministicBuffered)
    return tables_for(deterministic_buffered_params(sp),
                      cache.empty() ? cache : cache + ".det", true);
  return tables_for(sp, cache, true);
}

std::string polyhedron_text(const Polyhedron& p) {
  std::ostringstream out;
  out.precision(17);
  out << p.rows() << " " << p.dim() << "\n";
  for (int i = 0; i < p.rows(); ++i) {
    for (int j = 0; j < p.dim(); ++j) out << p.A(i, j) << " ";
    out << p.b(i) << "\n";
  }
  return out.str();
}

int run_traces(const RunConfig& cfg, const std::vector<Variant>& variants,
               const std::string& cache, const std::string& out_prefix,
               bool svg) {
  std::vector<Trace> traces;
  for (Variant v : variants) {
    const SynthesisTables tables = tables_for_variant(cfg, v, cache);
    for (std::uint64_t seed : cfg.experiment.seeds) {
      Trace t = run_closed_loop(tables, cfg.experiment_spec(v, seed));
      std::printf("%s seed=%llu steps=%zu final_cost=%.6g violations=%d%s\n",
                  t.variant.c_str(), static_cast<unsigned long long>(seed),
                  t.steps.size(), t.final_cost(), t.violation_count,
                  t.feasible ? "" : " INFEASIBLE");
      traces.push_back(std::move(t));
    }
  }
  if (!out_prefix.empty()) {
    for (const Trace& t : traces) {
      const std::string base =
          out_prefix + "_" + t.variant + "_" + std::to_string(t.seed);
      write_text(base + ".csv", trace_csv(t));
      if (svg) write_text(base + ".svg", trace_svg(t));
    }
    write_text(out_prefix + "_summary.json", summary_json(traces));
    if (traces.size() > 1)
      write_text(out_prefix + "_compare.csv", compare_csv(traces));
  }
  for (const Trace& t : traces)
    if (!t.feasible) return kExitInfeasible;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked stochastic MPC toolkit"};
  app.require_subcommand(1);

  std::string config_path, cache_path, out_path, variant_name_arg = "stochastic";
  std::uint64_t seed_arg = 0;
  bool svg = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file (JSON)")
        ->required();
  };

  CLI::App* precompute = app.add_subcommand(
      "precompute", "run the offline synthesis and store the tables");
  add_common(precompute);
  precompute->add_option("--out", cache_path, "table cache file")->required();

  CLI::App* admissible = app.add_subcommand(
      "admissible", "compute the admissible initial-state region");
  add_common(admissible);
  admissible->add_option("--out", out_path, "polytope output file");

  CLI::App* simulate =
      app.add_subcommand("simulate", "run one controller variant");
  add_common(simulate);
  simulate->add_option("--variant", variant_name_arg,
                       "stochastic|deterministic|lqr|unconstrained");
  simulate->add_option("--seed", seed_arg, "override the configured seeds");
  simulate->add_option("--cache", cache_path, "table cache file");
  simulate->add_option("--out", out_path, "output file prefix");
  simulate->add_flag("--svg", svg, "also write SVG charts");
  bool seed_given = false;
  simulate->callback([&] { seed_given = simulate->count("--seed") > 0; });

  CLI::App* compare = app.add_subcommand(
      "compare", "run all variants on the configured experiment");
  add_common(compare);
  compare->add_option("--cache", cache_path, "table cache file");
  compare->add_option("--out", out_path, "output file prefix");
  compare->add_flag("--svg", svg, "also write SVG charts");

  CLI::App* qp_cmd = app.add_subcommand(
      "qp", "debug: print the program assembled at the first solvable step");
  add_common(qp_cmd);
  qp_cmd->add_option("--cache", cache_path, "table cache file");
  qp_cmd->add_option("--seed", seed_arg, "realization seed");

  CLI::App* validate =
      app.add_subcommand("validate-config", "parse and cross-check a config");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const RunConfig cfg = load_or_exit(config_path);
      // Round-trip identity check.
      const RunConfig again = parse_config(serialize_config(cfg));
      if (serialize_config(again) != serialize_config(cfg)) {
        std::cerr << "round-trip serialization mismatch\n";
        return kExitBadConfig;
      }
      std::cout << "config ok\n";
      return kExitOk;
    }

    if (precompute->parsed()) {
      const RunConfig cfg = load_or_exit(config_path);
      tables_for(cfg.synthesis_params(), cache_path);
      return kExitOk;
    }

    if (admissible->parsed()) {
      const RunConfig cfg = load_or_exit(config_path);
      const SynthesisParams sp = cfg.synthesis_params();
      const SynthesisTables tables = tables_for(sp, "", true);
      const Polyhedron region =
          admissible_region(sp, tables.aux.terminal.set);
      const bool ok = region.contains(cfg.x0);
      std::printf("rows=%d\nadmissible: %s\n", region.rows(),
                  ok ? "true" : "false");
      if (!out_path.empty()) write_text(out_path, polyhedron_text(region));
      return ok ? kExitOk : kExitInadmissible;
    }

    if (simulate->parsed()) {
      RunConfig cfg = load_or_exit(config_path);
      if (seed_given) cfg.experiment.seeds = {seed_arg};
      return run_traces(cfg, {variant_from_name(variant_name_arg)}, cache_path,
                        out_path, svg);
    }

    if (compare->parsed()) {
      const RunConfig cfg = load_or_exit(config_path);
      return run_traces(cfg,
                        {Variant::Stochastic, Variant::DeterministicBuffered,
                         Variant::Lqr, Variant::UnconstrainedStochastic},
                        cache_path, out_path, svg);
    }

    if (qp_cmd->parsed()) {
      const RunConfig cfg = load_or_exit(config_path);
      const SynthesisTables tables =
          tables_for(cfg.synthesis_params(), cache_path, true);
      ExperimentSpec spec =
          cfg.experiment_spec(Variant::Stochastic, seed_arg);
      spec.horizon = std::min(spec.horizon, cfg.bounds.h_hi + 1);
      const Trace t = run_closed_loop(tables, spec);
      std::printf("steps=%zu feasible=%d\n", t.steps.size(),
                  t.feasible ? 1 : 0);
      return t.feasible ? kExitOk : kExitInfeasible;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
