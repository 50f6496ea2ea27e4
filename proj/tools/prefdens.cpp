#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "prefdens/error.hpp"
#include "prefdens/expctl.hpp"

namespace ex = prefdens::expctl;

namespace {

void print_checks(const ex::RunRecord& r) {
  for (const auto& c : r.summary.checks)
    std::printf("%s  %-60s %12.6g %s %g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.op.c_str(),
                c.threshold);
  std::printf("%s: %s (%.1f s, outputs in %s)\n", r.summary.experiment.c_str(), r.passed() ? "passed" : "FAILED",
              r.wall_time_s, r.manifest.out_dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference learning as density estimation: experiment runner"};
  app.require_subcommand(1);

  ex::ExperimentManifest manifest;
  std::string config_file;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("name", manifest.name, "Experiment name")->required();
  run->add_option("--config", config_file, "Config file (key = value lines)");
  run->add_option("--seed", manifest.seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory (default out/<name>)");
  run->add_option("--set", manifest.overrides, "Override key=value (repeatable)");

  std::string param;
  std::vector<std::string> values;
  auto* sw = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sw->add_option("name", manifest.name, "Experiment name")->required();
  sw->add_option("--param", param, "Parameter key")->required();
  sw->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();
  sw->add_option("--config", config_file, "Config file");
  sw->add_option("--seed", manifest.seed, "Master seed (offset by value index)");
  sw->add_option("--out", out_dir, "Output directory (default out/sweep_<name>)");
  sw->add_option("--set", manifest.overrides, "Override key=value (repeatable)");

  std::uint64_t verify_seed = 7;
  std::string verify_out = "out/verify";
  auto* ver = app.add_subcommand("verify", "Run every experiment and print a pass/fail table");
  ver->add_option("--seed", verify_seed, "Master seed");
  ver->add_option("--out", verify_out, "Output directory");

  auto* list = app.add_subcommand("list", "List experiments and their parameters");
  bool list_params = false;
  list->add_flag("--params", list_params, "Show each experiment's parameters and defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_file.empty()) manifest.config_file = config_file;
    if (*run) {
      manifest.out_dir = out_dir.empty() ? "out/" + manifest.name : out_dir;
      const ex::RunRecord r = ex::run(manifest);
      print_checks(r);
      return r.passed() ? 0 : 1;
    }
    if (*sw) {
      manifest.out_dir = out_dir.empty() ? "out/sweep_" + manifest.name : out_dir;
      const auto records = ex::sweep(manifest, param, values);
      bool ok = true;
      for (const auto& r : records) {
        print_checks(r);
        ok = ok && r.passed();
      }
      std::printf("aggregate: %s\n", (manifest.out_dir / ("sweep_" + param + ".csv")).string().c_str());
      return ok ? 0 : 1;
    }
    if (*ver) {
      const ex::VerifyResult v = ex::verify(verify_seed, verify_out);
      std::fputs(ex::format_verify_table(v).c_str(), stdout);
      return v.passed ? 0 : 1;
    }
    if (*list) {
      for (const auto& d : ex::registry()) {
        std::printf("%-24s %s\n", d.name.c_str(), d.artifact.c_str());
        if (list_params)
          for (const auto& p : d.schema()) std::printf("    %-16s = %-14s %s\n", p.key.c_str(), p.default_value.c_str(), p.help.c_str());
      }
      return 0;
    }
  } catch (const prefdens::TrainingAborted& e) {
    std::fprintf(stderr, "training aborted: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
