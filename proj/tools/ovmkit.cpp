#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ovmkit/scenario.hpp"

namespace {

using ovmkit::cli::json;

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> levels;
  std::optional<std::size_t> cells;
  std::optional<std::string> format;
  std::optional<double> tol;
  bool timing = false;
};

void add_flags(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* cfg = cmd->add_option("--config", o.config, "scenario JSON file, or inline JSON starting with '{'");
  if (config_required) cfg->required();
  cmd->add_option("--out", o.out, "write the report here (atomically) instead of stdout");
  cmd->add_option("--seed", o.seed, "seed");
  cmd->add_option("--trials", o.trials, "trial count");
  cmd->add_option("--levels", o.levels, "levels for paper_example_13");
  cmd->add_option("--cells", o.cells, "cell count");
  cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--tol", o.tol, "tolerance override");
  cmd->add_flag("--timing", o.timing, "include wall-clock duration (reports are then not reproducible)");
}

int execute(const std::optional<std::string>& kind, const Overrides& o) {
  using namespace ovmkit::cli;
  try {
    json sc = o.config.empty() ? json::object() : load_scenario(o.config);
    if (kind) {
      if (sc.contains("kind") && sc["kind"] != *kind) {
        throw ScenarioError("kind: config says '" + sc["kind"].dump() + "' but the subcommand is '" + *kind + "'");
      }
      sc["kind"] = *kind;
    }
    if (o.out) sc["output"] = *o.out;
    if (o.seed) sc["seed"] = *o.seed;
    if (o.trials) sc["trials"] = *o.trials;
    if (o.levels) sc["levels"] = *o.levels;
    if (o.cells) sc["cells"] = *o.cells;
    if (o.format) sc["format"] = *o.format;
    if (o.tol) sc["tol"] = *o.tol;

    const Report rep = run_scenario(sc, RunOptions{o.timing});
    const std::string text = sc.value("format", "json") == "csv" ? render_csv(rep) : render_json(rep);
    if (sc.contains("output")) {
      write_atomic(sc["output"].get<std::string>(), text);
    } else {
      std::cout << text;
    }
    for (const auto& c : rep.checks) {
      if (!c.pass) std::cerr << "check failed: " << c.name << " (value " << c.value.dump() << ", limit " << c.limit.dump() << ")\n";
    }
    if (rep.error) std::cerr << "error during solve: " << (*rep.error)["message"].get<std::string>() << "\n";
    return rep.exit_code();
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ovmkit: range attainment and integration for operator-valued measures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ovmkit::cli::kLibraryVersion);

  Overrides run_opts;
  add_flags(app.add_subcommand("run", "run the scenario named by --config"), run_opts, true);

  std::vector<Overrides> kind_opts(ovmkit::cli::scenario_kinds().size());
  std::vector<CLI::App*> kind_cmds;
  for (std::size_t i = 0; i < kind_opts.size(); ++i) {
    const std::string& kind = ovmkit::cli::scenario_kinds()[i];
    CLI::App* cmd = app.add_subcommand(kind, "run a " + kind + " scenario (defaults, or --config)");
    add_flags(cmd, kind_opts[i], false);
    kind_cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ovmkit::cli::kExitError;
  }

  if (app.got_subcommand("run")) return execute(std::nullopt, run_opts);
  for (std::size_t i = 0; i < kind_cmds.size(); ++i) {
    if (kind_cmds[i]->parsed()) return execute(ovmkit::cli::scenario_kinds()[i], kind_opts[i]);
  }
  return ovmkit::cli::kExitError;
}
