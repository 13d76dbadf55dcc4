#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vist/cli/commands.hpp"

namespace vist::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Entry point shared by the binary and the tests. args[0] is the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using Command = std::function<int(const RunConfig&, std::ostream&)>;
  const std::vector<std::pair<std::string, std::pair<std::string, Command>>> commands = {
      {"train", {"train a model and write a checkpoint", cmd_train}},
      {"generate", {"write candidate stories for the evaluation split", cmd_generate}},
      {"evaluate", {"score candidates against reference stories", cmd_evaluate}},
      {"synth-data", {"write a synthetic stories file and embeddings", cmd_synth_data}},
      {"serve-ratings", {"run the human rating service", cmd_serve_ratings}},
  };

  CLI::App app{"Visual storytelling: training, generation, evaluation and human ratings", "vist"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--out", out_dir, "output directory (overrides paths.out)");
    subs[name] = sub;
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::Success&) {
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) {
        out << sub->help();
        return kExitOk;
      }
    }
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) err << sub->help();
    }
    return kExitConfig;
  }

  for (const auto& [name, entry] : commands) {
    if (!subs.at(name)->parsed()) continue;
    try {
      auto cfg = load_config(config_path);
      std::optional<fs::path> out_path;
      if (out_dir) out_path = fs::path(*out_dir);
      apply_overrides(cfg, seed, out_path);
      return entry.second(cfg, out);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  return kExitConfig;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace vist::cli
