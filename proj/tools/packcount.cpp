// packcount: seeded counting, sampling and coupling experiments on list packings.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "packcount/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Approximate counting and sampling of list packings"};
  app.set_version_flag("--version", packcount::kVersion);
  app.require_subcommand(1);

  packcount::RunConfig cfg;
  std::uint64_t seed = 0;
  double epsilon = 0;
  std::uint64_t steps = 0;
  int trials = 0;

  for (const auto& name : packcount::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--instance", cfg.instance_path, "instance JSON file")->required();
    sub->add_option("--seed", seed, "64-bit seed (generated and reported if omitted)");
    sub->add_option("--epsilon", epsilon, "accuracy");
    sub->add_option("--failure-prob", cfg.failure_prob, "failure probability")->capture_default_str();
    sub->add_option("--steps", steps, "chain steps / TV horizon / burn-in");
    sub->add_option("--trials", trials, "samples or coupled steps");
    sub->add_option("--out", cfg.out, "write the JSON report here instead of stdout");
    sub->add_option("--constant-c", cfg.constant_c, "regime constant C in q >= C*maxdeg^2")->capture_default_str();
    sub->add_flag("--summary", cfg.summary, "print a one-line summary to stderr");
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--epsilon")) cfg.epsilon = epsilon;
    if (sub->count("--steps")) cfg.steps = steps;
    if (sub->count("--trials")) cfg.trials = trials;
  }

  const auto res = packcount::run(cfg);
  const std::string text = res.report.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << cfg.out << "\n";
      return packcount::exit_code::parse;
    }
    out << text;
  }
  if (cfg.summary || res.exit_code != 0) std::cerr << res.summary << "\n";
  return res.exit_code;
}
