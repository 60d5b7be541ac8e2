#include <CLI11.hpp>

#include <iostream>
#include <json.hpp>

#include "bootrl/error.hpp"
#include "bootrl/harness.hpp"

namespace {

void print_error(const std::string& command, const char* kind, const std::string& message) {
  nlohmann::json record{{"error", kind}, {"command", command}, {"message", message}};
  std::cerr << record.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bootrl: tabular RL from generated interaction samples"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> study;
  std::vector<int> variants;
  std::optional<std::size_t> n_per_action;
  std::optional<double> temperature;
  std::optional<int> few_shot_k;
  std::optional<std::string> style, length, endpoint, model, dir;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "Run config file")->required();
    cmd->add_option("--seed", seed, "Seed for every stochastic step");
    cmd->add_option("--study", study, "Bundled study number or study spec path");
    cmd->add_option("--variants", variants, "Prompt variants (1..10)")->delimiter(',');
    cmd->add_option("--n-per-action", n_per_action, "Generated samples per variant and action cluster");
    cmd->add_option("--temperature", temperature, "Sampling temperature");
    cmd->add_option("--few-shot-k", few_shot_k, "Real same-action examples per prompt");
    cmd->add_option("--style", style, "plain or cot");
    cmd->add_option("--length", length, "base or extensive");
    cmd->add_option("--endpoint", endpoint, "mock or http");
    cmd->add_option("--model", model, "Model name sent to the endpoint");
    cmd->add_option("--dir", dir, "Run directory");
  };

  std::string input, source = "real", output;
  auto* ingest = app.add_subcommand("ingest", "Import real or human samples from a CSV/TSV file");
  add_common(ingest);
  ingest->add_option("input", input, "Delimited sample file")->required();
  ingest->add_option("--source", source, "real or human")->check(CLI::IsMember({"real", "human"}));
  auto* exp = app.add_subcommand("export", "Write a sample store as CSV");
  add_common(exp);
  exp->add_option("output", output, "Destination file")->required();
  exp->add_option("--source", source, "real, human or generated")
      ->check(CLI::IsMember({"real", "human", "generated"}));

  std::vector<CLI::App*> plain;
  for (const char* name : {"generate", "estimate", "solve", "simulate", "sweep", "report", "pipeline"}) {
    const char* help = "";
    const std::string n = name;
    if (n == "generate") help = "Run (or resume) a sample-generation campaign";
    if (n == "estimate") help = "Estimate dynamics for the truth, human and generated samples";
    if (n == "solve") help = "Compute optimal, worst, random, no-learned-dynamics and learned policies";
    if (n == "simulate") help = "Simulate every policy against the truth";
    if (n == "sweep") help = "L1 accuracy of every source against the truth over the n grid";
    if (n == "report") help = "Write the tabular reports";
    if (n == "pipeline") help = "generate, estimate, solve, simulate, sweep and report";
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd);
    plain.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    bootrl::RunConfig cfg = bootrl::load_run_config(config_path);
    bootrl::Overrides o;
    o.seed = seed;
    o.study = study;
    if (!variants.empty()) o.variants = variants;
    o.n_per_action = n_per_action;
    o.temperature = temperature;
    o.few_shot_k = few_shot_k;
    if (style) o.style = bootrl::parse_prompt_style(*style);
    if (length) o.length = bootrl::parse_prompt_length(*length);
    o.endpoint = endpoint;
    o.model = model;
    if (dir) o.dir = std::filesystem::path(*dir);
    bootrl::apply_overrides(cfg, o);
    bootrl::Run run(cfg);

    if (command == "ingest") run.ingest(input, bootrl::parse_sample_source(source));
    else if (command == "export")
      run.export_store(source == "generated" ? bootrl::SampleSource::llm : bootrl::parse_sample_source(source), output);
    else if (command == "generate") {
      const auto stats = run.generate();
      for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "generated " << stats.generated << " samples (" << stats.already_present
                << " already present, " << stats.failed << " failed slots)\n";
    } else if (command == "estimate") run.estimate();
    else if (command == "solve") run.solve();
    else if (command == "simulate") run.simulate();
    else if (command == "sweep") run.sweep();
    else if (command == "report") run.report();
    else if (command == "pipeline") run.pipeline();
  } catch (const bootrl::Error& e) {
    print_error(command, bootrl::to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(command, "internal", e.what());
    return 1;
  }
  return 0;
}
