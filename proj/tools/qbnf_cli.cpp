// qbnf: batch driver for scenario files.
//
// Exit codes: 0 complete, 2 configuration error, 3 numerical failure (the manifest in
// the output directory carries the error record).

#include <algorithm>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "qbnf/error.hpp"
#include "qbnf/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericFailure = 3;

int parse_threads(const std::string& s) {
  if (s == "AUTO" || s == "auto") return std::max(1u, std::thread::hardware_concurrency());
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || n < 1) throw qbnf::ConfigError("--threads: expected AUTO or a positive integer");
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Birkhoff normal forms and resonance lattices"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::string threads = "1";
  long seed = 0;  // accepted for interface stability; every stage is deterministic

  const char* stages[][2] = {
      {"bnf", "compute the normal form and write normal_form.json"},
      {"lattice", "normal form plus the predicted lattice per h"},
      {"direct", "lattice plus the direct spectrum per h"},
      {"compare", "direct plus matching reports and plot data"},
      {"sweep", "compare plus the convergence fit over the h list"},
      {"run", "full pipeline"},
  };
  for (const auto& [name, help] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "scenario file")->required();
    sub->add_option("--out", out_dir, "output directory (default: the scenario's output.directory)");
    sub->add_option("--seed", seed, "ignored; the pipeline is deterministic");
    sub->add_option("--threads", threads, "AUTO or number of worker threads over h");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string stage_name = app.get_subcommands().front()->get_name();
  try {
    const qbnf::ScenarioConfig config = qbnf::load_scenario(config_path);
    const int workers = parse_threads(threads);
    const qbnf::RunOutcome outcome =
        qbnf::run_scenario(config, qbnf::parse_stage(stage_name), out_dir, workers);
    for (const auto& p : outcome.artifacts) std::printf("%s\n", p.string().c_str());
    if (!outcome.complete) {
      std::fprintf(stderr, "qbnf: %s failed (%s): %s\n", stage_name.c_str(), outcome.error_kind.c_str(),
                   outcome.error_message.c_str());
      return outcome.error_kind == "config" ? kConfigError : kNumericFailure;
    }
    return kOk;
  } catch (const qbnf::ConfigError& e) {
    std::fprintf(stderr, "qbnf: configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const qbnf::DimensionError& e) {
    std::fprintf(stderr, "qbnf: configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qbnf: %s\n", e.what());
    return kNumericFailure;
  }
}
