// Copyright 2026 The qtele Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "qtele/cli.hpp"

namespace {

using qtele::cli::Command;
using qtele::cli::Format;
using qtele::cli::RunConfig;

struct RawFlags {
  std::uint64_t seed = qtele::cli::kDefaultSeed;
  std::size_t trials = 100;
  std::string format = "text";
  std::string out;
  std::string mode = "controlled";
  std::string policy = "assume-zero";
  std::string input_a;
  std::string input_b;
  std::string outcome;
  std::string corrupt;
};

void add_common(CLI::App* sub, RawFlags& flags) {
  sub->add_option("--seed", flags.seed, "64-bit RNG seed (overrides $QTELE_SEED)");
  sub->add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
  sub->add_option("--out", flags.out, "Write output to this path instead of stdout");
}

void add_session(CLI::App* sub, RawFlags& flags) {
  sub->add_option("--mode", flags.mode, "Charlie discloses his bit or not")
      ->check(CLI::IsMember({"controlled", "withheld"}));
  sub->add_option("--withheld-policy", flags.policy, "Receiver guess for a withheld control bit")
      ->check(CLI::IsMember({"assume-zero", "random"}));
  sub->add_option("--input-a", flags.input_a, "Alice's qubit as c0re,c0im,c1re,c1im (random if omitted)");
  sub->add_option("--input-b", flags.input_b, "Bob's qubit as c0re,c0im,c1re,c1im (random if omitted)");
  sub->add_option("--outcome", flags.outcome, "Force the measurement outcome i,j,k");
}

RunConfig to_config(Command command, const RawFlags& flags, bool seed_given) {
  RunConfig config;
  config.command = command;
  config.seed = flags.seed;
  if (!seed_given) {
    if (const char* env = std::getenv(std::string(qtele::cli::kSeedEnv).c_str())) {
      try {
        config.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw qtele::cli::ConfigError(std::string(qtele::cli::kSeedEnv) + " is not an unsigned integer");
      }
    }
  }
  config.trials = flags.trials;
  static const std::map<std::string, Format> formats{{"text", Format::Text}, {"json", Format::Json}, {"csv", Format::Csv}};
  config.format = formats.at(flags.format);
  config.out_path = flags.out;
  config.mode = flags.mode == "withheld" ? qtele::SessionMode::ControlWithheld : qtele::SessionMode::Controlled;
  config.policy = flags.policy == "random" ? qtele::WithheldPolicy::RandomGuess : qtele::WithheldPolicy::AssumeZero;
  if (!flags.input_a.empty()) config.input_a = qtele::cli::parse_input(flags.input_a, qtele::Party::Alice);
  if (!flags.input_b.empty()) config.input_b = qtele::cli::parse_input(flags.input_b, qtele::Party::Bob);
  if (!flags.outcome.empty()) config.outcome = qtele::cli::parse_outcome(flags.outcome);
  if (!flags.corrupt.empty()) config.corrupt_entry = qtele::cli::parse_outcome(flags.corrupt);
  qtele::cli::validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bidirectional controlled teleportation over the five-qubit Brown channel"};
  app.require_subcommand(1);
  RawFlags flags;

  auto* verify = app.add_subcommand("verify", "Run every end-to-end check; exit 0 iff all pass");
  add_common(verify, flags);
  verify->add_option("--trials", flags.trials, "Random input pairs per sweep");
  verify->add_option("--corrupt-entry", flags.corrupt, "Test hook: corrupt the B1 recovery of entry i,j,k")
      ->group("");

  auto* table = app.add_subcommand("table", "Emit the canonical correction table");
  add_common(table, flags);

  auto* run = app.add_subcommand("run", "Run one three-party session and print its transcript");
  add_common(run, flags);
  add_session(run, flags);

  auto* sweep = app.add_subcommand("sweep", "Run many sessions and report outcome and fidelity statistics");
  add_common(sweep, flags);
  add_session(sweep, flags);
  sweep->add_option("--trials", flags.trials, "Number of sessions");

  CLI11_PARSE(app, argc, argv);

  Command command = Command::Verify;
  CLI::App* chosen = verify;
  if (table->parsed()) {
    command = Command::Table;
    chosen = table;
  } else if (run->parsed()) {
    command = Command::Run;
    chosen = run;
  } else if (sweep->parsed()) {
    command = Command::Sweep;
    chosen = sweep;
  }

  try {
    const RunConfig config = to_config(command, flags, chosen->count("--seed") > 0);
    if (config.out_path.empty()) return qtele::cli::dispatch(config, std::cout);
    std::ofstream file(config.out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open " << config.out_path << " for writing\n";
      return 2;
    }
    const int status = qtele::cli::dispatch(config, file);
    file.flush();
    if (!file) {
      std::cerr << "error: write to " << config.out_path << " failed\n";
      return 2;
    }
    return status;
  } catch (const qtele::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
