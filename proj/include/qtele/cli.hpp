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

// Command implementations behind the `qtele` executable. Each command writes
// to a stream and returns the process exit status, so tests can drive them
// in-process.
//
// Exit status: 0 success, 1 a check failed, 2 bad configuration or input.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtele/choreography.hpp"
#include "qtele/correction_table.hpp"
#include "qtele/protocol.hpp"

namespace qtele::cli {

using nlohmann::json;

enum class Command : std::uint8_t { Verify, Table, Run, Sweep };
enum class Format : std::uint8_t { Text, Json, Csv };

inline constexpr std::uint64_t kDefaultSeed = 20260101;
inline constexpr std::string_view kSeedEnv = "QTELE_SEED";

struct RunConfig {
  Command command = Command::Verify;
  std::uint64_t seed = kDefaultSeed;
  std::size_t trials = 100;
  Format format = Format::Text;
  std::string out_path;
  SessionMode mode = SessionMode::Controlled;
  WithheldPolicy policy = WithheldPolicy::AssumeZero;
  std::optional<InputQubit> input_a;
  std::optional<InputQubit> input_b;
  std::optional<ProtocolOutcome> outcome;
  /// Test hook for `verify`: replace the B1 recovery of this entry.
  std::optional<ProtocolOutcome> corrupt_entry;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

/// 12 significant digits, the precision of every printed number.
inline std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

inline double sig12(double v) { return std::stod(fmt(v)); }

}  // namespace detail

/// "c0re,c0im,c1re,c1im".
inline InputQubit parse_input(std::string_view text, Party owner) {
  const auto parts = detail::split(text, ',');
  if (parts.size() != 4) throw ConfigError("input amplitudes need 4 comma-separated numbers");
  const Complex c0{detail::parse_double(parts[0]), detail::parse_double(parts[1])};
  const Complex c1{detail::parse_double(parts[2]), detail::parse_double(parts[3])};
  try {
    return InputQubit::make(owner, c0, c1);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

/// "i,j,k".
inline ProtocolOutcome parse_outcome(std::string_view text) {
  const auto parts = detail::split(text, ',');
  if (parts.size() != 3) throw ConfigError("outcome needs the form i,j,k");
  try {
    return ProtocolOutcome(std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2]));
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  } catch (const std::exception&) {
    throw ConfigError("outcome needs the form i,j,k");
  }
}

inline Pauli next_pauli(Pauli p) {
  return kPaulis[(static_cast<std::size_t>(p) + 1) % kPaulis.size()];
}

inline void validate(const RunConfig& config) {
  if ((config.command == Command::Verify || config.command == Command::Sweep) && config.trials < 1) {
    throw ConfigError("--trials must be at least 1");
  }
}

// ---------------------------------------------------------------- verify

namespace detail {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Nonzero channel amplitudes in units of 1/(2 sqrt 2).
inline const std::array<std::pair<const char*, int>, 8> kBrownTable{{{"00101", 1},
                                                                    {"00110", -1},
                                                                    {"01000", 1},
                                                                    {"01011", -1},
                                                                    {"10001", 1},
                                                                    {"10010", 1},
                                                                    {"11100", 1},
                                                                    {"11111", 1}}};
inline const std::array<std::pair<const char*, int>, 8> kTransformedTable{{{"11101", -1},
                                                                         {"11110", 1},
                                                                         {"00000", 1},
                                                                         {"00011", -1},
                                                                         {"01001", 1},
                                                                         {"01010", 1},
                                                                         {"10100", 1},
                                                                         {"10111", 1}}};

inline double golden_error(const StateVector& s, const std::array<std::pair<const char*, int>, 8>& table) {
  const double unit = 1.0 / (2.0 * std::sqrt(2.0));
  std::vector<Complex> expected(32, Complex{0.0, 0.0});
  for (const auto& [bits, sign] : table) {
    std::size_t idx = 0;
    for (const char* c = bits; *c; ++c) idx = (idx << 1U) | static_cast<std::size_t>(*c == '1');
    expected[idx] = sign * unit;
  }
  double err = 0.0;
  for (std::size_t n = 0; n < expected.size(); ++n) err = std::max(err, std::abs(s[n] - expected[n]));
  return err;
}

}  // namespace detail

inline int cmd_verify(const RunConfig& config, std::ostream& out) {
  validate(config);
  std::vector<detail::Check> checks;
  constexpr double kGoldenTol = 1e-12;

  const double brown_err = detail::golden_error(brown_state(), detail::kBrownTable);
  checks.push_back({"brown_golden", brown_err <= kGoldenTol, "max_abs_error=" + detail::fmt(brown_err)});

  const double u_err = detail::golden_error(apply(brown_state(), alice_unitary()), detail::kTransformedTable);
  checks.push_back({"unitary_golden", u_err <= kGoldenTol, "max_abs_error=" + detail::fmt(u_err)});

  CorrectionTable table = derive_table();
  checks.push_back({"table_structure", table.has_index_factorization(), "32 entries, index factorization"});
  if (config.corrupt_entry) {
    const auto& e = table.entry(*config.corrupt_entry);
    table = table.with_recovery(*config.corrupt_entry, Side::B1, {next_pauli(e.recovery_b1.op), Phase::PlusOne});
  }

  const auto report = verify_table(table, config.trials, config.seed);
  std::string sweep_detail = "cases=" + std::to_string(report.cases) + " min_fidelity=" + detail::fmt(report.min_fidelity);
  if (!report.passed()) {
    sweep_detail += " failed_entry=(" + report.failures.front().outcome.to_string() + ") failures=" +
                    std::to_string(report.failures.size());
  }
  checks.push_back({"fidelity_sweep", report.passed(), sweep_detail});

  std::mt19937_64 rng(config.seed);
  double max_dev = 0.0;
  double max_sum_dev = 0.0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const auto chi_a = InputQubit::random(Party::Alice, rng);
    const auto chi_b = InputQubit::random(Party::Bob, rng);
    double sum = 0.0;
    for (const auto& o : all_outcomes()) {
      const double p = outcome_probability(chi_a, chi_b, o);
      max_dev = std::max(max_dev, std::abs(p - 1.0 / 32.0));
      sum += p;
    }
    max_sum_dev = std::max(max_sum_dev, std::abs(sum - 1.0));
  }
  checks.push_back({"probability_uniformity", max_dev <= 1e-12 && max_sum_dev <= 1e-10,
                    "max_probability_deviation=" + detail::fmt(max_dev) + " max_sum_deviation=" + detail::fmt(max_sum_dev)});

  bool round_trip = false;
  try {
    round_trip = parse_table(serialize_table(table)) == table;
  } catch (const Error&) {
    round_trip = false;
  }
  checks.push_back({"table_round_trip", round_trip, "serialize -> parse -> compare"});

  bool all = true;
  for (const auto& c : checks) all = all && c.passed;

  switch (config.format) {
    case Format::Json: {
      json doc;
      doc["passed"] = all;
      doc["min_fidelity"] = detail::sig12(report.min_fidelity);
      doc["max_probability_deviation"] = detail::sig12(max_dev);
      doc["checks"] = json::array();
      for (const auto& c : checks) doc["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
      out << doc.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      out << "check,passed,detail\n";
      for (const auto& c : checks) out << c.name << ',' << (c.passed ? "true" : "false") << ',' << c.detail << '\n';
      break;
    case Format::Text:
      for (const auto& c : checks) out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
      out << "min_fidelity=" << detail::fmt(report.min_fidelity)
          << " max_probability_deviation=" << detail::fmt(max_dev) << '\n';
      out << (all ? "ALL CHECKS PASSED" : "VERIFICATION FAILED") << '\n';
      break;
  }
  return all ? 0 : 1;
}

// ---------------------------------------------------------------- table

inline int cmd_table(const RunConfig& config, std::ostream& out) {
  const CorrectionTable table = derive_table();
  switch (config.format) {
    case Format::Text:
      out << serialize_table(table);
      break;
    case Format::Csv:
      out << "i,j,k,collapse_B1,phase_B1,collapse_A2,phase_A2,recovery_B1,recovery_A2\n";
      for (const auto& e : table.entries()) {
        out << e.outcome.alice.value() << ',' << e.outcome.bob.value() << ',' << e.outcome.control << ','
            << to_string(e.collapse_b1.op) << ',' << to_string(e.collapse_b1.phase) << ','
            << to_string(e.collapse_a2.op) << ',' << to_string(e.collapse_a2.phase) << ','
            << to_string(e.recovery_b1.op) << ',' << to_string(e.recovery_a2.op) << '\n';
      }
      break;
    case Format::Json: {
      json doc = json::array();
      for (const auto& e : table.entries()) {
        doc.push_back({{"i", e.outcome.alice.value()},
                       {"j", e.outcome.bob.value()},
                       {"k", e.outcome.control},
                       {"collapse_B1", to_string(e.collapse_b1.op)},
                       {"phase_B1", to_string(e.collapse_b1.phase)},
                       {"collapse_A2", to_string(e.collapse_a2.op)},
                       {"phase_A2", to_string(e.collapse_a2.phase)},
                       {"recovery_B1", to_string(e.recovery_b1.op)},
                       {"recovery_A2", to_string(e.recovery_a2.op)}});
      }
      out << doc.dump(2) << '\n';
      break;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- run

namespace detail {

inline json input_json(const InputQubit& q) {
  return {sig12(q.c0().real()), sig12(q.c0().imag()), sig12(q.c1().real()), sig12(q.c1().imag())};
}

inline std::string input_text(const InputQubit& q) {
  return fmt(q.c0().real()) + "," + fmt(q.c0().imag()) + "," + fmt(q.c1().real()) + "," + fmt(q.c1().imag());
}

inline std::pair<InputQubit, InputQubit> session_inputs(const RunConfig& config, std::mt19937_64& rng) {
  InputQubit a = config.input_a ? *config.input_a : InputQubit::random(Party::Alice, rng);
  InputQubit b = config.input_b ? *config.input_b : InputQubit::random(Party::Bob, rng);
  return {a, b};
}

}  // namespace detail

inline int cmd_run(const RunConfig& config, std::ostream& out) {
  validate(config);
  const CorrectionTable table = derive_table();
  std::mt19937_64 rng(config.seed);
  const auto [chi_a, chi_b] = detail::session_inputs(config, rng);
  const SessionOptions options{config.mode, config.policy, config.outcome};
  const SessionResult s = run_session(chi_a, chi_b, table, options, rng());

  switch (config.format) {
    case Format::Json: {
      json doc;
      doc["mode"] = std::string(to_string(config.mode));
      doc["seed"] = config.seed;
      doc["input_a"] = detail::input_json(chi_a);
      doc["input_b"] = detail::input_json(chi_b);
      doc["outcome"] = {{"i", s.outcome.alice.value()}, {"j", s.outcome.bob.value()}, {"k", s.outcome.control}};
      doc["fidelity_B1"] = detail::sig12(s.fidelity_b1);
      doc["fidelity_A2"] = detail::sig12(s.fidelity_a2);
      doc["bits_sent"] = s.transcript.bits_sent();
      doc["messages"] = json::array();
      for (const auto& m : s.transcript.messages()) {
        doc["messages"].push_back({{"seq", m.seq},
                                   {"from", std::string(to_string(m.sender))},
                                   {"to", std::string(to_string(m.recipient))},
                                   {"kind", m.kind == PayloadKind::BellIndex ? "bell" : "control"},
                                   {"value", m.value},
                                   {"bits", m.bits()}});
      }
      doc["transcript"] = json::array();
      for (const auto& e : s.transcript.events()) {
        doc["transcript"].push_back({{"seq", e.seq},
                                     {"party", std::string(to_string(e.party))},
                                     {"event", std::string(to_string(e.kind))},
                                     {"payload", e.payload}});
      }
      out << doc.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      out << "mode,seed,i,j,k,fidelity_B1,fidelity_A2,messages,bits_sent\n";
      out << to_string(config.mode) << ',' << config.seed << ',' << s.outcome.alice.value() << ','
          << s.outcome.bob.value() << ',' << s.outcome.control << ',' << detail::fmt(s.fidelity_b1) << ','
          << detail::fmt(s.fidelity_a2) << ',' << s.transcript.messages().size() << ',' << s.transcript.bits_sent()
          << '\n';
      break;
    case Format::Text:
      out << "mode " << to_string(config.mode) << " seed " << config.seed << '\n';
      out << "input_a " << detail::input_text(chi_a) << '\n';
      out << "input_b " << detail::input_text(chi_b) << '\n';
      out << s.transcript.to_text();
      out << "outcome " << s.outcome.to_string() << '\n';
      out << "fidelity_B1 " << detail::fmt(s.fidelity_b1) << '\n';
      out << "fidelity_A2 " << detail::fmt(s.fidelity_a2) << '\n';
      out << "messages " << s.transcript.messages().size() << " bits " << s.transcript.bits_sent() << '\n';
      break;
  }
  return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepStats {
  std::size_t sessions = 0;
  std::array<std::size_t, ProtocolOutcome::kCount> counts{};
  double max_abs_z = 0.0;
  double controlled_mean_b1 = 0.0;
  double controlled_mean_a2 = 0.0;
  double withheld_mean_b1 = 0.0;
  double withheld_mean_a2 = 0.0;
  double withheld_stderr_b1 = 0.0;
  double withheld_stderr_a2 = 0.0;
  /// Present when both inputs are fixed.
  std::optional<std::pair<double, double>> expected_withheld;
};

/// Runs `trials` sessions in each mode; the k-th withheld session reuses the
/// k-th controlled session's inputs and seed, so both see the same outcome.
inline SweepStats run_sweep(const RunConfig& config) {
  const CorrectionTable table = derive_table();
  std::mt19937_64 rng(config.seed);
  SweepStats stats;
  stats.sessions = config.trials;
  double sum_sq_b1 = 0.0;
  double sum_sq_a2 = 0.0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const auto [chi_a, chi_b] = detail::session_inputs(config, rng);
    const std::uint64_t session_seed = rng();
    const auto controlled = run_session(chi_a, chi_b, table, {SessionMode::Controlled, config.policy, config.outcome},
                                        session_seed);
    const auto withheld = run_session(chi_a, chi_b, table,
                                      {SessionMode::ControlWithheld, config.policy, config.outcome}, session_seed);
    ++stats.counts[controlled.outcome.index()];
    stats.controlled_mean_b1 += controlled.fidelity_b1;
    stats.controlled_mean_a2 += controlled.fidelity_a2;
    stats.withheld_mean_b1 += withheld.fidelity_b1;
    stats.withheld_mean_a2 += withheld.fidelity_a2;
    sum_sq_b1 += withheld.fidelity_b1 * withheld.fidelity_b1;
    sum_sq_a2 += withheld.fidelity_a2 * withheld.fidelity_a2;
  }
  const double n = static_cast<double>(config.trials);
  stats.controlled_mean_b1 /= n;
  stats.controlled_mean_a2 /= n;
  stats.withheld_mean_b1 /= n;
  stats.withheld_mean_a2 /= n;
  auto stderr_of = [n](double mean, double sum_sq) {
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return n > 1 ? std::sqrt(var * n / (n - 1) / n) : 0.0;
  };
  stats.withheld_stderr_b1 = stderr_of(stats.withheld_mean_b1, sum_sq_b1);
  stats.withheld_stderr_a2 = stderr_of(stats.withheld_mean_a2, sum_sq_a2);

  const double p = 1.0 / static_cast<double>(ProtocolOutcome::kCount);
  const double sigma = std::sqrt(n * p * (1.0 - p));
  for (const auto c : stats.counts) stats.max_abs_z = std::max(stats.max_abs_z, std::abs((c - n * p) / sigma));

  if (config.input_a && config.input_b) {
    stats.expected_withheld = expected_uncontrolled_fidelity(*config.input_a, *config.input_b, table);
  }
  return stats;
}

inline int cmd_sweep(const RunConfig& config, std::ostream& out) {
  validate(config);
  const SweepStats stats = run_sweep(config);
  const double n = static_cast<double>(stats.sessions);
  switch (config.format) {
    case Format::Json: {
      json doc;
      doc["sessions"] = stats.sessions;
      doc["seed"] = config.seed;
      doc["max_abs_z"] = detail::sig12(stats.max_abs_z);
      doc["outcomes"] = json::array();
      for (const auto& o : all_outcomes()) {
        const auto c = stats.counts[o.index()];
        doc["outcomes"].push_back({{"outcome", o.to_string()}, {"count", c}, {"frequency", detail::sig12(c / n)}});
      }
      doc["controlled"] = {{"mean_fidelity_B1", detail::sig12(stats.controlled_mean_b1)},
                           {"mean_fidelity_A2", detail::sig12(stats.controlled_mean_a2)}};
      doc["withheld"] = {{"mean_fidelity_B1", detail::sig12(stats.withheld_mean_b1)},
                         {"mean_fidelity_A2", detail::sig12(stats.withheld_mean_a2)},
                         {"stderr_B1", detail::sig12(stats.withheld_stderr_b1)},
                         {"stderr_A2", detail::sig12(stats.withheld_stderr_a2)}};
      if (stats.expected_withheld) {
        doc["withheld"]["expected_fidelity_B1"] = detail::sig12(stats.expected_withheld->first);
        doc["withheld"]["expected_fidelity_A2"] = detail::sig12(stats.expected_withheld->second);
      }
      out << doc.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      out << "outcome,count,frequency\n";
      for (const auto& o : all_outcomes()) {
        const auto c = stats.counts[o.index()];
        out << '"' << o.to_string() << "\"," << c << ',' << detail::fmt(c / n) << '\n';
      }
      break;
    case Format::Text:
      out << "sessions " << stats.sessions << " seed " << config.seed << '\n';
      for (const auto& o : all_outcomes()) {
        const auto c = stats.counts[o.index()];
        out << "outcome " << o.to_string() << " count " << c << " frequency " << detail::fmt(c / n) << '\n';
      }
      out << "max_abs_z " << detail::fmt(stats.max_abs_z) << '\n';
      out << "controlled mean_fidelity_B1 " << detail::fmt(stats.controlled_mean_b1) << " mean_fidelity_A2 "
          << detail::fmt(stats.controlled_mean_a2) << '\n';
      out << "withheld mean_fidelity_B1 " << detail::fmt(stats.withheld_mean_b1) << " mean_fidelity_A2 "
          << detail::fmt(stats.withheld_mean_a2) << '\n';
      if (stats.expected_withheld) {
        out << "withheld expected_fidelity_B1 " << detail::fmt(stats.expected_withheld->first)
            << " expected_fidelity_A2 " << detail::fmt(stats.expected_withheld->second) << '\n';
      }
      break;
  }
  return 0;
}

inline int dispatch(const RunConfig& config, std::ostream& out) {
  switch (config.command) {
    case Command::Verify: return cmd_verify(config, out);
    case Command::Table: return cmd_table(config, out);
    case Command::Run: return cmd_run(config, out);
    case Command::Sweep: return cmd_sweep(config, out);
  }
  return 2;
}

}  // namespace qtele::cli
