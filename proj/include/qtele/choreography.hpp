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

// Alice, Bob and Charlie as message-passing state machines.
//
// Message plan in controlled mode (reliable, ordered channel):
//   Alice   -> Bob     Bell index i   (2 bits)
//   Bob     -> Alice   Bell index j   (2 bits)
//   Charlie -> Alice   control bit k  (1 bit)
//   Charlie -> Bob     control bit k  (1 bit)
// Bob recovers chi_a on B1 from (k, i); Alice recovers chi_b on A2 from (k, j).
// With control withheld Charlie still measures but sends nothing, and the
// receivers substitute a guess for k.

#pragma once

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qtele/correction_table.hpp"
#include "qtele/protocol.hpp"

namespace qtele {

enum class SessionMode : std::uint8_t { Controlled, ControlWithheld };

/// What a receiver does when Charlie's bit never arrives.
enum class WithheldPolicy : std::uint8_t { AssumeZero, RandomGuess };

enum class PayloadKind : std::uint8_t { BellIndex, ControlBit };

inline std::string_view to_string(SessionMode m) {
  return m == SessionMode::Controlled ? "controlled" : "withheld";
}

struct ClassicalMessage {
  std::size_t seq = 0;
  Party sender = Party::Alice;
  Party recipient = Party::Bob;
  PayloadKind kind = PayloadKind::BellIndex;
  int value = 0;

  std::size_t bits() const { return kind == PayloadKind::BellIndex ? 2 : 1; }

  friend bool operator==(const ClassicalMessage&, const ClassicalMessage&) = default;
};

enum class EventKind : std::uint8_t { Measure, Send, Receive, Correct };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Measure: return "measure";
    case EventKind::Send: return "send";
    case EventKind::Receive: return "receive";
    case EventKind::Correct: return "correct";
  }
  return "?";
}

struct TranscriptEvent {
  std::size_t seq = 0;
  Party party = Party::Alice;
  EventKind kind = EventKind::Measure;
  std::string payload;
  /// Send/Receive: the message carried.
  std::optional<std::size_t> message;
  /// Correct: the messages whose contents the table lookup consumed.
  std::vector<std::size_t> depends_on;

  friend bool operator==(const TranscriptEvent&, const TranscriptEvent&) = default;
};

class Transcript {
 public:
  void record(Party party, EventKind kind, std::string payload, std::optional<std::size_t> message = std::nullopt,
              std::vector<std::size_t> depends_on = {}) {
    events_.push_back({events_.size(), party, kind, std::move(payload), message, std::move(depends_on)});
  }

  std::size_t post(Party sender, Party recipient, PayloadKind kind, int value) {
    messages_.push_back({messages_.size(), sender, recipient, kind, value});
    return messages_.back().seq;
  }

  const std::vector<TranscriptEvent>& events() const { return events_; }
  const std::vector<ClassicalMessage>& messages() const { return messages_; }

  std::size_t bits_sent() const {
    std::size_t total = 0;
    for (const auto& m : messages_) total += m.bits();
    return total;
  }

  /// Every correction must follow the correcting party's receipt of each
  /// message it depends on.
  bool is_causal() const {
    std::map<Party, std::vector<std::size_t>> received;
    for (const auto& e : events_) {
      if (e.kind == EventKind::Receive && e.message) received[e.party].push_back(*e.message);
      if (e.kind != EventKind::Correct) continue;
      for (const auto dep : e.depends_on) {
        const auto& got = received[e.party];
        if (std::find(got.begin(), got.end(), dep) == got.end()) return false;
      }
    }
    return true;
  }

  /// One event per line: seq, party, event kind, payload.
  std::string to_text() const {
    std::ostringstream out;
    for (const auto& e : events_) {
      out << e.seq << ' ' << to_string(e.party) << ' ' << to_string(e.kind) << ' ' << e.payload << '\n';
    }
    return out.str();
  }

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<TranscriptEvent> events_;
  std::vector<ClassicalMessage> messages_;
};

struct SessionOptions {
  SessionMode mode = SessionMode::Controlled;
  WithheldPolicy policy = WithheldPolicy::AssumeZero;
  std::optional<ProtocolOutcome> forced;
};

struct SessionResult {
  Transcript transcript;
  /// What the measurements actually produced.
  ProtocolOutcome outcome;
  double joint_probability = 0.0;
  InputQubit chi_a;
  InputQubit chi_b;
  StateVector pre_a2;
  StateVector pre_b1;
  PauliLabel applied_b1;
  PauliLabel applied_a2;
  double fidelity_b1 = 0.0;
  double fidelity_a2 = 0.0;
};

class ProtocolOrderError : public Error {
 public:
  using Error::Error;
};

namespace detail {

struct Beliefs {
  // Outcome each receiver uses for its lookup.
  ProtocolOutcome bob_view;
  ProtocolOutcome alice_view;
};

// Fills in what each receiver knows from `delivered`; missing Bell indices
// default to 1 and a missing control bit to `guess_k`.
inline Beliefs beliefs_from(const ProtocolOutcome& truth, const std::vector<ClassicalMessage>& delivered,
                            int guess_k_alice, int guess_k_bob) {
  std::optional<int> bob_sees_i;
  std::optional<int> bob_sees_k;
  std::optional<int> alice_sees_j;
  std::optional<int> alice_sees_k;
  for (const auto& m : delivered) {
    if (m.recipient == Party::Bob) (m.kind == PayloadKind::BellIndex ? bob_sees_i : bob_sees_k) = m.value;
    if (m.recipient == Party::Alice) (m.kind == PayloadKind::BellIndex ? alice_sees_j : alice_sees_k) = m.value;
  }
  return {ProtocolOutcome(bob_sees_i.value_or(1), truth.bob.value(), bob_sees_k.value_or(guess_k_bob)),
          ProtocolOutcome(truth.alice.value(), alice_sees_j.value_or(1), alice_sees_k.value_or(guess_k_alice))};
}

}  // namespace detail

/// One session on a single-threaded event loop. Outcomes are sampled from
/// `seed` unless options.forced is set.
inline SessionResult run_session(const InputQubit& chi_a, const InputQubit& chi_b, const CorrectionTable& table,
                                 const SessionOptions& options, std::uint64_t seed) {
  Simulator sim(seed);
  const CollapsedRound round = collapse_round(chi_a, chi_b, options.forced, sim);
  const ProtocolOutcome& truth = round.outcome;
  const bool controlled = options.mode == SessionMode::Controlled;

  Transcript transcript;
  transcript.record(Party::Alice, EventKind::Measure, "bell(a,A1)=" + std::to_string(truth.alice.value()));
  transcript.record(Party::Bob, EventKind::Measure, "bell(B2,b)=" + std::to_string(truth.bob.value()));
  transcript.record(Party::Charlie, EventKind::Measure, "control(C)=" + std::to_string(truth.control));

  std::deque<std::size_t> channel;
  auto send = [&](Party from, Party to, PayloadKind kind, int value) {
    const std::size_t id = transcript.post(from, to, kind, value);
    const std::string what = kind == PayloadKind::BellIndex ? "bell=" : "control=";
    transcript.record(from, EventKind::Send,
                      "to=" + std::string(to_string(to)) + " " + what + std::to_string(value) + " msg=" + std::to_string(id),
                      id);
    channel.push_back(id);
  };

  send(Party::Alice, Party::Bob, PayloadKind::BellIndex, truth.alice.value());
  send(Party::Bob, Party::Alice, PayloadKind::BellIndex, truth.bob.value());
  if (controlled) {
    send(Party::Charlie, Party::Alice, PayloadKind::ControlBit, truth.control);
    send(Party::Charlie, Party::Bob, PayloadKind::ControlBit, truth.control);
  }

  std::vector<ClassicalMessage> delivered;
  std::map<Party, std::vector<std::size_t>> inbox;
  while (!channel.empty()) {
    const auto& msg = transcript.messages()[channel.front()];
    channel.pop_front();
    transcript.record(msg.recipient, EventKind::Receive,
                      "from=" + std::string(to_string(msg.sender)) + " msg=" + std::to_string(msg.seq), msg.seq);
    inbox[msg.recipient].push_back(msg.seq);
    delivered.push_back(msg);
  }

  int guess_alice = 0;
  int guess_bob = 0;
  if (!controlled && options.policy == WithheldPolicy::RandomGuess) {
    std::bernoulli_distribution coin(0.5);
    guess_alice = coin(sim.rng()) ? 1 : 0;
    guess_bob = coin(sim.rng()) ? 1 : 0;
  }
  const auto beliefs = detail::beliefs_from(truth, delivered, guess_alice, guess_bob);

  SessionResult result{std::move(transcript), truth, round.joint_probability, chi_a, chi_b, round.a2, round.b1,
                       table.recovery_b1(beliefs.bob_view), table.recovery_a2(beliefs.alice_view), 0.0, 0.0};
  result.transcript.record(Party::Bob, EventKind::Correct, "B1<-" + std::string(to_string(result.applied_b1.op)),
                           std::nullopt, inbox[Party::Bob]);
  result.transcript.record(Party::Alice, EventKind::Correct, "A2<-" + std::string(to_string(result.applied_a2.op)),
                           std::nullopt, inbox[Party::Alice]);
  if (!result.transcript.is_causal()) throw ProtocolOrderError("correction recorded before a required message");

  result.fidelity_b1 = fidelity(apply_pauli(round.b1, result.applied_b1), chi_a.state());
  result.fidelity_a2 = fidelity(apply_pauli(round.a2, result.applied_a2), chi_b.state());
  return result;
}

/// Re-derives both corrections with message `dropped` removed from the
/// session's transcript; receivers fall back to Bell index 1 and control bit 0.
inline std::pair<double, double> replay_without(const SessionResult& session, const CorrectionTable& table,
                                                std::size_t dropped) {
  std::vector<ClassicalMessage> kept;
  for (const auto& m : session.transcript.messages()) {
    if (m.seq != dropped) kept.push_back(m);
  }
  const auto beliefs = detail::beliefs_from(session.outcome, kept, 0, 0);
  return {fidelity(apply_pauli(session.pre_b1, table.recovery_b1(beliefs.bob_view)), session.chi_a.state()),
          fidelity(apply_pauli(session.pre_a2, table.recovery_a2(beliefs.alice_view)), session.chi_b.state())};
}

namespace detail {

// Looks every outcome up as if Charlie had reported k = 0.
struct AssumeControlZero {
  const CorrectionTable& table;
  PauliLabel recovery_b1(const ProtocolOutcome& o) const {
    return table.recovery_b1(ProtocolOutcome(o.alice.value(), o.bob.value(), 0));
  }
  PauliLabel recovery_a2(const ProtocolOutcome& o) const {
    return table.recovery_a2(ProtocolOutcome(o.alice.value(), o.bob.value(), 0));
  }
};

}  // namespace detail

/// Born-weighted mean fidelities (B1, A2) over all 32 outcomes when receivers
/// always apply the k = 0 recovery.
inline std::pair<double, double> expected_uncontrolled_fidelity(const InputQubit& chi_a, const InputQubit& chi_b,
                                                                const CorrectionTable& table) {
  const detail::AssumeControlZero lookup{table};
  double b1 = 0.0;
  double a2 = 0.0;
  for (const auto& outcome : all_outcomes()) {
    const auto run = run_protocol(chi_a, chi_b, lookup, outcome);
    b1 += run.joint_probability * run.fidelity_b1;
    a2 += run.joint_probability * run.fidelity_a2;
  }
  return {b1, a2};
}

}  // namespace qtele
