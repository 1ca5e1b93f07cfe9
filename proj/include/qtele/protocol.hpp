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

// Bidirectional controlled teleportation over the five-qubit Brown channel.
//
// The seven-qubit register is laid out as [a, b, A1, A2, B1, B2, C]:
//   a        Alice's unknown qubit, destined for Bob's B1
//   b        Bob's unknown qubit, destined for Alice's A2
//   A1, A2   Alice's channel qubits
//   B1, B2   Bob's channel qubits
//   C        Charlie's control qubit
//
// One round: Alice applies a signed cyclic permutation to (A1, A2), Alice
// Bell-measures (a, A1), Bob Bell-measures (B2, b), Charlie measures C in the
// computational basis. The residual (A2, B1) pair is then a product of Pauli
// images of the two inputs, undone by the recoveries from a correction table.

#pragma once

#include <array>
#include <complex>
#include <concepts>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qtele/pauli.hpp"
#include "qtele/qsim.hpp"

namespace qtele {

enum class Party : std::uint8_t { Alice, Bob, Charlie };

inline std::string_view to_string(Party p) {
  switch (p) {
    case Party::Alice: return "Alice";
    case Party::Bob: return "Bob";
    case Party::Charlie: return "Charlie";
  }
  return "?";
}

namespace labels {
inline const std::string kA = "a";
inline const std::string kB = "b";
inline const std::string kA1 = "A1";
inline const std::string kA2 = "A2";
inline const std::string kB1 = "B1";
inline const std::string kB2 = "B2";
inline const std::string kC = "C";
}  // namespace labels

/// A sender's unknown qubit c0|0> + c1|1>.
class InputQubit {
 public:
  static InputQubit make(Party owner, Complex c0, Complex c1) {
    if (owner == Party::Charlie) throw ValidationError("only Alice and Bob hold input qubits");
    const double norm2 = std::norm(c0) + std::norm(c1);
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
      throw ValidationError("input qubit is not normalized (squared norm " + std::to_string(norm2) + ")");
    }
    return InputQubit(owner, c0, c1);
  }

  /// Haar-random state: two independent standard complex Gaussians, normalized.
  template <class Rng>
  static InputQubit random(Party owner, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
      const Complex c0{gauss(rng), gauss(rng)};
      const Complex c1{gauss(rng), gauss(rng)};
      const double norm = std::sqrt(std::norm(c0) + std::norm(c1));
      if (norm > 1e-6) return make(owner, c0 / norm, c1 / norm);
    }
  }

  Party owner() const { return owner_; }
  Complex c0() const { return c0_; }
  Complex c1() const { return c1_; }

  StateVector state(const std::string& label = {}) const {
    std::vector<std::string> names;
    if (!label.empty()) names.push_back(label);
    return StateVector::from_amplitudes({c0_, c1_}, std::move(names));
  }

 private:
  InputQubit(Party owner, Complex c0, Complex c1) : owner_(owner), c0_(c0), c1_(c1) {}

  Party owner_;
  Complex c0_;
  Complex c1_;
};

enum class Role : std::uint8_t { A1, A2, B1, B2, C };

/// Register positions of the five channel roles.
class ChannelLayout {
 public:
  /// Positions in the seven-qubit system register.
  static ChannelLayout system() { return ChannelLayout({2, 3, 4, 5, 6}); }
  /// Positions in the bare five-qubit channel.
  static ChannelLayout channel() { return ChannelLayout({0, 1, 2, 3, 4}); }

  explicit ChannelLayout(std::array<std::size_t, 5> positions) : positions_(positions) {
    for (std::size_t r = 0; r < positions_.size(); ++r) {
      for (std::size_t q = 0; q < r; ++q) {
        if (positions_[q] == positions_[r]) throw ValidationError("channel roles must map to distinct positions");
      }
    }
  }

  std::size_t operator[](Role r) const { return positions_[static_cast<std::size_t>(r)]; }

 private:
  std::array<std::size_t, 5> positions_;
};

/// One of the four numbered Bell states, 1..4.
class BellIndex {
 public:
  explicit BellIndex(int value) : value_(value) {
    if (value < 1 || value > 4) throw ValidationError("Bell index must be in 1..4, got " + std::to_string(value));
  }

  int value() const { return value_; }
  std::size_t zero_based() const { return static_cast<std::size_t>(value_ - 1); }

  friend auto operator<=>(const BellIndex&, const BellIndex&) = default;

 private:
  int value_;
};

/// (i, j, k): Alice's Bell index, Bob's Bell index, Charlie's bit.
struct ProtocolOutcome {
  BellIndex alice{1};
  BellIndex bob{1};
  int control = 0;

  ProtocolOutcome() = default;
  ProtocolOutcome(int i, int j, int k) : alice(i), bob(j), control(k) {
    if (k != 0 && k != 1) throw ValidationError("control bit must be 0 or 1");
  }

  static constexpr std::size_t kCount = 32;

  /// Position in lexicographic (i, j, k) order.
  std::size_t index() const { return (alice.zero_based() * 4 + bob.zero_based()) * 2 + static_cast<std::size_t>(control); }

  static ProtocolOutcome from_index(std::size_t index) {
    if (index >= kCount) throw IndexError("outcome index out of range");
    return {static_cast<int>(index / 8) + 1, static_cast<int>((index / 2) % 4) + 1, static_cast<int>(index % 2)};
  }

  std::string to_string() const {
    return std::to_string(alice.value()) + "," + std::to_string(bob.value()) + "," + std::to_string(control);
  }

  friend auto operator<=>(const ProtocolOutcome&, const ProtocolOutcome&) = default;
};

inline std::array<ProtocolOutcome, ProtocolOutcome::kCount> all_outcomes() {
  std::array<ProtocolOutcome, ProtocolOutcome::kCount> out;
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = ProtocolOutcome::from_index(n);
  return out;
}

/// |phi1..4> = (|00>+|11>)/sqrt2, (|00>-|11>)/sqrt2, (|01>+|10>)/sqrt2, (|01>-|10>)/sqrt2.
inline std::array<std::vector<Complex>, 4> bell_amplitudes() {
  const double h = 1.0 / std::sqrt(2.0);
  return {{{h, 0.0, 0.0, h}, {h, 0.0, 0.0, -h}, {0.0, h, h, 0.0}, {0.0, h, -h, 0.0}}};
}

inline std::array<StateVector, 4> bell_states() {
  const auto amps = bell_amplitudes();
  return {StateVector::from_amplitudes(amps[0]), StateVector::from_amplitudes(amps[1]),
          StateVector::from_amplitudes(amps[2]), StateVector::from_amplitudes(amps[3])};
}

inline MeasurementBasis bell_basis() {
  const auto amps = bell_amplitudes();
  return MeasurementBasis({amps.begin(), amps.end()}, {"1", "2", "3", "4"});
}

inline MeasurementBasis control_basis() { return MeasurementBasis::computational(1); }

/// The Brown state on (A1, A2, B1, B2, C), assembled from its Bell-pair form
///   1/2 (|001>|phi4> + |010>|phi2> + |100>|phi3> + |111>|phi1>).
inline StateVector brown_state() {
  const auto bells = bell_states();
  const std::array<std::pair<const char*, std::size_t>, 4> terms{{{"001", 3}, {"010", 1}, {"100", 2}, {"111", 0}}};
  std::vector<Complex> amps(32, Complex{0.0, 0.0});
  for (const auto& [prefix, bell] : terms) {
    const StateVector term = tensor_product(StateVector::basis(prefix), bells[bell]);
    for (std::size_t n = 0; n < amps.size(); ++n) amps[n] += 0.5 * term[n];
  }
  return StateVector::from_amplitudes(std::move(amps),
                                      {labels::kA1, labels::kA2, labels::kB1, labels::kB2, labels::kC});
}

/// Signed cyclic permutation |00> -> -|11>, |01> -> |00>, |10> -> |01>, |11> -> |10>.
inline Matrix alice_unitary_matrix() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 1) = 1.0;
  m(1, 2) = 1.0;
  m(2, 3) = 1.0;
  m(3, 0) = -1.0;
  return m;
}

inline QOperator alice_unitary(const ChannelLayout& layout = ChannelLayout::channel()) {
  return QOperator(alice_unitary_matrix(), {layout[Role::A1], layout[Role::A2]});
}

/// |chi_a> (x) |chi_b> (x) |Brown> as a labelled seven-qubit register.
inline StateVector prepare_system(const InputQubit& chi_a, const InputQubit& chi_b) {
  if (chi_a.owner() != Party::Alice || chi_b.owner() != Party::Bob) {
    throw ValidationError("prepare_system expects Alice's qubit then Bob's qubit");
  }
  return tensor_product(tensor_product(chi_a.state(labels::kA), chi_b.state(labels::kB)), brown_state());
}

/// Residual (A2, B1, C) after the two Bell measurements, with their joint probability.
struct BellStageResult {
  StateVector residual;
  double probability = 0.0;
  BellIndex alice{1};
  BellIndex bob{1};
};

/// The (A2, B1) pair after all three measurements, before any correction.
struct CollapsedRound {
  ProtocolOutcome outcome;
  double joint_probability = 0.0;
  /// Normalized (A2, B1) state; its phase relative to the unnormalized
  /// projection is exactly +1.
  StateVector residual;
  StateVector a2;
  StateVector b1;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::vector<std::size_t> positions(const StateVector& s, std::initializer_list<std::string> names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) out.push_back(s.position_of(n));
  return out;
}

inline StateVector after_alice_unitary(const InputQubit& chi_a, const InputQubit& chi_b) {
  return apply(prepare_system(chi_a, chi_b), alice_unitary(ChannelLayout::system()));
}

}  // namespace detail

/// Runs the two Bell measurements; outcomes sampled from `sim` unless given.
inline BellStageResult bell_stage(const InputQubit& chi_a, const InputQubit& chi_b, Simulator& sim,
                                  std::optional<BellIndex> alice = std::nullopt,
                                  std::optional<BellIndex> bob = std::nullopt) {
  const StateVector system = detail::after_alice_unitary(chi_a, chi_b);
  const MeasurementBasis bell = bell_basis();

  const auto alice_pair = detail::positions(system, {labels::kA, labels::kA1});
  const auto first = sim.measure(system, bell, alice_pair,
                                 alice ? std::optional<std::size_t>(alice->zero_based()) : std::nullopt);
  const auto bob_pair = detail::positions(first.post_state, {labels::kB2, labels::kB});
  const auto second = sim.measure(first.post_state, bell, bob_pair,
                                  bob ? std::optional<std::size_t>(bob->zero_based()) : std::nullopt);

  const auto order = detail::positions(second.post_state, {labels::kA2, labels::kB1, labels::kC});
  if (order != std::vector<std::size_t>{0, 1, 2}) throw ProtocolError("unexpected residual register order");
  return {second.post_state, first.probability * second.probability,
          BellIndex(static_cast<int>(first.outcome) + 1), BellIndex(static_cast<int>(second.outcome) + 1)};
}

/// Measures everything and factorizes the residual; no correction applied.
inline CollapsedRound collapse_round(const InputQubit& chi_a, const InputQubit& chi_b,
                                     std::optional<ProtocolOutcome> forced, Simulator& sim) {
  const auto stage = forced ? bell_stage(chi_a, chi_b, sim, forced->alice, forced->bob)
                            : bell_stage(chi_a, chi_b, sim);
  const auto control_pos = detail::positions(stage.residual, {labels::kC});
  const auto charlie = sim.measure(stage.residual, control_basis(), control_pos,
                                   forced ? std::optional<std::size_t>(forced->control) : std::nullopt);

  CollapsedRound round;
  round.outcome = ProtocolOutcome(stage.alice.value(), stage.bob.value(), static_cast<int>(charlie.outcome));
  round.joint_probability = stage.probability * charlie.probability;
  round.residual = charlie.post_state;

  const auto split = factorize_bipartite(round.residual, detail::positions(round.residual, {labels::kA2}));
  if (!split.is_product()) {
    throw ProtocolError("residual (A2, B1) state is entangled for outcome " + round.outcome.to_string());
  }
  round.a2 = split.factors->first;
  round.b1 = split.factors->second;
  return round;
}

/// Joint Born probability of (i, j, k).
inline double outcome_probability(const InputQubit& chi_a, const InputQubit& chi_b, const ProtocolOutcome& outcome) {
  Simulator sim(0);
  try {
    const auto stage = bell_stage(chi_a, chi_b, sim, outcome.alice, outcome.bob);
    const auto charlie = measure(stage.residual, control_basis(),
                                 detail::positions(stage.residual, {labels::kC}),
                                 static_cast<std::size_t>(outcome.control));
    return stage.probability * charlie.probability;
  } catch (const ImpossibleOutcomeError&) {
    return 0.0;
  }
}

/// Anything that yields per-outcome recovery operators for B1 and A2.
template <class T>
concept CorrectionSource = requires(const T& t, const ProtocolOutcome& o) {
  { t.recovery_b1(o) } -> std::convertible_to<PauliLabel>;
  { t.recovery_a2(o) } -> std::convertible_to<PauliLabel>;
};

struct ProtocolRun {
  InputQubit chi_a;
  InputQubit chi_b;
  ProtocolOutcome outcome;
  double joint_probability = 0.0;
  StateVector pre_a2;
  StateVector pre_b1;
  PauliLabel recovery_b1;
  PauliLabel recovery_a2;
  StateVector post_a2;
  StateVector post_b1;
  /// Corrected B1 against chi_a.
  double fidelity_b1 = 0.0;
  /// Corrected A2 against chi_b.
  double fidelity_a2 = 0.0;
};

/// One full round: prepare, transform, measure, factorize, correct, score.
template <CorrectionSource Table>
ProtocolRun run_protocol(const InputQubit& chi_a, const InputQubit& chi_b, const Table& corrections,
                         std::optional<ProtocolOutcome> forced = std::nullopt, std::uint64_t seed = 0) {
  Simulator sim(seed);
  const CollapsedRound round = collapse_round(chi_a, chi_b, forced, sim);
  const PauliLabel rec_b1 = corrections.recovery_b1(round.outcome);
  const PauliLabel rec_a2 = corrections.recovery_a2(round.outcome);
  StateVector post_b1 = apply_pauli(round.b1, rec_b1);
  StateVector post_a2 = apply_pauli(round.a2, rec_a2);
  const double f_b1 = fidelity(post_b1, chi_a.state());
  const double f_a2 = fidelity(post_a2, chi_b.state());
  return ProtocolRun{chi_a,   chi_b,   round.outcome,      round.joint_probability, round.a2, round.b1,
                     rec_b1,  rec_a2,  std::move(post_a2), std::move(post_b1),      f_b1,     f_a2};
}

}  // namespace qtele
