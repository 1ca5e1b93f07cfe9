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

// Single-qubit Pauli operators with a phase from {+1, -1, +i, -i}.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "qtele/qsim.hpp"

namespace qtele {

enum class Pauli : std::uint8_t { I, X, Y, Z };
enum class Phase : std::uint8_t { PlusOne, MinusOne, PlusI, MinusI };

inline constexpr std::array<Pauli, 4> kPaulis{Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
inline constexpr std::array<Phase, 4> kPhases{Phase::PlusOne, Phase::MinusOne, Phase::PlusI, Phase::MinusI};

inline std::string_view to_string(Pauli p) {
  switch (p) {
    case Pauli::I: return "I";
    case Pauli::X: return "X";
    case Pauli::Y: return "Y";
    case Pauli::Z: return "Z";
  }
  return "?";
}

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::PlusOne: return "+1";
    case Phase::MinusOne: return "-1";
    case Phase::PlusI: return "+i";
    case Phase::MinusI: return "-i";
  }
  return "?";
}

inline std::optional<Pauli> parse_pauli(std::string_view s) {
  for (const auto p : kPaulis) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

inline std::optional<Phase> parse_phase(std::string_view s) {
  for (const auto p : kPhases) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

inline Complex phase_value(Phase p) {
  switch (p) {
    case Phase::PlusOne: return {1.0, 0.0};
    case Phase::MinusOne: return {-1.0, 0.0};
    case Phase::PlusI: return {0.0, 1.0};
    case Phase::MinusI: return {0.0, -1.0};
  }
  return {1.0, 0.0};
}

inline Phase conjugate(Phase p) {
  switch (p) {
    case Phase::PlusI: return Phase::MinusI;
    case Phase::MinusI: return Phase::PlusI;
    default: return p;
  }
}

inline Phase multiply(Phase a, Phase b) {
  const Complex z = phase_value(a) * phase_value(b);
  for (const auto p : kPhases) {
    if (std::abs(phase_value(p) - z) < 0.5) return p;
  }
  return Phase::PlusOne;
}

/// Nearest fourth root of unity, if `z` is within `tol` of one.
inline std::optional<Phase> snap_phase(Complex z, double tol) {
  for (const auto p : kPhases) {
    if (std::abs(phase_value(p) - z) <= tol) return p;
  }
  return std::nullopt;
}

inline Matrix pauli_matrix(Pauli p) {
  Matrix m(2, 2);
  const Complex i{0.0, 1.0};
  switch (p) {
    case Pauli::I: m << 1.0, 0.0, 0.0, 1.0; break;
    case Pauli::X: m << 0.0, 1.0, 1.0, 0.0; break;
    case Pauli::Y: m << 0.0, -i, i, 0.0; break;
    case Pauli::Z: m << 1.0, 0.0, 0.0, -1.0; break;
  }
  return m;
}

struct PauliLabel {
  Pauli op = Pauli::I;
  Phase phase = Phase::PlusOne;

  Matrix matrix() const { return phase_value(phase) * pauli_matrix(op); }

  /// Same operator with the phase dropped.
  PauliLabel unphased() const { return {op, Phase::PlusOne}; }

  std::string to_string() const {
    return std::string(qtele::to_string(phase)) + std::string(qtele::to_string(op));
  }

  friend bool operator==(const PauliLabel&, const PauliLabel&) = default;
};

/// Every Pauli squares to I, so the inverse only conjugates the phase.
inline PauliLabel inverse(PauliLabel p) { return {p.op, conjugate(p.phase)}; }

/// The 16 elements {+1, -1, +i, -i} x {I, X, Y, Z}, Pauli-major.
inline std::array<PauliLabel, 16> phased_pauli_group() {
  std::array<PauliLabel, 16> out{};
  std::size_t n = 0;
  for (const auto op : kPaulis) {
    for (const auto ph : kPhases) out[n++] = {op, ph};
  }
  return out;
}

inline bool equal_up_to_phase(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  // |tr(A^H B)| = dim exactly when B = e^{i theta} A for unitary A, B.
  const Complex overlap = (a.adjoint() * b).trace();
  return std::abs(std::abs(overlap) - static_cast<double>(a.rows())) <= tol;
}

/// Applies `p` (including its phase) to a single-qubit state.
inline StateVector apply_pauli(const StateVector& qubit, PauliLabel p) {
  if (qubit.num_qubits() != 1) throw ValidationError("Pauli correction expects a single-qubit state");
  return apply(qubit, QOperator(p.matrix(), {0}));
}

}  // namespace qtele
