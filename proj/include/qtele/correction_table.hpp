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

// Outcome-indexed recovery operators, derived by simulation.
//
// For outcome (i, j, k) the residual pair is
//   (collapse_A2 |chi_b>) (x) (collapse_B1 |chi_a>)
// and the recoveries are the inverses of the two collapse operators. Only the
// product of the two collapse phases is observable. It separates as
// alpha(k, i) * beta(k, j); the split is pinned by giving collapse_B1 phase +1
// whenever i = 1, so both phases obey the same index factorization as the
// operators themselves.
//
// Canonical text form, one record per outcome sorted by (i, j, k):
//   i j k collapse_B1 phase_B1 collapse_A2 phase_A2 recovery_B1 recovery_A2

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qtele/pauli.hpp"
#include "qtele/protocol.hpp"
#include "qtele/qsim.hpp"

namespace qtele {

enum class Side : std::uint8_t { B1, A2 };

struct CorrectionEntry {
  ProtocolOutcome outcome;
  PauliLabel collapse_b1;
  PauliLabel collapse_a2;
  PauliLabel recovery_b1;
  PauliLabel recovery_a2;

  friend bool operator==(const CorrectionEntry&, const CorrectionEntry&) = default;
};

class CorrectionTable {
 public:
  /// Requires exactly one entry per outcome, in any order.
  static CorrectionTable from_entries(std::vector<CorrectionEntry> entries) {
    if (entries.size() != ProtocolOutcome::kCount) {
      throw ValidationError("correction table needs " + std::to_string(ProtocolOutcome::kCount) +
                            " entries, got " + std::to_string(entries.size()));
    }
    std::array<bool, ProtocolOutcome::kCount> seen{};
    CorrectionTable table;
    for (auto& e : entries) {
      const std::size_t idx = e.outcome.index();
      if (seen[idx]) throw ValidationError("duplicate correction entry for outcome " + e.outcome.to_string());
      seen[idx] = true;
      table.entries_[idx] = e;
    }
    return table;
  }

  const CorrectionEntry& entry(const ProtocolOutcome& o) const { return entries_[o.index()]; }
  PauliLabel recovery_b1(const ProtocolOutcome& o) const { return entry(o).recovery_b1; }
  PauliLabel recovery_a2(const ProtocolOutcome& o) const { return entry(o).recovery_a2; }
  std::span<const CorrectionEntry> entries() const { return entries_; }

  /// Copy with one recovery operator replaced.
  CorrectionTable with_recovery(const ProtocolOutcome& o, Side side, PauliLabel recovery) const {
    CorrectionTable copy = *this;
    auto& e = copy.entries_[o.index()];
    (side == Side::B1 ? e.recovery_b1 : e.recovery_a2) = recovery;
    return copy;
  }

  /// collapse_B1 depends only on (k, i) and collapse_A2 only on (k, j).
  bool has_index_factorization() const {
    for (const auto& x : entries_) {
      for (const auto& y : entries_) {
        const bool same_b1_key = x.outcome.control == y.outcome.control && x.outcome.alice == y.outcome.alice;
        const bool same_a2_key = x.outcome.control == y.outcome.control && x.outcome.bob == y.outcome.bob;
        if (same_b1_key && x.collapse_b1 != y.collapse_b1) return false;
        if (same_a2_key && x.collapse_a2 != y.collapse_a2) return false;
      }
    }
    return true;
  }

  friend bool operator==(const CorrectionTable&, const CorrectionTable&) = default;

 private:
  CorrectionTable() = default;

  std::array<CorrectionEntry, ProtocolOutcome::kCount> entries_{};
};

/// No phased Pauli fits a residual; carries the raw operator estimate.
class DerivationError : public Error {
 public:
  DerivationError(const std::string& what, Matrix raw_b1, Matrix raw_a2)
      : Error(what), raw_b1_(std::move(raw_b1)), raw_a2_(std::move(raw_a2)) {}

  const Matrix& raw_b1() const { return raw_b1_; }
  const Matrix& raw_a2() const { return raw_a2_; }

 private:
  Matrix raw_b1_;
  Matrix raw_a2_;
};

namespace detail {

inline constexpr double kFitTolerance = 1e-8;

/// |0>, |1>, |+>, |+i>: enough to separate every Pauli up to phase.
inline std::array<std::pair<Complex, Complex>, 4> probe_amplitudes() {
  const double h = 1.0 / std::sqrt(2.0);
  return {{{1.0, 0.0}, {0.0, 1.0}, {h, h}, {h, Complex(0.0, h)}}};
}

inline std::vector<Complex> kron2(const std::vector<Complex>& left, const std::vector<Complex>& right) {
  return {left[0] * right[0], left[0] * right[1], left[1] * right[0], left[1] * right[1]};
}

inline std::vector<Complex> times(const Matrix& m, const InputQubit& q) {
  return {m(0, 0) * q.c0() + m(0, 1) * q.c1(), m(1, 0) * q.c0() + m(1, 1) * q.c1()};
}

inline Matrix raw_operator(const std::vector<StateVector>& images) {
  Matrix m(2, 2);
  for (Eigen::Index col = 0; col < 2; ++col) {
    m(0, col) = images[static_cast<std::size_t>(col)][0];
    m(1, col) = images[static_cast<std::size_t>(col)][1];
  }
  return m;
}

// Pauli (phase ignored) with |<P chi | image>|^2 = 1 for every probe.
inline std::vector<Pauli> phase_blind_fit(const std::vector<InputQubit>& inputs,
                                          const std::vector<StateVector>& images) {
  std::vector<Pauli> fits;
  for (const auto p : kPaulis) {
    bool ok = true;
    for (std::size_t n = 0; n < inputs.size() && ok; ++n) {
      const auto expected = StateVector::from_amplitudes(times(pauli_matrix(p), inputs[n]));
      ok = std::abs(fidelity(expected, images[n]) - 1.0) <= kFitTolerance;
    }
    if (ok) fits.push_back(p);
  }
  return fits;
}

}  // namespace detail

/// Derives the full table by forced-outcome simulation over informationally
/// complete probe inputs, then re-runs the protocol to confirm every recovery.
inline CorrectionTable derive_table() {
  std::vector<InputQubit> probes_a;
  std::vector<InputQubit> probes_b;
  for (const auto& [c0, c1] : detail::probe_amplitudes()) {
    probes_a.push_back(InputQubit::make(Party::Alice, c0, c1));
    probes_b.push_back(InputQubit::make(Party::Bob, c0, c1));
  }

  // Per outcome: B1 and A2 Paulis, and the joint phase with B1 held at +1.
  struct Fit {
    Pauli b1;
    Pauli a2;
    Phase joint;
  };
  std::array<Fit, ProtocolOutcome::kCount> fits{};
  Simulator sim(0);
  for (const auto& outcome : all_outcomes()) {
    // Every (probe_a, probe_b) pair, Alice-probe-major.
    std::vector<CollapsedRound> rounds;
    for (const auto& pa : probes_a) {
      for (const auto& pb : probes_b) rounds.push_back(collapse_round(pa, pb, outcome, sim));
    }

    // B1 images for varying chi_a at fixed chi_b = probe 0, and A2 images dually.
    std::vector<StateVector> b1_images;
    std::vector<StateVector> a2_images;
    for (std::size_t n = 0; n < probes_a.size(); ++n) b1_images.push_back(rounds[n * probes_b.size()].b1);
    for (std::size_t n = 0; n < probes_b.size(); ++n) a2_images.push_back(rounds[n].a2);

    const auto b1_fits = detail::phase_blind_fit(probes_a, b1_images);
    const auto a2_fits = detail::phase_blind_fit(probes_b, a2_images);
    if (b1_fits.size() != 1 || a2_fits.size() != 1) {
      throw DerivationError("no unique Pauli fits outcome " + outcome.to_string(), detail::raw_operator(b1_images),
                            detail::raw_operator(a2_images));
    }

    // Joint phase from the unfactored residual: search the 16-element phased
    // group on A2 with B1 fixed at phase +1.
    std::vector<PauliLabel> joint_fits;
    for (const auto& candidate : phased_pauli_group()) {
      if (candidate.op != a2_fits.front()) continue;
      bool ok = true;
      for (std::size_t pa = 0; pa < probes_a.size() && ok; ++pa) {
        for (std::size_t pb = 0; pb < probes_b.size() && ok; ++pb) {
          const auto expected = detail::kron2(detail::times(candidate.matrix(), probes_b[pb]),
                                              detail::times(pauli_matrix(b1_fits.front()), probes_a[pa]));
          const auto residual = rounds[pa * probes_b.size() + pb].residual.amplitudes();
          double err = 0.0;
          for (std::size_t s = 0; s < expected.size(); ++s) err = std::max(err, std::abs(expected[s] - residual[s]));
          ok = err <= detail::kFitTolerance;
        }
      }
      if (ok) joint_fits.push_back(candidate);
    }
    if (joint_fits.size() != 1) {
      throw DerivationError("no unique phase fits outcome " + outcome.to_string(), detail::raw_operator(b1_images),
                            detail::raw_operator(a2_images));
    }
    fits[outcome.index()] = {b1_fits.front(), a2_fits.front(), joint_fits.front().phase};
  }

  // Split joint(i, j, k) = alpha(k, i) * beta(k, j) with alpha(k, 1) = +1.
  auto joint = [&](int i, int j, int k) { return fits[ProtocolOutcome(i, j, k).index()].joint; };
  std::vector<CorrectionEntry> entries;
  for (const auto& outcome : all_outcomes()) {
    const int k = outcome.control;
    const Phase beta = joint(1, outcome.bob.value(), k);
    const Phase alpha = multiply(joint(outcome.alice.value(), 1, k), conjugate(joint(1, 1, k)));
    const Fit& fit = fits[outcome.index()];
    if (multiply(alpha, beta) != fit.joint) {
      throw DerivationError("collapse phases do not separate for outcome " + outcome.to_string(),
                            pauli_matrix(fit.b1), phase_value(fit.joint) * pauli_matrix(fit.a2));
    }
    const PauliLabel collapse_b1{fit.b1, alpha};
    const PauliLabel collapse_a2{fit.a2, beta};
    entries.push_back({outcome, collapse_b1, collapse_a2, inverse(collapse_b1), inverse(collapse_a2)});
  }

  CorrectionTable table = CorrectionTable::from_entries(std::move(entries));
  for (const auto& outcome : all_outcomes()) {
    for (const auto& pa : probes_a) {
      for (const auto& pb : probes_b) {
        const auto run = run_protocol(pa, pb, table, outcome);
        if (std::abs(run.fidelity_b1 - 1.0) > kNormTolerance || std::abs(run.fidelity_a2 - 1.0) > kNormTolerance) {
          throw DerivationError("derived recovery fails for outcome " + outcome.to_string(),
                                table.entry(outcome).recovery_b1.matrix(), table.entry(outcome).recovery_a2.matrix());
        }
      }
    }
  }
  return table;
}

struct VerificationFailure {
  std::size_t trial = 0;
  ProtocolOutcome outcome;
  double fidelity_b1 = 0.0;
  double fidelity_a2 = 0.0;
};

struct VerificationReport {
  std::size_t trials = 0;
  std::size_t cases = 0;
  double min_fidelity = 1.0;
  std::vector<VerificationFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// Random Haar input pairs crossed with all 32 forced outcomes.
inline VerificationReport verify_table(const CorrectionTable& table, std::size_t trials, std::uint64_t seed) {
  VerificationReport report;
  report.trials = trials;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto chi_a = InputQubit::random(Party::Alice, rng);
    const auto chi_b = InputQubit::random(Party::Bob, rng);
    for (const auto& outcome : all_outcomes()) {
      const auto run = run_protocol(chi_a, chi_b, table, outcome);
      ++report.cases;
      report.min_fidelity = std::min({report.min_fidelity, run.fidelity_b1, run.fidelity_a2});
      if (run.fidelity_b1 < 1.0 - kNormTolerance || run.fidelity_a2 < 1.0 - kNormTolerance) {
        report.failures.push_back({t, outcome, run.fidelity_b1, run.fidelity_a2});
      }
    }
  }
  return report;
}

inline constexpr std::string_view kTableHeader =
    "# i j k collapse_B1 phase_B1 collapse_A2 phase_A2 recovery_B1 recovery_A2";

inline std::string serialize_table(const CorrectionTable& table) {
  std::ostringstream out;
  out << kTableHeader << '\n';
  for (const auto& e : table.entries()) {
    out << e.outcome.alice.value() << ' ' << e.outcome.bob.value() << ' ' << e.outcome.control << ' '
        << to_string(e.collapse_b1.op) << ' ' << to_string(e.collapse_b1.phase) << ' ' << to_string(e.collapse_a2.op)
        << ' ' << to_string(e.collapse_a2.phase) << ' ' << to_string(e.recovery_b1.op) << ' '
        << to_string(e.recovery_a2.op) << '\n';
  }
  return out.str();
}

namespace detail {

// Recovery phases are not serialized: a recovery naming the collapse operator
// is its exact inverse, anything else carries phase +1.
inline PauliLabel recovery_from_text(Pauli op, const PauliLabel& collapse) {
  return op == collapse.op ? inverse(collapse) : PauliLabel{op, Phase::PlusOne};
}

}  // namespace detail

/// Inverse of serialize_table. Blank lines and lines starting with '#' are skipped.
inline CorrectionTable parse_table(std::string_view text) {
  std::vector<CorrectionEntry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    int i = 0;
    int j = 0;
    int k = 0;
    std::array<std::string, 6> tok;
    if (!(fields >> i >> j >> k >> tok[0] >> tok[1] >> tok[2] >> tok[3] >> tok[4] >> tok[5])) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 9 fields");
    }
    std::string extra;
    if (fields >> extra) throw ValidationError("line " + std::to_string(line_no) + ": trailing field '" + extra + "'");
    const auto cb1 = parse_pauli(tok[0]);
    const auto pb1 = parse_phase(tok[1]);
    const auto ca2 = parse_pauli(tok[2]);
    const auto pa2 = parse_phase(tok[3]);
    const auto rb1 = parse_pauli(tok[4]);
    const auto ra2 = parse_pauli(tok[5]);
    if (!cb1 || !pb1 || !ca2 || !pa2 || !rb1 || !ra2) {
      throw ValidationError("line " + std::to_string(line_no) + ": bad Pauli label or phase");
    }
    const PauliLabel collapse_b1{*cb1, *pb1};
    const PauliLabel collapse_a2{*ca2, *pa2};
    entries.push_back({ProtocolOutcome(i, j, k), collapse_b1, collapse_a2, detail::recovery_from_text(*rb1, collapse_b1),
                       detail::recovery_from_text(*ra2, collapse_a2)});
  }
  return CorrectionTable::from_entries(std::move(entries));
}

}  // namespace qtele
