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


#include "qtele/correction_table.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <string>

#include "test_util.hpp"

using namespace qtele;
namespace oracle = qtele::testing::oracle;

namespace {

const CorrectionTable& table() {
  static const CorrectionTable t = derive_table();
  return t;
}

const char* kFirstRows =
    "# i j k collapse_B1 phase_B1 collapse_A2 phase_A2 recovery_B1 recovery_A2\n"
    "1 1 0 I +1 I +1 I I\n"
    "1 1 1 Z +1 Y -i Z Y\n";

}  // namespace

TEST(DeriveTable, CoversAllOutcomesInOrder) {
  const auto entries = table().entries();
  ASSERT_EQ(entries.size(), 32u);
  for (std::size_t n = 0; n < entries.size(); ++n) EXPECT_EQ(entries[n].outcome.index(), n);
}

TEST(DeriveTable, OutcomeOneOne) {
  const auto& e0 = table().entry(ProtocolOutcome(1, 1, 0));
  EXPECT_EQ(e0.recovery_b1.op, Pauli::I);
  EXPECT_EQ(e0.recovery_a2.op, Pauli::I);
  const auto& e1 = table().entry(ProtocolOutcome(1, 1, 1));
  EXPECT_EQ(e1.recovery_b1.op, Pauli::Z);
  EXPECT_EQ(e1.recovery_a2.op, Pauli::Y);
  // Y (b0|0> + b1|1>) = i (b0|1> - b1|0>): the collapse on A2 is Y with phase -i.
  EXPECT_EQ(e1.collapse_a2, (PauliLabel{Pauli::Y, Phase::MinusI}));
  EXPECT_EQ(e1.collapse_b1, (PauliLabel{Pauli::Z, Phase::PlusOne}));
}

TEST(DeriveTable, AgreesWithBruteForceFit) {
  for (const auto& e : table().entries()) {
    const auto fit = oracle::fit_residual(e.outcome.alice.value(), e.outcome.bob.value(), e.outcome.control);
    ASSERT_TRUE(fit.has_value()) << e.outcome.to_string();
    EXPECT_EQ(e.collapse_a2.op, fit->a2) << e.outcome.to_string();
    EXPECT_EQ(e.collapse_b1.op, fit->b1) << e.outcome.to_string();
    const Complex joint = phase_value(e.collapse_a2.phase) * phase_value(e.collapse_b1.phase);
    EXPECT_LT(std::abs(joint - fit->phase), 1e-12) << e.outcome.to_string();
  }
}

TEST(DeriveTable, RecoveriesArePauliOnly) {
  for (const auto& e : table().entries()) {
    EXPECT_EQ(e.recovery_b1.unphased(), PauliLabel{e.recovery_b1.op});
    EXPECT_TRUE(equal_up_to_phase(e.recovery_b1.matrix(), pauli_matrix(e.recovery_b1.op), 1e-15));
    EXPECT_EQ(e.recovery_b1.op, e.collapse_b1.op);
    EXPECT_EQ(e.recovery_a2.op, e.collapse_a2.op);
  }
}

TEST(DeriveTable, RecoveryInvertsCollapseExactly) {
  const Matrix id = Matrix::Identity(2, 2);
  for (const auto& e : table().entries()) {
    EXPECT_TRUE((e.recovery_b1.matrix() * e.collapse_b1.matrix()).isApprox(id, 1e-15)) << e.outcome.to_string();
    EXPECT_TRUE((e.recovery_a2.matrix() * e.collapse_a2.matrix()).isApprox(id, 1e-15)) << e.outcome.to_string();
    // Pauli recoveries are involutions up to phase.
    EXPECT_TRUE(equal_up_to_phase(e.recovery_b1.matrix() * e.recovery_b1.matrix(), id, 1e-15));
  }
}

TEST(DeriveTable, CollapseFactorsByControlAndBellIndex) {
  EXPECT_TRUE(table().has_index_factorization());
  for (const auto& e : table().entries()) {
    const auto& ref_b1 = table().entry(ProtocolOutcome(e.outcome.alice.value(), 1, e.outcome.control));
    const auto& ref_a2 = table().entry(ProtocolOutcome(1, e.outcome.bob.value(), e.outcome.control));
    EXPECT_EQ(e.collapse_b1, ref_b1.collapse_b1);
    EXPECT_EQ(e.collapse_a2, ref_a2.collapse_a2);
  }
}

TEST(DeriveTable, FactorizationCheckDetectsViolation) {
  const auto o = ProtocolOutcome(2, 3, 0);
  auto entries = std::vector<CorrectionEntry>(table().entries().begin(), table().entries().end());
  entries[o.index()].collapse_b1 = {Pauli::X, Phase::PlusOne};
  EXPECT_FALSE(CorrectionTable::from_entries(entries).has_index_factorization());
}

TEST(VerifyTable, DerivedTablePasses) {
  const auto report = verify_table(table(), 100, 0);
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.cases, 3200u);
  EXPECT_GE(report.min_fidelity, 1.0 - 1e-10);
}

TEST(VerifyTable, ZeroTrialsIsVacuous) {
  const auto report = verify_table(table(), 0, 0);
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.cases, 0u);
}

TEST(VerifyTable, EverySingleMutationIsCaught) {
  for (const auto& e : table().entries()) {
    for (const auto side : {Side::B1, Side::A2}) {
      const Pauli original = side == Side::B1 ? e.recovery_b1.op : e.recovery_a2.op;
      for (const auto p : kPaulis) {
        if (p == original) continue;
        const auto mutated = table().with_recovery(e.outcome, side, {p});
        const auto report = verify_table(mutated, 2, 11);
        ASSERT_FALSE(report.passed()) << e.outcome.to_string();
        for (const auto& f : report.failures) EXPECT_EQ(f.outcome, e.outcome);
        EXPECT_EQ(report.failures.size(), 2u);
      }
    }
  }
}

TEST(Serialization, Format) {
  const auto text = serialize_table(table());
  EXPECT_EQ(text.rfind(kFirstRows, 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 33);
}

TEST(Serialization, RoundTrip) {
  const auto text = serialize_table(table());
  const auto back = parse_table(text);
  EXPECT_EQ(back, table());
  EXPECT_EQ(serialize_table(back), text);
}

TEST(Serialization, DerivationIsDeterministic) {
  EXPECT_EQ(serialize_table(derive_table()), serialize_table(table()));
}

TEST(Serialization, ParseErrors) {
  const auto text = serialize_table(table());
  EXPECT_THROW(parse_table("1 1 0 I +1 I +1 I\n"), ValidationError);
  EXPECT_THROW(parse_table("1 1 0 I +1 I +1 I I extra\n"), ValidationError);
  EXPECT_THROW(parse_table("1 1 0 Q +1 I +1 I I\n"), ValidationError);
  EXPECT_THROW(parse_table("1 1 0 I +2 I +1 I I\n"), ValidationError);
  EXPECT_THROW(parse_table(text + "1 1 0 I +1 I +1 I I\n"), ValidationError);  // duplicate
  EXPECT_THROW(parse_table(text.substr(0, text.rfind("4 4 1"))), ValidationError);  // missing row
  EXPECT_THROW(parse_table("5 1 0 I +1 I +1 I I\n"), ValidationError);
}
