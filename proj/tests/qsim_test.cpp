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

#include "qtele/qsim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qtele/protocol.hpp"
#include "test_util.hpp"

using namespace qtele;
using qtele::testing::random_state;
using qtele::testing::random_unitary;

namespace {

const double kH = 1.0 / std::sqrt(2.0);

void expect_amplitudes(const StateVector& s, const std::vector<Complex>& ref, double tol = 1e-12) {
  ASSERT_EQ(s.dimension(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(s[i].real(), ref[i].real(), tol) << "i=" << i;
    EXPECT_NEAR(s[i].imag(), ref[i].imag(), tol) << "i=" << i;
  }
}

// Kronecker-expanded operator I (x) ... M ... (x) I for contiguous targets,
// built independently of apply()'s gather/scatter path.
Matrix embed_contiguous(const Matrix& m, std::size_t first, std::size_t k, std::size_t n) {
  const auto left = static_cast<Eigen::Index>(std::size_t{1} << first);
  const auto right = static_cast<Eigen::Index>(std::size_t{1} << (n - first - k));
  const auto dm = m.rows();
  Matrix out = Matrix::Zero(left * dm * right, left * dm * right);
  for (Eigen::Index l = 0; l < left; ++l) {
    for (Eigen::Index r0 = 0; r0 < dm; ++r0) {
      for (Eigen::Index c0 = 0; c0 < dm; ++c0) {
        for (Eigen::Index r = 0; r < right; ++r) {
          out((l * dm + r0) * right + r, (l * dm + c0) * right + r) = m(r0, c0);
        }
      }
    }
  }
  return out;
}

// Schmidt coefficients across {q} | rest from the closed-form eigenvalues of
// the 2x2 reduced density matrix.
std::array<double, 2> single_qubit_schmidt(const StateVector& s, std::size_t q) {
  const std::size_t n = s.num_qubits();
  const std::size_t mask = std::size_t{1} << (n - 1 - q);
  Complex r00 = 0.0;
  Complex r01 = 0.0;
  Complex r11 = 0.0;
  for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
    if (idx & mask) continue;
    const Complex x0 = s[idx];
    const Complex x1 = s[idx | mask];
    r00 += x0 * std::conj(x0);
    r01 += x0 * std::conj(x1);
    r11 += x1 * std::conj(x1);
  }
  const double tr = (r00 + r11).real();
  const double det = (r00 * r11 - r01 * std::conj(r01)).real();
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
  return {std::sqrt((tr + disc) / 2), std::sqrt(std::max(0.0, (tr - disc) / 2))};
}

}  // namespace

// ---------- construction ----------

TEST(StateVector, RejectsUnnormalizedAmplitudes) {
  EXPECT_THROW(StateVector::from_amplitudes({1.0, 1.0}), ValidationError);
  EXPECT_NO_THROW(StateVector::from_amplitudes({kH, kH}));
}

TEST(StateVector, RejectsNonPowerOfTwoLength) {
  EXPECT_THROW(StateVector::from_amplitudes({1.0, 0.0, 0.0}), ValidationError);
}

TEST(StateVector, EnforcesQubitCap) {
  EXPECT_NO_THROW(StateVector::basis(10, 0));
  EXPECT_THROW(StateVector::basis(11, 0), CapacityError);
  std::vector<Complex> big(std::size_t{1} << 11, 0.0);
  big[0] = 1.0;
  EXPECT_THROW(StateVector::from_amplitudes(big), CapacityError);
}

TEST(StateVector, LabelsResolveToPositions) {
  const auto s = StateVector::basis("010", {"x", "y", "z"});
  EXPECT_EQ(s.position_of("z"), 2u);
  EXPECT_EQ(s.qubit(1), (QubitId{"y", 1}));
  EXPECT_THROW(s.position_of("w"), IndexError);
  EXPECT_THROW(StateVector::basis("01", {"x", "x"}), ValidationError);
  EXPECT_EQ(s.amplitude("010"), Complex(1.0, 0.0));
}

// ---------- tensor_product ----------

TEST(TensorProduct, BasisStates) {
  expect_amplitudes(tensor_product(StateVector::basis("0"), StateVector::basis("1")), {0, 1, 0, 0});
}

TEST(TensorProduct, IdentityOnSecondFactor) {
  const Complex alpha{0.6, 0.0};
  const Complex beta{0.0, 0.8};
  const auto left = StateVector::from_amplitudes({alpha, beta});
  expect_amplitudes(tensor_product(left, StateVector::basis("0")), {alpha, 0.0, beta, 0.0});
}

TEST(TensorProduct, LeftRegisterIsMostSignificant) {
  const auto s = tensor_product(StateVector::basis("10", {"p", "q"}), StateVector::basis("1", {"r"}));
  EXPECT_EQ(s.amplitude("101"), Complex(1.0, 0.0));
  EXPECT_EQ(s.labels(), (std::vector<std::string>{"p", "q", "r"}));
}

TEST(TensorProduct, CapacityError) {
  EXPECT_THROW(tensor_product(StateVector::basis(6, 0), StateVector::basis(5, 0)), CapacityError);
  EXPECT_NO_THROW(tensor_product(StateVector::basis(5, 0), StateVector::basis(5, 0)));
}

TEST(TensorProduct, DuplicateLabelsRejected) {
  EXPECT_THROW(tensor_product(StateVector::basis("0", {"a"}), StateVector::basis("0", {"a"})), ValidationError);
}

// ---------- apply ----------

TEST(Apply, IdentityLeavesStateUnchanged) {
  std::mt19937_64 rng(1);
  const auto s = random_state(4, rng);
  const auto out = apply(s, QOperator::identity({1, 3}));
  for (std::size_t i = 0; i < s.dimension(); ++i) EXPECT_EQ(out[i], s[i]);
}

TEST(Apply, PauliXOnMiddleQubit) {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  const auto out = apply(StateVector::basis("000"), QOperator(x, {1}));
  EXPECT_EQ(out.amplitude("010"), Complex(1.0, 0.0));
}

TEST(Apply, TargetOrderSetsMatrixBitOrder) {
  // CNOT with control = first target.
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
  EXPECT_EQ(apply(StateVector::basis("10"), QOperator(cnot, {0, 1})).amplitude("11"), Complex(1.0, 0.0));
  EXPECT_EQ(apply(StateVector::basis("10"), QOperator(cnot, {1, 0})).amplitude("10"), Complex(1.0, 0.0));
  EXPECT_EQ(apply(StateVector::basis("01"), QOperator(cnot, {1, 0})).amplitude("11"), Complex(1.0, 0.0));
}

TEST(Apply, MatchesKroneckerEmbedding) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5;
    const std::size_t k = 1 + trial % 3;
    const std::size_t first = static_cast<std::size_t>(trial) % (n - k + 1);
    const auto s = random_state(n, rng);
    const Matrix u = random_unitary(k, rng);
    std::vector<std::size_t> targets(k);
    for (std::size_t m = 0; m < k; ++m) targets[m] = first + m;
    const auto out = apply(s, QOperator(u, targets));
    const Matrix full = embed_contiguous(u, first, k, n);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dimension()));
    for (std::size_t i = 0; i < s.dimension(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
    const Eigen::VectorXcd ref = full * v;
    for (std::size_t i = 0; i < s.dimension(); ++i) EXPECT_LT(std::abs(out[i] - ref(static_cast<Eigen::Index>(i))), 1e-12);
  }
}

TEST(Apply, InverseRestoresState) {
  std::mt19937_64 rng(3);
  const auto s = random_state(6, rng);
  const QOperator u(random_unitary(2, rng), {4, 1});
  const auto back = apply(apply(s, u), u.adjoint());
  EXPECT_NEAR(fidelity(back, s), 1.0, 1e-10);
  for (std::size_t i = 0; i < s.dimension(); ++i) EXPECT_LT(std::abs(back[i] - s[i]), 1e-10);
}

TEST(Apply, RejectsNonUnitaryMatrix) {
  Matrix m(2, 2);
  m << 1, 1, 0, 1;
  EXPECT_THROW(QOperator(m, {0}), ValidationError);
}

TEST(Apply, RejectsBadTargets) {
  const auto s = StateVector::basis(3, 0);
  EXPECT_THROW(apply(s, QOperator::identity({3})), IndexError);
  EXPECT_THROW(QOperator::identity({1, 1}), IndexError);
  EXPECT_THROW(QOperator(Matrix::Identity(4, 4), {0}), ValidationError);
}

TEST(ApplyProperty, NormPreserved) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 7;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 3);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    const std::vector<std::size_t> targets(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    const auto out = apply(random_state(n, rng), QOperator(random_unitary(k, rng), targets));
    EXPECT_NEAR(out.norm(), 1.0, 1e-10);
  }
}

TEST(ApplyProperty, DisjointOperatorsCommute) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(6, rng);
    std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
    std::shuffle(all.begin(), all.end(), rng);
    const QOperator ua(random_unitary(2, rng), {all[0], all[1]});
    const QOperator vb(random_unitary(1, rng), {all[2]});
    const auto ab = apply(apply(s, ua), vb);
    const auto ba = apply(apply(s, vb), ua);
    for (std::size_t i = 0; i < s.dimension(); ++i) EXPECT_LT(std::abs(ab[i] - ba[i]), 1e-12);
  }
}

// ---------- measure ----------

TEST(Measure, BellProjectionOfZeroZero) {
  const auto r = measure(StateVector::basis("00"), bell_basis(), std::vector<std::size_t>{0, 1}, 0);
  EXPECT_NEAR(r.probability, 0.5, 1e-12);
  EXPECT_EQ(r.post_state.num_qubits(), 0u);
  EXPECT_EQ(r.label, "1");
}

TEST(Measure, ImpossibleOutcomeThrows) {
  EXPECT_THROW(measure(StateVector::basis("00"), bell_basis(), std::vector<std::size_t>{0, 1}, 2),
               ImpossibleOutcomeError);
  EXPECT_THROW(measure(StateVector::basis("0"), MeasurementBasis::computational(1), std::vector<std::size_t>{0}, 1),
               ImpossibleOutcomeError);
}

TEST(Measure, ArityMismatchRejected) {
  EXPECT_THROW(measure(StateVector::basis("00"), bell_basis(), std::vector<std::size_t>{0}, 0), ValidationError);
}

TEST(Measure, RemovesMeasuredQubitsByDefault) {
  const auto s = tensor_product(StateVector::basis("1", {"x"}),
                                StateVector::from_amplitudes({kH, 0, 0, kH}, {"y", "z"}));
  const auto r = measure(s, MeasurementBasis::computational(1), std::vector<std::size_t>{0}, 1);
  EXPECT_NEAR(r.probability, 1.0, 1e-12);
  EXPECT_EQ(r.post_state.labels(), (std::vector<std::string>{"y", "z"}));
  expect_amplitudes(r.post_state, {kH, 0, 0, kH});
}

TEST(Measure, RetainKeepsCollapsedQubits) {
  const auto s = StateVector::from_amplitudes({kH, 0, 0, kH}, {"y", "z"});
  const auto r = measure(s, MeasurementBasis::computational(1), std::vector<std::size_t>{1}, 1, {.retain = true});
  EXPECT_NEAR(r.probability, 0.5, 1e-12);
  expect_amplitudes(r.post_state, {0, 0, 0, 1});
  EXPECT_EQ(r.post_state.labels(), s.labels());
}

TEST(MeasureProperty, ProbabilitiesSumToOne) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const auto s = random_state(n, rng);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    const std::vector<std::size_t> pair{all[0], all[1]};
    const auto probs = outcome_probabilities(s, bell_basis(), pair);
    EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-10);
    const std::vector<std::size_t> one{all[0]};
    const auto p1 = outcome_probabilities(s, MeasurementBasis::computational(1), one);
    EXPECT_NEAR(p1[0] + p1[1], 1.0, 1e-10);
  }
}

TEST(MeasureProperty, RepeatedProjectionIsCertain) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(4, rng);
    const std::vector<std::size_t> pair{3, 1};
    const std::size_t outcome = rng() % 4;
    const auto first = measure(s, bell_basis(), pair, outcome, {.retain = true});
    const auto second = measure(first.post_state, bell_basis(), pair, outcome, {.retain = true});
    EXPECT_NEAR(second.probability, 1.0, 1e-10);
  }
}

TEST(Simulator, SamplingFollowsBornRule) {
  // |psi> = sqrt(0.2)|0> + sqrt(0.8)|1>
  const auto s = StateVector::from_amplitudes({std::sqrt(0.2), std::sqrt(0.8)});
  Simulator sim(5);
  int ones = 0;
  const int shots = 20000;
  for (int n = 0; n < shots; ++n) {
    ones += static_cast<int>(sim.measure(s, MeasurementBasis::computational(1), std::vector<std::size_t>{0}).outcome);
  }
  // 5 sigma with sigma = sqrt(N p (1-p)) ~ 56.6
  EXPECT_NEAR(ones, 0.8 * shots, 5 * std::sqrt(shots * 0.16));
}

TEST(Simulator, SameSeedSameOutcomes) {
  const auto s = StateVector::from_amplitudes({0.5, 0.5, 0.5, 0.5});
  Simulator a(99);
  Simulator b(99);
  for (int n = 0; n < 100; ++n) {
    EXPECT_EQ(a.measure(s, bell_basis(), std::vector<std::size_t>{0, 1}).outcome,
              b.measure(s, bell_basis(), std::vector<std::size_t>{0, 1}).outcome);
  }
}

TEST(MeasurementBasis, RejectsNonOrthonormalVectors) {
  EXPECT_THROW(MeasurementBasis({{1, 0}, {kH, kH}}, {"0", "1"}), ValidationError);
  EXPECT_THROW(MeasurementBasis({{1, 0}, {0, 2}}, {"0", "1"}), ValidationError);
  EXPECT_THROW(MeasurementBasis({{1, 0}, {0, 1}}, {"0"}), ValidationError);
  EXPECT_EQ(bell_basis().index_of("3"), 2u);
}

// ---------- factorize_bipartite ----------

TEST(Factorize, RecoversProductFactors) {
  const auto b = StateVector::from_amplitudes({Complex(0.6, 0.0), Complex(0.0, -0.8)});
  const auto a = StateVector::from_amplitudes({Complex(kH, 0.0), Complex(0.5, 0.5)});
  const auto s = tensor_product(b, a);
  const auto f = factorize_bipartite(s, std::vector<std::size_t>{0});
  ASSERT_TRUE(f.is_product());
  EXPECT_NEAR(fidelity(f.factors->first, b), 1.0, 1e-10);
  EXPECT_NEAR(fidelity(f.factors->second, a), 1.0, 1e-10);
  EXPECT_LT(f.schmidt[1], kSchmidtRankTolerance);
}

TEST(Factorize, PhaseConvention) {
  // Global phase i on the product; right factor's leading amplitude is made real.
  const Complex i{0.0, 1.0};
  const auto s = StateVector::from_amplitudes({0.0, 0.0, i * kH, -i * kH});
  const auto f = factorize_bipartite(s, std::vector<std::size_t>{0});
  ASSERT_TRUE(f.is_product());
  const auto& right = f.factors->second;
  EXPECT_NEAR(right[0].imag(), 0.0, 1e-12);
  EXPECT_GT(right[0].real(), 0.0);
  // Product of the factors reproduces the state amplitude-wise, phase included.
  const auto back = tensor_product(f.factors->first, right);
  for (std::size_t n = 0; n < s.dimension(); ++n) EXPECT_LT(std::abs(back[n] - s[n]), 1e-12);
}

TEST(Factorize, BellStateIsNotAProduct) {
  const auto f = factorize_bipartite(bell_states()[0], std::vector<std::size_t>{0});
  EXPECT_FALSE(f.is_product());
  ASSERT_EQ(f.schmidt.size(), 2u);
  EXPECT_NEAR(f.schmidt[0], kH, 1e-12);
  EXPECT_NEAR(f.schmidt[1], kH, 1e-12);
}

TEST(Factorize, BrownStateFirstQubitCut) {
  const auto s = brown_state();
  const auto oracle = single_qubit_schmidt(s, 0);
  const auto f = factorize_bipartite(s, std::vector<std::size_t>{0});
  EXPECT_FALSE(f.is_product());
  EXPECT_NEAR(f.schmidt[0], oracle[0], 1e-12);
  EXPECT_NEAR(f.schmidt[1], oracle[1], 1e-12);
  EXPECT_NEAR(oracle[1], kH, 1e-12);
}

TEST(FactorizeProperty, RoundTripThroughTensorProduct) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nl = 1 + rng() % 3;
    const std::size_t nr = 1 + rng() % 3;
    const auto l = random_state(nl, rng);
    const auto r = random_state(nr, rng);
    const auto s = tensor_product(l, r);
    std::vector<std::size_t> left(nl);
    std::iota(left.begin(), left.end(), 0);
    const auto f = factorize_bipartite(s, left);
    ASSERT_TRUE(f.is_product());
    EXPECT_NEAR(fidelity(tensor_product(f.factors->first, f.factors->second), s), 1.0, 1e-10);
    EXPECT_NEAR(fidelity(f.factors->first, l), 1.0, 1e-10);
  }
}

TEST(FactorizeProperty, SchmidtMatchesReducedDensityOracle) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const auto s = random_state(n, rng);
    const std::size_t q = rng() % n;
    const auto oracle = single_qubit_schmidt(s, q);
    const auto sc = schmidt_coefficients(s, std::vector<std::size_t>{q});
    EXPECT_NEAR(sc[0], oracle[0], 1e-10);
    EXPECT_NEAR(sc[1], oracle[1], 1e-7);
  }
}

// ---------- fidelity ----------

TEST(Fidelity, Basics) {
  std::mt19937_64 rng(41);
  const auto s = random_state(3, rng);
  EXPECT_NEAR(fidelity(s, s), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(StateVector::basis("0"), StateVector::basis("1")), 0.0, 1e-12);
  EXPECT_THROW(fidelity(StateVector::basis("0"), StateVector::basis("00")), ValidationError);
}

TEST(Fidelity, PlusAgainstPhaseFlippedPlus) {
  // (|a0|^2 - |a1|^2)^2 = 0 for a0 = a1 = 1/sqrt2
  EXPECT_NEAR(fidelity(StateVector::from_amplitudes({kH, kH}), StateVector::from_amplitudes({kH, -kH})), 0.0, 1e-12);
}

TEST(FidelityProperty, GlobalPhaseInvariant) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_state(3, rng);
    const auto b = random_state(3, rng);
    const Complex phase = std::polar(1.0, angle(rng));
    std::vector<Complex> rotated(b.amplitudes().begin(), b.amplitudes().end());
    for (auto& z : rotated) z *= phase;
    EXPECT_NEAR(fidelity(a, StateVector::from_amplitudes(rotated)), fidelity(a, b), 1e-12);
    const double f = fidelity(a, b);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-12);
  }
}
