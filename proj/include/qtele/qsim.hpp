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

// Dense state-vector engine for small registers (up to kMaxQubits qubits).
//
// Bit ordering: register position 0 is the leftmost ket symbol and the most
// significant bit of the amplitude index, so |q0 q1 ... q(n-1)> sits at index
// q0*2^(n-1) + ... + q(n-1).
//
// StateVector values are immutable; every operation returns a new value.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace qtele {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr std::size_t kMaxQubits = 10;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kImpossibleOutcomeCutoff = 1e-12;
inline constexpr double kSchmidtRankTolerance = 1e-8;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Register would exceed kMaxQubits.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed or non-normalized state, non-unitary operator, non-orthonormal basis.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Qubit position or label not present in the register.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A forced measurement outcome whose probability is below kImpossibleOutcomeCutoff.
class ImpossibleOutcomeError : public Error {
 public:
  using Error::Error;
};

struct QubitId {
  std::string label;
  std::size_t position = 0;

  friend bool operator==(const QubitId&, const QubitId&) = default;
};

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t log2_exact(std::size_t n) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

inline double squared_norm(std::span<const Complex> v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  return acc;
}

inline Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

// Index bit carried by register position `pos` in an n-qubit register.
inline std::size_t position_mask(std::size_t n, std::size_t pos) {
  return std::size_t{1} << (n - 1 - pos);
}

// offsets[s] = amplitude-index bits for sub-index s laid out over `positions`,
// with positions[0] as the most significant bit of s.
inline std::vector<std::size_t> scatter_offsets(std::size_t n,
                                                std::span<const std::size_t> positions) {
  const std::size_t k = positions.size();
  std::vector<std::size_t> offsets(std::size_t{1} << k, 0);
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    std::size_t idx = 0;
    for (std::size_t m = 0; m < k; ++m) {
      if ((s >> (k - 1 - m)) & 1U) idx |= position_mask(n, positions[m]);
    }
    offsets[s] = idx;
  }
  return offsets;
}

inline std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> positions) {
  std::vector<std::size_t> rest;
  for (std::size_t p = 0; p < n; ++p) {
    if (std::find(positions.begin(), positions.end(), p) == positions.end()) rest.push_back(p);
  }
  return rest;
}

inline void check_positions(std::size_t n, std::span<const std::size_t> positions) {
  for (std::size_t m = 0; m < positions.size(); ++m) {
    if (positions[m] >= n) {
      throw IndexError("qubit position " + std::to_string(positions[m]) +
                       " out of range for a " + std::to_string(n) + "-qubit register");
    }
    for (std::size_t q = 0; q < m; ++q) {
      if (positions[q] == positions[m]) {
        throw IndexError("duplicate qubit position " + std::to_string(positions[m]));
      }
    }
  }
}

inline bool is_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const Matrix gram = m.adjoint() * m;
  return (gram - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace detail

class StateVector;

namespace detail {
// Unchecked construction for values whose invariants already hold.
inline StateVector make_state(std::vector<Complex> amplitudes, std::vector<std::string> labels);
}  // namespace detail

class StateVector {
 public:
  /// The empty register: zero qubits, a single amplitude 1.
  StateVector() : amplitudes_{Complex{1.0, 0.0}} {}

  /// Validates length (power of two, at most 2^kMaxQubits), unit norm within
  /// kNormTolerance, and label uniqueness. Empty labels are permitted and may repeat.
  static StateVector from_amplitudes(std::vector<Complex> amplitudes,
                                     std::vector<std::string> labels = {}) {
    if (!detail::is_power_of_two(amplitudes.size())) {
      throw ValidationError("amplitude count " + std::to_string(amplitudes.size()) +
                            " is not a power of two");
    }
    const std::size_t n = detail::log2_exact(amplitudes.size());
    if (n > kMaxQubits) {
      throw CapacityError("register of " + std::to_string(n) + " qubits exceeds the cap of " +
                          std::to_string(kMaxQubits));
    }
    const double norm2 = detail::squared_norm(amplitudes);
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
      throw ValidationError("state is not normalized (squared norm " + std::to_string(norm2) + ")");
    }
    return StateVector(std::move(amplitudes), checked_labels(n, std::move(labels)));
  }

  /// Computational basis state |index> on n qubits.
  static StateVector basis(std::size_t n, std::uint64_t index, std::vector<std::string> labels = {}) {
    if (n > kMaxQubits) {
      throw CapacityError("register of " + std::to_string(n) + " qubits exceeds the cap of " +
                          std::to_string(kMaxQubits));
    }
    const std::size_t dim = std::size_t{1} << n;
    if (index >= dim) throw IndexError("basis index out of range");
    std::vector<Complex> amps(dim, Complex{0.0, 0.0});
    amps[index] = 1.0;
    return StateVector(std::move(amps), checked_labels(n, std::move(labels)));
  }

  /// Basis state from a bit string such as "0101"; character 0 is position 0.
  static StateVector basis(std::string_view bits, std::vector<std::string> labels = {}) {
    return basis(bits.size(), parse_bits(bits), std::move(labels));
  }

  /// Scales an arbitrary nonzero vector to unit norm.
  static StateVector normalized(std::vector<Complex> amplitudes, std::vector<std::string> labels = {}) {
    const double norm = std::sqrt(detail::squared_norm(amplitudes));
    if (norm < kImpossibleOutcomeCutoff) throw ValidationError("cannot normalize a zero vector");
    for (auto& z : amplitudes) z /= norm;
    return from_amplitudes(std::move(amplitudes), std::move(labels));
  }

  std::size_t num_qubits() const { return detail::log2_exact(amplitudes_.size()); }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  Complex operator[](std::size_t index) const { return amplitudes_.at(index); }

  Complex amplitude(std::string_view bits) const {
    if (bits.size() != num_qubits()) throw IndexError("bit string length does not match register");
    return amplitudes_[parse_bits(bits)];
  }

  const std::vector<std::string>& labels() const { return labels_; }

  QubitId qubit(std::size_t position) const {
    if (position >= num_qubits()) throw IndexError("qubit position out of range");
    return {labels_[position], position};
  }

  std::size_t position_of(std::string_view label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (label.empty() || it == labels_.end()) {
      throw IndexError("no qubit labelled '" + std::string(label) + "'");
    }
    return static_cast<std::size_t>(it - labels_.begin());
  }

  std::vector<std::size_t> positions_of(std::span<const std::string> labels) const {
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(position_of(l));
    return out;
  }

  double norm() const { return std::sqrt(detail::squared_norm(amplitudes_)); }

  StateVector relabeled(std::vector<std::string> labels) const {
    return StateVector(amplitudes_, checked_labels(num_qubits(), std::move(labels)));
  }

 private:
  StateVector(std::vector<Complex> amplitudes, std::vector<std::string> labels)
      : amplitudes_(std::move(amplitudes)), labels_(std::move(labels)) {}

  static std::uint64_t parse_bits(std::string_view bits) {
    std::uint64_t index = 0;
    for (char c : bits) {
      if (c != '0' && c != '1') throw ValidationError("bit string may only contain 0 and 1");
      index = (index << 1U) | static_cast<std::uint64_t>(c == '1');
    }
    return index;
  }

  static std::vector<std::string> checked_labels(std::size_t n, std::vector<std::string> labels) {
    if (labels.empty()) return std::vector<std::string>(n);
    if (labels.size() != n) {
      throw ValidationError("expected " + std::to_string(n) + " labels, got " +
                            std::to_string(labels.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i].empty()) continue;
      for (std::size_t j = 0; j < i; ++j) {
        if (labels[j] == labels[i]) throw ValidationError("duplicate qubit label '" + labels[i] + "'");
      }
    }
    return labels;
  }

  friend StateVector detail::make_state(std::vector<Complex>, std::vector<std::string>);

  std::vector<Complex> amplitudes_;
  std::vector<std::string> labels_;
};

/// Unitary acting on an ordered list of register positions. targets[0] is the
/// most significant bit of the matrix row/column index.
class QOperator {
 public:
  QOperator(Matrix matrix, std::vector<std::size_t> targets)
      : matrix_(std::move(matrix)), targets_(std::move(targets)) {
    const auto dim = static_cast<std::size_t>(matrix_.rows());
    if (matrix_.rows() != matrix_.cols() || dim != (std::size_t{1} << targets_.size())) {
      throw ValidationError("operator matrix must be 2^k x 2^k for k targets");
    }
    if (!detail::is_unitary(matrix_, kNormTolerance)) throw ValidationError("operator is not unitary");
    for (std::size_t m = 0; m < targets_.size(); ++m) {
      for (std::size_t q = 0; q < m; ++q) {
        if (targets_[q] == targets_[m]) throw IndexError("duplicate operator target");
      }
    }
  }

  static QOperator identity(std::vector<std::size_t> targets) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << targets.size());
    return QOperator(Matrix::Identity(dim, dim), std::move(targets));
  }

  std::size_t arity() const { return targets_.size(); }
  const Matrix& matrix() const { return matrix_; }
  const std::vector<std::size_t>& targets() const { return targets_; }

  QOperator adjoint() const { return QOperator(matrix_.adjoint(), targets_); }
  QOperator retargeted(std::vector<std::size_t> targets) const {
    return QOperator(matrix_, std::move(targets));
  }

 private:
  Matrix matrix_;
  std::vector<std::size_t> targets_;
};

/// Orthonormal basis on k qubits with one label per outcome.
class MeasurementBasis {
 public:
  MeasurementBasis(std::vector<std::vector<Complex>> vectors, std::vector<std::string> labels)
      : vectors_(std::move(vectors)), labels_(std::move(labels)) {
    if (!detail::is_power_of_two(vectors_.size())) {
      throw ValidationError("basis must contain 2^k vectors");
    }
    if (labels_.size() != vectors_.size()) throw ValidationError("one label per basis vector required");
    arity_ = detail::log2_exact(vectors_.size());
    for (std::size_t a = 0; a < vectors_.size(); ++a) {
      if (vectors_[a].size() != vectors_.size()) throw ValidationError("basis vector has wrong length");
      for (std::size_t b = 0; b <= a; ++b) {
        const Complex ip = detail::inner(vectors_[b], vectors_[a]);
        const double expected = (a == b) ? 1.0 : 0.0;
        if (std::abs(ip - expected) > kNormTolerance) {
          throw ValidationError("basis vectors are not orthonormal");
        }
      }
    }
  }

  static MeasurementBasis computational(std::size_t k) {
    const std::size_t dim = std::size_t{1} << k;
    std::vector<std::vector<Complex>> vecs(dim, std::vector<Complex>(dim, Complex{0.0, 0.0}));
    std::vector<std::string> labels(dim);
    for (std::size_t s = 0; s < dim; ++s) {
      vecs[s][s] = 1.0;
      std::string bits(k, '0');
      for (std::size_t m = 0; m < k; ++m) {
        if ((s >> (k - 1 - m)) & 1U) bits[m] = '1';
      }
      labels[s] = bits;
    }
    return MeasurementBasis(std::move(vecs), std::move(labels));
  }

  std::size_t arity() const { return arity_; }
  std::size_t size() const { return vectors_.size(); }
  std::span<const Complex> vector(std::size_t outcome) const { return vectors_.at(outcome); }
  const std::string& label(std::size_t outcome) const { return labels_.at(outcome); }

  std::size_t index_of(std::string_view label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw IndexError("no basis outcome labelled '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

 private:
  std::vector<std::vector<Complex>> vectors_;
  std::vector<std::string> labels_;
  std::size_t arity_ = 0;
};

struct MeasurementResult {
  std::size_t outcome = 0;
  std::string label;
  double probability = 0.0;
  StateVector post_state;
};

inline StateVector detail::make_state(std::vector<Complex> amplitudes, std::vector<std::string> labels) {
  return StateVector(std::move(amplitudes), std::move(labels));
}

/// Left-register-major Kronecker product.
inline StateVector tensor_product(const StateVector& left, const StateVector& right) {
  const std::size_t n = left.num_qubits() + right.num_qubits();
  if (n > kMaxQubits) {
    throw CapacityError("combined register of " + std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(kMaxQubits));
  }
  std::vector<Complex> amps;
  amps.reserve(left.dimension() * right.dimension());
  for (const auto& l : left.amplitudes()) {
    for (const auto& r : right.amplitudes()) amps.push_back(l * r);
  }
  std::vector<std::string> labels = left.labels();
  labels.insert(labels.end(), right.labels().begin(), right.labels().end());
  return detail::make_state(std::move(amps), std::vector<std::string>(n)).relabeled(std::move(labels));
}

inline StateVector apply(const StateVector& state, const QOperator& op) {
  const std::size_t n = state.num_qubits();
  detail::check_positions(n, op.targets());
  const auto target_offsets = detail::scatter_offsets(n, op.targets());
  const auto rest = detail::complement(n, op.targets());
  const auto rest_offsets = detail::scatter_offsets(n, rest);
  const Matrix& m = op.matrix();
  const std::size_t dim = target_offsets.size();

  std::vector<Complex> out(state.dimension(), Complex{0.0, 0.0});
  std::vector<Complex> local(dim);
  for (const std::size_t base : rest_offsets) {
    for (std::size_t s = 0; s < dim; ++s) local[s] = state.amplitudes()[base | target_offsets[s]];
    for (std::size_t row = 0; row < dim; ++row) {
      Complex acc{0.0, 0.0};
      for (std::size_t col = 0; col < dim; ++col) {
        acc += m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) * local[col];
      }
      out[base | target_offsets[row]] = acc;
    }
  }
  return detail::make_state(std::move(out), state.labels());
}

/// Unnormalized projection <v_outcome| on `targets`; the result lives on the
/// remaining qubits in their original relative order.
inline std::vector<Complex> project(const StateVector& state, const MeasurementBasis& basis,
                                    std::span<const std::size_t> targets, std::size_t outcome) {
  const std::size_t n = state.num_qubits();
  if (basis.arity() != targets.size()) throw ValidationError("basis arity does not match target count");
  detail::check_positions(n, targets);
  if (outcome >= basis.size()) throw IndexError("measurement outcome out of range");
  const auto target_offsets = detail::scatter_offsets(n, targets);
  const auto rest_offsets = detail::scatter_offsets(n, detail::complement(n, targets));
  const auto v = basis.vector(outcome);
  const auto amps = state.amplitudes();

  std::vector<Complex> residual(rest_offsets.size(), Complex{0.0, 0.0});
  for (std::size_t r = 0; r < rest_offsets.size(); ++r) {
    Complex acc{0.0, 0.0};
    for (std::size_t s = 0; s < target_offsets.size(); ++s) {
      acc += std::conj(v[s]) * amps[rest_offsets[r] | target_offsets[s]];
    }
    residual[r] = acc;
  }
  return residual;
}

/// Born probabilities of every basis outcome.
inline std::vector<double> outcome_probabilities(const StateVector& state, const MeasurementBasis& basis,
                                                 std::span<const std::size_t> targets) {
  std::vector<double> probs(basis.size());
  for (std::size_t o = 0; o < basis.size(); ++o) {
    probs[o] = detail::squared_norm(project(state, basis, targets, o));
  }
  return probs;
}

struct MeasureOptions {
  /// Keep measured qubits in the register, collapsed onto the outcome vector.
  bool retain = false;
};

/// Deterministic projective measurement with the outcome fixed by the caller.
inline MeasurementResult measure(const StateVector& state, const MeasurementBasis& basis,
                                 std::span<const std::size_t> targets, std::size_t outcome,
                                 MeasureOptions options = {}) {
  std::vector<Complex> residual = project(state, basis, targets, outcome);
  const double probability = detail::squared_norm(residual);
  if (probability < kImpossibleOutcomeCutoff) {
    throw ImpossibleOutcomeError("outcome '" + basis.label(outcome) + "' has probability " +
                                 std::to_string(probability));
  }
  const double scale = 1.0 / std::sqrt(probability);
  for (auto& z : residual) z *= scale;

  const std::size_t n = state.num_qubits();
  const auto rest = detail::complement(n, targets);
  std::vector<std::string> labels;
  if (!options.retain) {
    for (const std::size_t p : rest) labels.push_back(state.labels()[p]);
    return {outcome, basis.label(outcome), probability, detail::make_state(std::move(residual), labels)};
  }

  const auto target_offsets = detail::scatter_offsets(n, targets);
  const auto rest_offsets = detail::scatter_offsets(n, rest);
  const auto v = basis.vector(outcome);
  std::vector<Complex> amps(state.dimension(), Complex{0.0, 0.0});
  for (std::size_t r = 0; r < rest_offsets.size(); ++r) {
    for (std::size_t s = 0; s < target_offsets.size(); ++s) {
      amps[rest_offsets[r] | target_offsets[s]] = v[s] * residual[r];
    }
  }
  return {outcome, basis.label(outcome), probability, detail::make_state(std::move(amps), state.labels())};
}

/// Owns the single seedable generator through which all sampling flows.
class Simulator {
 public:
  explicit Simulator(std::uint64_t seed) : rng_(seed) {}

  /// Samples from the Born distribution unless `forced` names an outcome.
  MeasurementResult measure(const StateVector& state, const MeasurementBasis& basis,
                            std::span<const std::size_t> targets,
                            std::optional<std::size_t> forced = std::nullopt, MeasureOptions options = {}) {
    if (forced) return qtele::measure(state, basis, targets, *forced, options);
    const auto probs = outcome_probabilities(state, basis, targets);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    double cumulative = 0.0;
    std::size_t chosen = probs.size();
    for (std::size_t o = 0; o < probs.size(); ++o) {
      if (probs[o] < kImpossibleOutcomeCutoff) continue;
      chosen = o;
      cumulative += probs[o];
      if (u < cumulative) break;
    }
    return qtele::measure(state, basis, targets, chosen, options);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

struct Factorization {
  /// Descending Schmidt coefficients across the cut.
  std::vector<double> schmidt;
  /// Present iff the state is a product across the cut.
  std::optional<std::pair<StateVector, StateVector>> factors;

  bool is_product() const { return factors.has_value(); }
};

namespace detail {

inline Matrix cut_matrix(const StateVector& state, std::span<const std::size_t> left,
                         std::vector<std::size_t>& right) {
  const std::size_t n = state.num_qubits();
  check_positions(n, left);
  right = complement(n, left);
  const auto left_offsets = scatter_offsets(n, left);
  const auto right_offsets = scatter_offsets(n, right);
  Matrix m(static_cast<Eigen::Index>(left_offsets.size()), static_cast<Eigen::Index>(right_offsets.size()));
  const auto amps = state.amplitudes();
  for (std::size_t l = 0; l < left_offsets.size(); ++l) {
    for (std::size_t r = 0; r < right_offsets.size(); ++r) {
      m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r)) = amps[left_offsets[l] | right_offsets[r]];
    }
  }
  return m;
}

}  // namespace detail

/// Schmidt coefficients (descending) across the cut `left | rest`.
inline std::vector<double> schmidt_coefficients(const StateVector& state, std::span<const std::size_t> left) {
  std::vector<std::size_t> right;
  const Matrix m = detail::cut_matrix(state, left, right);
  const Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

/// Splits a product state into (left, right) factors. The right factor's first
/// nonzero amplitude is real and nonnegative; the global phase lives on the left.
inline Factorization factorize_bipartite(const StateVector& state, std::span<const std::size_t> left) {
  std::vector<std::size_t> right;
  const Matrix m = detail::cut_matrix(state, left, right);
  const Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Factorization result;
  result.schmidt.assign(sv.data(), sv.data() + sv.size());
  if (sv.size() > 1 && sv(1) >= kSchmidtRankTolerance) return result;

  // m ~ s0 u0 v0^H, so the right factor is conj(v0).
  std::vector<Complex> right_amps(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.cols(); ++r) right_amps[static_cast<std::size_t>(r)] = std::conj(svd.matrixV()(r, 0));
  const auto lead = std::find_if(right_amps.begin(), right_amps.end(),
                                 [](const Complex& z) { return std::abs(z) > kSchmidtRankTolerance; });
  const Complex phase = *lead / std::abs(*lead);
  for (auto& z : right_amps) z /= phase;
  *lead = std::abs(*lead);

  std::vector<Complex> left_amps(static_cast<std::size_t>(m.rows()), Complex{0.0, 0.0});
  for (Eigen::Index l = 0; l < m.rows(); ++l) {
    for (Eigen::Index r = 0; r < m.cols(); ++r) {
      left_amps[static_cast<std::size_t>(l)] += m(l, r) * std::conj(right_amps[static_cast<std::size_t>(r)]);
    }
  }

  std::vector<std::string> left_labels;
  std::vector<std::string> right_labels;
  for (const auto p : left) left_labels.push_back(state.labels()[p]);
  for (const auto p : right) right_labels.push_back(state.labels()[p]);
  result.factors.emplace(StateVector::normalized(std::move(left_amps), std::move(left_labels)),
                         StateVector::normalized(std::move(right_amps), std::move(right_labels)));
  return result;
}

/// |<a|b>|^2.
inline double fidelity(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() != b.num_qubits()) throw ValidationError("fidelity of states with different qubit counts");
  return std::norm(detail::inner(a.amplitudes(), b.amplitudes()));
}

}  // namespace qtele
