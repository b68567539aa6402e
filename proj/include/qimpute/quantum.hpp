// Copyright 2026 The qimpute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qimpute::quantum {

using Complex = std::complex<double>;

/// Dense n-qubit statevector. Basis index b stores qubit j in bit j
/// (little-endian), so Z_j has eigenvalue +1 when bit j of b is clear.
class StateVector {
  public:
    /// |0...0> on n qubits.
    explicit StateVector(std::size_t n_qubits);

    /// Takes ownership of explicit amplitudes; size must be 2^n_qubits.
    StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes);

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return amplitudes_.size(); }

    std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
    std::span<Complex> amplitudes() noexcept { return amplitudes_; }

    /// Sum of |amp|^2.
    double norm_squared() const noexcept;

  private:
    std::size_t n_qubits_;
    std::vector<Complex> amplitudes_;
};

/// Largest register the simulator accepts. 2^20 amplitudes is 16 MiB.
inline constexpr std::size_t kMaxQubits = 20;

/// Number of unordered qubit pairs j<k.
constexpr std::size_t pair_count(std::size_t n_qubits) noexcept {
    return n_qubits * (n_qubits - (n_qubits > 0 ? 1 : 0)) / 2;
}

/// Position of pair (j, k), j < k, in the row-major upper-triangle ordering
/// (0,1), (0,2), ..., (0,n-1), (1,2), ...
constexpr std::size_t pair_index(std::size_t j, std::size_t k,
                                 std::size_t n_qubits) noexcept {
    return j * n_qubits - j * (j + 1) / 2 + (k - j - 1);
}

/// Angles of an L-layer IQP circuit: per layer, one angle per qubit and one
/// per qubit pair. Validated on construction.
class IqpParams {
  public:
    IqpParams(std::size_t n_qubits, std::size_t n_layers,
              std::vector<std::vector<double>> singles,
              std::vector<std::vector<double>> pairs);

    /// All-zero angles.
    static IqpParams zeros(std::size_t n_qubits, std::size_t n_layers);

    /// Same singles/pairs replicated across every layer.
    static IqpParams replicated(std::size_t n_layers, std::vector<double> singles,
                                std::vector<double> pairs);

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t n_layers() const noexcept { return n_layers_; }
    std::span<const double> singles(std::size_t layer) const {
        return singles_.at(layer);
    }
    std::span<const double> pairs(std::size_t layer) const {
        return pairs_.at(layer);
    }

  private:
    std::size_t n_qubits_;
    std::size_t n_layers_;
    std::vector<std::vector<double>> singles_;
    std::vector<std::vector<double>> pairs_;
};

/// Per-qubit <Z_i>, each in [-1, 1].
struct ZExpectations {
    std::vector<double> values;
};

/// Returns H^{(x)n} |state>.
StateVector apply_hadamard_layer(StateVector state);

/// Multiplies amplitude b by exp(i [sum_j t_j z_j(b) + sum_{j<k} t_jk z_j(b) z_k(b)])
/// with z_j(b) = +1 for bit j clear, -1 for bit j set.
/// Throws ParameterError when the angle arrays are not sized for the state.
StateVector apply_diagonal_phase(StateVector state, std::span<const double> singles,
                                 std::span<const double> pairs);

/// Final state prod_l [H U_diag_l H] |0...0>: every layer is a full
/// H-diagonal-H block, so zero angles return the register to |0...0>.
StateVector simulate_iqp(const IqpParams& params);

/// <psi|Z_i|psi> for every qubit, computed exactly from amplitudes.
ZExpectations z_expectations(const StateVector& state);

/// Embeds params through the IQP circuit and reads out <Z_i>.
ZExpectations iqp_embed(const IqpParams& params);

/// Test oracle: builds the full 2^n x 2^n circuit unitary from explicit
/// Kronecker products and a dense diagonal, then applies it to |0...0>.
/// Refuses n_qubits > 10.
StateVector oracle_apply(const IqpParams& params);

inline constexpr std::size_t kOracleMaxQubits = 10;

} // namespace qimpute::quantum
