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
#include "qimpute/quantum.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qimpute/error.hpp"

namespace qimpute::quantum {

StateVector::StateVector(std::size_t n_qubits)
    : n_qubits_(n_qubits), amplitudes_() {
    QIMPUTE_REQUIRE(n_qubits >= 1 && n_qubits <= kMaxQubits, ParameterError,
                    "n_qubits must be in [1, " + std::to_string(kMaxQubits) +
                        "], got " + std::to_string(n_qubits));
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = Complex{1.0, 0.0};
}

StateVector::StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    QIMPUTE_REQUIRE(n_qubits >= 1 && n_qubits <= kMaxQubits, ParameterError,
                    "n_qubits out of range: " + std::to_string(n_qubits));
    QIMPUTE_REQUIRE(amplitudes_.size() == (std::size_t{1} << n_qubits),
                    ParameterError,
                    "amplitude count " + std::to_string(amplitudes_.size()) +
                        " does not match 2^" + std::to_string(n_qubits));
}

double StateVector::norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s;
}

IqpParams::IqpParams(std::size_t n_qubits, std::size_t n_layers,
                     std::vector<std::vector<double>> singles,
                     std::vector<std::vector<double>> pairs)
    : n_qubits_(n_qubits), n_layers_(n_layers), singles_(std::move(singles)),
      pairs_(std::move(pairs)) {
    QIMPUTE_REQUIRE(n_qubits >= 1 && n_qubits <= kMaxQubits, ParameterError,
                    "n_qubits out of range: " + std::to_string(n_qubits));
    QIMPUTE_REQUIRE(n_layers >= 1, ParameterError, "n_layers must be >= 1");
    QIMPUTE_REQUIRE(singles_.size() == n_layers && pairs_.size() == n_layers,
                    ParameterError, "angle arrays must have one entry per layer");
    for (std::size_t l = 0; l < n_layers; ++l) {
        QIMPUTE_REQUIRE(singles_[l].size() == n_qubits, ParameterError,
                        "layer " + std::to_string(l) + ": expected " +
                            std::to_string(n_qubits) + " single angles, got " +
                            std::to_string(singles_[l].size()));
        QIMPUTE_REQUIRE(pairs_[l].size() == pair_count(n_qubits), ParameterError,
                        "layer " + std::to_string(l) + ": expected " +
                            std::to_string(pair_count(n_qubits)) +
                            " pair angles, got " +
                            std::to_string(pairs_[l].size()));
        for (double a : singles_[l])
            QIMPUTE_REQUIRE(std::isfinite(a), ParameterError, "non-finite angle");
        for (double a : pairs_[l])
            QIMPUTE_REQUIRE(std::isfinite(a), ParameterError, "non-finite angle");
    }
}

IqpParams IqpParams::zeros(std::size_t n_qubits, std::size_t n_layers) {
    return IqpParams(n_qubits, n_layers,
                     std::vector<std::vector<double>>(
                         n_layers, std::vector<double>(n_qubits, 0.0)),
                     std::vector<std::vector<double>>(
                         n_layers, std::vector<double>(pair_count(n_qubits), 0.0)));
}

IqpParams IqpParams::replicated(std::size_t n_layers, std::vector<double> singles,
                                std::vector<double> pairs) {
    const std::size_t n = singles.size();
    return IqpParams(n, n_layers,
                     std::vector<std::vector<double>>(n_layers, singles),
                     std::vector<std::vector<double>>(n_layers, pairs));
}

StateVector apply_hadamard_layer(StateVector state) {
    constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
    auto amps = state.amplitudes();
    const std::size_t dim = amps.size();
    for (std::size_t q = 0; q < state.n_qubits(); ++q) {
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t base = 0; base < dim; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const Complex a0 = amps[i];
                const Complex a1 = amps[i + stride];
                amps[i] = (a0 + a1) * kInvSqrt2;
                amps[i + stride] = (a0 - a1) * kInvSqrt2;
            }
        }
    }
    return state;
}

StateVector apply_diagonal_phase(StateVector state, std::span<const double> singles,
                                 std::span<const double> pairs) {
    const std::size_t n = state.n_qubits();
    QIMPUTE_REQUIRE(singles.size() == n, ParameterError,
                    "expected " + std::to_string(n) + " single angles, got " +
                        std::to_string(singles.size()));
    QIMPUTE_REQUIRE(pairs.size() == pair_count(n), ParameterError,
                    "expected " + std::to_string(pair_count(n)) +
                        " pair angles, got " + std::to_string(pairs.size()));

    auto amps = state.amplitudes();
    std::vector<double> z(n);
    for (std::size_t b = 0; b < amps.size(); ++b) {
        for (std::size_t j = 0; j < n; ++j) z[j] = ((b >> j) & 1U) ? -1.0 : 1.0;
        double phase = 0.0;
        for (std::size_t j = 0; j < n; ++j) phase += singles[j] * z[j];
        std::size_t p = 0;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k, ++p) {
                phase += pairs[p] * z[j] * z[k];
            }
        }
        amps[b] *= Complex{std::cos(phase), std::sin(phase)};
    }
    return state;
}

StateVector simulate_iqp(const IqpParams& params) {
    StateVector state(params.n_qubits());
    for (std::size_t l = 0; l < params.n_layers(); ++l) {
        state = apply_hadamard_layer(std::move(state));
        state = apply_diagonal_phase(std::move(state), params.singles(l),
                                     params.pairs(l));
        state = apply_hadamard_layer(std::move(state));
    }
    return state;
}

ZExpectations z_expectations(const StateVector& state) {
    const std::size_t n = state.n_qubits();
    ZExpectations out{std::vector<double>(n, 0.0)};
    const auto amps = state.amplitudes();
    for (std::size_t b = 0; b < amps.size(); ++b) {
        const double p = std::norm(amps[b]);
        for (std::size_t j = 0; j < n; ++j) {
            out.values[j] += ((b >> j) & 1U) ? -p : p;
        }
    }
    return out;
}

ZExpectations iqp_embed(const IqpParams& params) {
    return z_expectations(simulate_iqp(params));
}

} // namespace qimpute::quantum
