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

// Dense-matrix reference for the IQP circuit. Shares nothing with the fast
// path in quantum.cpp beyond the public parameter types.
#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "qimpute/error.hpp"
#include "qimpute/quantum.hpp"

namespace qimpute::quantum {
namespace {

using Mat = Eigen::MatrixXcd;

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Single-qubit operator `op` on qubit `target` of an n-qubit register.
/// Qubit 0 is the least significant bit, i.e. the rightmost Kronecker factor.
Mat embed_single(const Mat& op, std::size_t target, std::size_t n) {
    const Mat id = Mat::Identity(2, 2);
    Mat out = Mat::Identity(1, 1);
    for (std::size_t q = n; q-- > 0;) out = kron(out, q == target ? op : id);
    return out;
}

} // namespace

StateVector oracle_apply(const IqpParams& params) {
    const std::size_t n = params.n_qubits();
    QIMPUTE_REQUIRE(n <= kOracleMaxQubits, ParameterError,
                    "oracle_apply refuses " + std::to_string(n) +
                        " qubits (max " + std::to_string(kOracleMaxQubits) + ")");
    const Eigen::Index dim = Eigen::Index{1} << n;

    Mat h(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;
    Mat z(2, 2);
    z << 1, 0, 0, -1;

    Mat hn = Mat::Identity(1, 1);
    for (std::size_t q = 0; q < n; ++q) hn = kron(hn, h);

    std::vector<Mat> zs;
    zs.reserve(n);
    for (std::size_t q = 0; q < n; ++q) zs.push_back(embed_single(z, q, n));

    Mat u = Mat::Identity(dim, dim);
    for (std::size_t l = 0; l < params.n_layers(); ++l) {
        const auto singles = params.singles(l);
        const auto pairs = params.pairs(l);
        Mat generator = Mat::Zero(dim, dim);
        for (std::size_t j = 0; j < n; ++j) generator += singles[j] * zs[j];
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                generator += pairs[pair_index(j, k, n)] * (zs[j] * zs[k]);
        // The generator is diagonal, so its exponential is elementwise.
        Mat diag = Mat::Zero(dim, dim);
        for (Eigen::Index b = 0; b < dim; ++b)
            diag(b, b) = std::exp(Complex{0.0, generator(b, b).real()});
        u = hn * diag * hn * u;
    }

    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(dim);
    zero(0) = 1.0;
    const Eigen::VectorXcd psi = u * zero;
    return StateVector(n, std::vector<Complex>(psi.data(), psi.data() + dim));
}

} // namespace qimpute::quantum
