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

#include <string_view>
#include <vector>

#include "qimpute/data.hpp"

namespace qimpute::baselines {

enum class Method { MeanMode, Knn, IterativeRidge };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct BaselineConfig {
    Method method = Method::MeanMode;
    std::size_t k = 5;
    double ridge_lambda = 1.0;
    std::size_t max_sweeps = 10;
    double tolerance = 1e-4;

    void validate() const;
};

/// Each baseline fills the cells that are Missing in `table`; `mask` marks
/// which cells to fill and must be a subset of them. Observed cells and text
/// columns are never modified.

/// Numeric -> observed mean, categorical -> observed mode (ties go to the
/// earliest category by first appearance). Throws FitError for a column
/// with missing cells and no observed value.
data::Table mean_mode_impute(const data::Table& table, const data::Mask& mask);

/// Row distance: (Euclidean over shared observed min-max-normalized numeric
/// features + Hamming count over shared observed categoricals) / number of
/// shared features. Neighbours are the k nearest rows observed in the target
/// column, ties broken by row index. Falls back to mean/mode when no
/// candidate shares a feature with the row.
data::Table knn_impute(const data::Table& table, const data::Mask& mask, std::size_t k);

struct RidgeResult {
    data::Table table;
    std::vector<double> changes;  // mean absolute change per sweep
    bool converged = false;
};

/// MICE-lite: mean/mode start, then Gauss-Seidel sweeps in schema order
/// fitting a closed-form ridge model per target column.
RidgeResult iterative_ridge_impute(const data::Table& table, const data::Mask& mask,
                                   const BaselineConfig& config);

/// Dispatches on config.method.
data::Table impute(const data::Table& table, const data::Mask& mask,
                   const BaselineConfig& config);

} // namespace qimpute::baselines
