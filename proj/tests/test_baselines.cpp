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
#include <doctest.h>

#include <cmath>

#include "qimpute/baselines.hpp"
#include "qimpute/error.hpp"

using namespace qimpute;
using namespace qimpute::baselines;
using data::Cell;
using data::ColumnKind;
using data::Missing;
using data::Table;

namespace {

Table one_column(ColumnKind kind, std::vector<Cell> cells) {
    Table t(data::DatasetSchema("t", {{"v", kind}}));
    for (auto& c : cells) t.add_row({std::move(c)});
    return t;
}

Table y_is_2x(std::size_t n, std::size_t missing_row) {
    Table t(data::DatasetSchema("lin", {{"x", ColumnKind::Numeric}, {"y", ColumnKind::Numeric}}));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n - 1);
        t.add_row({x, i == missing_row ? Cell{Missing{}} : Cell{2.0 * x}});
    }
    return t;
}

} // namespace

TEST_CASE("mean/mode imputation") {
    SUBCASE("{2, missing, 4} -> 3") {
        const auto t = one_column(ColumnKind::Numeric, {2.0, Missing{}, 4.0});
        CHECK(mean_mode_impute(t, data::native_mask(t)).number(1, 0) == 3.0);
    }
    SUBCASE("mode {a, a, b, missing} -> a") {
        const auto t = one_column(ColumnKind::Categorical,
                                  {std::string("a"), std::string("a"), std::string("b"), Missing{}});
        CHECK(mean_mode_impute(t, data::native_mask(t)).text(3, 0) == "a");
    }
    SUBCASE("tie goes to the first category seen") {
        const auto t = one_column(ColumnKind::Categorical, {std::string("a"), std::string("b"), Missing{}});
        CHECK(mean_mode_impute(t, data::native_mask(t)).text(2, 0) == "a");
        const auto u = one_column(ColumnKind::Categorical, {std::string("b"), std::string("a"), Missing{}});
        CHECK(mean_mode_impute(u, data::native_mask(u)).text(2, 0) == "b");
    }
    SUBCASE("all-missing column is a fit error") {
        const auto t = one_column(ColumnKind::Numeric, {Cell{Missing{}}, Cell{Missing{}}});
        CHECK_THROWS_AS(mean_mode_impute(t, data::native_mask(t)), FitError);
    }
    SUBCASE("mask must only cover missing cells") {
        const auto t = one_column(ColumnKind::Numeric, {2.0, Missing{}, 4.0});
        data::Mask m(3, 1, data::MaskProvenance::InjectedMcar);
        m.set(0, 0, true);
        CHECK_THROWS_AS(mean_mode_impute(t, m), ContractViolation);
    }
    SUBCASE("invariant under row permutation") {
        const auto t = one_column(ColumnKind::Numeric, {1.0, Missing{}, 7.0, 2.5});
        const auto u = one_column(ColumnKind::Numeric, {2.5, 7.0, 1.0, Missing{}});
        CHECK(mean_mode_impute(t, data::native_mask(t)).number(1, 0) ==
              mean_mode_impute(u, data::native_mask(u)).number(3, 0));
    }
}

TEST_CASE("kNN imputation") {
    SUBCASE("a duplicate row is the nearest neighbour") {
        Table t(data::DatasetSchema("d", {{"a", ColumnKind::Numeric},
                                          {"b", ColumnKind::Numeric},
                                          {"c", ColumnKind::Categorical}}));
        t.add_row({1.0, 5.0, std::string("x")});
        t.add_row({3.0, 9.0, std::string("y")});
        t.add_row({1.0, Missing{}, std::string("x")});
        t.add_row({2.0, 7.5, std::string("y")});
        CHECK(knn_impute(t, data::native_mask(t), 1).number(2, 1) == 5.0);
    }
    SUBCASE("four-row hand example with k = 2") {
        // Distances from row 0 over shared {x (normalized by 4), z}:
        // row 1: (0.25 + 0) / 2 = 0.125, row 2: (0.5 + 1) / 2 = 0.75,
        // row 3: (1 + 0) / 2 = 0.5. Nearest two: rows 1 and 3.
        Table t(data::DatasetSchema("h", {{"x", ColumnKind::Numeric},
                                          {"y", ColumnKind::Numeric},
                                          {"z", ColumnKind::Categorical}}));
        t.add_row({0.0, Missing{}, std::string("a")});
        t.add_row({1.0, 10.0, std::string("a")});
        t.add_row({2.0, 20.0, std::string("b")});
        t.add_row({4.0, 40.0, std::string("a")});
        CHECK(knn_impute(t, data::native_mask(t), 2).number(0, 1) == 25.0);
    }
    SUBCASE("k covering every candidate reduces to mean/mode over candidates") {
        Table t(data::DatasetSchema("f", {{"x", ColumnKind::Numeric}, {"c", ColumnKind::Categorical}}));
        t.add_row({1.0, std::string("p")});
        t.add_row({2.0, std::string("q")});
        t.add_row({3.0, std::string("q")});
        t.add_row({Missing{}, Missing{}});
        t.add_row({4.0, std::string("p")});
        // Row 3 shares nothing, so it falls back to mean/mode.
        const auto out = knn_impute(t, data::native_mask(t), 10);
        CHECK(out.number(3, 0) == 2.5);
        CHECK(out.text(3, 1) == "p");
        t.set(3, 1, std::string("q"));
        CHECK(knn_impute(t, data::native_mask(t), 10).number(3, 0) == 2.5);
    }
    SUBCASE("k must be positive") {
        const auto t = one_column(ColumnKind::Numeric, {1.0, Missing{}});
        CHECK_THROWS_AS(knn_impute(t, data::native_mask(t), 0), std::invalid_argument);
    }
}

TEST_CASE("iterative ridge imputation") {
    BaselineConfig cfg;
    cfg.method = Method::IterativeRidge;
    SUBCASE("recovers y = 2x at lambda 1e-6") {
        cfg.ridge_lambda = 1e-6;
        const auto t = y_is_2x(101, 60);
        const auto res = iterative_ridge_impute(t, data::native_mask(t), cfg);
        CHECK(std::abs(res.table.number(60, 1) - 1.2) < 1e-6);
        CHECK(res.converged);
    }
    SUBCASE("constant predictors give the column mean") {
        Table t(data::DatasetSchema("c", {{"k", ColumnKind::Numeric},
                                          {"g", ColumnKind::Categorical},
                                          {"y", ColumnKind::Numeric}}));
        t.add_row({1.0, std::string("a"), 3.0});
        t.add_row({1.0, std::string("a"), 5.0});
        t.add_row({1.0, std::string("a"), Missing{}});
        t.add_row({1.0, std::string("a"), 10.0});
        const auto res = iterative_ridge_impute(t, data::native_mask(t), cfg);
        CHECK(std::abs(res.table.number(2, 2) - 6.0) < 1e-12);
    }
    SUBCASE("converges on a mixed toy table and records finite changes") {
        const auto ds = data::synth_healthcare_generate(200, 3);
        const auto m = data::inject_mcar(ds.working, 0.2, 8);
        const auto in = data::apply_mask(ds.working, m);
        const auto res = iterative_ridge_impute(in, data::native_mask(in), cfg);
        CHECK(res.converged);
        CHECK(res.changes.size() <= cfg.max_sweeps);
        for (double c : res.changes) CHECK(std::isfinite(c));
        CHECK(iterative_ridge_impute(in, data::native_mask(in), cfg).table == res.table);
    }
    SUBCASE("config validation") {
        cfg.ridge_lambda = 0.0;
        const auto t = y_is_2x(5, 2);
        CHECK_THROWS_AS(iterative_ridge_impute(t, data::native_mask(t), cfg), std::invalid_argument);
    }
}

TEST_CASE("baselines leave observed cells and text untouched") {
    const auto ds = data::synth_healthcare_generate(150, 6);
    const auto m = data::inject_mcar(ds.working, 0.2, 2);
    const auto in = data::apply_mask(ds.working, m);
    const auto native = data::native_mask(in);
    for (auto method : {Method::MeanMode, Method::Knn, Method::IterativeRidge}) {
        BaselineConfig cfg;
        cfg.method = method;
        const auto out = impute(in, native, cfg);
        for (std::size_t r = 0; r < in.n_rows(); ++r)
            for (std::size_t c = 0; c < in.n_cols(); ++c) {
                if (!data::is_missing(in.at(r, c)) || in.schema().kind(c) == ColumnKind::Text)
                    CHECK(out.at(r, c) == in.at(r, c));
                else
                    CHECK_FALSE(data::is_missing(out.at(r, c)));
            }
        CHECK(impute(in, native, cfg) == out);
    }
    CHECK(parse_method("knn") == Method::Knn);
    CHECK_THROWS_AS(parse_method("missforest"), std::invalid_argument);
}
