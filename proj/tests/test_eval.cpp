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
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "qimpute/error.hpp"
#include "qimpute/eval.hpp"
#include "qimpute/rng.hpp"

using namespace qimpute;
using namespace qimpute::eval;
using data::Cell;
using data::ColumnKind;
using data::Missing;
using data::Table;

namespace {

encoding::PreprocessStats unit_stats(std::size_t cols) {
    encoding::PreprocessStats s;
    for (std::size_t i = 0; i < cols; ++i) {
        encoding::ColumnStats c;
        c.kind = ColumnKind::Numeric;
        c.min = 0.0;
        c.max = 1.0;
        s.columns.push_back(c);
    }
    return s;
}

Table numeric_table(const std::vector<double>& v) {
    Table t(data::DatasetSchema("n", {{"x", ColumnKind::Numeric}}));
    for (double x : v) t.add_row({x});
    return t;
}

Table cat_table(const std::vector<std::string>& v) {
    Table t(data::DatasetSchema("c", {{"c", ColumnKind::Categorical}}));
    for (const auto& x : v) t.add_row({x});
    return t;
}

data::Mask all_mask(std::size_t rows, std::size_t cols) {
    data::Mask m(rows, cols, data::MaskProvenance::InjectedMcar);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m.set(r, c, true);
    return m;
}

// Precision/recall form, written independently of the library's 2TP form.
double f1_oracle(const std::vector<std::pair<std::string, std::string>>& cells) {
    std::set<std::string> truth_classes;
    for (const auto& [t, p] : cells) truth_classes.insert(t);
    double sum = 0.0;
    for (const auto& cls : truth_classes) {
        double tp = 0, fp = 0, fn = 0;
        for (const auto& [t, p] : cells) {
            if (t == cls && p == cls) tp += 1;
            if (t != cls && p == cls) fp += 1;
            if (t == cls && p != cls) fn += 1;
        }
        const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    }
    return sum / static_cast<double>(truth_classes.size());
}

} // namespace

TEST_CASE("RMSE worked examples") {
    const auto stats = unit_stats(1);
    SUBCASE("perfect imputation") {
        const auto t = numeric_table({0.1, 0.5});
        CHECK(*rmse_numeric(t, t, all_mask(2, 1), stats) == 0.0);
    }
    SUBCASE("single cell error 0.3") {
        CHECK(std::abs(*rmse_numeric(numeric_table({0.5}), numeric_table({0.2}), all_mask(1, 1), stats) -
                       0.3) < 1e-15);
    }
    SUBCASE("errors 0.3 and 0.4") {
        const auto v = rmse_numeric(numeric_table({0.3, 0.4}), numeric_table({0.0, 0.0}),
                                    all_mask(2, 1), stats);
        CHECK(std::abs(*v - std::sqrt(0.125)) < 1e-15);
        CHECK(std::abs(*v - 0.35355339059327373) < 1e-15);
    }
    SUBCASE("normalization by fitted range and absent when no cell qualifies") {
        encoding::PreprocessStats s = unit_stats(1);
        s.columns[0].min = 10.0;
        s.columns[0].max = 20.0;
        CHECK(std::abs(*rmse_numeric(numeric_table({13.0}), numeric_table({15.0}), all_mask(1, 1), s) -
                       0.2) < 1e-15);
        data::Mask none(1, 1, data::MaskProvenance::InjectedMcar);
        CHECK_FALSE(rmse_numeric(numeric_table({13.0}), numeric_table({15.0}), none, s).has_value());
    }
}

TEST_CASE("macro F1 worked examples") {
    SUBCASE("(a,b,b,b) vs (a,a,b,b) is 11/15") {
        const auto v = macro_f1_categorical(cat_table({"a", "b", "b", "b"}),
                                            cat_table({"a", "a", "b", "b"}), all_mask(4, 1));
        CHECK(std::abs(*v - 11.0 / 15.0) < 1e-12);
    }
    SUBCASE("all correct") {
        const auto t = cat_table({"a", "b", "a"});
        CHECK(*macro_f1_categorical(t, t, all_mask(3, 1)) == 1.0);
    }
    SUBCASE("class never predicted scores zero") {
        const auto v = macro_f1_categorical(cat_table({"a", "a"}), cat_table({"a", "b"}), all_mask(2, 1));
        // F1_a = 2/3, F1_b = 0.
        CHECK(std::abs(*v - 1.0 / 3.0) < 1e-15);
    }
    SUBCASE("same value in different columns counts as different categories") {
        Table p(data::DatasetSchema("two", {{"u", ColumnKind::Categorical}, {"v", ColumnKind::Categorical}}));
        Table t(p.schema());
        p.add_row({std::string("y"), std::string("y")});
        t.add_row({std::string("y"), std::string("n")});
        // Classes: (u,y) F1 1; (v,n) F1 0. (v,y) is predicted but absent from truth.
        CHECK(std::abs(*macro_f1_categorical(p, t, all_mask(1, 2)) - 0.5) < 1e-15);
    }
    SUBCASE("absent when nothing is masked") {
        const auto t = cat_table({"a"});
        CHECK_FALSE(macro_f1_categorical(t, t, data::Mask(1, 1, data::MaskProvenance::InjectedMcar)).has_value());
    }
}

TEST_CASE("metrics agree with brute-force oracles on random instances") {
    Rng rng(1234);
    const std::vector<std::string> labels = {"p", "q", "r", "s"};
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t n = 3 + rng.index(15);
        std::vector<double> a(n), b(n);
        std::vector<std::string> pa(n), tb(n);
        data::Mask m(n, 1, data::MaskProvenance::InjectedMcar);
        double sse = 0.0;
        std::size_t cnt = 0;
        std::vector<std::pair<std::string, std::string>> cells;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform();
            b[i] = rng.uniform();
            pa[i] = labels[rng.index(labels.size())];
            tb[i] = labels[rng.index(labels.size())];
            const bool on = i == 0 || rng.bernoulli(0.7);
            m.set(i, 0, on);
            if (on) {
                sse += (a[i] - b[i]) * (a[i] - b[i]);
                ++cnt;
                cells.emplace_back(tb[i], pa[i]);
            }
        }
        const double rmse = std::sqrt(sse / static_cast<double>(cnt));
        CHECK(std::abs(*rmse_numeric(numeric_table(a), numeric_table(b), m, unit_stats(1)) - rmse) < 1e-12);
        CHECK(std::abs(*macro_f1_categorical(cat_table(pa), cat_table(tb), m) - f1_oracle(cells)) < 1e-12);
    }
}

TEST_CASE("mean and sample standard deviation") {
    CHECK(mean_of({1.0, 2.0, 6.0}) == 3.0);
    CHECK(std::abs(sample_std({1.0, 2.0, 6.0}) - std::sqrt(7.0)) < 1e-15);
    CHECK(sample_std({4.0}) == 0.0);
}

TEST_CASE("method specs and config parsing") {
    const auto iqp = encoding::EmbedderVariant::QuantumIqp;
    CHECK(MethodSpec::parse("knn", iqp).name() == "knn");
    CHECK(MethodSpec::parse("imputer", iqp).name() == "imputer:quantum_iqp");
    CHECK(MethodSpec::parse("imputer:classical_mlp", iqp).name() == "imputer:classical_mlp");
    CHECK_THROWS_AS(MethodSpec::parse("gain", iqp), std::invalid_argument);

    const auto cfg = KeyValueConfig::parse(
        "# comment\nmethods = mean_mode, knn\nseeds = 3, 4, 5\ntrain.lr = 1e-3\nmask.rate = 0.3\n");
    const auto ec = ExperimentConfig::from_config(cfg);
    CHECK(ec.methods.size() == 2);
    CHECK(ec.seeds == std::vector<std::uint64_t>{3, 4, 5});
    CHECK(ec.imputer.train.lr == 1e-3);
    CHECK(ec.missing_rate == 0.3);
    CHECK(ExperimentConfig::from_config(ec.to_config()).to_config().values() == ec.to_config().values());
    CHECK_THROWS_AS(ExperimentConfig::from_config(KeyValueConfig::parse("trian.lr = 1\n")),
                    std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_config(KeyValueConfig::parse("mask.rate = 1.5\n")).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign\n"), LoadError);
}

namespace {

ExperimentConfig small_experiment() {
    ExperimentConfig c;
    c.rows = 60;
    c.seeds = {1, 2};
    const auto v = encoding::EmbedderVariant::QuantumIqp;
    c.methods = {MethodSpec::parse("mean_mode", v), MethodSpec::parse("knn", v),
                 MethodSpec::parse("imputer", v)};
    c.imputer.model.d_model = 16;
    c.imputer.model.n_blocks = 1;
    c.imputer.model.n_heads = 2;
    c.imputer.model.ffn_dim = 16;
    c.imputer.train.epochs = 2;
    c.imputer.n_qubits = 4;
    c.imputer.n_layers = 1;
    return c;
}

} // namespace

TEST_CASE("run_experiment") {
    const auto cfg = small_experiment();
    const auto report = run_experiment(cfg);
    REQUIRE(report.methods.size() == 3);
    for (const auto& m : report.methods) {
        REQUIRE(m.seeds.size() == 2);
        for (const auto& s : m.seeds) {
            CHECK_FALSE(s.error.has_value());
            REQUIRE(s.rmse.has_value());
            REQUIRE(s.macro_f1.has_value());
            CHECK(*s.rmse >= 0.0);
            CHECK((*s.macro_f1 >= 0.0 && *s.macro_f1 <= 1.0));
        }
        // Same seed, same mask for every method.
        CHECK(m.seeds[0].mask_hash == report.methods[0].seeds[0].mask_hash);
        CHECK(m.seeds[1].mask_hash == report.methods[0].seeds[1].mask_hash);
        const std::vector<double> r = {*m.seeds[0].rmse, *m.seeds[1].rmse};
        CHECK(std::abs(*m.rmse_mean() - mean_of(r)) < 1e-12);
        CHECK(std::abs(*m.rmse_std() - sample_std(r)) < 1e-12);
    }
    CHECK(report.methods[0].seeds[0].mask_hash != report.methods[0].seeds[1].mask_hash);

    SUBCASE("reports are deterministic and carry no wall-clock") {
        const auto again = run_experiment(cfg);
        CHECK(report_json(again) == report_json(report));
        const auto j = nlohmann::json::parse(report_json(report));
        CHECK(j.dump().find("seconds") == std::string::npos);
        CHECK(j.at("summary").size() == 3);
        CHECK(j.at("results").size() == 6);
        const auto t = nlohmann::json::parse(timings_json(report));
        CHECK(t.dump().find("seconds") != std::string::npos);
        std::ostringstream human;
        print_report(report, human);
        CHECK(human.str().find("imputer:quantum_iqp") != std::string::npos);
    }
    SUBCASE("mean/mode score matches a direct recomputation") {
        const encoding::TextEmbeddings text;
        const auto prep = prepare_seed(cfg, 1, text);
        const auto imputed = baselines::mean_mode_impute(prep.input, data::native_mask(prep.input));
        CHECK(*rmse_numeric(imputed, prep.truth, prep.score_mask, prep.stats) ==
              *report.methods[0].seeds[0].rmse);
    }
}

TEST_CASE("prepared inputs never contain scored truths") {
    const auto cfg = small_experiment();
    const encoding::TextEmbeddings text;
    const auto prep = prepare_seed(cfg, 3, text);
    std::size_t scored = 0;
    for (std::size_t r = 0; r < prep.input.n_rows(); ++r)
        for (std::size_t c = 0; c < prep.input.n_cols(); ++c)
            if (prep.score_mask.at(r, c)) {
                ++scored;
                CHECK(data::is_missing(prep.input.at(r, c)));
                CHECK_FALSE(data::is_missing(prep.truth.at(r, c)));
            }
    CHECK(scored > 0);
    // Changing the sidecar's held-out values cannot change the input.
    auto ds = data::synth_healthcare_generate(cfg.rows, stream_seed(3, "datagen"));
    const auto bp = ds.truth.schema().index_of("blood_pressure");
    for (std::size_t r = 0; r < ds.truth.n_rows(); ++r)
        if (data::is_missing(ds.working.at(r, bp))) ds.truth.set(r, bp, 1.0);
    const auto mcar = data::inject_mcar(ds.working, cfg.missing_rate, stream_seed(3, "mask"));
    CHECK(data::table_hash(data::apply_mask(ds.working, mcar)) == data::table_hash(prep.input));
}

TEST_CASE("ablation suite runs the three variants on shared masks") {
    auto cfg = small_experiment();
    cfg.seeds = {4};
    const auto report = ablation_suite(cfg);
    REQUIRE(report.methods.size() == 3);
    CHECK(report.find("imputer:random_projection") != nullptr);
    CHECK(report.find("imputer:classical_mlp") != nullptr);
    CHECK(report.find("imputer:quantum_iqp") != nullptr);
    for (const auto& m : report.methods) CHECK(m.seeds[0].mask_hash == report.methods[0].seeds[0].mask_hash);
}

TEST_CASE("embedding export") {
    const auto ds = data::synth_healthcare_generate(40, 2);
    const auto stats = encoding::fit_preprocessor(ds.working);
    const encoding::CellEmbedder e(stats, {encoding::EmbedderVariant::QuantumIqp, 8, 2, 3});
    const encoding::TextEmbeddings text;
    const auto path = std::filesystem::temp_directory_path() / "qimpute_test_export.csv";
    auto read_records = [&] {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return data::parse_csv_records(ss.str());
    };

    export_embeddings(ds.working, stats, e, text, "diagnosis", ExportMode::RowMean, path);
    auto rec = read_records();
    REQUIRE(rec.size() == 41);
    CHECK(rec[0].size() == 2 + 8);
    for (std::size_t i = 1; i < rec.size(); ++i)
        for (std::size_t j = 2; j < rec[i].size(); ++j) {
            const double v = std::stod(rec[i][j]);
            CHECK((v >= -1.0 && v <= 1.0));
        }

    export_embeddings(ds.working, stats, e, text, "diagnosis", ExportMode::Cell, path);
    rec = read_records();
    std::size_t observed = 0;
    for (std::size_t r = 0; r < ds.working.n_rows(); ++r)
        for (std::size_t c = 0; c < ds.working.n_cols(); ++c) observed += !data::is_missing(ds.working.at(r, c));
    CHECK(rec.size() == observed + 1);
    CHECK(rec[0].size() == 3 + 8);

    CHECK_THROWS_AS(export_embeddings(ds.working, stats, e, text, "nope", ExportMode::Cell, path),
                    std::invalid_argument);
    CHECK_THROWS_AS(export_embeddings(ds.working, stats, e, text, "heart_rate", ExportMode::Cell, path),
                    std::invalid_argument);
    std::filesystem::remove(path);
}
