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
#include "qimpute/eval.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <set>
#include <sstream>

#include "qimpute/error.hpp"
#include "qimpute/rng.hpp"

namespace qimpute::eval {

using data::ColumnKind;
using data::Table;

// ---------------------------------------------------------------------------
// Metrics

namespace {

void check_shapes(const Table& imputed, const Table& truth, const data::Mask& mask) {
    if (imputed.n_rows() != truth.n_rows() || imputed.n_cols() != truth.n_cols() ||
        mask.n_rows() != truth.n_rows() || mask.n_cols() != truth.n_cols())
        throw std::invalid_argument("imputed table, truth table and mask shapes differ");
}

} // namespace

std::optional<double> rmse_numeric(const Table& imputed, const Table& truth,
                                   const data::Mask& mask,
                                   const encoding::PreprocessStats& stats) {
    check_shapes(imputed, truth, mask);
    double sse = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < truth.n_rows(); ++r) {
        for (std::size_t c = 0; c < truth.n_cols(); ++c) {
            if (!mask.at(r, c) || truth.schema().kind(c) != ColumnKind::Numeric) continue;
            if (data::is_missing(truth.at(r, c))) continue;
            const auto& cs = stats.columns.at(c);
            const double e = cs.normalize(imputed.number(r, c)) - cs.normalize(truth.number(r, c));
            sse += e * e;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return std::sqrt(sse / static_cast<double>(n));
}

std::map<std::string, double> rmse_raw_per_column(const Table& imputed, const Table& truth,
                                                  const data::Mask& mask) {
    check_shapes(imputed, truth, mask);
    std::map<std::string, double> out;
    for (std::size_t c = 0; c < truth.n_cols(); ++c) {
        if (truth.schema().kind(c) != ColumnKind::Numeric) continue;
        double sse = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < truth.n_rows(); ++r) {
            if (!mask.at(r, c) || data::is_missing(truth.at(r, c))) continue;
            const double e = imputed.number(r, c) - truth.number(r, c);
            sse += e * e;
            ++n;
        }
        if (n > 0) out[truth.schema().column(c).name] = std::sqrt(sse / static_cast<double>(n));
    }
    return out;
}

std::optional<double> macro_f1_categorical(const Table& imputed, const Table& truth,
                                           const data::Mask& mask) {
    check_shapes(imputed, truth, mask);
    struct Counts {
        std::size_t tp = 0, fp = 0, fn = 0;
        bool in_truth = false;
    };
    std::map<std::pair<std::size_t, std::string>, Counts> classes;
    std::size_t n = 0;
    for (std::size_t r = 0; r < truth.n_rows(); ++r) {
        for (std::size_t c = 0; c < truth.n_cols(); ++c) {
            if (!mask.at(r, c) || truth.schema().kind(c) != ColumnKind::Categorical) continue;
            if (data::is_missing(truth.at(r, c))) continue;
            const auto& t = truth.text(r, c);
            const auto& p = imputed.text(r, c);
            auto& tc = classes[{c, t}];
            tc.in_truth = true;
            if (t == p) {
                ++tc.tp;
            } else {
                ++tc.fn;
                ++classes[{c, p}].fp;
            }
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    double sum = 0.0;
    std::size_t k = 0;
    for (const auto& [key, cnt] : classes) {
        if (!cnt.in_truth) continue;
        const double denom = 2.0 * static_cast<double>(cnt.tp) + static_cast<double>(cnt.fp) +
                             static_cast<double>(cnt.fn);
        // 2PR/(P+R) == 2TP/(2TP+FP+FN); zero when TP == 0.
        sum += denom > 0.0 ? 2.0 * static_cast<double>(cnt.tp) / denom : 0.0;
        ++k;
    }
    return sum / static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// Config

std::string MethodSpec::name() const {
    if (is_imputer) return "imputer:" + std::string(encoding::to_string(variant));
    return std::string(baselines::to_string(baseline));
}

MethodSpec MethodSpec::parse(std::string_view s, encoding::EmbedderVariant default_variant) {
    MethodSpec m;
    if (s == "imputer") {
        m.is_imputer = true;
        m.variant = default_variant;
    } else if (s.starts_with("imputer:")) {
        m.is_imputer = true;
        m.variant = encoding::parse_variant(s.substr(8));
    } else {
        m.baseline = baselines::parse_method(s);
    }
    return m;
}

void ExperimentConfig::validate() const {
    if (source != "synthetic" && source != "csv")
        throw std::invalid_argument("dataset.source must be 'synthetic' or 'csv'");
    if (source == "synthetic" && rows < 1) throw std::invalid_argument("dataset.rows must be >= 1");
    if (source == "csv" && (data_path.empty() || schema_path.empty()))
        throw std::invalid_argument("dataset.data and dataset.schema are required for csv");
    if (!(missing_rate > 0.0 && missing_rate < 1.0))
        throw std::invalid_argument("mask.rate must be in (0, 1)");
    if (seeds.empty()) throw std::invalid_argument("seeds must not be empty");
    if (methods.empty()) throw std::invalid_argument("methods must not be empty");
    imputer.train.validate();
    baseline.validate();
}

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "dataset.source", "dataset.rows", "dataset.data", "dataset.schema", "dataset.truth",
    "dataset.text_embeddings", "mask.rate", "methods", "imputer.variant", "seeds",
    "quantum.qubits", "quantum.layers", "model.d_model", "model.blocks", "model.heads",
    "model.ffn", "train.lr", "train.batch_size", "train.epochs", "train.mask_rate",
    "train.numeric_weight", "train.categorical_weight", "train.beta1", "train.beta2",
    "train.eps", "knn.k", "ridge.lambda", "ridge.max_sweeps", "ridge.tol", "out", "threads",
    "seed", "verbose", "checkpoint", "method", "export.label", "export.mode"};

std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& cfg) {
    cfg.check_keys(kKnownKeys);
    ExperimentConfig c;
    c.source = cfg.get_string("dataset.source", c.source);
    c.rows = cfg.get_uint("dataset.rows", c.rows);
    c.data_path = cfg.get_string("dataset.data", "");
    c.schema_path = cfg.get_string("dataset.schema", "");
    c.truth_path = cfg.get_string("dataset.truth", "");
    c.text_embeddings_path = cfg.get_string("dataset.text_embeddings", "");
    c.missing_rate = cfg.get_double("mask.rate", c.missing_rate);

    const auto variant =
        encoding::parse_variant(cfg.get_string("imputer.variant", "quantum_iqp"));
    for (const auto& m : cfg.get_list("methods", {"mean_mode", "knn", "iterative_ridge", "imputer"}))
        c.methods.push_back(MethodSpec::parse(m, variant));

    c.seeds.clear();
    if (cfg.has("seeds")) {
        for (const auto& s : cfg.get_list("seeds", {})) {
            KeyValueConfig one;
            one.set("seeds", s);
            c.seeds.push_back(one.get_uint("seeds", 0));
        }
    } else {
        c.seeds.push_back(cfg.get_uint("seed", 1));
    }

    auto& im = c.imputer;
    im.n_qubits = cfg.get_uint("quantum.qubits", im.n_qubits);
    im.n_layers = cfg.get_uint("quantum.layers", im.n_layers);
    im.model.d_model = cfg.get_uint("model.d_model", im.model.d_model);
    im.model.n_blocks = cfg.get_uint("model.blocks", im.model.n_blocks);
    im.model.n_heads = cfg.get_uint("model.heads", im.model.n_heads);
    im.model.ffn_dim = cfg.get_uint("model.ffn", im.model.ffn_dim);
    im.train.lr = cfg.get_double("train.lr", im.train.lr);
    im.train.batch_size = cfg.get_uint("train.batch_size", im.train.batch_size);
    im.train.epochs = cfg.get_uint("train.epochs", im.train.epochs);
    im.train.mask_rate = cfg.get_double("train.mask_rate", im.train.mask_rate);
    im.train.numeric_weight = cfg.get_double("train.numeric_weight", im.train.numeric_weight);
    im.train.categorical_weight =
        cfg.get_double("train.categorical_weight", im.train.categorical_weight);
    im.train.beta1 = cfg.get_double("train.beta1", im.train.beta1);
    im.train.beta2 = cfg.get_double("train.beta2", im.train.beta2);
    im.train.eps = cfg.get_double("train.eps", im.train.eps);

    c.baseline.k = cfg.get_uint("knn.k", c.baseline.k);
    c.baseline.ridge_lambda = cfg.get_double("ridge.lambda", c.baseline.ridge_lambda);
    c.baseline.max_sweeps = cfg.get_uint("ridge.max_sweeps", c.baseline.max_sweeps);
    c.baseline.tolerance = cfg.get_double("ridge.tol", c.baseline.tolerance);
    c.out_dir = cfg.get_string("out", "");
    c.threads = cfg.get_uint("threads", c.threads);
    c.validate();
    return c;
}

KeyValueConfig ExperimentConfig::to_config() const {
    KeyValueConfig k;
    k.set("dataset.source", source);
    if (source == "synthetic") {
        k.set("dataset.rows", std::to_string(rows));
    } else {
        k.set("dataset.data", data_path.string());
        k.set("dataset.schema", schema_path.string());
        if (!truth_path.empty()) k.set("dataset.truth", truth_path.string());
    }
    if (!text_embeddings_path.empty())
        k.set("dataset.text_embeddings", text_embeddings_path.string());
    k.set("mask.rate", fmt_double(missing_rate));
    std::string ms, ss;
    for (const auto& m : methods) ms += (ms.empty() ? "" : ",") + m.name();
    for (auto s : seeds) ss += (ss.empty() ? "" : ",") + std::to_string(s);
    k.set("methods", ms);
    k.set("seeds", ss);
    k.set("quantum.qubits", std::to_string(imputer.n_qubits));
    k.set("quantum.layers", std::to_string(imputer.n_layers));
    k.set("model.d_model", std::to_string(imputer.model.d_model));
    k.set("model.blocks", std::to_string(imputer.model.n_blocks));
    k.set("model.heads", std::to_string(imputer.model.n_heads));
    k.set("model.ffn", std::to_string(imputer.model.ffn_dim));
    k.set("train.lr", fmt_double(imputer.train.lr));
    k.set("train.batch_size", std::to_string(imputer.train.batch_size));
    k.set("train.epochs", std::to_string(imputer.train.epochs));
    k.set("train.mask_rate", fmt_double(imputer.train.mask_rate));
    k.set("knn.k", std::to_string(baseline.k));
    k.set("ridge.lambda", fmt_double(baseline.ridge_lambda));
    k.set("ridge.max_sweeps", std::to_string(baseline.max_sweeps));
    k.set("ridge.tol", fmt_double(baseline.tolerance));
    return k;
}

// ---------------------------------------------------------------------------
// Aggregates

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace {

std::vector<double> collect(const std::vector<SeedResult>& seeds,
                            std::optional<double> SeedResult::*field) {
    std::vector<double> out;
    for (const auto& s : seeds)
        if (!s.error && (s.*field)) out.push_back(*(s.*field));
    return out;
}

std::optional<double> agg(const std::vector<double>& v, bool std_dev) {
    if (v.empty()) return std::nullopt;
    return std_dev ? sample_std(v) : mean_of(v);
}

} // namespace

std::optional<double> MethodReport::rmse_mean() const { return agg(collect(seeds, &SeedResult::rmse), false); }
std::optional<double> MethodReport::rmse_std() const { return agg(collect(seeds, &SeedResult::rmse), true); }
std::optional<double> MethodReport::f1_mean() const { return agg(collect(seeds, &SeedResult::macro_f1), false); }
std::optional<double> MethodReport::f1_std() const { return agg(collect(seeds, &SeedResult::macro_f1), true); }

double MethodReport::total_seconds() const {
    double s = 0.0;
    for (const auto& r : seeds) s += r.seconds;
    return s;
}

const MethodReport* MetricReport::find(std::string_view method) const {
    for (const auto& m : methods)
        if (m.method == method) return &m;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Running

PreparedSeed prepare_seed(const ExperimentConfig& config, std::uint64_t seed,
                          const encoding::TextEmbeddings& text) {
    std::optional<Table> working;
    std::optional<Table> truth;
    if (config.source == "synthetic") {
        auto ds = data::synth_healthcare_generate(config.rows, stream_seed(seed, "datagen"));
        working = std::move(ds.working);
        truth = std::move(ds.truth);
    } else {
        const auto schema = data::read_schema(config.schema_path);
        working = data::load_csv(config.data_path, schema);
        truth = config.truth_path.empty() ? *working : data::load_csv(config.truth_path, schema);
        if (truth->n_rows() != working->n_rows())
            throw LoadError("truth sidecar row count does not match data");
    }
    const data::Mask mcar = data::inject_mcar(*working, config.missing_rate, stream_seed(seed, "mask"));
    Table input = data::apply_mask(*working, mcar);

    data::Mask score(input.n_rows(), input.n_cols(), data::MaskProvenance::InjectedMcar);
    for (std::size_t r = 0; r < input.n_rows(); ++r)
        for (std::size_t c = 0; c < input.n_cols(); ++c)
            score.set(r, c,
                      data::is_missing(input.at(r, c)) &&
                          input.schema().kind(c) != ColumnKind::Text &&
                          !data::is_missing(truth->at(r, c)));
    auto stats = encoding::fit_preprocessor(input, text);
    return {std::move(input), std::move(*truth), std::move(score), mcar.hash(), std::move(stats)};
}

data::Table run_method(const MethodSpec& method, const ExperimentConfig& config,
                       std::uint64_t seed, const PreparedSeed& prepared,
                       const encoding::TextEmbeddings& text) {
    if (!method.is_imputer) {
        auto bc = config.baseline;
        bc.method = method.baseline;
        return baselines::impute(prepared.input, data::native_mask(prepared.input), bc);
    }
    encoding::EmbeddingConfig ec;
    ec.variant = method.variant;
    ec.n_qubits = config.imputer.n_qubits;
    ec.n_layers = config.imputer.n_layers;
    ec.seed = stream_seed(seed, "embedding");
    const encoding::CellEmbedder embedder(prepared.stats, ec);
    const auto encoded =
        encoding::encode_table(prepared.input, prepared.stats, embedder, text, config.threads);
    imputer::ModelConfig mc = config.imputer.model;
    mc.variant = method.variant;
    mc.embed_dim = ec.n_qubits;
    imputer::TrainConfig tc = config.imputer.train;
    tc.seed = seed;
    const auto trained = imputer::train(prepared.input, prepared.stats, encoded, mc, tc);
    return imputer::impute_table(prepared.input, trained.params, prepared.stats, encoded);
}

MetricReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const encoding::TextEmbeddings text =
        config.text_embeddings_path.empty()
            ? encoding::TextEmbeddings{}
            : encoding::TextEmbeddings::load_precomputed(config.text_embeddings_path);

    MetricReport report;
    report.dataset = config.source == "synthetic"
                         ? data::synth_healthcare_schema().name()
                         : data::read_schema(config.schema_path).name();
    report.config = config.to_config();
    for (const auto& m : config.methods) report.methods.push_back({m.name(), {}});

    for (std::uint64_t seed : config.seeds) {
        const PreparedSeed prepared = prepare_seed(config, seed, text);
        // Leakage guard: held-out cells are absent from the method input.
        for (std::size_t r = 0; r < prepared.input.n_rows(); ++r)
            for (std::size_t c = 0; c < prepared.input.n_cols(); ++c)
                if (prepared.score_mask.at(r, c) && !data::is_missing(prepared.input.at(r, c)))
                    throw ContractViolation("scored cell visible in method input");

        for (std::size_t i = 0; i < config.methods.size(); ++i) {
            SeedResult res;
            res.seed = seed;
            res.mask_hash = prepared.mcar_hash;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const Table imputed = run_method(config.methods[i], config, seed, prepared, text);
                res.rmse = rmse_numeric(imputed, prepared.truth, prepared.score_mask, prepared.stats);
                res.macro_f1 = macro_f1_categorical(imputed, prepared.truth, prepared.score_mask);
                res.rmse_raw = rmse_raw_per_column(imputed, prepared.truth, prepared.score_mask);
            } catch (const std::exception& e) {
                res.error = e.what();
            }
            res.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            for (std::size_t r = 0; r < prepared.score_mask.n_rows(); ++r)
                for (std::size_t c = 0; c < prepared.score_mask.n_cols(); ++c) {
                    if (!prepared.score_mask.at(r, c)) continue;
                    if (prepared.truth.schema().kind(c) == ColumnKind::Numeric) ++res.n_numeric;
                    else ++res.n_categorical;
                }
            report.methods[i].seeds.push_back(std::move(res));
        }
    }
    return report;
}

MetricReport ablation_suite(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.methods.clear();
    for (auto v : {encoding::EmbedderVariant::RandomProjection, encoding::EmbedderVariant::ClassicalMlp,
                   encoding::EmbedderVariant::QuantumIqp}) {
        MethodSpec m;
        m.is_imputer = true;
        m.variant = v;
        c.methods.push_back(m);
    }
    return run_experiment(c);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

using json = nlohmann::ordered_json;

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

} // namespace

std::string report_json(const MetricReport& report) {
    json doc;
    doc["format"] = "qimpute-report";
    doc["version"] = 1;
    doc["dataset"] = report.dataset;
    json cfg = json::object();
    for (const auto& [k, v] : report.config.values()) cfg[k] = v;
    doc["config"] = cfg;
    json results = json::array();
    json summary = json::array();
    for (const auto& m : report.methods) {
        for (const auto& s : m.seeds) {
            json row = {{"dataset", report.dataset},
                        {"method", m.method},
                        {"seed", s.seed},
                        {"rmse", opt(s.rmse)},
                        {"macro_f1", opt(s.macro_f1)},
                        {"n_numeric", s.n_numeric},
                        {"n_categorical", s.n_categorical},
                        {"mask_hash", s.mask_hash}};
            json raw = json::object();
            for (const auto& [col, v] : s.rmse_raw) raw[col] = v;
            row["rmse_raw_per_column"] = raw;
            row["error"] = s.error ? json(*s.error) : json(nullptr);
            results.push_back(std::move(row));
        }
        summary.push_back({{"dataset", report.dataset},
                           {"method", m.method},
                           {"rmse_mean", opt(m.rmse_mean())},
                           {"rmse_std", opt(m.rmse_std())},
                           {"macro_f1_mean", opt(m.f1_mean())},
                           {"macro_f1_std", opt(m.f1_std())}});
    }
    doc["results"] = std::move(results);
    doc["summary"] = std::move(summary);
    return doc.dump(2) + "\n";
}

std::string timings_json(const MetricReport& report) {
    json doc = json::array();
    for (const auto& m : report.methods) {
        json seeds = json::array();
        for (const auto& s : m.seeds) seeds.push_back({{"seed", s.seed}, {"seconds", s.seconds}});
        doc.push_back({{"method", m.method}, {"total_seconds", m.total_seconds()}, {"per_seed", seeds}});
    }
    return doc.dump(2) + "\n";
}

void print_report(const MetricReport& report, std::ostream& out) {
    auto cell = [](std::optional<double> mean, std::optional<double> sd) {
        if (!mean) return std::string("n/a");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f +- %.4f", *mean, sd.value_or(0.0));
        return std::string(buf);
    };
    std::size_t width = 6;
    for (const auto& m : report.methods) width = std::max(width, m.method.size());
    out << "dataset: " << report.dataset << "\n";
    out << std::left << std::setw(static_cast<int>(width) + 2) << "method" << std::setw(20)
        << "rmse" << std::setw(20) << "macro_f1" << std::setw(8) << "errors"
        << "seconds\n";
    for (const auto& m : report.methods) {
        std::size_t errors = 0;
        for (const auto& s : m.seeds) errors += s.error ? 1 : 0;
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.2f", m.total_seconds());
        out << std::left << std::setw(static_cast<int>(width) + 2) << m.method << std::setw(20)
            << cell(m.rmse_mean(), m.rmse_std()) << std::setw(20)
            << cell(m.f1_mean(), m.f1_std()) << std::setw(8) << errors << secs << "\n";
        for (const auto& s : m.seeds)
            if (s.error) out << "  error (seed " << s.seed << "): " << *s.error << "\n";
    }
}

void write_report(const MetricReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [](const std::filesystem::path& p, const std::string& s) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
        f << s;
    };
    write(dir / "report.json", report_json(report));
    write(dir / "timings.json", timings_json(report));
}

// ---------------------------------------------------------------------------
// Embedding export

void export_embeddings(const Table& table, const encoding::PreprocessStats& stats,
                       const encoding::CellEmbedder& embedder,
                       const encoding::TextEmbeddings& text, std::string_view label_column,
                       ExportMode mode, const std::filesystem::path& path,
                       const imputer::ModelParams* params) {
    const auto& schema = table.schema();
    const auto label = schema.find(label_column);
    if (!label) throw std::invalid_argument("unknown label column '" + std::string(label_column) + "'");
    if (schema.kind(*label) != ColumnKind::Categorical)
        throw std::invalid_argument("label column '" + std::string(label_column) +
                                    "' is not categorical");
    const bool mlp = embedder.config().variant == encoding::EmbedderVariant::ClassicalMlp;
    if (mlp && params == nullptr)
        throw ContractViolation("ClassicalMlp export needs model parameters");
    std::vector<encoding::MlpEmbedder> mlps;
    if (mlp)
        for (std::size_t c = 0; c < schema.size(); ++c) mlps.push_back(params->mlp(c));

    const std::size_t dim = embedder.embed_dim();
    std::ostringstream out;
    out << "row_id";
    if (mode == ExportMode::Cell) out << ",column";
    out << ",label";
    for (std::size_t i = 0; i < dim; ++i) out << ",e_" << i;
    out << "\n";
    auto write_vec = [&](const std::vector<double>& v) {
        char buf[40];
        for (double x : v) {
            const auto res = std::to_chars(buf, buf + sizeof buf, x);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << "\n";
    };
    auto csv_field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    };

    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const auto& lc = table.at(r, *label);
        const std::string lab = data::is_missing(lc) ? "" : std::get<std::string>(lc);
        std::vector<double> acc(dim, 0.0);
        std::size_t count = 0;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const auto& cell = table.at(r, c);
            if (data::is_missing(cell)) continue;
            if (mode == ExportMode::RowMean && c == *label) continue;
            std::vector<double> raw;
            if (schema.kind(c) == ColumnKind::Text)
                raw = text.embed(std::get<std::string>(cell), r, schema.column(c).name);
            const auto e = encoding::embed_cell(cell, c, stats, embedder,
                                                mlp ? &mlps[c] : nullptr, raw);
            if (mode == ExportMode::Cell) {
                out << r << ',' << csv_field(schema.column(c).name) << ',' << csv_field(lab);
                write_vec(e.vector);
            } else {
                for (std::size_t i = 0; i < dim; ++i) acc[i] += e.vector[i];
                ++count;
            }
        }
        if (mode == ExportMode::RowMean) {
            if (count > 0)
                for (double& v : acc) v /= static_cast<double>(count);
            out << r << ',' << csv_field(lab);
            write_vec(acc);
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << out.str();
}

} // namespace qimpute::eval
