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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qimpute/baselines.hpp"
#include "qimpute/config.hpp"
#include "qimpute/data.hpp"
#include "qimpute/encoding.hpp"
#include "qimpute/imputer.hpp"

namespace qimpute::eval {

// ---------------------------------------------------------------------------
// Metrics

/// RMSE over masked numeric cells, with imputed and true values both mapped
/// to [0, 1] by the fitted min-max stats. Cells whose truth is Missing are
/// skipped. Returns nullopt when no cell qualifies.
std::optional<double> rmse_numeric(const data::Table& imputed, const data::Table& truth,
                                   const data::Mask& mask,
                                   const encoding::PreprocessStats& stats);

/// Per numeric column RMSE in raw column units (absent columns omitted).
std::map<std::string, double> rmse_raw_per_column(const data::Table& imputed,
                                                  const data::Table& truth,
                                                  const data::Mask& mask);

/// Macro F1 pooled over every masked categorical cell. Categories are keyed
/// by (column, value); the macro average runs over categories present in
/// the truth, with F1 = 0 when precision + recall = 0.
std::optional<double> macro_f1_categorical(const data::Table& imputed,
                                           const data::Table& truth, const data::Mask& mask);

// ---------------------------------------------------------------------------
// Experiments

struct ImputerSettings {
    imputer::ModelConfig model;
    imputer::TrainConfig train;
    std::size_t n_qubits = 8;
    std::size_t n_layers = 2;
};

/// A method to run: a baseline or the imputer with one embedder variant.
struct MethodSpec {
    bool is_imputer = false;
    baselines::Method baseline = baselines::Method::MeanMode;
    encoding::EmbedderVariant variant = encoding::EmbedderVariant::QuantumIqp;

    std::string name() const;
    /// "mean_mode", "knn", "iterative_ridge", "imputer" (uses the default
    /// variant) or "imputer:<variant>".
    static MethodSpec parse(std::string_view s, encoding::EmbedderVariant default_variant);
};

struct ExperimentConfig {
    std::string source = "synthetic";  // "synthetic" or "csv"
    std::size_t rows = 1000;
    std::filesystem::path data_path;
    std::filesystem::path schema_path;
    std::filesystem::path truth_path;           // optional for csv
    std::filesystem::path text_embeddings_path; // optional
    double missing_rate = 0.2;
    std::vector<MethodSpec> methods;
    std::vector<std::uint64_t> seeds{1};
    ImputerSettings imputer;
    baselines::BaselineConfig baseline;
    std::filesystem::path out_dir;
    std::size_t threads = 1;

    void validate() const;

    /// Reads every known key from `cfg`; unknown keys are an error.
    static ExperimentConfig from_config(const KeyValueConfig& cfg);
    /// Normalized key = value rendering, written into reports.
    KeyValueConfig to_config() const;
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::optional<double> rmse;
    std::optional<double> macro_f1;
    std::size_t n_numeric = 0;
    std::size_t n_categorical = 0;
    std::map<std::string, double> rmse_raw;
    std::uint64_t mask_hash = 0;
    double seconds = 0.0;
    std::optional<std::string> error;
};

struct MethodReport {
    std::string method;
    std::vector<SeedResult> seeds;

    std::optional<double> rmse_mean() const;
    std::optional<double> rmse_std() const;
    std::optional<double> f1_mean() const;
    std::optional<double> f1_std() const;
    double total_seconds() const;
};

struct MetricReport {
    std::string dataset;
    KeyValueConfig config;
    std::vector<MethodReport> methods;

    const MethodReport* find(std::string_view method) const;
};

/// Mean and sample standard deviation (n - 1; 0 for a single value).
double mean_of(const std::vector<double>& v);
double sample_std(const std::vector<double>& v);

/// One seed's prepared inputs, shared by every method so comparisons are
/// controlled.
struct PreparedSeed {
    data::Table input;   // working table with held-out cells set Missing
    data::Table truth;   // sidecar; never fed to a method
    data::Mask score_mask;
    std::uint64_t mcar_hash = 0;
    encoding::PreprocessStats stats;
};

PreparedSeed prepare_seed(const ExperimentConfig& config, std::uint64_t seed,
                          const encoding::TextEmbeddings& text);

/// Runs one method on prepared data. Returns the completed table.
data::Table run_method(const MethodSpec& method, const ExperimentConfig& config,
                       std::uint64_t seed, const PreparedSeed& prepared,
                       const encoding::TextEmbeddings& text);

/// Per seed: build data, inject MCAR, fit on observed cells, run every
/// method, score against the truth sidecar. A failing method records its
/// error and the rest continue.
MetricReport run_experiment(const ExperimentConfig& config);

/// run_experiment with methods = imputer:{random_projection, classical_mlp,
/// quantum_iqp}; everything else fixed.
MetricReport ablation_suite(const ExperimentConfig& config);

/// Deterministic JSON (no wall-clock fields).
std::string report_json(const MetricReport& report);
/// Per-method wall-clock seconds as JSON.
std::string timings_json(const MetricReport& report);
/// Aligned human-readable table, including wall-clock.
void print_report(const MetricReport& report, std::ostream& out);

/// Writes report.json and timings.json into `dir`.
void write_report(const MetricReport& report, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Embedding export

enum class ExportMode { Cell, RowMean };

/// CSV for external visualization. Cell mode: row_id,column,label,e_0..;
/// RowMean mode: row_id,label,e_0.. with the mean over the row's observed
/// non-label cells. Throws std::invalid_argument for an unknown or
/// non-categorical label column. `params` supplies MLP weights for the
/// ClassicalMlp variant.
void export_embeddings(const data::Table& table, const encoding::PreprocessStats& stats,
                       const encoding::CellEmbedder& embedder,
                       const encoding::TextEmbeddings& text, std::string_view label_column,
                       ExportMode mode, const std::filesystem::path& path,
                       const imputer::ModelParams* params = nullptr);

} // namespace qimpute::eval
