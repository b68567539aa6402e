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

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qimpute/data.hpp"
#include "qimpute/quantum.hpp"

namespace qimpute::encoding {

using data::ColumnKind;

enum class EmbedderVariant { QuantumIqp, ClassicalMlp, RandomProjection };

std::string_view to_string(EmbedderVariant v);
EmbedderVariant parse_variant(std::string_view s);

inline constexpr std::size_t kDefaultTextDim = 16;

/// Normalization constants for one column, fitted on observed cells only.
struct ColumnStats {
    ColumnKind kind = ColumnKind::Numeric;
    // Numeric
    double min = 0.0;
    double max = 0.0;
    bool degenerate = false;
    // Categorical, in first-appearance order
    std::vector<std::string> vocabulary;
    // Text: per-dimension range of the raw text embedding
    std::size_t text_dim = 0;
    std::vector<double> text_min;
    std::vector<double> text_max;

    /// Length of the classical feature vector this column encodes to.
    std::size_t feature_dim() const;
    /// Index of `category` in the vocabulary, if known.
    std::optional<std::size_t> category_index(std::string_view category) const;
    /// (v - min) / (max - min); 0 for degenerate columns. Not clamped.
    double normalize(double v) const;
    double denormalize(double unit) const;

    friend bool operator==(const ColumnStats&, const ColumnStats&) = default;
};

struct PreprocessStats {
    std::vector<ColumnStats> columns;

    friend bool operator==(const PreprocessStats&, const PreprocessStats&) = default;
};

/// Bag-of-words feature hashing: lowercase alphanumeric tokens, FNV-1a 64,
/// bucket = hash mod dim, sign from bit 63, L2-normalized. Blank text gives
/// the zero vector.
std::vector<double> text_embed_hashing(std::string_view text, std::size_t dim);

/// Raw text vectors for text cells. Columns loaded from a precomputed CSV
/// override the hashing embedder for that column.
class TextEmbeddings {
  public:
    explicit TextEmbeddings(std::size_t dim = kDefaultTextDim) : dim_(dim) {}

    /// CSV header: row_id,column_name,e_0,...,e_{dim-1}. row_id is the
    /// 0-based data row. Throws LoadError on malformed input.
    static TextEmbeddings load_precomputed(const std::filesystem::path& path,
                                           std::size_t dim = kDefaultTextDim);

    std::size_t dim() const noexcept { return dim_; }
    bool has_override(std::string_view column_name) const;

    /// Raw embedding for the text cell at (row, column). Throws LoadError
    /// when the column is overridden but the row has no entry.
    std::vector<double> embed(std::string_view text, std::size_t row,
                              std::string_view column_name) const;

    void set(std::string column_name, std::size_t row, std::vector<double> vec);

  private:
    std::size_t dim_;
    std::map<std::string, std::map<std::size_t, std::vector<double>>, std::less<>>
        overrides_;
};

/// Fits per-column statistics from the observed cells of `table`.
/// Throws FitError naming any column with no observed value.
PreprocessStats fit_preprocessor(const data::Table& table,
                                 const TextEmbeddings& text = TextEmbeddings{});

/// Classical encoding of one observed cell.
struct ClassicalFeatureVector {
    std::vector<double> values;
    std::size_t column = 0;
    /// Set when a categorical value was not in the fitted vocabulary; the
    /// values are then all zero.
    bool unknown_category = false;
};

/// Numeric: pi * normalized value clamped to [0, pi] (0 for degenerate
/// columns). Categorical: one-hot scaled by pi. Text: `text_raw` (or the
/// hashing embedding when empty) rescaled per dimension to [0, pi].
/// Throws ContractViolation for a Missing cell.
ClassicalFeatureVector encode_cell(const data::Cell& value, std::size_t column,
                                   const ColumnStats& stats,
                                   std::span<const double> text_raw = {});

/// Fixed linear map of d_in features to d_out outputs, stored d_out x d_in.
/// Entries are uniform[-1, 1] / sqrt(d_in), reproducible from (seed, d_in, d_out).
class LinearProjection {
  public:
    LinearProjection(std::size_t d_in, std::size_t d_out, std::uint64_t seed);
    /// Explicit coefficients, row-major d_out x d_in.
    LinearProjection(std::size_t d_in, std::size_t d_out, std::vector<double> coeffs);

    std::size_t d_in() const noexcept { return d_in_; }
    std::size_t d_out() const noexcept { return d_out_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double coeff(std::size_t out, std::size_t in) const { return coeffs_.at(out * d_in_ + in); }

    /// matrix * x. Throws ParameterError when x.size() != d_in.
    std::vector<double> apply(std::span<const double> x) const;

  private:
    std::size_t d_in_;
    std::size_t d_out_;
    std::uint64_t seed_ = 0;
    std::vector<double> coeffs_;
};

using AngleProjection = LinearProjection;

/// singles_j = (P x)_j, pairs_jk = (P x)_j * (P x)_k, same angles on every layer.
quantum::IqpParams project_to_angles(const ClassicalFeatureVector& x_c,
                                     const AngleProjection& proj, std::size_t n_qubits,
                                     std::size_t n_layers);

/// Per-column two-layer perceptron: d_in -> hidden (tanh) -> embed_dim.
struct MlpEmbedder {
    Eigen::MatrixXd w1;  // hidden x d_in
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // embed_dim x hidden
    Eigen::VectorXd b2;

    std::vector<double> forward(std::span<const double> x) const;
};

inline constexpr std::size_t kMlpHidden = 16;

struct EmbeddingConfig {
    EmbedderVariant variant = EmbedderVariant::QuantumIqp;
    std::size_t n_qubits = 8;  // also the embedding width for every variant
    std::size_t n_layers = 2;
    std::uint64_t seed = 0;    // projections derive per-column streams from this
};

struct CellEmbedding {
    std::vector<double> vector;
    EmbedderVariant variant = EmbedderVariant::QuantumIqp;
};

/// Fixed (non-trainable) per-column projections for one EmbeddingConfig.
class CellEmbedder {
  public:
    CellEmbedder(const PreprocessStats& stats, EmbeddingConfig config);

    const EmbeddingConfig& config() const noexcept { return config_; }
    std::size_t embed_dim() const noexcept { return config_.n_qubits; }
    const AngleProjection& angle_projection(std::size_t column) const {
        return angle_.at(column);
    }
    const LinearProjection& random_projection(std::size_t column) const {
        return random_.at(column);
    }

    /// Embeds an encoded cell with a fixed variant. ClassicalMlp needs the
    /// trainable weights and goes through the overload below.
    CellEmbedding embed(const ClassicalFeatureVector& x_c) const;
    CellEmbedding embed(const ClassicalFeatureVector& x_c, const MlpEmbedder& mlp) const;

  private:
    EmbeddingConfig config_;
    std::vector<AngleProjection> angle_;
    std::vector<LinearProjection> random_;
};

/// Full pipeline for one observed cell: encode_cell then the variant's embedder.
CellEmbedding embed_cell(const data::Cell& value, std::size_t column,
                         const PreprocessStats& stats, const CellEmbedder& embedder,
                         const MlpEmbedder* mlp = nullptr,
                         std::span<const double> text_raw = {});

/// Encoded features (and, for fixed variants, embeddings) for every cell of
/// a table. Missing cells have empty vectors.
struct EncodedTable {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::vector<double>> features;    // row-major n_rows x n_cols
    std::vector<std::vector<double>> embeddings;  // empty for ClassicalMlp
    std::size_t unknown_categories = 0;

    bool observed(std::size_t r, std::size_t c) const {
        return !features[r * n_cols + c].empty();
    }
    const std::vector<double>& feature(std::size_t r, std::size_t c) const {
        return features[r * n_cols + c];
    }
    const std::vector<double>& embedding(std::size_t r, std::size_t c) const {
        return embeddings[r * n_cols + c];
    }
};

/// Encodes every observed cell. `threads` > 1 splits rows across workers;
/// results do not depend on the thread count.
EncodedTable encode_table(const data::Table& table, const PreprocessStats& stats,
                          const CellEmbedder& embedder, const TextEmbeddings& text,
                          std::size_t threads = 1);

} // namespace qimpute::encoding
