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
#include <optional>
#include <string>
#include <vector>

#include "qimpute/data.hpp"
#include "qimpute/encoding.hpp"

namespace qimpute::imputer {

using encoding::EmbedderVariant;

struct ModelConfig {
    EmbedderVariant variant = EmbedderVariant::QuantumIqp;
    std::size_t embed_dim = 8;
    std::size_t d_model = 64;
    std::size_t n_blocks = 4;
    std::size_t n_heads = 4;
    std::size_t ffn_dim = 128;
    std::size_t mlp_hidden = encoding::kMlpHidden;
    double ln_eps = 1e-5;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrainConfig {
    double lr = 1e-4;
    std::size_t batch_size = 32;
    std::size_t epochs = 30;
    double mask_rate = 0.15;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double numeric_weight = 1.0;
    double categorical_weight = 1.0;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// What the model needs to know about each column.
struct ColumnInfo {
    data::ColumnKind kind = data::ColumnKind::Numeric;
    std::size_t vocab = 0;        // categorical only
    std::size_t feature_dim = 0;  // classical feature width

    friend bool operator==(const ColumnInfo&, const ColumnInfo&) = default;
};

std::vector<ColumnInfo> column_info(const encoding::PreprocessStats& stats);

struct Tensor {
    std::string name;
    Eigen::MatrixXd value;
};

/// Ordered list of named tensors. Gradients and Adam moments reuse the
/// same layout.
class ParamSet {
  public:
    std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols);

    std::size_t size() const noexcept { return tensors_.size(); }
    Eigen::MatrixXd& operator[](std::size_t i) { return tensors_[i].value; }
    const Eigen::MatrixXd& operator[](std::size_t i) const { return tensors_[i].value; }
    const std::string& name(std::size_t i) const { return tensors_[i].name; }
    std::optional<std::size_t> find(const std::string& name) const;

    /// Total scalar count.
    std::size_t scalar_count() const noexcept;
    ParamSet zeros_like() const;
    void set_zero();
    bool all_finite() const;

    std::vector<Tensor>& tensors() noexcept { return tensors_; }
    const std::vector<Tensor>& tensors() const noexcept { return tensors_; }

  private:
    std::vector<Tensor> tensors_;
};

struct BlockLayout {
    std::size_t ln1_g, ln1_b;
    std::size_t wq, bq, wk, bk, wv, bv, wo, bo;
    std::size_t ln2_g, ln2_b;
    std::size_t w1, b1, w2, b2;
};

struct MlpLayout {
    std::size_t w1, b1, w2, b2;
};

/// Indices of every tensor in a ModelParams::tensors set.
struct ModelLayout {
    std::size_t w_in, b_in, mask_emb, col_emb;
    std::vector<BlockLayout> blocks;
    std::size_t lnf_g, lnf_b;
    std::vector<std::optional<std::size_t>> head_w;  // per column; none for text
    std::vector<std::optional<std::size_t>> head_b;
    std::vector<std::optional<MlpLayout>> mlp;       // per column; ClassicalMlp only
};

/// All trainable tensors of the imputer.
class ModelParams {
  public:
    /// Builds the layout for (config, columns) and draws weights
    /// uniform[-1/sqrt(fan_in), 1/sqrt(fan_in)]. Biases and the mask
    /// embedding start at zero, layer-norm scales at one, column embeddings
    /// uniform[-1, 1].
    static ModelParams init(const ModelConfig& config, std::vector<ColumnInfo> columns,
                            std::uint64_t seed);

    /// Layout with all tensors zero. Used when loading checkpoints.
    static ModelParams zeros(const ModelConfig& config, std::vector<ColumnInfo> columns);

    const ModelConfig& config() const noexcept { return config_; }
    const std::vector<ColumnInfo>& columns() const noexcept { return columns_; }
    const ModelLayout& layout() const noexcept { return layout_; }
    ParamSet& tensors() noexcept { return tensors_; }
    const ParamSet& tensors() const noexcept { return tensors_; }
    std::size_t parameter_count() const noexcept { return tensors_.scalar_count(); }

    /// Snapshot of the per-column MLP embedder (ClassicalMlp only).
    encoding::MlpEmbedder mlp(std::size_t column) const;

  private:
    ModelParams() = default;

    ModelConfig config_;
    std::vector<ColumnInfo> columns_;
    ModelLayout layout_{};
    ParamSet tensors_;
};

/// One cell token. `input` is the cell embedding for fixed embedders, or the
/// classical feature vector when the ClassicalMlp embedder runs inside the
/// model. Masked tokens ignore `input`.
struct Token {
    bool masked = true;
    std::vector<double> input;
};

/// Ground truth for a supervised cell.
struct Target {
    std::size_t column = 0;
    double numeric = 0.0;       // normalized [0, 1] space
    std::size_t category = 0;   // vocabulary index
};

/// A row (one hyperedge): one token per schema column in schema order, the
/// columns to predict, and, for training, their targets.
struct RowExample {
    std::vector<Token> tokens;
    std::vector<std::size_t> predict;
    std::vector<Target> targets;  // empty at inference, else parallel to predict
};

struct CellPrediction {
    std::size_t row = 0;  // index within the batch
    std::size_t column = 0;
    double numeric = 0.0;         // numeric columns: normalized value
    Eigen::VectorXd logits;       // categorical columns
};

/// Per-cell predictions for every `predict` entry, in batch order.
std::vector<CellPrediction> forward(const ModelParams& params,
                                    const std::vector<RowExample>& batch);

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

struct LossBreakdown {
    double total = 0.0;
    double numeric_sse = 0.0;     // sum of squared errors
    double categorical_ce = 0.0;  // sum of cross-entropies
    std::size_t n_targets = 0;
};

/// (w_num * SSE + w_cat * CE) / n_targets over the supervised cells.
/// An empty target set gives 0.
LossBreakdown loss(const std::vector<CellPrediction>& predictions,
                   const std::vector<RowExample>& batch, const ModelParams& params,
                   const TrainConfig& config);

struct LossAndGradient {
    LossBreakdown loss;
    ParamSet grad;
};

/// Forward pass, loss and exact analytic gradient of every tensor.
LossAndGradient backward(const ModelParams& params, const std::vector<RowExample>& batch,
                         const TrainConfig& config);

struct AdamState {
    ParamSet m;
    ParamSet v;
    std::size_t t = 0;

    static AdamState for_params(const ModelParams& params);
};

/// Bias-corrected Adam update. `step` is 1-based.
void adam_step(ModelParams& params, const ParamSet& grad, AdamState& state,
               std::size_t step, const TrainConfig& config);

struct TrainResult {
    ModelParams params;
    std::vector<double> epoch_loss;
    std::size_t empty_batches = 0;
};

/// Self-supervised training on the observed cells of `table`. Each epoch
/// shuffles rows and redraws supervision masks; everything derives from
/// config.seed. Throws TrainingError when the loss becomes non-finite.
TrainResult train(const data::Table& table, const encoding::PreprocessStats& stats,
                  const encoding::EncodedTable& encoded, const ModelConfig& model_config,
                  const TrainConfig& config);

/// Fills every missing numeric/categorical cell of `table`. Numeric outputs
/// are mapped back to column units and clamped to the fitted range +-10%;
/// categoricals take the argmax category. Text cells stay as they are.
data::Table impute_table(const data::Table& table, const ModelParams& params,
                         const encoding::PreprocessStats& stats,
                         const encoding::EncodedTable& encoded);

/// Token for cell (r, c) taken from an encoded table.
Token make_token(const encoding::EncodedTable& encoded, EmbedderVariant variant,
                 std::size_t r, std::size_t c, bool masked);

// ---------------------------------------------------------------------------
// Checkpoints

/// Everything needed to re-run imputation: configs, schema, fitted stats and
/// tensors.
struct Checkpoint {
    ModelConfig model;
    encoding::EmbeddingConfig embedding;
    data::DatasetSchema schema;
    encoding::PreprocessStats stats;
    ModelParams params;
};

/// JSON document listing every tensor with its shape and row-major values.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws LoadError when the file is malformed or `expected_schema` differs
/// from the stored schema.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const data::DatasetSchema& expected_schema);

} // namespace qimpute::imputer
