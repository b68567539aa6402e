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
#include "qimpute/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "qimpute/error.hpp"
#include "qimpute/rng.hpp"

namespace qimpute::encoding {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string_view to_string(EmbedderVariant v) {
    switch (v) {
    case EmbedderVariant::QuantumIqp: return "quantum_iqp";
    case EmbedderVariant::ClassicalMlp: return "classical_mlp";
    case EmbedderVariant::RandomProjection: return "random_projection";
    }
    return "?";
}

EmbedderVariant parse_variant(std::string_view s) {
    if (s == "quantum_iqp" || s == "quantum") return EmbedderVariant::QuantumIqp;
    if (s == "classical_mlp" || s == "mlp") return EmbedderVariant::ClassicalMlp;
    if (s == "random_projection" || s == "random") return EmbedderVariant::RandomProjection;
    throw std::invalid_argument("unknown embedder variant '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// ColumnStats

std::size_t ColumnStats::feature_dim() const {
    switch (kind) {
    case ColumnKind::Numeric: return 1;
    case ColumnKind::Categorical: return vocabulary.size();
    case ColumnKind::Text: return text_dim;
    }
    return 0;
}

std::optional<std::size_t> ColumnStats::category_index(std::string_view category) const {
    for (std::size_t i = 0; i < vocabulary.size(); ++i)
        if (vocabulary[i] == category) return i;
    return std::nullopt;
}

double ColumnStats::normalize(double v) const {
    if (degenerate) return 0.0;
    return (v - min) / (max - min);
}

double ColumnStats::denormalize(double unit) const {
    if (degenerate) return min;
    return min + unit * (max - min);
}

// ---------------------------------------------------------------------------
// Text

std::vector<double> text_embed_hashing(std::string_view text, std::size_t dim) {
    std::vector<double> out(dim, 0.0);
    if (dim == 0) return out;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        const std::uint64_t h = fnv1a64(token);
        const std::size_t bucket = static_cast<std::size_t>(h % dim);
        out[bucket] += (h >> 63) ? -1.0 : 1.0;
        token.clear();
    };
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if ((u >= '0' && u <= '9') || (u >= 'a' && u <= 'z')) {
            token.push_back(ch);
        } else if (u >= 'A' && u <= 'Z') {
            token.push_back(static_cast<char>(u - 'A' + 'a'));
        } else if (u >= 0x80) {
            // Non-ASCII bytes stay inside tokens unchanged.
            token.push_back(ch);
        } else {
            flush();
        }
    }
    flush();
    double norm2 = 0.0;
    for (double v : out) norm2 += v * v;
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : out) v *= inv;
    }
    return out;
}

TextEmbeddings TextEmbeddings::load_precomputed(const std::filesystem::path& path,
                                                std::size_t dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto records = data::parse_csv_records(ss.str());
    if (records.empty()) throw LoadError(path.string() + ": empty file");
    const auto& header = records.front();
    if (header.size() != dim + 2 || header[0] != "row_id" || header[1] != "column_name")
        throw LoadError(path.string() + ": header must be row_id,column_name,e_0..e_" +
                        std::to_string(dim - 1));
    TextEmbeddings out(dim);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() == 1 && rec[0].empty()) continue;
        if (rec.size() != dim + 2)
            throw LoadError(path.string() + ": row " + std::to_string(r) +
                            " has wrong width");
        std::size_t row_id = 0;
        {
            const auto [p, ec] =
                std::from_chars(rec[0].data(), rec[0].data() + rec[0].size(), row_id);
            if (ec != std::errc{} || p != rec[0].data() + rec[0].size())
                throw LoadError(path.string() + ": row " + std::to_string(r) +
                                ", column 'row_id': not an integer");
        }
        std::vector<double> vec(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const auto& f = rec[i + 2];
            const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[i]);
            if (ec != std::errc{} || p != f.data() + f.size() || !std::isfinite(vec[i]))
                throw LoadError(path.string() + ": row " + std::to_string(r) +
                                ", column 'e_" + std::to_string(i) + "': not a number");
        }
        out.set(rec[1], row_id, std::move(vec));
    }
    return out;
}

bool TextEmbeddings::has_override(std::string_view column_name) const {
    return overrides_.find(column_name) != overrides_.end();
}

void TextEmbeddings::set(std::string column_name, std::size_t row, std::vector<double> vec) {
    QIMPUTE_REQUIRE(vec.size() == dim_, ParameterError,
                    "text embedding has " + std::to_string(vec.size()) +
                        " dims, expected " + std::to_string(dim_));
    overrides_[std::move(column_name)][row] = std::move(vec);
}

std::vector<double> TextEmbeddings::embed(std::string_view text, std::size_t row,
                                          std::string_view column_name) const {
    const auto it = overrides_.find(column_name);
    if (it == overrides_.end()) return text_embed_hashing(text, dim_);
    const auto jt = it->second.find(row);
    if (jt == it->second.end())
        throw LoadError("no precomputed embedding for row " + std::to_string(row) +
                        " of text column '" + std::string(column_name) + "'");
    return jt->second;
}

// ---------------------------------------------------------------------------
// Preprocessing

PreprocessStats fit_preprocessor(const data::Table& table, const TextEmbeddings& text) {
    const auto& schema = table.schema();
    PreprocessStats stats;
    stats.columns.resize(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        ColumnStats& cs = stats.columns[c];
        cs.kind = schema.kind(c);
        std::size_t observed = 0;
        if (cs.kind == ColumnKind::Text) {
            cs.text_dim = text.dim();
            cs.text_min.assign(cs.text_dim, 0.0);
            cs.text_max.assign(cs.text_dim, 0.0);
        }
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            const auto& cell = table.at(r, c);
            if (data::is_missing(cell)) continue;
            switch (cs.kind) {
            case ColumnKind::Numeric: {
                const double v = std::get<double>(cell);
                if (observed == 0) {
                    cs.min = cs.max = v;
                } else {
                    cs.min = std::min(cs.min, v);
                    cs.max = std::max(cs.max, v);
                }
                break;
            }
            case ColumnKind::Categorical: {
                const auto& s = std::get<std::string>(cell);
                if (!cs.category_index(s)) cs.vocabulary.push_back(s);
                break;
            }
            case ColumnKind::Text: {
                const auto raw = text.embed(std::get<std::string>(cell), r,
                                            schema.column(c).name);
                for (std::size_t i = 0; i < cs.text_dim; ++i) {
                    if (observed == 0) {
                        cs.text_min[i] = cs.text_max[i] = raw[i];
                    } else {
                        cs.text_min[i] = std::min(cs.text_min[i], raw[i]);
                        cs.text_max[i] = std::max(cs.text_max[i], raw[i]);
                    }
                }
                break;
            }
            }
            ++observed;
        }
        if (observed == 0)
            throw FitError("column '" + schema.column(c).name + "' has no observed values");
        if (cs.kind == ColumnKind::Numeric) cs.degenerate = cs.min == cs.max;
    }
    return stats;
}

ClassicalFeatureVector encode_cell(const data::Cell& value, std::size_t column,
                                   const ColumnStats& stats,
                                   std::span<const double> text_raw) {
    if (data::is_missing(value))
        throw ContractViolation("encode_cell called on a missing cell in column " +
                                std::to_string(column));
    ClassicalFeatureVector out;
    out.column = column;
    switch (stats.kind) {
    case ColumnKind::Numeric: {
        const double* v = std::get_if<double>(&value);
        if (v == nullptr) throw ContractViolation("numeric column holds a string");
        double angle = 0.0;
        if (!stats.degenerate) {
            angle = kPi * (*v - stats.min) / (stats.max - stats.min);
            angle = std::clamp(angle, 0.0, kPi);
        }
        out.values = {angle};
        break;
    }
    case ColumnKind::Categorical: {
        const std::string* s = std::get_if<std::string>(&value);
        if (s == nullptr) throw ContractViolation("categorical column holds a number");
        out.values.assign(stats.vocabulary.size(), 0.0);
        if (auto idx = stats.category_index(*s)) {
            out.values[*idx] = kPi;
        } else {
            out.unknown_category = true;
        }
        break;
    }
    case ColumnKind::Text: {
        const std::string* s = std::get_if<std::string>(&value);
        if (s == nullptr) throw ContractViolation("text column holds a number");
        std::vector<double> raw;
        if (text_raw.empty()) {
            raw = text_embed_hashing(*s, stats.text_dim);
        } else {
            raw.assign(text_raw.begin(), text_raw.end());
        }
        QIMPUTE_REQUIRE(raw.size() == stats.text_dim, ParameterError,
                        "text embedding width does not match fitted dimension");
        out.values.resize(stats.text_dim);
        for (std::size_t i = 0; i < stats.text_dim; ++i) {
            const double span = stats.text_max[i] - stats.text_min[i];
            out.values[i] =
                span > 0.0 ? std::clamp(kPi * (raw[i] - stats.text_min[i]) / span, 0.0, kPi)
                           : 0.0;
        }
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Projections

LinearProjection::LinearProjection(std::size_t d_in, std::size_t d_out, std::uint64_t seed)
    : d_in_(d_in), d_out_(d_out), seed_(seed), coeffs_(d_in * d_out) {
    QIMPUTE_REQUIRE(d_in >= 1 && d_out >= 1, ParameterError,
                    "projection dimensions must be positive");
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (double& w : coeffs_) w = rng.uniform(-1.0, 1.0) * scale;
}

LinearProjection::LinearProjection(std::size_t d_in, std::size_t d_out,
                                   std::vector<double> coeffs)
    : d_in_(d_in), d_out_(d_out), coeffs_(std::move(coeffs)) {
    QIMPUTE_REQUIRE(coeffs_.size() == d_in * d_out, ParameterError,
                    "projection coefficient count does not match d_in * d_out");
}

std::vector<double> LinearProjection::apply(std::span<const double> x) const {
    QIMPUTE_REQUIRE(x.size() == d_in_, ParameterError,
                    "projection expects " + std::to_string(d_in_) + " inputs, got " +
                        std::to_string(x.size()));
    std::vector<double> y(d_out_, 0.0);
    for (std::size_t o = 0; o < d_out_; ++o) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d_in_; ++i) acc += coeffs_[o * d_in_ + i] * x[i];
        y[o] = acc;
    }
    return y;
}

quantum::IqpParams project_to_angles(const ClassicalFeatureVector& x_c,
                                     const AngleProjection& proj, std::size_t n_qubits,
                                     std::size_t n_layers) {
    QIMPUTE_REQUIRE(proj.d_out() == n_qubits, ParameterError,
                    "angle projection outputs " + std::to_string(proj.d_out()) +
                        " values for " + std::to_string(n_qubits) + " qubits");
    std::vector<double> singles = proj.apply(x_c.values);
    std::vector<double> pairs(quantum::pair_count(n_qubits));
    for (std::size_t j = 0; j < n_qubits; ++j)
        for (std::size_t k = j + 1; k < n_qubits; ++k)
            pairs[quantum::pair_index(j, k, n_qubits)] = singles[j] * singles[k];
    return quantum::IqpParams::replicated(n_layers, std::move(singles), std::move(pairs));
}

std::vector<double> MlpEmbedder::forward(std::span<const double> x) const {
    QIMPUTE_REQUIRE(static_cast<Eigen::Index>(x.size()) == w1.cols(), ParameterError,
                    "MLP embedder input width mismatch");
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd h = (w1 * xv + b1).array().tanh().matrix();
    const Eigen::VectorXd y = w2 * h + b2;
    return {y.data(), y.data() + y.size()};
}

// ---------------------------------------------------------------------------
// Embedders

CellEmbedder::CellEmbedder(const PreprocessStats& stats, EmbeddingConfig config)
    : config_(config) {
    QIMPUTE_REQUIRE(config.n_qubits >= 1 && config.n_layers >= 1, ParameterError,
                    "embedding needs at least one qubit and one layer");
    angle_.reserve(stats.columns.size());
    random_.reserve(stats.columns.size());
    for (std::size_t c = 0; c < stats.columns.size(); ++c) {
        const std::size_t d_in = std::max<std::size_t>(1, stats.columns[c].feature_dim());
        angle_.emplace_back(d_in, config.n_qubits,
                            stream_seed(config.seed, "angle-projection", c));
        random_.emplace_back(d_in, config.n_qubits,
                             stream_seed(config.seed, "random-projection", c));
    }
}

CellEmbedding CellEmbedder::embed(const ClassicalFeatureVector& x_c) const {
    switch (config_.variant) {
    case EmbedderVariant::QuantumIqp: {
        const auto params = project_to_angles(x_c, angle_.at(x_c.column),
                                              config_.n_qubits, config_.n_layers);
        return {quantum::iqp_embed(params).values, EmbedderVariant::QuantumIqp};
    }
    case EmbedderVariant::RandomProjection:
        return {random_.at(x_c.column).apply(x_c.values),
                EmbedderVariant::RandomProjection};
    case EmbedderVariant::ClassicalMlp:
        throw ContractViolation("ClassicalMlp embedding requires MLP weights");
    }
    return {};
}

CellEmbedding CellEmbedder::embed(const ClassicalFeatureVector& x_c,
                                  const MlpEmbedder& mlp) const {
    if (config_.variant != EmbedderVariant::ClassicalMlp) return embed(x_c);
    return {mlp.forward(x_c.values), EmbedderVariant::ClassicalMlp};
}

CellEmbedding embed_cell(const data::Cell& value, std::size_t column,
                         const PreprocessStats& stats, const CellEmbedder& embedder,
                         const MlpEmbedder* mlp, std::span<const double> text_raw) {
    const auto x_c = encode_cell(value, column, stats.columns.at(column), text_raw);
    if (embedder.config().variant == EmbedderVariant::ClassicalMlp) {
        if (mlp == nullptr)
            throw ContractViolation("ClassicalMlp embedding requires MLP weights");
        return embedder.embed(x_c, *mlp);
    }
    return embedder.embed(x_c);
}

EncodedTable encode_table(const data::Table& table, const PreprocessStats& stats,
                          const CellEmbedder& embedder, const TextEmbeddings& text,
                          std::size_t threads) {
    EncodedTable out;
    out.n_rows = table.n_rows();
    out.n_cols = table.n_cols();
    out.features.resize(out.n_rows * out.n_cols);
    const bool fixed = embedder.config().variant != EmbedderVariant::ClassicalMlp;
    if (fixed) out.embeddings.resize(out.n_rows * out.n_cols);
    std::vector<std::size_t> unknown(out.n_rows, 0);

    const auto& schema = table.schema();
    auto work = [&](std::size_t r_begin, std::size_t r_end) {
        for (std::size_t r = r_begin; r < r_end; ++r) {
            for (std::size_t c = 0; c < out.n_cols; ++c) {
                const auto& cell = table.at(r, c);
                if (data::is_missing(cell)) continue;
                std::vector<double> raw;
                if (schema.kind(c) == ColumnKind::Text)
                    raw = text.embed(std::get<std::string>(cell), r, schema.column(c).name);
                auto x_c = encode_cell(cell, c, stats.columns.at(c), raw);
                if (x_c.unknown_category) ++unknown[r];
                if (fixed) out.embeddings[r * out.n_cols + c] = embedder.embed(x_c).vector;
                out.features[r * out.n_cols + c] = std::move(x_c.values);
            }
        }
    };

    threads = std::max<std::size_t>(1, std::min(threads, out.n_rows));
    if (threads == 1) {
        work(0, out.n_rows);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (out.n_rows + threads - 1) / threads;
            for (std::size_t t = 0; t < threads; ++t) {
                const std::size_t b = t * chunk;
                const std::size_t e = std::min(out.n_rows, b + chunk);
                if (b >= e) continue;
                pool.emplace_back([&, t, b, e] {
                    try {
                        work(b, e);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
        }
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }
    for (auto u : unknown) out.unknown_categories += u;
    return out;
}

} // namespace qimpute::encoding
