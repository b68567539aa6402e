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

// Row-wise masked transformer imputer.
//
// A row is one attention context: every schema column contributes one token
// h0_t = (masked ? mask_emb : W_in e_t + b_in) + col_emb_t. Blocks are
// pre-norm (LN -> multi-head self-attention -> residual, LN -> ReLU FFN ->
// residual), followed by a final layer norm and per-column heads. All
// tensors use the "rows are tokens" convention: activations are T x d and a
// linear layer with weight W (out x in) computes X W^T + 1 b^T.
#include "qimpute/imputer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qimpute/error.hpp"
#include "qimpute/rng.hpp"

namespace qimpute::imputer {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void TrainConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("train.lr must be > 0");
    if (batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
    if (!(mask_rate > 0.0 && mask_rate < 1.0))
        throw std::invalid_argument("train.mask_rate must be in (0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("Adam betas must be in [0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("train.eps must be > 0");
    if (numeric_weight < 0.0 || categorical_weight < 0.0)
        throw std::invalid_argument("loss weights must be non-negative");
}

std::vector<ColumnInfo> column_info(const encoding::PreprocessStats& stats) {
    std::vector<ColumnInfo> out;
    out.reserve(stats.columns.size());
    for (const auto& cs : stats.columns)
        out.push_back({cs.kind, cs.kind == data::ColumnKind::Categorical ? cs.vocabulary.size() : 0,
                       std::max<std::size_t>(1, cs.feature_dim())});
    return out;
}

// ---------------------------------------------------------------------------
// ParamSet

std::size_t ParamSet::add(std::string name, Index rows, Index cols) {
    tensors_.push_back({std::move(name), MatrixXd::Zero(rows, cols)});
    return tensors_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(const std::string& name) const {
    for (std::size_t i = 0; i < tensors_.size(); ++i)
        if (tensors_[i].name == name) return i;
    return std::nullopt;
}

std::size_t ParamSet::scalar_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
    return n;
}

ParamSet ParamSet::zeros_like() const {
    ParamSet out;
    for (const auto& t : tensors_) out.add(t.name, t.value.rows(), t.value.cols());
    return out;
}

void ParamSet::set_zero() {
    for (auto& t : tensors_) t.value.setZero();
}

bool ParamSet::all_finite() const {
    for (const auto& t : tensors_)
        if (!t.value.allFinite()) return false;
    return true;
}

// ---------------------------------------------------------------------------
// ModelParams

namespace {

void check_config(const ModelConfig& c, const std::vector<ColumnInfo>& columns) {
    QIMPUTE_REQUIRE(c.embed_dim >= 1 && c.d_model >= 1 && c.ffn_dim >= 1 && c.mlp_hidden >= 1,
                    ParameterError, "model dimensions must be positive");
    QIMPUTE_REQUIRE(c.n_heads >= 1 && c.d_model % c.n_heads == 0, ParameterError,
                    "d_model must be divisible by n_heads");
    QIMPUTE_REQUIRE(!columns.empty(), ParameterError, "model needs at least one column");
    for (const auto& col : columns)
        QIMPUTE_REQUIRE(col.kind != data::ColumnKind::Categorical || col.vocab >= 1,
                        ParameterError, "categorical column with empty vocabulary");
}

ModelLayout build_layout(const ModelConfig& c, const std::vector<ColumnInfo>& columns,
                         ParamSet& ps) {
    const auto d = static_cast<Index>(c.d_model);
    const auto f = static_cast<Index>(c.ffn_dim);
    ModelLayout L{};
    L.w_in = ps.add("input.weight", d, static_cast<Index>(c.embed_dim));
    L.b_in = ps.add("input.bias", d, 1);
    L.mask_emb = ps.add("mask_embedding", d, 1);
    L.col_emb = ps.add("column_embedding", static_cast<Index>(columns.size()), d);
    for (std::size_t b = 0; b < c.n_blocks; ++b) {
        const std::string p = "block" + std::to_string(b) + ".";
        BlockLayout B{};
        B.ln1_g = ps.add(p + "ln1.scale", d, 1);
        B.ln1_b = ps.add(p + "ln1.offset", d, 1);
        B.wq = ps.add(p + "attn.q.weight", d, d);
        B.bq = ps.add(p + "attn.q.bias", d, 1);
        B.wk = ps.add(p + "attn.k.weight", d, d);
        B.bk = ps.add(p + "attn.k.bias", d, 1);
        B.wv = ps.add(p + "attn.v.weight", d, d);
        B.bv = ps.add(p + "attn.v.bias", d, 1);
        B.wo = ps.add(p + "attn.out.weight", d, d);
        B.bo = ps.add(p + "attn.out.bias", d, 1);
        B.ln2_g = ps.add(p + "ln2.scale", d, 1);
        B.ln2_b = ps.add(p + "ln2.offset", d, 1);
        B.w1 = ps.add(p + "ffn.in.weight", f, d);
        B.b1 = ps.add(p + "ffn.in.bias", f, 1);
        B.w2 = ps.add(p + "ffn.out.weight", d, f);
        B.b2 = ps.add(p + "ffn.out.bias", d, 1);
        L.blocks.push_back(B);
    }
    L.lnf_g = ps.add("final_ln.scale", d, 1);
    L.lnf_b = ps.add("final_ln.offset", d, 1);
    L.head_w.resize(columns.size());
    L.head_b.resize(columns.size());
    L.mlp.resize(columns.size());
    for (std::size_t col = 0; col < columns.size(); ++col) {
        const auto& info = columns[col];
        const std::string p = "column" + std::to_string(col) + ".";
        if (info.kind == data::ColumnKind::Numeric) {
            L.head_w[col] = ps.add(p + "head.weight", 1, d);
            L.head_b[col] = ps.add(p + "head.bias", 1, 1);
        } else if (info.kind == data::ColumnKind::Categorical) {
            L.head_w[col] = ps.add(p + "head.weight", static_cast<Index>(info.vocab), d);
            L.head_b[col] = ps.add(p + "head.bias", static_cast<Index>(info.vocab), 1);
        }
        if (c.variant == EmbedderVariant::ClassicalMlp) {
            const auto h = static_cast<Index>(c.mlp_hidden);
            MlpLayout M{};
            M.w1 = ps.add(p + "mlp.in.weight", h, static_cast<Index>(info.feature_dim));
            M.b1 = ps.add(p + "mlp.in.bias", h, 1);
            M.w2 = ps.add(p + "mlp.out.weight", static_cast<Index>(c.embed_dim), h);
            M.b2 = ps.add(p + "mlp.out.bias", static_cast<Index>(c.embed_dim), 1);
            L.mlp[col] = M;
        }
    }
    return L;
}

void fill_uniform(MatrixXd& m, double bound, Rng& rng) {
    // Row-major draw order so the values do not depend on Eigen's storage.
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
}

double fan_in_bound(const MatrixXd& w) { return 1.0 / std::sqrt(static_cast<double>(w.cols())); }

} // namespace

ModelParams ModelParams::zeros(const ModelConfig& config, std::vector<ColumnInfo> columns) {
    check_config(config, columns);
    ModelParams p;
    p.config_ = config;
    p.columns_ = std::move(columns);
    p.layout_ = build_layout(config, p.columns_, p.tensors_);
    return p;
}

ModelParams ModelParams::init(const ModelConfig& config, std::vector<ColumnInfo> columns,
                              std::uint64_t seed) {
    ModelParams p = zeros(config, std::move(columns));
    Rng rng(seed);
    auto& T = p.tensors_;
    const auto& L = p.layout_;
    fill_uniform(T[L.w_in], fan_in_bound(T[L.w_in]), rng);
    fill_uniform(T[L.col_emb], 1.0, rng);
    for (const auto& B : L.blocks) {
        T[B.ln1_g].setOnes();
        T[B.ln2_g].setOnes();
        for (std::size_t w : {B.wq, B.wk, B.wv, B.wo, B.w1, B.w2})
            fill_uniform(T[w], fan_in_bound(T[w]), rng);
    }
    T[L.lnf_g].setOnes();
    for (std::size_t c = 0; c < p.columns_.size(); ++c) {
        if (L.head_w[c]) fill_uniform(T[*L.head_w[c]], fan_in_bound(T[*L.head_w[c]]), rng);
        if (L.mlp[c]) {
            fill_uniform(T[L.mlp[c]->w1], fan_in_bound(T[L.mlp[c]->w1]), rng);
            fill_uniform(T[L.mlp[c]->w2], fan_in_bound(T[L.mlp[c]->w2]), rng);
        }
    }
    return p;
}

encoding::MlpEmbedder ModelParams::mlp(std::size_t column) const {
    const auto& m = layout_.mlp.at(column);
    if (!m) throw ContractViolation("model has no MLP embedder for column " + std::to_string(column));
    return {tensors_[m->w1], tensors_[m->b1].col(0), tensors_[m->w2], tensors_[m->b2].col(0)};
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

struct LnCache {
    MatrixXd xhat;
    VectorXd inv_std;
};

MatrixXd ln_forward(const MatrixXd& x, const MatrixXd& g, const MatrixXd& b, double eps,
                    LnCache& cache) {
    const Index T = x.rows();
    const auto d = static_cast<double>(x.cols());
    cache.xhat.resize(x.rows(), x.cols());
    cache.inv_std.resize(T);
    for (Index t = 0; t < T; ++t) {
        const double mu = x.row(t).sum() / d;
        const double var = (x.row(t).array() - mu).square().sum() / d;
        const double inv = 1.0 / std::sqrt(var + eps);
        cache.inv_std(t) = inv;
        cache.xhat.row(t) = (x.row(t).array() - mu) * inv;
    }
    MatrixXd y = cache.xhat.array().rowwise() * g.col(0).transpose().array();
    y.rowwise() += b.col(0).transpose();
    return y;
}

MatrixXd ln_backward(const MatrixXd& dy, const MatrixXd& g, const LnCache& cache,
                     MatrixXd& dg, MatrixXd& db) {
    dg.col(0) += (dy.array() * cache.xhat.array()).colwise().sum().transpose().matrix();
    db.col(0) += dy.colwise().sum().transpose();
    const MatrixXd dxhat = dy.array().rowwise() * g.col(0).transpose().array();
    const auto d = static_cast<double>(dy.cols());
    MatrixXd dx(dy.rows(), dy.cols());
    for (Index t = 0; t < dy.rows(); ++t) {
        const double mean_dxhat = dxhat.row(t).sum() / d;
        const double mean_dxhat_xhat = dxhat.row(t).dot(cache.xhat.row(t)) / d;
        dx.row(t) = cache.inv_std(t) *
                    (dxhat.row(t).array() - mean_dxhat - cache.xhat.row(t).array() * mean_dxhat_xhat);
    }
    return dx;
}

MatrixXd linear(const MatrixXd& x, const MatrixXd& w, const MatrixXd& b) {
    MatrixXd y = x * w.transpose();
    y.rowwise() += b.col(0).transpose();
    return y;
}

void linear_backward_params(const MatrixXd& x, const MatrixXd& dy, MatrixXd& dw, MatrixXd& db) {
    dw.noalias() += dy.transpose() * x;
    db.col(0) += dy.colwise().sum().transpose();
}

struct BlockCache {
    MatrixXd h_in;
    LnCache ln1;
    MatrixXd a;  // LN1 output
    MatrixXd q, k, v;
    std::vector<MatrixXd> probs;  // per head, T x T
    MatrixXd o;                   // concatenated head outputs
    LnCache ln2;
    MatrixXd m;  // LN2 output
    MatrixXd u;  // FFN pre-activation
    MatrixXd r;  // ReLU(u)
};

struct RowCache {
    std::vector<VectorXd> emb;    // per token; empty when masked
    std::vector<VectorXd> mlp_h;  // ClassicalMlp hidden activations
    std::vector<BlockCache> blocks;
    LnCache lnf;
    MatrixXd z;
};

void check_row(const ModelParams& params, const RowExample& row) {
    const auto& cols = params.columns();
    if (row.tokens.size() != cols.size())
        throw ContractViolation("row has " + std::to_string(row.tokens.size()) +
                                " tokens, model expects " + std::to_string(cols.size()));
    const bool mlp = params.config().variant == EmbedderVariant::ClassicalMlp;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& tok = row.tokens[c];
        if (tok.masked) continue;
        const std::size_t want = mlp ? cols[c].feature_dim : params.config().embed_dim;
        if (tok.input.size() != want)
            throw ContractViolation("token " + std::to_string(c) + " has width " +
                                    std::to_string(tok.input.size()) + ", expected " +
                                    std::to_string(want));
    }
    for (std::size_t c : row.predict) {
        if (c >= cols.size() || cols[c].kind == data::ColumnKind::Text)
            throw ContractViolation("column " + std::to_string(c) + " cannot be predicted");
        if (!row.tokens[c].masked)
            throw ContractViolation("predicted column " + std::to_string(c) + " is not masked");
    }
    if (!row.targets.empty() && row.targets.size() != row.predict.size())
        throw ContractViolation("targets must be parallel to predicted columns");
}

MatrixXd forward_row(const ModelParams& params, const RowExample& row, RowCache& cache) {
    const auto& P = params.tensors();
    const auto& L = params.layout();
    const auto& cfg = params.config();
    const Index T = static_cast<Index>(row.tokens.size());
    const Index d = static_cast<Index>(cfg.d_model);
    const bool mlp = cfg.variant == EmbedderVariant::ClassicalMlp;

    cache.emb.assign(static_cast<std::size_t>(T), VectorXd());
    cache.mlp_h.assign(static_cast<std::size_t>(T), VectorXd());
    MatrixXd h(T, d);
    for (Index t = 0; t < T; ++t) {
        const auto& tok = row.tokens[static_cast<std::size_t>(t)];
        if (tok.masked) {
            h.row(t) = P[L.mask_emb].col(0).transpose();
        } else {
            VectorXd e;
            const Eigen::Map<const VectorXd> x(tok.input.data(), static_cast<Index>(tok.input.size()));
            if (mlp) {
                const auto& M = *L.mlp[static_cast<std::size_t>(t)];
                VectorXd hid = (P[M.w1] * x + P[M.b1].col(0)).array().tanh().matrix();
                e = P[M.w2] * hid + P[M.b2].col(0);
                cache.mlp_h[static_cast<std::size_t>(t)] = std::move(hid);
            } else {
                e = x;
            }
            h.row(t) = (P[L.w_in] * e + P[L.b_in].col(0)).transpose();
            cache.emb[static_cast<std::size_t>(t)] = std::move(e);
        }
    }
    h += P[L.col_emb];

    const std::size_t n_heads = cfg.n_heads;
    const Index dh = d / static_cast<Index>(n_heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    cache.blocks.resize(L.blocks.size());
    for (std::size_t b = 0; b < L.blocks.size(); ++b) {
        const auto& B = L.blocks[b];
        auto& C = cache.blocks[b];
        C.h_in = h;
        C.a = ln_forward(h, P[B.ln1_g], P[B.ln1_b], cfg.ln_eps, C.ln1);
        C.q = linear(C.a, P[B.wq], P[B.bq]);
        C.k = linear(C.a, P[B.wk], P[B.bk]);
        C.v = linear(C.a, P[B.wv], P[B.bv]);
        C.o.resize(T, d);
        C.probs.resize(n_heads);
        for (std::size_t hd = 0; hd < n_heads; ++hd) {
            const Index off = static_cast<Index>(hd) * dh;
            MatrixXd s = (C.q.middleCols(off, dh) * C.k.middleCols(off, dh).transpose()) * scale;
            for (Index i = 0; i < T; ++i) {
                const double mx = s.row(i).maxCoeff();
                s.row(i) = (s.row(i).array() - mx).exp();
                s.row(i) /= s.row(i).sum();
            }
            C.o.middleCols(off, dh) = s * C.v.middleCols(off, dh);
            C.probs[hd] = std::move(s);
        }
        h = C.h_in + linear(C.o, P[B.wo], P[B.bo]);
        C.m = ln_forward(h, P[B.ln2_g], P[B.ln2_b], cfg.ln_eps, C.ln2);
        C.u = linear(C.m, P[B.w1], P[B.b1]);
        C.r = C.u.cwiseMax(0.0);
        h += linear(C.r, P[B.w2], P[B.b2]);
    }
    cache.z = ln_forward(h, P[L.lnf_g], P[L.lnf_b], cfg.ln_eps, cache.lnf);
    return cache.z;
}

CellPrediction head(const ModelParams& params, const MatrixXd& z, std::size_t row,
                    std::size_t column) {
    const auto& P = params.tensors();
    const auto& L = params.layout();
    CellPrediction pred;
    pred.row = row;
    pred.column = column;
    const auto& w = P[*L.head_w[column]];
    const auto& b = P[*L.head_b[column]];
    const VectorXd zt = z.row(static_cast<Index>(column)).transpose();
    if (params.columns()[column].kind == data::ColumnKind::Numeric) {
        pred.numeric = w.row(0).dot(zt) + b(0, 0);
    } else {
        pred.logits = w * zt + b.col(0);
    }
    return pred;
}

void backward_row(const ModelParams& params, const RowExample& row, const RowCache& cache,
                  MatrixXd dz, ParamSet& G) {
    const auto& P = params.tensors();
    const auto& L = params.layout();
    const auto& cfg = params.config();
    const Index T = static_cast<Index>(row.tokens.size());
    const Index d = static_cast<Index>(cfg.d_model);
    const std::size_t n_heads = cfg.n_heads;
    const Index dh = d / static_cast<Index>(n_heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    MatrixXd dh_ = ln_backward(dz, P[L.lnf_g], cache.lnf, G[L.lnf_g], G[L.lnf_b]);
    for (std::size_t b = L.blocks.size(); b-- > 0;) {
        const auto& B = L.blocks[b];
        const auto& C = cache.blocks[b];
        // Feed-forward residual branch.
        linear_backward_params(C.r, dh_, G[B.w2], G[B.b2]);
        MatrixXd du = (dh_ * P[B.w2]).cwiseProduct((C.u.array() > 0.0).cast<double>().matrix());
        linear_backward_params(C.m, du, G[B.w1], G[B.b1]);
        const MatrixXd dm = du * P[B.w1];
        dh_ += ln_backward(dm, P[B.ln2_g], C.ln2, G[B.ln2_g], G[B.ln2_b]);
        // Attention residual branch.
        linear_backward_params(C.o, dh_, G[B.wo], G[B.bo]);
        const MatrixXd d_o = dh_ * P[B.wo];
        MatrixXd dq(T, d), dk(T, d), dv(T, d);
        for (std::size_t hd = 0; hd < n_heads; ++hd) {
            const Index off = static_cast<Index>(hd) * dh;
            const MatrixXd& p = C.probs[hd];
            const MatrixXd doh = d_o.middleCols(off, dh);
            const MatrixXd dp = doh * C.v.middleCols(off, dh).transpose();
            dv.middleCols(off, dh) = p.transpose() * doh;
            const VectorXd rowdot = (dp.array() * p.array()).rowwise().sum();
            MatrixXd ds = p.array() * (dp.colwise() - rowdot).array();
            ds *= scale;
            dq.middleCols(off, dh) = ds * C.k.middleCols(off, dh);
            dk.middleCols(off, dh) = ds.transpose() * C.q.middleCols(off, dh);
        }
        linear_backward_params(C.a, dq, G[B.wq], G[B.bq]);
        linear_backward_params(C.a, dk, G[B.wk], G[B.bk]);
        linear_backward_params(C.a, dv, G[B.wv], G[B.bv]);
        const MatrixXd da = dq * P[B.wq] + dk * P[B.wk] + dv * P[B.wv];
        dh_ += ln_backward(da, P[B.ln1_g], C.ln1, G[B.ln1_g], G[B.ln1_b]);
    }

    G[L.col_emb] += dh_;
    for (Index t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const VectorXd g = dh_.row(t).transpose();
        if (row.tokens[ts].masked) {
            G[L.mask_emb].col(0) += g;
            continue;
        }
        G[L.w_in].noalias() += g * cache.emb[ts].transpose();
        G[L.b_in].col(0) += g;
        if (const auto& M = L.mlp[ts]; M && cfg.variant == EmbedderVariant::ClassicalMlp) {
            const VectorXd de = P[L.w_in].transpose() * g;
            const VectorXd& hid = cache.mlp_h[ts];
            G[M->w2].noalias() += de * hid.transpose();
            G[M->b2].col(0) += de;
            const VectorXd dhid =
                (P[M->w2].transpose() * de).array() * (1.0 - hid.array().square());
            const auto& in = row.tokens[ts].input;
            const Eigen::Map<const VectorXd> x(in.data(), static_cast<Index>(in.size()));
            G[M->w1].noalias() += dhid * x.transpose();
            G[M->b1].col(0) += dhid;
        }
    }
}

} // namespace

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double mx = logits.maxCoeff();
    VectorXd e = (logits.array() - mx).exp();
    return e / e.sum();
}

std::vector<CellPrediction> forward(const ModelParams& params,
                                    const std::vector<RowExample>& batch) {
    std::vector<CellPrediction> out;
    RowCache cache;
    for (std::size_t r = 0; r < batch.size(); ++r) {
        check_row(params, batch[r]);
        if (batch[r].predict.empty()) continue;
        const MatrixXd z = forward_row(params, batch[r], cache);
        for (std::size_t c : batch[r].predict) out.push_back(head(params, z, r, c));
    }
    return out;
}

LossBreakdown loss(const std::vector<CellPrediction>& predictions,
                   const std::vector<RowExample>& batch, const ModelParams& params,
                   const TrainConfig& config) {
    LossBreakdown lb;
    std::size_t i = 0;
    for (std::size_t r = 0; r < batch.size(); ++r) {
        const auto& row = batch[r];
        if (row.predict.empty()) continue;
        if (row.targets.size() != row.predict.size())
            throw ContractViolation("loss needs a target for every prediction");
        for (std::size_t j = 0; j < row.predict.size(); ++j, ++i) {
            const auto& pred = predictions.at(i);
            const auto& tgt = row.targets[j];
            if (params.columns()[tgt.column].kind == data::ColumnKind::Numeric) {
                const double e = pred.numeric - tgt.numeric;
                lb.numeric_sse += e * e;
            } else {
                const double mx = pred.logits.maxCoeff();
                const double lse = mx + std::log((pred.logits.array() - mx).exp().sum());
                lb.categorical_ce += lse - pred.logits(static_cast<Index>(tgt.category));
            }
            ++lb.n_targets;
        }
    }
    if (lb.n_targets > 0)
        lb.total = (config.numeric_weight * lb.numeric_sse +
                    config.categorical_weight * lb.categorical_ce) /
                   static_cast<double>(lb.n_targets);
    return lb;
}

LossAndGradient backward(const ModelParams& params, const std::vector<RowExample>& batch,
                         const TrainConfig& config) {
    LossAndGradient out{{}, params.tensors().zeros_like()};
    std::size_t n_targets = 0;
    for (const auto& row : batch) {
        check_row(params, row);
        if (row.targets.size() != row.predict.size())
            throw ContractViolation("training rows need a target for every prediction");
        n_targets += row.predict.size();
    }
    if (n_targets == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(n_targets);

    const auto& P = params.tensors();
    const auto& L = params.layout();
    auto& G = out.grad;
    RowCache cache;
    for (const auto& row : batch) {
        if (row.predict.empty()) continue;
        const MatrixXd z = forward_row(params, row, cache);
        MatrixXd dz = MatrixXd::Zero(z.rows(), z.cols());
        for (std::size_t j = 0; j < row.predict.size(); ++j) {
            const std::size_t c = row.predict[j];
            const auto& tgt = row.targets[j];
            const CellPrediction pred = head(params, z, 0, c);
            const VectorXd zt = z.row(static_cast<Index>(c)).transpose();
            const auto& w = P[*L.head_w[c]];
            if (params.columns()[c].kind == data::ColumnKind::Numeric) {
                const double e = pred.numeric - tgt.numeric;
                out.loss.numeric_sse += e * e;
                const double dy = config.numeric_weight * 2.0 * e * inv_n;
                G[*L.head_w[c]].row(0) += dy * zt.transpose();
                G[*L.head_b[c]](0, 0) += dy;
                dz.row(static_cast<Index>(c)) += dy * w.row(0);
            } else {
                VectorXd p = softmax(pred.logits);
                const double mx = pred.logits.maxCoeff();
                const double lse = mx + std::log((pred.logits.array() - mx).exp().sum());
                out.loss.categorical_ce += lse - pred.logits(static_cast<Index>(tgt.category));
                p(static_cast<Index>(tgt.category)) -= 1.0;
                const VectorXd dl = config.categorical_weight * inv_n * p;
                G[*L.head_w[c]].noalias() += dl * zt.transpose();
                G[*L.head_b[c]].col(0) += dl;
                dz.row(static_cast<Index>(c)) += (w.transpose() * dl).transpose();
            }
            ++out.loss.n_targets;
        }
        backward_row(params, row, cache, std::move(dz), G);
    }
    out.loss.total = (config.numeric_weight * out.loss.numeric_sse +
                      config.categorical_weight * out.loss.categorical_ce) * inv_n;
    return out;
}

// ---------------------------------------------------------------------------
// Adam

AdamState AdamState::for_params(const ModelParams& params) {
    return {params.tensors().zeros_like(), params.tensors().zeros_like(), 0};
}

void adam_step(ModelParams& params, const ParamSet& grad, AdamState& state, std::size_t step,
               const TrainConfig& config) {
    QIMPUTE_REQUIRE(step >= 1, ParameterError, "Adam step index is 1-based");
    auto& P = params.tensors();
    QIMPUTE_REQUIRE(grad.size() == P.size() && state.m.size() == P.size(), ParameterError,
                    "gradient layout does not match parameters");
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < P.size(); ++i) {
        auto& m = state.m[i];
        auto& v = state.v[i];
        const auto& g = grad[i];
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
        P[i].array() -= config.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.eps);
    }
    state.t = step;
}

// ---------------------------------------------------------------------------
// Training and imputation

Token make_token(const encoding::EncodedTable& encoded, EmbedderVariant variant, std::size_t r,
                 std::size_t c, bool masked) {
    Token tok;
    tok.masked = masked || !encoded.observed(r, c);
    if (!tok.masked)
        tok.input = variant == EmbedderVariant::ClassicalMlp ? encoded.feature(r, c)
                                                             : encoded.embedding(r, c);
    return tok;
}

TrainResult train(const data::Table& table, const encoding::PreprocessStats& stats,
                  const encoding::EncodedTable& encoded, const ModelConfig& model_config,
                  const TrainConfig& config) {
    config.validate();
    QIMPUTE_REQUIRE(encoded.n_rows == table.n_rows() && encoded.n_cols == table.n_cols(),
                    ParameterError, "encoded table does not match data table");
    const auto& schema = table.schema();
    TrainResult result{ModelParams::init(model_config, column_info(stats),
                                         stream_seed(config.seed, "init")),
                       {}, 0};
    AdamState adam = AdamState::for_params(result.params);
    std::size_t step = 0;

    const std::size_t n = table.n_rows();
    std::vector<std::size_t> order(n);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(stream_seed(config.seed, "shuffle", epoch));
        shuffle_rng.shuffle(order);
        Rng sup_rng(stream_seed(config.seed, "supervision", epoch));

        double loss_sum = 0.0;
        std::size_t loss_batches = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(n, start + config.batch_size);
            std::vector<RowExample> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t r = order[i];
                RowExample ex;
                ex.tokens.reserve(schema.size());
                for (std::size_t c = 0; c < schema.size(); ++c) {
                    bool target = false;
                    // Only observed cells can be supervision targets.
                    if (schema.kind(c) != data::ColumnKind::Text && encoded.observed(r, c))
                        target = sup_rng.bernoulli(config.mask_rate);
                    ex.tokens.push_back(make_token(encoded, model_config.variant, r, c, target));
                    if (!target) continue;
                    Target t;
                    t.column = c;
                    if (schema.kind(c) == data::ColumnKind::Numeric) {
                        t.numeric = std::clamp(stats.columns[c].normalize(table.number(r, c)), 0.0, 1.0);
                    } else {
                        const auto idx = stats.columns[c].category_index(table.text(r, c));
                        if (!idx) {
                            // Unseen category: keep it masked as input but not as a target.
                            continue;
                        }
                        t.category = *idx;
                    }
                    ex.predict.push_back(c);
                    ex.targets.push_back(t);
                }
                batch.push_back(std::move(ex));
            }
            auto lg = backward(result.params, batch, config);
            if (lg.loss.n_targets == 0) {
                ++result.empty_batches;
                continue;
            }
            if (!std::isfinite(lg.loss.total) || !lg.grad.all_finite()) {
                std::ostringstream msg;
                msg << "loss became non-finite at epoch " << epoch + 1 << " (batch starting at "
                    << start << "); lower train.lr (currently " << config.lr << ")";
                throw TrainingError(msg.str());
            }
            adam_step(result.params, lg.grad, adam, ++step, config);
            loss_sum += lg.loss.total;
            ++loss_batches;
        }
        result.epoch_loss.push_back(loss_batches ? loss_sum / static_cast<double>(loss_batches)
                                                 : 0.0);
    }
    return result;
}

data::Table impute_table(const data::Table& table, const ModelParams& params,
                         const encoding::PreprocessStats& stats,
                         const encoding::EncodedTable& encoded) {
    QIMPUTE_REQUIRE(encoded.n_rows == table.n_rows() && encoded.n_cols == table.n_cols(),
                    ParameterError, "encoded table does not match data table");
    const auto& schema = table.schema();
    data::Table out = table;
    RowCache cache;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        RowExample ex;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const bool missing = data::is_missing(table.at(r, c));
            ex.tokens.push_back(make_token(encoded, params.config().variant, r, c, missing));
            if (missing && schema.kind(c) != data::ColumnKind::Text) ex.predict.push_back(c);
        }
        if (ex.predict.empty()) continue;
        check_row(params, ex);
        const MatrixXd z = forward_row(params, ex, cache);
        for (std::size_t c : ex.predict) {
            const auto pred = head(params, z, 0, c);
            const auto& cs = stats.columns[c];
            if (schema.kind(c) == data::ColumnKind::Numeric) {
                const double range = cs.max - cs.min;
                const double v = std::clamp(cs.denormalize(pred.numeric), cs.min - 0.1 * range,
                                            cs.max + 0.1 * range);
                out.set(r, c, v);
            } else {
                Index best = 0;
                pred.logits.maxCoeff(&best);
                out.set(r, c, cs.vocabulary.at(static_cast<std::size_t>(best)));
            }
        }
    }
    return out;
}

} // namespace qimpute::imputer
