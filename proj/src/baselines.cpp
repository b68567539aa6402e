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
#include "qimpute/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qimpute/error.hpp"

namespace qimpute::baselines {

using data::ColumnKind;
using data::Table;

std::string_view to_string(Method m) {
    switch (m) {
    case Method::MeanMode: return "mean_mode";
    case Method::Knn: return "knn";
    case Method::IterativeRidge: return "iterative_ridge";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    if (s == "mean_mode" || s == "mean") return Method::MeanMode;
    if (s == "knn") return Method::Knn;
    if (s == "iterative_ridge" || s == "mice_lite" || s == "ridge") return Method::IterativeRidge;
    throw std::invalid_argument("unknown baseline method '" + std::string(s) + "'");
}

void BaselineConfig::validate() const {
    if (k < 1) throw std::invalid_argument("knn.k must be >= 1");
    if (!(ridge_lambda > 0.0)) throw std::invalid_argument("ridge.lambda must be > 0");
    if (max_sweeps < 1) throw std::invalid_argument("ridge.max_sweeps must be >= 1");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("ridge.tol must be >= 0");
}

namespace {

void check_mask(const Table& table, const data::Mask& mask) {
    if (mask.n_rows() != table.n_rows() || mask.n_cols() != table.n_cols())
        throw std::invalid_argument("mask shape does not match table");
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        for (std::size_t c = 0; c < table.n_cols(); ++c)
            if (mask.at(r, c) && !data::is_missing(table.at(r, c)))
                throw ContractViolation("mask covers observed cell (" + std::to_string(r) +
                                        ", " + table.schema().column(c).name + ")");
}

bool needs_fill(const Table& table, const data::Mask& mask, std::size_t r, std::size_t c) {
    return mask.at(r, c) && table.schema().kind(c) != ColumnKind::Text;
}

/// Observed-value summaries per column.
struct ColumnSummary {
    std::size_t observed = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string> vocab;     // first appearance order
    std::vector<std::size_t> counts;
    std::size_t mode = 0;

    double normalize(double v) const { return max > min ? (v - min) / (max - min) : 0.0; }
    std::size_t index(const std::string& s) const {
        for (std::size_t i = 0; i < vocab.size(); ++i)
            if (vocab[i] == s) return i;
        return vocab.size();
    }
};

std::vector<ColumnSummary> summarize(const Table& table) {
    std::vector<ColumnSummary> out(table.n_cols());
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        auto& s = out[c];
        const ColumnKind kind = table.schema().kind(c);
        if (kind == ColumnKind::Text) continue;
        double sum = 0.0;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            const auto& cell = table.at(r, c);
            if (data::is_missing(cell)) continue;
            if (kind == ColumnKind::Numeric) {
                const double v = std::get<double>(cell);
                sum += v;
                s.min = s.observed == 0 ? v : std::min(s.min, v);
                s.max = s.observed == 0 ? v : std::max(s.max, v);
            } else {
                const auto& str = std::get<std::string>(cell);
                const std::size_t i = s.index(str);
                if (i == s.vocab.size()) {
                    s.vocab.push_back(str);
                    s.counts.push_back(0);
                }
                ++s.counts[i];
            }
            ++s.observed;
        }
        if (s.observed > 0) s.mean = sum / static_cast<double>(s.observed);
        for (std::size_t i = 0; i < s.counts.size(); ++i)
            if (s.counts[i] > s.counts[s.mode]) s.mode = i;
    }
    return out;
}

data::Cell fallback_value(const Table& table, const std::vector<ColumnSummary>& summary,
                          std::size_t c) {
    const auto& s = summary[c];
    if (s.observed == 0)
        throw FitError("column '" + table.schema().column(c).name +
                       "' has no observed values to impute from");
    if (table.schema().kind(c) == ColumnKind::Numeric) return s.mean;
    return s.vocab[s.mode];
}

} // namespace

Table mean_mode_impute(const Table& table, const data::Mask& mask) {
    check_mask(table, mask);
    const auto summary = summarize(table);
    Table out = table;
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        for (std::size_t c = 0; c < table.n_cols(); ++c)
            if (needs_fill(table, mask, r, c)) out.set(r, c, fallback_value(table, summary, c));
    return out;
}

Table knn_impute(const Table& table, const data::Mask& mask, std::size_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    check_mask(table, mask);
    const auto& schema = table.schema();
    const auto summary = summarize(table);
    const std::size_t n = table.n_rows();

    auto distance = [&](std::size_t a, std::size_t b, std::size_t skip) {
        double sq = 0.0;
        double hamming = 0.0;
        std::size_t shared = 0;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (c == skip || schema.kind(c) == ColumnKind::Text) continue;
            const auto& x = table.at(a, c);
            const auto& y = table.at(b, c);
            if (data::is_missing(x) || data::is_missing(y)) continue;
            ++shared;
            if (schema.kind(c) == ColumnKind::Numeric) {
                const double diff = summary[c].normalize(std::get<double>(x)) -
                                    summary[c].normalize(std::get<double>(y));
                sq += diff * diff;
            } else if (std::get<std::string>(x) != std::get<std::string>(y)) {
                hamming += 1.0;
            }
        }
        if (shared == 0) return std::numeric_limits<double>::infinity();
        return (std::sqrt(sq) + hamming) / static_cast<double>(shared);
    };

    Table out = table;
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (!needs_fill(table, mask, r, c)) continue;
            cand.clear();
            for (std::size_t o = 0; o < n; ++o) {
                if (o == r || data::is_missing(table.at(o, c))) continue;
                const double dist = distance(r, o, c);
                if (std::isfinite(dist)) cand.emplace_back(dist, o);
            }
            if (cand.empty()) {
                out.set(r, c, fallback_value(table, summary, c));
                continue;
            }
            const std::size_t kk = std::min(k, cand.size());
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk),
                              cand.end());
            if (schema.kind(c) == ColumnKind::Numeric) {
                double sum = 0.0;
                for (std::size_t i = 0; i < kk; ++i) sum += table.number(cand[i].second, c);
                out.set(r, c, sum / static_cast<double>(kk));
            } else {
                // Mode among neighbours; ties go to the earlier vocabulary entry.
                std::vector<std::size_t> votes(summary[c].vocab.size(), 0);
                for (std::size_t i = 0; i < kk; ++i)
                    ++votes[summary[c].index(table.text(cand[i].second, c))];
                std::size_t best = 0;
                for (std::size_t i = 1; i < votes.size(); ++i)
                    if (votes[i] > votes[best]) best = i;
                out.set(r, c, summary[c].vocab[best]);
            }
        }
    }
    return out;
}

RidgeResult iterative_ridge_impute(const Table& table, const data::Mask& mask,
                                   const BaselineConfig& config) {
    config.validate();
    const auto& schema = table.schema();
    const auto summary = summarize(table);
    const std::size_t n = table.n_rows();
    RidgeResult result{mean_mode_impute(table, mask), {}, false};
    Table& cur = result.table;

    std::vector<std::size_t> targets;
    std::size_t n_missing = 0;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema.kind(c) == ColumnKind::Text) continue;
        std::size_t m = 0;
        for (std::size_t r = 0; r < n; ++r) m += mask.at(r, c) ? 1 : 0;
        if (m > 0) targets.push_back(c);
        n_missing += m;
    }
    if (n_missing == 0) {
        result.converged = true;
        return result;
    }

    // Predictor width for each column (normalized numeric or one-hot).
    auto width = [&](std::size_t c) -> std::size_t {
        switch (schema.kind(c)) {
        case ColumnKind::Numeric: return 1;
        case ColumnKind::Categorical: return summary[c].vocab.size();
        case ColumnKind::Text: return 0;
        }
        return 0;
    };

    for (std::size_t sweep = 0; sweep < config.max_sweeps; ++sweep) {
        double change_sum = 0.0;
        for (std::size_t target : targets) {
            std::size_t p = 0;
            for (std::size_t c = 0; c < schema.size(); ++c)
                if (c != target) p += width(c);
            Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
            x.setZero();
            for (std::size_t r = 0; r < n; ++r) {
                Eigen::Index col = 0;
                for (std::size_t c = 0; c < schema.size(); ++c) {
                    if (c == target || schema.kind(c) == ColumnKind::Text) continue;
                    if (schema.kind(c) == ColumnKind::Numeric) {
                        x(static_cast<Eigen::Index>(r), col) = summary[c].normalize(cur.number(r, c));
                    } else {
                        const std::size_t i = summary[c].index(cur.text(r, c));
                        if (i < summary[c].vocab.size())
                            x(static_cast<Eigen::Index>(r), col + static_cast<Eigen::Index>(i)) = 1.0;
                    }
                    col += static_cast<Eigen::Index>(width(c));
                }
            }

            std::vector<std::size_t> fit_rows, pred_rows;
            for (std::size_t r = 0; r < n; ++r) (mask.at(r, target) ? pred_rows : fit_rows).push_back(r);
            const bool numeric = schema.kind(target) == ColumnKind::Numeric;
            const auto n_out = static_cast<Eigen::Index>(numeric ? 1 : summary[target].vocab.size());
            const auto nf = static_cast<Eigen::Index>(fit_rows.size());

            Eigen::MatrixXd xf(nf, static_cast<Eigen::Index>(p));
            Eigen::MatrixXd yf = Eigen::MatrixXd::Zero(nf, n_out);
            for (Eigen::Index i = 0; i < nf; ++i) {
                const std::size_t r = fit_rows[static_cast<std::size_t>(i)];
                xf.row(i) = x.row(static_cast<Eigen::Index>(r));
                if (numeric) {
                    yf(i, 0) = cur.number(r, target);
                } else {
                    yf(i, static_cast<Eigen::Index>(summary[target].index(cur.text(r, target)))) = 1.0;
                }
            }
            // Centering leaves the intercept unpenalized.
            const Eigen::RowVectorXd x_mean = xf.colwise().mean();
            const Eigen::RowVectorXd y_mean = yf.colwise().mean();
            Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), n_out);
            if (p > 0) {
                const Eigen::MatrixXd xc = xf.rowwise() - x_mean;
                const Eigen::MatrixXd yc = yf.rowwise() - y_mean;
                Eigen::MatrixXd gram = xc.transpose() * xc;
                gram.diagonal().array() += config.ridge_lambda;
                beta = gram.ldlt().solve(xc.transpose() * yc);
            }

            for (std::size_t r : pred_rows) {
                Eigen::RowVectorXd pred = y_mean;
                if (p > 0) pred += (x.row(static_cast<Eigen::Index>(r)) - x_mean) * beta;
                if (numeric) {
                    const double old = cur.number(r, target);
                    const double now = pred(0);
                    const double range = summary[target].max - summary[target].min;
                    change_sum += std::abs(now - old) / (range > 0.0 ? range : 1.0);
                    cur.set(r, target, now);
                } else {
                    Eigen::Index best = 0;
                    for (Eigen::Index i = 1; i < pred.size(); ++i)
                        if (pred(i) > pred(best)) best = i;
                    const auto& cat = summary[target].vocab[static_cast<std::size_t>(best)];
                    if (cat != cur.text(r, target)) change_sum += 1.0;
                    cur.set(r, target, cat);
                }
            }
        }
        const double change = change_sum / static_cast<double>(n_missing);
        result.changes.push_back(change);
        if (change < config.tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

Table impute(const Table& table, const data::Mask& mask, const BaselineConfig& config) {
    config.validate();
    switch (config.method) {
    case Method::MeanMode: return mean_mode_impute(table, mask);
    case Method::Knn: return knn_impute(table, mask, config.k);
    case Method::IterativeRidge: return iterative_ridge_impute(table, mask, config).table;
    }
    throw std::invalid_argument("unknown baseline method");
}

} // namespace qimpute::baselines
