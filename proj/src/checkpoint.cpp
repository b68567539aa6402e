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
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qimpute/error.hpp"
#include "qimpute/imputer.hpp"

namespace qimpute::imputer {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormat = "qimpute-checkpoint";
constexpr int kVersion = 1;

json model_to_json(const ModelConfig& c) {
    return {{"variant", encoding::to_string(c.variant)},
            {"embed_dim", c.embed_dim},
            {"d_model", c.d_model},
            {"n_blocks", c.n_blocks},
            {"n_heads", c.n_heads},
            {"ffn_dim", c.ffn_dim},
            {"mlp_hidden", c.mlp_hidden},
            {"ln_eps", c.ln_eps}};
}

ModelConfig model_from_json(const json& j) {
    ModelConfig c;
    c.variant = encoding::parse_variant(j.at("variant").get<std::string>());
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.d_model = j.at("d_model").get<std::size_t>();
    c.n_blocks = j.at("n_blocks").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
    c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
    c.ln_eps = j.at("ln_eps").get<double>();
    return c;
}

json stats_to_json(const encoding::PreprocessStats& stats) {
    json cols = json::array();
    for (const auto& cs : stats.columns) {
        json j = {{"kind", data::to_string(cs.kind)}};
        switch (cs.kind) {
        case data::ColumnKind::Numeric:
            j["min"] = cs.min;
            j["max"] = cs.max;
            j["degenerate"] = cs.degenerate;
            break;
        case data::ColumnKind::Categorical:
            j["vocabulary"] = cs.vocabulary;
            break;
        case data::ColumnKind::Text:
            j["text_dim"] = cs.text_dim;
            j["text_min"] = cs.text_min;
            j["text_max"] = cs.text_max;
            break;
        }
        cols.push_back(std::move(j));
    }
    return cols;
}

encoding::PreprocessStats stats_from_json(const json& j) {
    encoding::PreprocessStats stats;
    for (const auto& cj : j) {
        encoding::ColumnStats cs;
        cs.kind = data::parse_column_kind(cj.at("kind").get<std::string>());
        switch (cs.kind) {
        case data::ColumnKind::Numeric:
            cs.min = cj.at("min").get<double>();
            cs.max = cj.at("max").get<double>();
            cs.degenerate = cj.at("degenerate").get<bool>();
            break;
        case data::ColumnKind::Categorical:
            cs.vocabulary = cj.at("vocabulary").get<std::vector<std::string>>();
            break;
        case data::ColumnKind::Text:
            cs.text_dim = cj.at("text_dim").get<std::size_t>();
            cs.text_min = cj.at("text_min").get<std::vector<double>>();
            cs.text_max = cj.at("text_max").get<std::vector<double>>();
            break;
        }
        stats.columns.push_back(std::move(cs));
    }
    return stats;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    json doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["model"] = model_to_json(ckpt.model);
    doc["embedding"] = {{"variant", encoding::to_string(ckpt.embedding.variant)},
                        {"n_qubits", ckpt.embedding.n_qubits},
                        {"n_layers", ckpt.embedding.n_layers},
                        {"seed", ckpt.embedding.seed}};
    doc["schema"] = data::format_schema(ckpt.schema);
    doc["stats"] = stats_to_json(ckpt.stats);
    json tensors = json::array();
    for (const auto& t : ckpt.params.tensors().tensors()) {
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(t.value.size()));
        for (Eigen::Index i = 0; i < t.value.rows(); ++i)
            for (Eigen::Index k = 0; k < t.value.cols(); ++k) values.push_back(t.value(i, k));
        tensors.push_back({{"name", t.name},
                           {"shape", {t.value.rows(), t.value.cols()}},
                           {"values", std::move(values)}});
    }
    doc["tensors"] = std::move(tensors);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << doc.dump(1) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const data::DatasetSchema& expected_schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kFormat)
            throw LoadError(path.string() + ": not a qimpute checkpoint");
        if (doc.at("version").get<int>() != kVersion)
            throw LoadError(path.string() + ": unsupported checkpoint version");
        data::DatasetSchema schema = data::parse_schema(doc.at("schema").get<std::string>());
        if (!(schema == expected_schema))
            throw LoadError(path.string() + ": checkpoint schema does not match the data schema");
        const ModelConfig model = model_from_json(doc.at("model"));
        encoding::EmbeddingConfig emb;
        const auto& ej = doc.at("embedding");
        emb.variant = encoding::parse_variant(ej.at("variant").get<std::string>());
        emb.n_qubits = ej.at("n_qubits").get<std::size_t>();
        emb.n_layers = ej.at("n_layers").get<std::size_t>();
        emb.seed = ej.at("seed").get<std::uint64_t>();
        encoding::PreprocessStats stats = stats_from_json(doc.at("stats"));
        if (stats.columns.size() != schema.size())
            throw LoadError(path.string() + ": stats do not cover every column");

        ModelParams params = ModelParams::zeros(model, column_info(stats));
        auto& P = params.tensors();
        const auto& tj = doc.at("tensors");
        if (tj.size() != P.size())
            throw LoadError(path.string() + ": expected " + std::to_string(P.size()) +
                            " tensors, found " + std::to_string(tj.size()));
        for (std::size_t i = 0; i < P.size(); ++i) {
            const auto& t = tj[i];
            if (t.at("name").get<std::string>() != P.name(i))
                throw LoadError(path.string() + ": tensor " + std::to_string(i) + " is '" +
                                t.at("name").get<std::string>() + "', expected '" + P.name(i) + "'");
            const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
            if (shape.size() != 2 || shape[0] != P[i].rows() || shape[1] != P[i].cols())
                throw LoadError(path.string() + ": tensor '" + P.name(i) + "' has wrong shape");
            const auto values = t.at("values").get<std::vector<double>>();
            if (values.size() != static_cast<std::size_t>(P[i].size()))
                throw LoadError(path.string() + ": tensor '" + P.name(i) + "' has wrong length");
            std::size_t k = 0;
            for (Eigen::Index r = 0; r < P[i].rows(); ++r)
                for (Eigen::Index c = 0; c < P[i].cols(); ++c) P[i](r, c) = values[k++];
        }
        return {model, emb, std::move(schema), std::move(stats), std::move(params)};
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

} // namespace qimpute::imputer
