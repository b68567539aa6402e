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

// qimpute: command-line front end. Every subcommand resolves its settings
// into one key = value config (file first, then flags), computes all outputs
// in memory and only then writes them, so a failed run leaves nothing behind.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qimpute/baselines.hpp"
#include "qimpute/config.hpp"
#include "qimpute/data.hpp"
#include "qimpute/encoding.hpp"
#include "qimpute/error.hpp"
#include "qimpute/eval.hpp"
#include "qimpute/imputer.hpp"
#include "qimpute/rng.hpp"

namespace fs = std::filesystem;
using namespace qimpute;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
    bool verbose = false;
    std::optional<std::size_t> threads;
};

/// Flag values keyed by config key; only flags the user actually passed.
using Overrides = std::map<std::string, std::string>;

KeyValueConfig resolve(const Globals& g, const Overrides& flags) {
    KeyValueConfig cfg = g.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(g.config);
    if (g.seed) cfg.set("seed", std::to_string(*g.seed));
    if (g.threads) cfg.set("threads", std::to_string(*g.threads));
    if (!g.out.empty()) cfg.set("out", g.out);
    for (const auto& [k, v] : flags) cfg.set(k, v);
    return cfg;
}

fs::path require_out(const KeyValueConfig& cfg) {
    const auto out = cfg.get("out");
    if (!out || out->empty()) throw ParameterError("missing required option --out");
    return *out;
}

fs::path require_path(const KeyValueConfig& cfg, const std::string& key, const std::string& flag) {
    const auto v = cfg.get(key);
    if (!v || v->empty()) throw ParameterError("missing required option " + flag);
    return *v;
}

/// Staged outputs: written to temporaries, renamed into place together.
class Outputs {
  public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) {
        files_.emplace_back(name, std::move(content));
    }

    void commit() const {
        fs::create_directories(dir_);
        std::vector<fs::path> staged;
        try {
            for (const auto& [name, content] : files_) {
                const fs::path tmp = dir_ / (name + ".tmp");
                std::ofstream f(tmp, std::ios::binary);
                if (!f) throw LoadError("cannot write '" + tmp.string() + "'");
                f << content;
                f.close();
                if (!f) throw LoadError("write failed for '" + tmp.string() + "'");
                staged.push_back(tmp);
            }
        } catch (...) {
            for (const auto& p : staged) fs::remove(p);
            throw;
        }
        for (std::size_t i = 0; i < files_.size(); ++i)
            fs::rename(staged[i], dir_ / files_[i].first);
    }

  private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw LoadError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

encoding::TextEmbeddings load_text(const KeyValueConfig& cfg) {
    const auto p = cfg.get_string("dataset.text_embeddings", "");
    return p.empty() ? encoding::TextEmbeddings{} : encoding::TextEmbeddings::load_precomputed(p);
}

std::uint64_t seed_of(const KeyValueConfig& cfg) { return cfg.get_uint("seed", 1); }

void log(bool verbose, const std::string& msg) {
    if (verbose) std::cerr << "qimpute: " << msg << '\n';
}

// ---------------------------------------------------------------------------

void cmd_datagen(const KeyValueConfig& cfg, bool verbose) {
    const auto out = require_out(cfg);
    const std::size_t rows = cfg.get_uint("dataset.rows", 1000);
    const std::uint64_t seed = seed_of(cfg);
    const auto ds = data::synth_healthcare_generate(rows, stream_seed(seed, "datagen"));
    Outputs o(out);
    o.add("data.csv", data::format_csv(ds.working));
    o.add("truth.csv", data::format_csv(ds.truth));
    o.add("schema.txt", data::format_schema(ds.working.schema()));
    o.commit();
    log(verbose, "datagen wrote " + std::to_string(rows) + " rows to " + out.string());
}

void cmd_mask(const KeyValueConfig& cfg, bool verbose) {
    const auto out = require_out(cfg);
    const auto schema = data::read_schema(require_path(cfg, "dataset.schema", "--schema"));
    const auto table = data::load_csv(require_path(cfg, "dataset.data", "--data"), schema);
    const double rate = cfg.get_double("mask.rate", 0.2);
    const auto mask = data::inject_mcar(table, rate, stream_seed(seed_of(cfg), "mask"));
    const auto masked = data::apply_mask(table, mask);

    // save_mask_csv writes to a path; stage through a scratch file.
    const fs::path scratch = fs::temp_directory_path() /
                             ("qimpute-mask-" + std::to_string(mask.hash()) + ".csv");
    data::save_mask_csv(mask, schema, scratch);
    std::string mask_csv = read_file(scratch);
    fs::remove(scratch);

    Outputs o(out);
    o.add("masked.csv", data::format_csv(masked));
    o.add("mask.csv", std::move(mask_csv));
    o.commit();
    log(verbose, "mask covered " + std::to_string(mask.count()) + " cells");
}

eval::ImputerSettings imputer_settings(const KeyValueConfig& cfg) {
    // Reuse the experiment parser so train/impute/eval share one key set.
    return eval::ExperimentConfig::from_config(cfg).imputer;
}

void cmd_train(const KeyValueConfig& cfg, bool verbose) {
    const auto out = require_out(cfg);
    const auto schema = data::read_schema(require_path(cfg, "dataset.schema", "--schema"));
    const auto table = data::load_csv(require_path(cfg, "dataset.data", "--data"), schema);
    const auto text = load_text(cfg);
    const auto settings = imputer_settings(cfg);
    const auto variant = encoding::parse_variant(cfg.get_string("imputer.variant", "quantum_iqp"));
    const std::uint64_t seed = seed_of(cfg);

    const auto stats = encoding::fit_preprocessor(table, text);
    encoding::EmbeddingConfig ec{variant, settings.n_qubits, settings.n_layers,
                                 stream_seed(seed, "embedding")};
    const encoding::CellEmbedder embedder(stats, ec);
    const auto encoded =
        encoding::encode_table(table, stats, embedder, text, cfg.get_uint("threads", 1));

    imputer::ModelConfig mc = settings.model;
    mc.variant = variant;
    mc.embed_dim = settings.n_qubits;
    imputer::TrainConfig tc = settings.train;
    tc.seed = seed;
    auto result = imputer::train(table, stats, encoded, mc, tc);

    std::string loss_csv = "epoch,loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, result.epoch_loss[e]);
        loss_csv += buf;
        log(verbose, "epoch " + std::to_string(e + 1) + " loss " + std::to_string(result.epoch_loss[e]));
    }

    const imputer::Checkpoint ckpt{mc, ec, schema, stats, std::move(result.params)};
    const fs::path scratch = fs::temp_directory_path() /
                             ("qimpute-ckpt-" + std::to_string(seed) + "-" +
                              std::to_string(data::table_hash(table)) + ".json");
    imputer::save_checkpoint(ckpt, scratch);
    std::string ckpt_json = read_file(scratch);
    fs::remove(scratch);

    Outputs o(out);
    o.add("checkpoint.json", std::move(ckpt_json));
    o.add("training_loss.csv", std::move(loss_csv));
    o.commit();
}

void cmd_impute(const KeyValueConfig& cfg, bool verbose) {
    const auto out = require_out(cfg);
    const auto schema = data::read_schema(require_path(cfg, "dataset.schema", "--schema"));
    const auto table = data::load_csv(require_path(cfg, "dataset.data", "--data"), schema);
    const std::string method = cfg.get_string("method", "imputer");

    data::Table completed = table;
    if (method == "imputer") {
        const auto ckpt = imputer::load_checkpoint(require_path(cfg, "checkpoint", "--checkpoint"), schema);
        const auto text = load_text(cfg);
        const encoding::CellEmbedder embedder(ckpt.stats, ckpt.embedding);
        const auto encoded = encoding::encode_table(table, ckpt.stats, embedder, text,
                                                    cfg.get_uint("threads", 1));
        if (encoded.unknown_categories > 0)
            log(verbose, std::to_string(encoded.unknown_categories) +
                             " categorical cells were outside the fitted vocabulary");
        completed = imputer::impute_table(table, ckpt.params, ckpt.stats, encoded);
    } else {
        auto bc = eval::ExperimentConfig::from_config(cfg).baseline;
        bc.method = baselines::parse_method(method);
        completed = baselines::impute(table, data::native_mask(table), bc);
    }
    Outputs o(out);
    o.add("imputed.csv", data::format_csv(completed));
    o.commit();
    log(verbose, "imputed " + std::to_string(data::native_mask(table).count()) + " cells");
}

void finish_report(const eval::MetricReport& report, const KeyValueConfig& cfg) {
    const auto out = require_out(cfg);
    Outputs o(out);
    o.add("report.json", eval::report_json(report));
    o.add("timings.json", eval::timings_json(report));
    o.commit();
    eval::print_report(report, std::cout);
}

void cmd_eval(const KeyValueConfig& cfg, bool) {
    require_out(cfg);
    finish_report(eval::run_experiment(eval::ExperimentConfig::from_config(cfg)), cfg);
}

void cmd_ablate(const KeyValueConfig& cfg, bool) {
    require_out(cfg);
    finish_report(eval::ablation_suite(eval::ExperimentConfig::from_config(cfg)), cfg);
}

void cmd_export(const KeyValueConfig& cfg, bool verbose) {
    const auto out = require_out(cfg);
    const auto schema = data::read_schema(require_path(cfg, "dataset.schema", "--schema"));
    const auto table = data::load_csv(require_path(cfg, "dataset.data", "--data"), schema);
    const auto text = load_text(cfg);
    const std::string label = require_path(cfg, "export.label", "--label").string();
    const std::string mode_s = cfg.get_string("export.mode", "row-mean");
    eval::ExportMode mode;
    if (mode_s == "row-mean") mode = eval::ExportMode::RowMean;
    else if (mode_s == "cell") mode = eval::ExportMode::Cell;
    else throw ParameterError("unknown --mode '" + mode_s + "' (expected cell or row-mean)");

    std::optional<imputer::Checkpoint> ckpt;
    if (const auto p = cfg.get("checkpoint"); p && !p->empty())
        ckpt = imputer::load_checkpoint(*p, schema);

    encoding::PreprocessStats stats;
    encoding::EmbeddingConfig ec;
    if (ckpt) {
        stats = ckpt->stats;
        ec = ckpt->embedding;
    } else {
        const auto settings = imputer_settings(cfg);
        stats = encoding::fit_preprocessor(table, text);
        ec = {encoding::parse_variant(cfg.get_string("imputer.variant", "quantum_iqp")),
              settings.n_qubits, settings.n_layers, stream_seed(seed_of(cfg), "embedding")};
        if (ec.variant == encoding::EmbedderVariant::ClassicalMlp)
            throw ParameterError("classical_mlp embeddings need trained weights: pass --checkpoint");
    }
    const encoding::CellEmbedder embedder(stats, ec);
    const fs::path scratch = fs::temp_directory_path() /
                             ("qimpute-export-" + std::to_string(data::table_hash(table)) + ".csv");
    eval::export_embeddings(table, stats, embedder, text, label, mode, scratch,
                            ckpt ? &ckpt->params : nullptr);
    std::string csv = read_file(scratch);
    fs::remove(scratch);
    Outputs o(out);
    o.add("embeddings.csv", std::move(csv));
    o.commit();
    log(verbose, "exported " + std::string(encoding::to_string(ec.variant)) + " embeddings");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qimpute: quantum-embedding imputation pipeline"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Globals g;
    std::uint64_t seed_value = 0;
    std::size_t threads_value = 1;
    auto* seed_opt = app.add_option("--seed", seed_value, "Master seed")->check(CLI::NonNegativeNumber);
    app.add_option("--config", g.config, "key = value config file");
    app.add_option("--out", g.out, "Output directory");
    app.add_flag("--verbose", g.verbose, "Progress on stderr");
    auto* threads_opt =
        app.add_option("--threads", threads_value, "Worker threads for encoding")->check(CLI::PositiveNumber);
    // Globals may also follow the subcommand.
    app.fallthrough();

    Overrides flags;
    auto keyed = [&flags](CLI::App* sub, const std::string& flag, const std::string& key,
                          const std::string& help) {
        sub->add_option_function<std::string>(
            flag, [&flags, key](const std::string& v) { flags[key] = v; }, help);
    };

    auto* datagen = app.add_subcommand("datagen", "Generate the synthetic healthcare dataset");
    keyed(datagen, "--rows", "dataset.rows", "Row count (default 1000)");

    auto* mask = app.add_subcommand("mask", "Inject MCAR missingness into a CSV");
    keyed(mask, "--data", "dataset.data", "Input CSV");
    keyed(mask, "--schema", "dataset.schema", "Schema file");
    keyed(mask, "--rate", "mask.rate", "MCAR rate (default 0.2)");

    auto data_flags = [&](CLI::App* sub) {
        keyed(sub, "--data", "dataset.data", "Input CSV");
        keyed(sub, "--schema", "dataset.schema", "Schema file");
        keyed(sub, "--text-embeddings", "dataset.text_embeddings", "Precomputed text embeddings CSV");
    };

    auto train_flags = [&](CLI::App* sub) {
        keyed(sub, "--epochs", "train.epochs", "Training epochs");
        keyed(sub, "--lr", "train.lr", "Adam learning rate");
    };

    auto* train = app.add_subcommand("train", "Train the masked-transformer imputer");
    data_flags(train);
    keyed(train, "--variant", "imputer.variant", "quantum_iqp | classical_mlp | random_projection");
    train_flags(train);

    auto* impute = app.add_subcommand("impute", "Fill missing cells");
    data_flags(impute);
    keyed(impute, "--checkpoint", "checkpoint", "Checkpoint from train");
    keyed(impute, "--method", "method", "imputer (default) | mean_mode | knn | iterative_ridge");

    auto* eval_cmd = app.add_subcommand("eval", "Run the benchmark protocol and write a report");
    keyed(eval_cmd, "--methods", "methods", "Comma-separated methods");
    keyed(eval_cmd, "--seeds", "seeds", "Comma-separated seeds");
    keyed(eval_cmd, "--rows", "dataset.rows", "Synthetic row count");
    keyed(eval_cmd, "--source", "dataset.source", "synthetic (default) | csv");
    data_flags(eval_cmd);
    keyed(eval_cmd, "--truth", "dataset.truth", "Truth sidecar CSV (csv source)");
    keyed(eval_cmd, "--rate", "mask.rate", "MCAR rate (default 0.2)");
    train_flags(eval_cmd);

    auto* ablate = app.add_subcommand("ablate", "Compare the three embedder variants");
    keyed(ablate, "--seeds", "seeds", "Comma-separated seeds");
    keyed(ablate, "--rows", "dataset.rows", "Synthetic row count");
    keyed(ablate, "--rate", "mask.rate", "MCAR rate (default 0.2)");
    train_flags(ablate);

    auto* exp = app.add_subcommand("export-embeddings", "Write cell embeddings as CSV");
    data_flags(exp);
    keyed(exp, "--label", "export.label", "Categorical label column");
    keyed(exp, "--mode", "export.mode", "cell | row-mean (default)");
    keyed(exp, "--variant", "imputer.variant", "Embedder variant");
    keyed(exp, "--checkpoint", "checkpoint", "Checkpoint (required for classical_mlp)");

    std::string stage = "cli";
    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp&) {
            std::cout << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            std::cout << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            std::cerr << "error: cli: " << e.what() << '\n';
            return 2;
        }
        if (*seed_opt) g.seed = seed_value;
        if (*threads_opt) g.threads = threads_value;

        KeyValueConfig cfg = resolve(g, flags);
        const auto* sub = app.get_subcommands().front();
        stage = sub->get_name();
        const bool v = g.verbose || cfg.get_string("verbose", "false") == "true";
        if (stage == "datagen") cmd_datagen(cfg, v);
        else if (stage == "mask") cmd_mask(cfg, v);
        else if (stage == "train") cmd_train(cfg, v);
        else if (stage == "impute") cmd_impute(cfg, v);
        else if (stage == "eval") cmd_eval(cfg, v);
        else if (stage == "ablate") cmd_ablate(cfg, v);
        else cmd_export(cfg, v);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (auto& ch : msg)
            if (ch == '\n') ch = ' ';
        std::cerr << "error: " << stage << ": " << msg << '\n';
        return 1;
    }
    return 0;
}
